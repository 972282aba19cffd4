#include "aberrate/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "aberrate/analysis.hpp"
#include "aberrate/augment.hpp"
#include "aberrate/config.hpp"
#include "aberrate/corrupt.hpp"
#include "aberrate/error.hpp"
#include "aberrate/imageio.hpp"
#include "aberrate/lensdb.hpp"
#include "aberrate/mtf.hpp"
#include "aberrate/psfpack.hpp"
#include "aberrate/severity.hpp"

namespace aberrate::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw Error("io", "cannot write " + path.string());
}

json read_json_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("io", "cannot read " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error("format", path.string() + ": " + e.what());
  }
}

// Text goes to `out` for "-" and to the file otherwise.
void emit(const std::string& target, const std::string& text, std::ostream& out) {
  if (target == "-") {
    out << text;
  } else {
    write_text(target, text);
  }
}

std::vector<NamedKernel> bank_candidates(const fs::path& dir, const std::string& family, int severity) {
  const auto bank = severity::read_bank(dir);
  const auto fam = severity::family_by_name(family).family;
  std::vector<NamedKernel> out;
  for (int m = 0; m < 2; ++m) {
    const auto& e = bank.at(fam, severity, m);
    out.push_back({severity::bank_file_name(fam, severity, m).substr(0, severity::bank_file_name(fam, severity, m).size() - 5),
                   e.kernel});
  }
  return out;
}

fs::path find_lens(const fs::path& root, const std::string& id) {
  if (!fs::is_directory(root)) throw Error("missing_source", "lens directory " + root.string() + " not found");
  std::vector<fs::path> dirs;
  for (const auto& entry : fs::directory_iterator(root))
    if (entry.is_directory() && fs::exists(entry.path() / "meta.json")) dirs.push_back(entry.path());
  std::sort(dirs.begin(), dirs.end());
  for (const auto& d : dirs)
    if (read_json_file(d / "meta.json").value("id", std::string()) == id) return d;
  throw Error("missing_source", "lens '" + id + "' not found under " + root.string());
}

std::vector<NamedKernel> lens_candidates(const fs::path& root, const std::string& id, double field) {
  const auto source = lens::load_bundle(find_lens(root, id));
  if (!source.processed) throw Error("missing_source", "lens '" + id + "' has not been ingested (run lens-ingest)");
  std::vector<NamedKernel> out;
  for (const auto& key : lens::keys_at_field(lens::field_percent(field))) {
    auto it = source.psfs.find(key);
    if (it == source.psfs.end()) throw Error("missing_source", "lens '" + id + "' lacks " + lens::key_name(key));
    out.push_back({id + "/" + lens::key_name(key), normalize(it->second)});
  }
  return out;
}

json terms_json(const severity::ObjectiveTerms& t) {
  return {{"mtf50", t.mtf50}, {"mtf50_rel_error", t.mtf50_rel}, {"auc_rel_error", t.auc_rel},
          {"ssim", t.ssim},   {"psnr_db", std::isinf(t.psnr_db) ? json(nullptr) : json(t.psnr_db)},
          {"objective", t.total}};
}

struct Options {
  std::string config_path;
  bool json_errors = false;
  int workers = 0;

  // gen-bank
  std::string bank_dir;
  // gen-kernel
  std::string coeffs_path;
  bool baseline = false;
  std::vector<std::string> terms;
  std::string disk;
  bool align = false;
  int crop = 0;
  std::string output;
  // mtf
  std::string kernel;
  std::string channel = "lum";
  int fft_size = -1;
  std::string csv = "-";
  std::string summary = "-";
  // match
  std::string family;
  int severity = 0;
  // lens
  std::vector<std::string> lens_dirs;
  std::string lens_root;
  int count = 0;
  double field = 0.0;
  // corrupt
  std::string input;
  std::string task = "cls";
  std::string source;
  std::uint64_t seed = 0;
  std::string boundary;
  double jpeg_q = -1.0;
  // augment-preview
  double alpha = -1.0;
  int limit = 0;
  // analyze
  std::string results;
  std::string clean;
  std::string group = "overall";
  std::string kendall_severity;
  std::string metric = "accuracy";
};

int cmd_gen_bank(const ToolConfig& cfg, const Options& o, std::ostream& out) {
  const fs::path dir = o.bank_dir.empty() ? cfg.bank_dir : fs::path(o.bank_dir);
  auto bank_cfg = cfg.bank;
  if (o.workers > 0) bank_cfg.workers = o.workers;
  auto bank = severity::build_severity_bank(bank_cfg);
  json echo = cfg.raw;
  echo.erase("workers");
  severity::write_bank(bank, dir, echo);
  out << "wrote " << bank.entries.size() << " kernels to " << dir.string() << '\n';
  return kExitOk;
}

int cmd_gen_kernel(const ToolConfig& cfg, const Options& o, std::ostream& out) {
  Psf psf;
  if (!o.disk.empty()) {
    if (o.baseline || !o.coeffs_path.empty() || !o.terms.empty()) {
      throw Error("usage", "--disk cannot be combined with coefficient options");
    }
    severity::DiskKernelSpec spec;
    const auto colon = o.disk.find(':');
    try {
      spec.radius = std::stod(o.disk.substr(0, colon));
      if (colon != std::string::npos) spec.alias_sigma = std::stod(o.disk.substr(colon + 1));
    } catch (const std::logic_error&) {
      throw Error("usage", "--disk expects RADIUS[:SIGMA]");
    }
    psf = severity::disk_kernel(spec);
  } else {
    CoefficientSet coeffs = o.baseline ? baseline_chromatic_coeffs() : CoefficientSet{};
    if (!o.coeffs_path.empty()) {
      const auto extra = CoefficientSet::from_json(read_json_file(o.coeffs_path));
      for (int c = 0; c < kRgb; ++c)
        for (const auto& [fringe, v] : extra.channel(c)) coeffs.set(c, fringe, coeffs.get(c, fringe) + v);
    }
    for (const auto& t : o.terms) {
      const auto colon = t.find(':');
      if (colon == std::string::npos) throw Error("usage", "--term expects FRINGE:WAVES");
      try {
        coeffs.add_all(std::stoi(t.substr(0, colon)), std::stod(t.substr(colon + 1)));
      } catch (const std::logic_error&) {
        throw Error("usage", "--term expects FRINGE:WAVES");
      }
    }
    auto synthesis = cfg.synthesis;
    if (o.crop > 0) synthesis.crop_size = o.crop;
    psf = synthesize_psf(coeffs, cfg.wavelengths, synthesis);
  }
  if (o.align) psf = align_com(psf);
  psfpack::write(o.output, psf);
  out << "wrote " << psf.height() << "x" << psf.width() << "x" << psf.kernel.channels() << " kernel to " << o.output
      << '\n';
  return kExitOk;
}

int cmd_mtf(const ToolConfig& cfg, const Options& o, std::ostream& out) {
  const Psf psf = psfpack::read(o.kernel);
  static const std::map<std::string, int> channels{{"lum", -1}, {"r", 0}, {"g", 1}, {"b", 2}};
  auto it = channels.find(o.channel);
  if (it == channels.end()) throw Error("usage", "--channel must be lum|r|g|b");
  const int fft_size = o.fft_size >= 0 ? o.fft_size : cfg.mtf_fft_size;
  const auto result = mtf::mtf_from_psf(psf, it->second, fft_size);
  emit(o.csv, mtf::to_csv(result), out);
  auto summary = mtf::to_json(mtf::summarize(result));
  summary["kernel"] = fs::path(o.kernel).filename().string();
  summary["channel"] = o.channel;
  emit(o.summary, summary.dump(2) + "\n", out);
  return kExitOk;
}

int cmd_match(const ToolConfig& cfg, const Options& o, std::ostream& out) {
  if (o.severity < 1 || o.severity > severity::kSeverities) throw Error("usage", "--severity must be 1..5");
  const auto& family = severity::family_by_name(o.family);
  const Psf baseline = severity::disk_kernel(cfg.bank.baselines[static_cast<std::size_t>(o.severity - 1)]);
  const auto result = severity::match_kernel(baseline, family, baseline_chromatic_coeffs(), cfg.bank.objective,
                                             cfg.bank.settings);
  json j = {{"family", family.name}, {"severity", o.severity}, {"objective", result.objective},
            {"trace", result.trace}, {"no_progress", result.no_progress}, {"evaluations", result.evaluations},
            {"within_tolerance", true}};
  for (int m = 0; m < 2; ++m) {
    const auto& mm = result.members[static_cast<std::size_t>(m)];
    j["members"].push_back({{"pair_member", m}, {"fringe", mm.fringe}, {"initial_offset_waves", mm.initial_offset},
                            {"offset_waves", mm.offset}, {"terms", terms_json(mm.terms)},
                            {"coefficients", result.coefficients[static_cast<std::size_t>(m)].to_json()}});
    if (mm.terms.mtf50_rel > cfg.bank.settings.tolerance) j["within_tolerance"] = false;
    if (!o.output.empty()) {
      const auto kernel = severity::footprint_kernel(result.coefficients[static_cast<std::size_t>(m)], cfg.bank.settings);
      psfpack::write(fs::path(o.output) / severity::bank_file_name(family.family, o.severity, m), kernel);
    }
  }
  out << j.dump(2) << '\n';
  return kExitOk;
}

json record_json(const lens::LensRecord& r) {
  json fields = json::object();
  for (const auto& [field, v] : r.field_mtf50) fields[std::to_string(field)] = v;
  json mtf20 = json::object();
  for (const auto& [field, v] : r.pitch.field_mtf20) mtf20[std::to_string(field)] = v;
  json kernels = json::object();
  for (const auto& [key, psf] : r.processed) kernels[lens::key_name(key)] = {psf.height(), psf.width()};
  return {{"meta", r.meta.to_json()},
          {"pitch_um", r.pitch.pitch_um},
          {"nyquist_cycles_per_um", r.pitch.nyquist_cycles_per_um},
          {"outside_sensor_range", r.pitch.outside_sensor_range},
          {"field_mtf20_cycles_per_um", mtf20},
          {"field_mtf50_cycles_per_px", fields},
          {"quality", r.quality},
          {"kernels", kernels}};
}

int cmd_lens_ingest(const ToolConfig& cfg, const Options& o, std::ostream& out, std::ostream& err) {
  if (o.lens_dirs.size() != 1) throw Error("usage", "lens-ingest takes exactly one --lens");
  const auto record = lens::ingest_lens(lens::load_bundle(o.lens_dirs.front()), cfg.lens);
  lens::write_bundle(record, o.output);
  write_text(fs::path(o.output) / "record.json", record_json(record).dump(2) + "\n");
  if (record.pitch.outside_sensor_range) {
    err << "warning: derived pixel pitch " << record.pitch.pitch_um << " um is outside [1, 20] um\n";
  }
  out << record.meta.id << ": pitch " << record.pitch.pitch_um << " um, quality " << record.quality << '\n';
  return kExitOk;
}

int cmd_lens_select(const ToolConfig& cfg, const Options& o, std::ostream& out) {
  const fs::path root = o.lens_root.empty() ? cfg.lens_dir : fs::path(o.lens_root);
  if (!fs::is_directory(root)) throw Error("io", "lens directory " + root.string() + " not found");
  std::vector<fs::path> dirs;
  for (const auto& entry : fs::directory_iterator(root))
    if (entry.is_directory() && fs::exists(entry.path() / "meta.json")) dirs.push_back(entry.path());
  std::sort(dirs.begin(), dirs.end());
  std::vector<lens::QualityEntry> entries;
  for (const auto& d : dirs) {
    const auto meta = read_json_file(d / "meta.json");
    if (!meta.value("processed", false) || !meta.contains("quality")) {
      throw Error("missing_source", d.string() + " has not been ingested (run lens-ingest)");
    }
    entries.push_back({meta.at("id").get<std::string>(), meta.at("quality").get<double>()});
  }
  emit(o.output.empty() ? "-" : o.output, lens::selection_csv(lens::select_subset(entries, o.count)), out);
  return kExitOk;
}

int cmd_lens_project(const ToolConfig&, const Options& o, std::ostream& out) {
  const int percent = lens::field_percent(o.field);
  std::ostringstream csv;
  csv << "id,field,azimuth,defocus_spherical,astigmatism,coma,magnitude\n" << std::setprecision(10);
  for (const auto& dir : o.lens_dirs) {
    const auto source = lens::load_bundle(dir);
    const auto v = lens::project_category(source.coefficients, percent);
    csv << source.meta.id << ',' << o.field << ',' << lens::azimuth_label(v.azimuth) << ',' << v.direction[0] << ','
        << v.direction[1] << ',' << v.direction[2] << ',' << v.magnitude << '\n';
  }
  emit(o.output.empty() ? "-" : o.output, csv.str(), out);
  return kExitOk;
}

int cmd_corrupt(const ToolConfig& cfg, const Options& o, std::ostream& out) {
  corrupt::CorruptionJob job;
  job.input_root = o.input;
  job.output_root = o.output;
  job.task = corrupt::parse_task(o.task);
  job.source = corrupt::KernelSource::parse(o.source);
  job.seed = o.seed;
  job.boundary = o.boundary.empty() ? cfg.corrupt.boundary : parse_boundary(o.boundary);
  job.jpeg_quality = o.jpeg_q > 0.0 ? o.jpeg_q : cfg.corrupt.jpeg_quality;
  if (o.jpeg_q == 0.0) throw Error("usage", "--jpeg-q must be in (0, 1]");
  job.resize_short_side = cfg.corrupt.resize_short_side;
  job.crop_size = cfg.corrupt.crop_size;
  job.workers = o.workers > 0 ? o.workers : cfg.workers;
  job.validate();

  std::vector<NamedKernel> candidates;
  if (job.source.kind == corrupt::KernelSource::Kind::bank) {
    candidates = bank_candidates(o.bank_dir.empty() ? cfg.bank_dir : fs::path(o.bank_dir), job.source.name,
                                 job.source.severity);
  } else {
    candidates = lens_candidates(o.lens_root.empty() ? cfg.lens_dir : fs::path(o.lens_root), job.source.name,
                                 job.source.field);
  }
  const auto manifest = corrupt::corrupt_dataset(job, candidates);
  corrupt::write_manifest(manifest, job.output_root / "manifest.json");
  std::size_t failed = 0;
  for (const auto& r : manifest.rows) failed += r.ok ? 0 : 1;
  out << "processed " << manifest.rows.size() << " images (" << failed << " failed); manifest at "
      << (job.output_root / "manifest.json").string() << '\n';
  return kExitOk;
}

int cmd_augment_preview(const ToolConfig& cfg, const Options& o, std::ostream& out) {
  augment::AugmentConfig ac;
  ac.alpha = o.alpha > 0.0 ? o.alpha : cfg.augment.alpha;
  ac.mean = cfg.augment.mean;
  ac.std = cfg.augment.std;
  ac.seed = o.seed;
  ac.boundary = cfg.augment.boundary;
  const int max_severity = o.severity > 0 ? o.severity : cfg.augment.max_severity;
  const auto bank = severity::read_bank(o.bank_dir.empty() ? cfg.bank_dir : fs::path(o.bank_dir));
  for (const auto& e : bank.entries) {
    if (e.severity > max_severity) continue;
    const auto name = severity::bank_file_name(e.family, e.severity, e.pair_member);
    ac.bank.push_back({name.substr(0, name.size() - 5), e.kernel});
  }
  ac.validate();

  const auto files = corrupt::list_images(o.input);
  const std::size_t n = o.limit > 0 ? std::min<std::size_t>(files.size(), static_cast<std::size_t>(o.limit)) : files.size();
  json draws = json::array();
  for (std::size_t i = 0; i < n; ++i) {
    Image image = imageio::read_rgb(fs::path(o.input) / files[i]);
    for (double& v : image.data()) v /= 255.0;
    const auto batch = augment::augment_batch({image}, ac, i);
    Image preview = batch.blended.front();
    for (double& v : preview.data()) v *= 255.0;
    auto rel = files[i];
    rel.replace_extension(".png");
    imageio::write_png(fs::path(o.output) / rel, imageio::quantize_rgb(preview), preview.height(), preview.width());
    const auto& d = batch.draws.front();
    draws.push_back({{"path", files[i].generic_string()}, {"preview", rel.generic_string()},
                     {"kernel", ac.bank[static_cast<std::size_t>(d.kernel_index)].id}, {"m", d.m}});
  }
  json report = {{"seed", ac.seed}, {"alpha", ac.alpha}, {"max_severity", max_severity},
                 {"kernels", ac.bank.size()}, {"draws", draws}};
  write_text(fs::path(o.output) / "draws.json", report.dump(2) + "\n");
  out << "wrote " << n << " previews to " << o.output << '\n';
  return kExitOk;
}

std::vector<std::string> split_keys(const std::string& s) {
  std::vector<std::string> keys;
  std::stringstream in(s);
  for (std::string k; std::getline(in, k, ',');)
    if (!k.empty()) keys.push_back(k);
  return keys;
}

int cmd_analyze(const ToolConfig&, const Options& o, std::ostream& out) {
  std::ifstream rin(o.results, std::ios::binary);
  if (!rin) throw Error("io", "cannot read " + o.results);
  const auto results = analysis::read_results_csv(rin);
  const fs::path dir = o.output;
  const auto keys = split_keys(o.group);

  const auto agg = analysis::aggregate(results, keys);
  write_text(dir / "aggregate.csv", analysis::to_csv(agg, keys));
  write_text(dir / "aggregate.json", analysis::to_json(agg).dump(2) + "\n");
  if (!o.clean.empty()) {
    std::ifstream cin(o.clean, std::ios::binary);
    if (!cin) throw Error("io", "cannot read " + o.clean);
    const auto report = analysis::robustness_delta(results, analysis::read_clean_csv(cin));
    write_text(dir / "deltas.csv", analysis::to_csv(report));
    write_text(dir / "deltas.json", analysis::to_json(report).dump(2) + "\n");
    const auto delta_agg = analysis::aggregate(analysis::delta_rows(report), keys);
    write_text(dir / "delta_aggregate.csv", analysis::to_csv(delta_agg, keys));
    write_text(dir / "delta_aggregate.json", analysis::to_json(delta_agg).dump(2) + "\n");
  }
  if (!o.kendall_severity.empty()) {
    const auto taus = analysis::corruption_rank_correlations(results, o.metric, o.kendall_severity);
    write_text(dir / "kendall.csv", analysis::to_csv(taus));
    write_text(dir / "kendall.json", analysis::to_json(taus).dump(2) + "\n");
  }
  out << "analyzed " << results.size() << " rows into " << dir.string() << '\n';
  return kExitOk;
}

void report_error(std::ostream& err, bool as_json, const std::string& kind, const std::string& message, int code) {
  if (as_json) {
    err << json{{"error", {{"kind", kind}, {"message", message}}}, {"exit_code", code}}.dump() << '\n';
  } else {
    err << "error: " << message << '\n';
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Optical aberration blur kernels: synthesis, severity calibration, dataset corruption and analysis"};
  app.name(args.empty() ? "aberrate" : fs::path(args.front()).filename().string());
  app.require_subcommand(1);
  app.add_option("--config", o.config_path, "JSON config file (ABERRATE_CONFIG takes precedence)");
  app.add_flag("--json", o.json_errors, "Print errors as JSON on stderr");
  app.add_option("--workers", o.workers, "Worker threads (default from config)")->check(CLI::PositiveNumber);

  auto* gen_bank = app.add_subcommand("gen-bank", "Match and write the 40-kernel severity bank");
  gen_bank->add_option("--bank-dir", o.bank_dir, "Output directory (default from config)");

  auto* gen_kernel = app.add_subcommand("gen-kernel", "Synthesize one kernel to a PSFPACK file");
  gen_kernel->add_option("--coeffs", o.coeffs_path, "Coefficient JSON {\"red\":{\"4\":0.1},...}");
  gen_kernel->add_flag("--baseline", o.baseline, "Start from the baseline chromatic wavefront");
  gen_kernel->add_option("--term", o.terms, "FRINGE:WAVES added to every channel (repeatable)");
  gen_kernel->add_option("--disk", o.disk, "Disk kernel RADIUS[:SIGMA] instead of a wavefront");
  gen_kernel->add_flag("--align", o.align, "Centre the kernel's centre of mass");
  gen_kernel->add_option("--crop", o.crop, "Odd output size (default from config)");
  gen_kernel->add_option("--output", o.output, "Output .psfk")->required();

  auto* mtf_cmd = app.add_subcommand("mtf", "MTF slices (CSV) and summary (JSON) of a kernel");
  mtf_cmd->add_option("--kernel", o.kernel, "Input .psfk")->required()->check(CLI::ExistingFile);
  mtf_cmd->add_option("--channel", o.channel, "lum|r|g|b");
  mtf_cmd->add_option("--fft-size", o.fft_size, "FFT length (0 = automatic)");
  mtf_cmd->add_option("--csv", o.csv, "CSV destination ('-' = stdout)");
  mtf_cmd->add_option("--summary", o.summary, "JSON destination ('-' = stdout)");

  auto* match = app.add_subcommand("match", "Match one family/severity against its disk baseline");
  match->add_option("--family", o.family, "astigmatism|coma|defocus_spherical|trefoil")->required();
  match->add_option("--severity", o.severity, "1..5")->required();
  match->add_option("--output", o.output, "Directory for the two matched kernels");

  auto* lens_ingest = app.add_subcommand("lens-ingest", "Process one lens bundle to sensor-pitch kernels");
  lens_ingest->add_option("--lens", o.lens_dirs, "Lens bundle directory")->required()->check(CLI::ExistingDirectory);
  lens_ingest->add_option("--output", o.output, "Output bundle directory")->required();

  auto* lens_select = app.add_subcommand("lens-select", "Quality-spanning subset of ingested lenses");
  lens_select->add_option("--lens-root", o.lens_root, "Directory of ingested bundles (default from config)");
  lens_select->add_option("-n,--count", o.count, "Subset size")->required();
  lens_select->add_option("--output", o.output, "CSV destination (default stdout)");

  auto* lens_project = app.add_subcommand("lens-project", "Aberration-category vectors of lenses at one field");
  lens_project->add_option("--lens", o.lens_dirs, "Lens bundle directory (repeatable)")->required()->check(CLI::ExistingDirectory);
  lens_project->add_option("--field", o.field, "Field height 0, 0.3, 0.5, 0.7 or 0.9")->required();
  lens_project->add_option("--output", o.output, "CSV destination (default stdout)");

  auto* corrupt_cmd = app.add_subcommand("corrupt", "Blur an image dataset reproducibly");
  corrupt_cmd->add_option("--input", o.input, "Input dataset root")->required()->check(CLI::ExistingDirectory);
  corrupt_cmd->add_option("--output", o.output, "Output root")->required();
  corrupt_cmd->add_option("--task", o.task, "cls|det");
  corrupt_cmd->add_option("--source", o.source, "bank:FAMILY:SEV or lens:ID:FIELD")->required();
  corrupt_cmd->add_option("--seed", o.seed, "Master seed");
  corrupt_cmd->add_option("--boundary", o.boundary, "zero|reflect (default from config)");
  corrupt_cmd->add_option("--jpeg-q", o.jpeg_q, "JPEG quality in (0, 1] (default from config)");
  corrupt_cmd->add_option("--bank", o.bank_dir, "Bank directory (default from config)");
  corrupt_cmd->add_option("--lens-root", o.lens_root, "Directory of ingested lenses (default from config)");

  auto* augment_cmd = app.add_subcommand("augment-preview", "Preview the optics augmentation on images");
  augment_cmd->add_option("--bank", o.bank_dir, "Bank directory (default from config)");
  augment_cmd->add_option("--severity", o.severity, "Highest bank severity used (default from config)");
  augment_cmd->add_option("--alpha", o.alpha, "Beta shape (default from config)");
  augment_cmd->add_option("--seed", o.seed, "Seed");
  augment_cmd->add_option("--input", o.input, "Image directory")->required()->check(CLI::ExistingDirectory);
  augment_cmd->add_option("--output", o.output, "Output directory")->required();
  augment_cmd->add_option("--limit", o.limit, "Process at most N images");

  auto* analyze = app.add_subcommand("analyze", "Deltas, averages and rank correlations of evaluation results");
  analyze->add_option("--results", o.results, "CSV model,corruption,severity,metric,value")->required()->check(CLI::ExistingFile);
  analyze->add_option("--clean", o.clean, "CSV model,metric,clean_value")->check(CLI::ExistingFile);
  analyze->add_option("--group", o.group, "Comma-separated keys: model,corruption,severity,field,metric or overall");
  analyze->add_option("--kendall-severity", o.kendall_severity, "Severity (or field) for corruption rank correlations");
  analyze->add_option("--metric", o.metric, "Metric used for rank correlations");
  analyze->add_option("--output", o.output, "Output directory")->required();

  std::vector<std::string> storage = args.empty() ? std::vector<std::string>{"aberrate"} : args;
  std::vector<char*> argv;
  for (auto& s : storage) argv.push_back(s.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    const bool as_json = std::find(storage.begin(), storage.end(), "--json") != storage.end();
    report_error(err, as_json, "usage", e.what(), kExitUsage);
    if (!as_json) err << app.help();
    return kExitUsage;
  }

  try {
    const char* env = std::getenv("ABERRATE_CONFIG");
    const std::string config_path = env && *env ? env : o.config_path;
    const ToolConfig cfg = config_path.empty() ? ToolConfig::defaults() : ToolConfig::load(config_path);
    const auto* sub = app.get_subcommands().front();
    const std::string name = sub->get_name();
    if (name == "gen-bank") return cmd_gen_bank(cfg, o, out);
    if (name == "gen-kernel") return cmd_gen_kernel(cfg, o, out);
    if (name == "mtf") return cmd_mtf(cfg, o, out);
    if (name == "match") return cmd_match(cfg, o, out);
    if (name == "lens-ingest") return cmd_lens_ingest(cfg, o, out, err);
    if (name == "lens-select") return cmd_lens_select(cfg, o, out);
    if (name == "lens-project") return cmd_lens_project(cfg, o, out);
    if (name == "corrupt") return cmd_corrupt(cfg, o, out);
    if (name == "augment-preview") return cmd_augment_preview(cfg, o, out);
    if (name == "analyze") return cmd_analyze(cfg, o, out);
    report_error(err, o.json_errors, "usage", "unknown subcommand " + name, kExitUsage);
    return kExitUsage;
  } catch (const Error& e) {
    const int code = e.kind() == "usage" ? kExitUsage : kExitModuleError;
    report_error(err, o.json_errors, e.kind(), e.what(), code);
    return code;
  } catch (const std::exception& e) {
    report_error(err, o.json_errors, "internal", e.what(), kExitModuleError);
    return kExitModuleError;
  }
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace aberrate::cli
