#include "aberrate/severity.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include "aberrate/convolve.hpp"
#include "aberrate/error.hpp"
#include "aberrate/hashing.hpp"
#include "aberrate/parallel.hpp"
#include "aberrate/psfpack.hpp"
#include "aberrate/quality_metrics.hpp"

namespace aberrate::severity {
namespace {

constexpr std::array<FamilyInfo, 4> kFamilies{{
    {Family::astigmatism, "astigmatism", {5, 6}},
    {Family::coma, "coma", {7, 8}},
    {Family::defocus_spherical, "defocus_spherical", {4, 9}},
    {Family::trefoil, "trefoil", {10, 11}},
}};

std::vector<double> gaussian_taps(int ksize, double sigma) {
  std::vector<double> g(static_cast<std::size_t>(ksize));
  double sum = 0.0;
  for (int i = 0; i < ksize; ++i) {
    const double d = i - (ksize - 1) / 2;
    sum += g[static_cast<std::size_t>(i)] = std::exp(-d * d / (2.0 * sigma * sigma));
  }
  for (auto& v : g) v /= sum;
  return g;
}

// Window of size `size` centred at the kernel centre plus (dy, dx), clamped to the kernel.
Psf window(const Psf& psf, int size, int dy, int dx) {
  const int oy = std::clamp((psf.height() - 1) / 2 - size / 2 + dy, 0, psf.height() - size);
  const int ox = std::clamp((psf.width() - 1) / 2 - size / 2 + dx, 0, psf.width() - size);
  Psf out = psf;
  out.kernel = Image(psf.kernel.channels(), size, size);
  for (int c = 0; c < psf.kernel.channels(); ++c)
    for (int y = 0; y < size; ++y)
      for (int x = 0; x < size; ++x) out.kernel.at(c, y, x) = psf.kernel.at(c, oy + y, ox + x);
  return out;
}

CoefficientSet with_offset(CoefficientSet coeffs, int fringe, double offset) {
  if (offset != 0.0) coeffs.add_all(fringe, offset);
  return coeffs;
}

}  // namespace

Psf disk_kernel(const DiskKernelSpec& spec) {
  if (!(spec.radius >= 0.0) || !(spec.alias_sigma >= 0.0) || !std::isfinite(spec.radius) ||
      !std::isfinite(spec.alias_sigma)) {
    throw Error("range", "disk radius and alias sigma must be finite and non-negative");
  }
  const int half = kFootprint / 2;
  const int ksize = spec.alias_sigma > 0.0 ? (spec.radius <= 8.0 ? 3 : 5) : 1;
  if (std::floor(spec.radius) + ksize / 2 > half) {
    throw Error("range", "disk radius " + std::to_string(spec.radius) + " does not fit the " +
                             std::to_string(kFootprint) + "x" + std::to_string(kFootprint) + " footprint");
  }
  std::vector<double> disk(kFootprint * kFootprint, 0.0);
  for (int y = 0; y < kFootprint; ++y)
    for (int x = 0; x < kFootprint; ++x) {
      const double dy = y - half, dx = x - half;
      if (dy * dy + dx * dx <= spec.radius * spec.radius) disk[y * kFootprint + x] = 1.0;
    }
  if (ksize > 1) {
    const auto g = gaussian_taps(ksize, spec.alias_sigma);
    const int r = ksize / 2;
    std::vector<double> tmp(disk.size(), 0.0);
    for (int y = 0; y < kFootprint; ++y)
      for (int x = 0; x < kFootprint; ++x)
        for (int k = -r; k <= r; ++k)
          if (x + k >= 0 && x + k < kFootprint) tmp[y * kFootprint + x] += g[k + r] * disk[y * kFootprint + x + k];
    std::fill(disk.begin(), disk.end(), 0.0);
    for (int y = 0; y < kFootprint; ++y)
      for (int x = 0; x < kFootprint; ++x)
        for (int k = -r; k <= r; ++k)
          if (y + k >= 0 && y + k < kFootprint) disk[y * kFootprint + x] += g[k + r] * tmp[(y + k) * kFootprint + x];
  }
  Psf psf;
  psf.kernel = Image(kRgb, kFootprint, kFootprint);
  for (int c = 0; c < kRgb; ++c) std::copy(disk.begin(), disk.end(), psf.kernel.plane(c).begin());
  psf.provenance = {{"source", "disk"}, {"radius", spec.radius}, {"alias_sigma", spec.alias_sigma}};
  return normalize(std::move(psf));
}

const std::array<FamilyInfo, 4>& families() { return kFamilies; }

const FamilyInfo& family_info(Family family) { return kFamilies[static_cast<std::size_t>(family)]; }

const FamilyInfo& family_by_name(std::string_view name) {
  for (const auto& f : kFamilies)
    if (f.name == name) return f;
  throw Error("usage", "unknown corruption family '" + std::string(name) +
                           "' (expected astigmatism|coma|defocus_spherical|trefoil)");
}

void MatchObjective::validate() const {
  for (double w : {w_mtf50, w_auc, w_ssim, w_psnr})
    if (!(w >= 0.0) || !std::isfinite(w)) throw Error("config", "objective weights must be finite and >= 0");
  if (w_mtf50 + w_auc + w_ssim + w_psnr <= 0.0) throw Error("config", "objective weights are all zero");
  if (!(psnr_target_db > 0.0)) throw Error("config", "PSNR target must be positive");
}

void MatchSettings::validate() const {
  synthesis.validate();
  if (synthesis.crop_size != kFootprint) {
    throw Error("config", "bank kernels must be " + std::to_string(kFootprint) + " px wide");
  }
  if (candidate_crop < synthesis.crop_size || candidate_crop % 2 == 0 || candidate_crop >= synthesis.fft_size()) {
    throw Error("config", "candidate crop must be odd, at least the footprint and inside the FFT output");
  }
  if (!(step > 0.0) || !(min_step > 0.0) || min_step > step) throw Error("config", "invalid descent step sizes");
  if (!(sweep_max >= step)) throw Error("config", "sweep range must cover at least one step");
  if (bisection_iterations < 0 || max_evaluations < 1) throw Error("config", "invalid iteration budget");
  if (!(tolerance > 0.0)) throw Error("config", "tolerance must be positive");
  if (chart_size < 32) throw Error("config", "chart size must be at least 32");
}

Image slanted_edge_chart(int size) {
  constexpr double kAngle = 5.0 * std::numbers::pi / 180.0;
  constexpr int kSuper = 4;
  constexpr double kDark = 51.0, kBright = 204.0;
  const double half_side = 0.3 * size;
  const double c = 0.5 * size;
  const double ca = std::cos(kAngle), sa = std::sin(kAngle);
  Image chart(kRgb, size, size);
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x) {
      int hits = 0;
      for (int sy = 0; sy < kSuper; ++sy)
        for (int sx = 0; sx < kSuper; ++sx) {
          const double py = y + (sy + 0.5) / kSuper - c;
          const double px = x + (sx + 0.5) / kSuper - c;
          const double u = ca * px + sa * py, v = -sa * px + ca * py;
          if (std::abs(u) <= half_side && std::abs(v) <= half_side) ++hits;
        }
      const double f = static_cast<double>(hits) / (kSuper * kSuper);
      for (int ch = 0; ch < kRgb; ++ch) chart.at(ch, y, x) = kDark + f * (kBright - kDark);
    }
  return chart;
}

ObjectiveEvaluator::ObjectiveEvaluator(const Psf& baseline, const MatchObjective& objective, int chart_size)
    : objective_(objective) {
  objective_.validate();
  baseline_summary_ = mtf::summarize(mtf::mtf_from_psf(baseline, -1));
  chart_ = slanted_edge_chart(chart_size);
  baseline_blurred_ = convolve(chart_, baseline.kernel, Boundary::reflect);
}

ObjectiveTerms ObjectiveEvaluator::evaluate(const Psf& candidate) const {
  const auto summary = mtf::summarize(mtf::mtf_from_psf(candidate, -1));
  ObjectiveTerms t;
  t.mtf50 = summary.mean.mtf50;
  t.mtf50_rel = std::abs(t.mtf50 - baseline_summary_.mean.mtf50) / baseline_summary_.mean.mtf50;
  double dauc = 0.0;
  for (std::size_t o = 0; o < summary.per_orientation.size(); ++o)
    dauc += std::abs(summary.per_orientation[o].auc - baseline_summary_.per_orientation[o].auc);
  t.auc_rel = dauc / static_cast<double>(summary.per_orientation.size()) / baseline_summary_.mean.auc;
  const Image blurred = convolve(chart_, candidate.kernel, Boundary::reflect);
  t.ssim = ssim(baseline_blurred_, blurred);
  t.psnr_db = psnr(baseline_blurred_, blurred);
  const double shortfall = std::isinf(t.psnr_db)
                               ? 0.0
                               : std::max(0.0, objective_.psnr_target_db - t.psnr_db) / objective_.psnr_target_db;
  t.total = objective_.w_mtf50 * t.mtf50_rel + objective_.w_auc * t.auc_rel + objective_.w_ssim * (1.0 - t.ssim) +
            objective_.w_psnr * shortfall;
  return t;
}

Psf footprint_kernel(const CoefficientSet& coeffs, const MatchSettings& settings) {
  PsfSynthesisConfig big_config = settings.synthesis;
  big_config.crop_size = settings.candidate_crop;
  const Psf aligned = align_com(synthesize_psf(coeffs, settings.wavelengths, big_config));
  const int size = settings.synthesis.crop_size;
  const double centre = (size - 1) / 2.0;

  int dy = 0, dx = 0;
  Psf out = normalize(window(aligned, size, dy, dx));
  for (int iter = 0; iter < 4; ++iter) {
    const auto com = center_of_mass(out);
    const double ey = com.y - centre, ex = com.x - centre;
    if (std::abs(ey) <= 0.5 && std::abs(ex) <= 0.5) break;
    dy += std::abs(ey) > 0.5 ? static_cast<int>(std::lround(ey)) : 0;
    dx += std::abs(ex) > 0.5 ? static_cast<int>(std::lround(ex)) : 0;
    out = normalize(window(aligned, size, dy, dx));
  }
  out.provenance["crop_size"] = size;
  out.provenance["candidate_crop"] = settings.candidate_crop;
  return out;
}

double initial_offset(const ObjectiveEvaluator& evaluator, const CoefficientSet& init, int fringe,
                      const MatchSettings& settings) {
  const double target = evaluator.baseline_mtf50();
  auto mtf50_at = [&](double a) {
    return evaluator.evaluate(footprint_kernel(with_offset(init, fringe, a), settings)).mtf50;
  };
  const double m0 = mtf50_at(0.0);
  if (m0 <= target) return 0.0;

  double best = 0.0, best_gap = m0 - target;
  double lo = 0.0, m_prev = m0;
  const int steps = static_cast<int>(std::floor(settings.sweep_max / settings.step + 1e-9));
  for (int k = 1; k <= steps; ++k) {
    const double a = k * settings.step;
    const double m = mtf50_at(a);
    if (m <= target) {
      double hi = a, m_lo = m_prev, m_hi = m;
      for (int it = 0; it < settings.bisection_iterations; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double mm = mtf50_at(mid);
        if (mm <= target) {
          hi = mid;
          m_hi = mm;
        } else {
          lo = mid;
          m_lo = mm;
        }
      }
      return (m_lo - target) <= (target - m_hi) ? lo : hi;
    }
    lo = a;
    m_prev = m;
    if (m - target < best_gap) {
      best_gap = m - target;
      best = a;
    }
  }
  return best;
}

MatchResult match_kernel(const Psf& baseline, const FamilyInfo& family, const CoefficientSet& init,
                         const MatchObjective& objective, const MatchSettings& settings,
                         std::array<double, 2> start_offsets) {
  settings.validate();
  const ObjectiveEvaluator evaluator(baseline, objective, settings.chart_size);
  MatchResult result;
  auto score = [&](int j, double offset) {
    ++result.evaluations;
    return evaluator.evaluate(footprint_kernel(with_offset(init, family.fringes[j], offset), settings));
  };

  for (int j = 0; j < 2; ++j) {
    auto& m = result.members[static_cast<std::size_t>(j)];
    m.fringe = family.fringes[static_cast<std::size_t>(j)];
    m.initial_offset = m.offset = start_offsets[static_cast<std::size_t>(j)];
    m.terms = score(j, m.offset);
  }
  auto total = [&] { return result.members[0].terms.total + result.members[1].terms.total; };
  result.trace.push_back(total());

  for (double step = settings.step; step >= settings.min_step * (1.0 - 1e-12) && result.evaluations < settings.max_evaluations;) {
    bool improved = false;
    for (int j = 0; j < 2 && result.evaluations < settings.max_evaluations; ++j) {
      auto& m = result.members[static_cast<std::size_t>(j)];
      for (double dir : {1.0, -1.0}) {
        const double candidate = m.offset + dir * step;
        const auto terms = score(j, candidate);
        if (terms.total < m.terms.total) {
          m.offset = candidate;
          m.terms = terms;
          const double now = total();
          if (now > result.trace.back()) throw Error("internal", "coordinate descent increased the objective");
          result.trace.push_back(now);
          improved = true;
          break;
        }
      }
    }
    if (!improved) step *= 0.5;
  }

  for (int j = 0; j < 2; ++j) {
    const auto& m = result.members[static_cast<std::size_t>(j)];
    result.coefficients[static_cast<std::size_t>(j)] = with_offset(init, m.fringe, m.offset);
  }
  result.objective = total();
  result.no_progress = result.trace.size() == 1;
  return result;
}

MatchResult match_kernel(const Psf& baseline, const FamilyInfo& family, const CoefficientSet& init,
                         const MatchObjective& objective, const MatchSettings& settings) {
  settings.validate();
  const ObjectiveEvaluator evaluator(baseline, objective, settings.chart_size);
  const std::array<double, 2> start{initial_offset(evaluator, init, family.fringes[0], settings),
                                    initial_offset(evaluator, init, family.fringes[1], settings)};
  return match_kernel(baseline, family, init, objective, settings, start);
}

const BankEntry& SeverityBank::at(Family family, int severity, int pair_member) const {
  for (const auto& e : entries)
    if (e.family == family && e.severity == severity && e.pair_member == pair_member) return e;
  throw Error("range", "no bank kernel for " + std::string(family_info(family).name) + " severity " +
                           std::to_string(severity) + " member " + std::to_string(pair_member));
}

std::string bank_file_name(Family family, int severity, int pair_member) {
  return std::string(family_info(family).name) + "_s" + std::to_string(severity) + "_m" +
         std::to_string(pair_member) + ".psfk";
}

SeverityBank build_severity_bank(const BankConfig& config) {
  config.objective.validate();
  config.settings.validate();
  for (int s = 1; s < kSeverities; ++s) {
    if (config.baselines[static_cast<std::size_t>(s)].radius < config.baselines[static_cast<std::size_t>(s - 1)].radius) {
      throw Error("config", "baseline disk radii must be ordered by severity");
    }
  }

  const std::size_t jobs = kFamilies.size() * kSeverities;
  std::vector<std::array<BankEntry, 2>> results(jobs);
  parallel_for(jobs, config.workers, [&](std::size_t i) {
    const auto& family = kFamilies[i / kSeverities];
    const int severity = static_cast<int>(i % kSeverities) + 1;
    const Psf baseline = disk_kernel(config.baselines[static_cast<std::size_t>(severity - 1)]);
    const double baseline_mtf50 = mtf::summarize(mtf::mtf_from_psf(baseline, -1)).mean.mtf50;
    const auto match = match_kernel(baseline, family, baseline_chromatic_coeffs(), config.objective, config.settings);
    for (int j = 0; j < 2; ++j) {
      auto& e = results[i][static_cast<std::size_t>(j)];
      e.family = family.family;
      e.severity = severity;
      e.pair_member = j;
      e.match = match.members[static_cast<std::size_t>(j)];
      e.baseline_mtf50 = baseline_mtf50;
      e.trace = match.trace;
      e.kernel = footprint_kernel(match.coefficients[static_cast<std::size_t>(j)], config.settings);
      e.kernel.provenance["family"] = family.name;
      e.kernel.provenance["severity"] = severity;
      e.kernel.provenance["pair_member"] = j;
    }
  });

  SeverityBank bank;
  std::string offenders;
  for (auto& pair : results)
    for (auto& e : pair) {
      if (e.match.terms.mtf50_rel > config.settings.tolerance) {
        offenders += (offenders.empty() ? "" : ", ") + bank_file_name(e.family, e.severity, e.pair_member) + " (" +
                     std::to_string(100.0 * e.match.terms.mtf50_rel) + "%)";
      }
      bank.entries.push_back(std::move(e));
    }
  if (!offenders.empty()) throw Error("match_failed", "kernels outside the MTF50 tolerance: " + offenders);
  return bank;
}

void write_bank(SeverityBank& bank, const std::filesystem::path& dir, const nlohmann::json& config_echo) {
  std::filesystem::create_directories(dir);
  nlohmann::json kernels = nlohmann::json::array();
  for (auto& e : bank.entries) {
    e.psfpack_path = bank_file_name(e.family, e.severity, e.pair_member);
    psfpack::write(dir / e.psfpack_path, e.kernel);
    e.sha256 = sha256_file(dir / e.psfpack_path);
    kernels.push_back({
        {"family", family_info(e.family).name},
        {"severity", e.severity},
        {"pair_member", e.pair_member},
        {"fringe", e.match.fringe},
        {"coefficients", e.kernel.provenance.value("coefficients", nlohmann::json::object())},
        {"initial_offset_waves", e.match.initial_offset},
        {"offset_waves", e.match.offset},
        {"objective_residual", e.match.terms.total},
        {"mtf50", e.match.terms.mtf50},
        {"baseline_mtf50", e.baseline_mtf50},
        {"mtf50_rel_error", e.match.terms.mtf50_rel},
        {"psfpack_path", e.psfpack_path.generic_string()},
        {"sha256", e.sha256},
    });
  }
  bank.manifest = {{"kernel_count", bank.entries.size()}, {"config", config_echo}, {"kernels", kernels}};
  std::ofstream out(dir / "manifest.json", std::ios::binary);
  out << bank.manifest.dump(2) << '\n';
  if (!out) throw Error("io", "cannot write " + (dir / "manifest.json").string());
}

SeverityBank read_bank(const std::filesystem::path& dir) {
  std::ifstream in(dir / "manifest.json", std::ios::binary);
  if (!in) throw Error("io", "cannot read " + (dir / "manifest.json").string());
  SeverityBank bank;
  try {
    bank.manifest = nlohmann::json::parse(in);
    for (const auto& k : bank.manifest.at("kernels")) {
      BankEntry e;
      e.family = family_by_name(k.at("family").get<std::string>()).family;
      e.severity = k.at("severity").get<int>();
      e.pair_member = k.at("pair_member").get<int>();
      e.match.fringe = k.at("fringe").get<int>();
      e.match.initial_offset = k.at("initial_offset_waves").get<double>();
      e.match.offset = k.at("offset_waves").get<double>();
      e.match.terms.total = k.at("objective_residual").get<double>();
      e.match.terms.mtf50 = k.at("mtf50").get<double>();
      e.match.terms.mtf50_rel = k.at("mtf50_rel_error").get<double>();
      e.baseline_mtf50 = k.at("baseline_mtf50").get<double>();
      e.psfpack_path = k.at("psfpack_path").get<std::string>();
      e.sha256 = k.at("sha256").get<std::string>();
      const auto path = dir / e.psfpack_path;
      if (sha256_file(path) != e.sha256) throw Error("integrity", "hash mismatch for " + path.string());
      e.kernel = psfpack::read(path);
      bank.entries.push_back(std::move(e));
    }
  } catch (const nlohmann::json::exception& ex) {
    throw Error("format", "bad bank manifest: " + std::string(ex.what()));
  }
  return bank;
}

}  // namespace aberrate::severity
