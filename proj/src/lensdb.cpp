#include "aberrate/lensdb.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "aberrate/error.hpp"
#include "aberrate/psfpack.hpp"

namespace aberrate::lens {
namespace {

nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("io", "cannot read " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error("format", path.string() + ": " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream out(path, std::ios::binary);
  out << j.dump(2) << '\n';
  if (!out) throw Error("io", "cannot write " + path.string());
}

double mean_mtf50(const Psf& psf) {
  double sum = 0.0;
  for (int c = 0; c < psf.kernel.channels(); ++c) sum += mtf::summarize(mtf::mtf_from_psf(psf, c)).mean.mtf50;
  return sum / psf.kernel.channels();
}

}  // namespace

char azimuth_label(Azimuth azimuth) {
  switch (azimuth) {
    case Azimuth::r: return 'r';
    case Azimuth::x: return 'x';
    case Azimuth::y: return 'y';
  }
  return '?';
}

double azimuth_degrees(Azimuth azimuth) { return 45.0 * static_cast<int>(azimuth); }

std::string key_name(const FieldKey& key) {
  std::ostringstream out;
  out << "field_" << std::setw(2) << std::setfill('0') << key.field_percent << "_az_" << azimuth_label(key.azimuth);
  return out.str();
}

FieldKey parse_key_name(const std::string& name) {
  // field_NN_az_A
  if (name.size() != 13 || name.compare(0, 6, "field_") != 0 || name.compare(8, 4, "_az_") != 0) {
    throw Error("format", "bad field key '" + name + "'");
  }
  FieldKey key;
  try {
    key.field_percent = std::stoi(name.substr(6, 2));
  } catch (const std::exception&) {
    throw Error("format", "bad field key '" + name + "'");
  }
  if (std::find(kFieldPercents.begin(), kFieldPercents.end(), key.field_percent) == kFieldPercents.end()) {
    throw Error("format", "unsupported field height in '" + name + "'");
  }
  switch (name[12]) {
    case 'r': key.azimuth = Azimuth::r; break;
    case 'x': key.azimuth = Azimuth::x; break;
    case 'y': key.azimuth = Azimuth::y; break;
    default: throw Error("format", "bad azimuth in '" + name + "'");
  }
  if (key.field_percent == 0 && key.azimuth != Azimuth::r) throw Error("format", "on-axis field has only azimuth r");
  return key;
}

int field_percent(double field_height) {
  for (int p : kFieldPercents)
    if (std::abs(field_height * 100.0 - p) < 1e-6) return p;
  throw Error("range", "field height must be one of 0, 0.3, 0.5, 0.7, 0.9");
}

std::vector<FieldKey> keys_at_field(int percent) {
  if (percent == 0) return {{0, Azimuth::r}};
  std::vector<FieldKey> keys;
  for (auto az : kAzimuths) keys.push_back({percent, az});
  return keys;
}

std::vector<FieldKey> required_keys() {
  std::vector<FieldKey> keys;
  for (int p : kFieldPercents)
    for (const auto& k : keys_at_field(p)) keys.push_back(k);
  return keys;
}

nlohmann::json LensMeta::to_json() const {
  return {{"id", id}, {"efl_mm", efl_mm}, {"fov_deg", fov_deg}, {"fnum", fnum}, {"type", type}};
}

LensMeta LensMeta::from_json(const nlohmann::json& j) {
  LensMeta m;
  try {
    m.id = j.at("id").get<std::string>();
    m.efl_mm = j.value("efl_mm", 0.0);
    m.fov_deg = j.value("fov_deg", 0.0);
    m.fnum = j.value("fnum", 0.0);
    m.type = j.value("type", std::string());
  } catch (const nlohmann::json::exception& e) {
    throw Error("format", std::string("bad lens metadata: ") + e.what());
  }
  if (m.id.empty()) throw Error("format", "lens id is empty");
  return m;
}

void LensSettings::validate() const {
  if (!(encircled_fraction > 0.0) || encircled_fraction > 1.0) throw Error("config", "encircled fraction must be in (0, 1]");
  if (!(virtual_pitch_um > 0.0)) throw Error("config", "virtual lens pitch must be positive");
  virtual_synthesis.validate();
}

LensSource load_bundle(const std::filesystem::path& dir) {
  LensSource source;
  const auto meta = read_json(dir / "meta.json");
  source.meta = LensMeta::from_json(meta);
  source.processed = meta.value("processed", false);
  for (const auto& key : required_keys()) {
    const auto path = dir / (key_name(key) + ".psfk");
    if (std::filesystem::exists(path)) source.psfs.emplace(key, psfpack::read(path));
  }
  if (std::filesystem::exists(dir / "coefficients.json")) {
    const auto j = read_json(dir / "coefficients.json");
    for (const auto& [name, value] : j.items()) source.coefficients.emplace(parse_key_name(name), CoefficientSet::from_json(value));
  }
  if (source.psfs.empty() && source.coefficients.empty()) {
    throw Error("missing_field", "lens bundle " + dir.string() + " has neither PSF files nor coefficients.json");
  }
  return source;
}

void write_bundle(const LensRecord& record, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto meta = record.meta.to_json();
  meta["processed"] = true;
  meta["pitch_um"] = record.pitch.pitch_um;
  meta["quality"] = record.quality;
  write_json(dir / "meta.json", meta);
  for (const auto& [key, psf] : record.processed) psfpack::write(dir / (key_name(key) + ".psfk"), psf);
  if (!record.coefficients.empty()) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [key, coeffs] : record.coefficients) j[key_name(key)] = coeffs.to_json();
    write_json(dir / "coefficients.json", j);
  }
}

std::map<int, double> field_mtf50(const std::map<FieldKey, Psf>& processed) {
  std::map<int, std::pair<double, int>> acc;
  for (const auto& [key, psf] : processed) {
    auto& [sum, n] = acc[key.field_percent];
    sum += mean_mtf50(psf);
    ++n;
  }
  std::map<int, double> out;
  for (const auto& [field, v] : acc) out[field] = v.first / v.second;
  return out;
}

double quality(const LensRecord& record) {
  const auto per_field = record.field_mtf50.empty() ? field_mtf50(record.processed) : record.field_mtf50;
  if (per_field.empty()) throw Error("range", "lens record has no processed kernels");
  double sum = 0.0;
  for (const auto& [field, v] : per_field) sum += v;
  return sum / static_cast<double>(per_field.size()) / mtf::kNyquist;
}

LensRecord ingest_lens(const LensSource& source, const LensSettings& settings) {
  settings.validate();
  LensRecord record;
  record.meta = source.meta;
  record.coefficients = source.coefficients;

  std::map<FieldKey, Psf> hi_res;
  for (const auto& key : required_keys()) {
    if (auto it = source.psfs.find(key); it != source.psfs.end()) {
      hi_res.emplace(key, it->second);
    } else if (auto ct = source.coefficients.find(key); ct != source.coefficients.end()) {
      Psf psf = synthesize_psf(ct->second, settings.wavelengths, settings.virtual_synthesis);
      psf.pitch_um = settings.virtual_pitch_um;
      psf.provenance["lens"] = source.meta.id;
      psf.provenance["field"] = key_name(key);
      hi_res.emplace(key, std::move(psf));
    } else {
      throw Error("missing_field", "lens " + source.meta.id + " lacks " + key_name(key));
    }
  }

  if (source.processed) {
    // Already at the sensor pitch: only re-centre and renormalize.
    record.pitch.pitch_um = hi_res.begin()->second.pitch_um;
    record.pitch.nyquist_cycles_per_um = 0.5 / record.pitch.pitch_um;
    for (const auto& [key, psf] : hi_res) record.processed.emplace(key, normalize(align_com(normalize(psf))));
  } else {
    const double pitch = hi_res.begin()->second.pitch_um;
    std::map<int, std::vector<Psf>> by_field;
    for (auto& [key, psf] : hi_res) {
      if (!(psf.pitch_um > 0.0) || std::abs(psf.pitch_um - pitch) > 1e-9 * pitch) {
        throw Error("range", "lens " + source.meta.id + " PSFs must share one known pixel pitch");
      }
      psf = align_com(normalize(psf));
      by_field[key.field_percent].push_back(psf);
    }
    record.pitch = mtf::derive_pixel_pitch(by_field, settings.exclude_edge_field);
    // PSFs finer than the sensor are downsampled; coarser ones are kept at their own sampling.
    const double target = std::max(record.pitch.pitch_um, pitch);
    for (const auto& [key, psf] : hi_res) {
      Psf p = crop_encircled(resample(psf, target), settings.encircled_fraction);
      p = normalize(align_com(p));
      p.provenance["lens"] = source.meta.id;
      p.provenance["field"] = key_name(key);
      record.processed.emplace(key, std::move(p));
    }
  }
  record.field_mtf50 = field_mtf50(record.processed);
  record.quality = quality(record);
  return record;
}

std::vector<Selection> select_subset(const std::vector<QualityEntry>& entries, int n) {
  if (n <= 0) throw Error("range", "subset size must be positive");
  if (static_cast<std::size_t>(n) > entries.size()) throw Error("range", "subset larger than the lens list");
  auto sorted = entries;
  std::sort(sorted.begin(), sorted.end(), [](const QualityEntry& a, const QualityEntry& b) {
    return a.quality != b.quality ? a.quality < b.quality : a.id < b.id;
  });
  const double lo = sorted.front().quality, hi = sorted.back().quality;
  std::vector<double> targets(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) targets[static_cast<std::size_t>(i)] = n == 1 ? lo : lo + (hi - lo) * i / (n - 1);

  // cost[i][j]: best total distance assigning the first i targets to lenses among the first j.
  const std::size_t m = sorted.size();
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> cost(static_cast<std::size_t>(n) + 1, std::vector<double>(m + 1, kInf));
  for (std::size_t j = 0; j <= m; ++j) cost[0][j] = 0.0;
  for (std::size_t i = 1; i <= static_cast<std::size_t>(n); ++i)
    for (std::size_t j = i; j <= m; ++j) {
      const double take = cost[i - 1][j - 1] + std::abs(sorted[j - 1].quality - targets[i - 1]);
      cost[i][j] = std::min(cost[i][j - 1], take);
    }

  // Backtrack preferring the earliest (lower quality, then lower id) lens among equal-cost choices.
  std::vector<Selection> out(static_cast<std::size_t>(n));
  std::size_t j = m;
  for (std::size_t i = static_cast<std::size_t>(n); i >= 1; --i) {
    // Find the smallest j' <= j with cost[i][j'] == cost[i][j]; that prefix ends with the chosen lens.
    const double target_cost = cost[i][j];
    std::size_t k = j;
    while (k > i && cost[i][k - 1] <= target_cost) --k;
    out[i - 1] = {sorted[k - 1].id, sorted[k - 1].quality, targets[i - 1]};
    j = k - 1;
  }
  return out;
}

CategoryVector project_category(const std::map<FieldKey, CoefficientSet>& coefficients, int percent) {
  if (coefficients.empty()) throw Error("unsupported", "category projection needs coefficient data for this source");
  CategoryVector best;
  double best_norm = -1.0;
  bool any = false;
  for (const auto& key : keys_at_field(percent)) {
    auto it = coefficients.find(key);
    if (it == coefficients.end()) continue;
    any = true;
    const auto avg = [&](int fringe) {
      double s = 0.0;
      for (int c = 0; c < kRgb; ++c) s += it->second.get(c, fringe);
      return s / kRgb;
    };
    const std::array<double, 3> v{std::max(std::abs(avg(4)), std::abs(avg(9))),
                                  std::max(std::abs(avg(5)), std::abs(avg(6))),
                                  std::max(std::abs(avg(7)), std::abs(avg(8)))};
    const double norm = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    if (norm > best_norm) {
      best_norm = norm;
      best.direction = v;
      best.azimuth = key.azimuth;
    }
  }
  if (!any) throw Error("unsupported", "no coefficient data at field " + std::to_string(percent) + "%");
  if (!(best_norm > 0.0)) throw Error("zero_vector", "all category coefficients are zero");
  for (auto& d : best.direction) d /= best_norm;
  best.magnitude = best_norm;
  return best;
}

CategoryVector project_category(const LensRecord& record, int percent) {
  return project_category(record.coefficients, percent);
}

std::string selection_csv(const std::vector<Selection>& selection) {
  std::ostringstream out;
  out << "rank,id,quality,target\n" << std::setprecision(10);
  for (std::size_t i = 0; i < selection.size(); ++i)
    out << i << ',' << selection[i].id << ',' << selection[i].quality << ',' << selection[i].target << '\n';
  return out.str();
}

}  // namespace aberrate::lens
