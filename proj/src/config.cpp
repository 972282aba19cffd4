#include "aberrate/config.hpp"

#include <fstream>

#include "aberrate/default_config.hpp"
#include "aberrate/error.hpp"

namespace aberrate {
namespace {

using nlohmann::json;

// Every key of `user` must exist in `reference` with a compatible type.
void check_keys(const json& user, const json& reference, const std::string& path) {
  if (reference.is_object()) {
    if (!user.is_object()) throw Error("config", path + ": expected an object");
    for (const auto& [key, value] : user.items()) {
      if (!reference.contains(key)) throw Error("config", "unknown key " + path + "/" + key);
      check_keys(value, reference.at(key), path + "/" + key);
    }
  } else if (reference.is_array()) {
    if (!user.is_array()) throw Error("config", path + ": expected an array");
  } else if (reference.is_number()) {
    if (!user.is_number()) throw Error("config", path + ": expected a number");
  } else if (reference.is_boolean()) {
    if (!user.is_boolean()) throw Error("config", path + ": expected a boolean");
  } else if (reference.is_string()) {
    if (!user.is_string()) throw Error("config", path + ": expected a string");
  }
}

PsfSynthesisConfig synthesis_from(const json& j) {
  PsfSynthesisConfig c;
  c.grid_size = j.at("grid_size").get<int>();
  c.pad_factor = j.at("pad_factor").get<int>();
  c.phase_scale = j.at("phase_scale").get<double>();
  c.crop_size = j.at("crop_size").get<int>();
  c.validate();
  return c;
}

std::array<double, 3> triple(const json& j, const std::string& what) {
  if (j.size() != 3) throw Error("config", what + " needs three values");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

ToolConfig build(json doc) {
  ToolConfig cfg;
  try {
    const auto& s = doc.at("synthesis");
    cfg.synthesis = synthesis_from(s);
    const auto& wl = s.at("wavelengths_um");
    cfg.wavelengths = {wl.at("red").get<double>(), wl.at("green").get<double>(), wl.at("blue").get<double>()};
    for (int c = 0; c < 3; ++c)
      if (!(cfg.wavelengths[c] > 0.0)) throw Error("config", "wavelengths must be positive");
    cfg.mtf_fft_size = doc.at("mtf").at("fft_size").get<int>();
    if (cfg.mtf_fft_size < 0) throw Error("config", "mtf/fft_size must be >= 0");

    const auto& b = doc.at("bank");
    cfg.bank_dir = b.at("dir").get<std::string>();
    const auto& baselines = b.at("baselines");
    if (baselines.size() != severity::kSeverities) throw Error("config", "bank/baselines needs five severities");
    for (std::size_t i = 0; i < baselines.size(); ++i) {
      const auto& e = baselines[i];
      if (e.at("severity").get<int>() != static_cast<int>(i) + 1) {
        throw Error("config", "bank/baselines must be listed for severities 1..5 in order");
      }
      cfg.bank.baselines[i] = {e.at("radius").get<double>(), e.at("alias_sigma").get<double>()};
      severity::disk_kernel(cfg.bank.baselines[i]);  // validates the footprint
    }
    auto& st = cfg.bank.settings;
    st.synthesis = synthesis_from(b.at("synthesis"));
    st.wavelengths = cfg.wavelengths;
    st.candidate_crop = b.at("candidate_crop").get<int>();
    st.step = b.at("step_waves").get<double>();
    st.min_step = b.at("min_step_waves").get<double>();
    st.sweep_max = b.at("sweep_max_waves").get<double>();
    st.bisection_iterations = b.at("bisection_iterations").get<int>();
    st.max_evaluations = b.at("max_evaluations").get<int>();
    st.tolerance = b.at("mtf50_tolerance").get<double>();
    st.chart_size = b.at("chart_size").get<int>();
    st.validate();
    const auto& o = b.at("objective");
    cfg.bank.objective = {o.at("w_mtf50").get<double>(), o.at("w_auc").get<double>(), o.at("w_ssim").get<double>(),
                          o.at("w_psnr").get<double>(), o.at("psnr_target_db").get<double>()};
    cfg.bank.objective.validate();

    const auto& l = doc.at("lens");
    cfg.lens_dir = l.at("dir").get<std::string>();
    cfg.lens.encircled_fraction = l.at("encircled_fraction").get<double>();
    cfg.lens.exclude_edge_field = l.at("exclude_edge_field").get<bool>();
    cfg.lens.virtual_synthesis = synthesis_from(l.at("virtual_synthesis"));
    cfg.lens.virtual_pitch_um = l.at("virtual_pitch_um").get<double>();
    cfg.lens.wavelengths = cfg.wavelengths;
    cfg.lens.validate();

    const auto& c = doc.at("corrupt");
    cfg.corrupt.jpeg_quality = c.at("jpeg_quality").get<double>();
    if (!(cfg.corrupt.jpeg_quality > 0.0) || cfg.corrupt.jpeg_quality > 1.0) {
      throw Error("config", "corrupt/jpeg_quality must be in (0, 1]");
    }
    cfg.corrupt.boundary = parse_boundary(c.at("boundary").get<std::string>());
    cfg.corrupt.resize_short_side = c.at("resize_short_side").get<int>();
    cfg.corrupt.crop_size = c.at("crop_size").get<int>();
    if (cfg.corrupt.crop_size < 1 || cfg.corrupt.resize_short_side < cfg.corrupt.crop_size) {
      throw Error("config", "corrupt/resize_short_side must be >= corrupt/crop_size >= 1");
    }

    const auto& a = doc.at("augment");
    cfg.augment.alpha = a.at("alpha").get<double>();
    if (!(cfg.augment.alpha > 0.0)) throw Error("config", "augment/alpha must be positive");
    cfg.augment.max_severity = a.at("max_severity").get<int>();
    if (cfg.augment.max_severity < 1 || cfg.augment.max_severity > 5) throw Error("config", "augment/max_severity must be 1..5");
    cfg.augment.mean = triple(a.at("mean"), "augment/mean");
    cfg.augment.std = triple(a.at("std"), "augment/std");
    for (double v : cfg.augment.std)
      if (!(v > 0.0)) throw Error("config", "augment/std must be positive");
    cfg.augment.boundary = parse_boundary(a.at("boundary").get<std::string>());

    cfg.workers = doc.at("workers").get<int>();
    if (cfg.workers < 1) throw Error("config", "workers must be >= 1");
    cfg.bank.workers = cfg.workers;
  } catch (const json::exception& e) {
    throw Error("config", std::string("invalid configuration: ") + e.what());
  } catch (const Error& e) {
    if (e.kind() == "config") throw;
    throw Error("config", e.what());
  }
  cfg.raw = std::move(doc);
  return cfg;
}

}  // namespace

const nlohmann::json& ToolConfig::default_document() {
  static const json doc = json::parse(detail::kDefaultConfigJson);
  return doc;
}

ToolConfig ToolConfig::defaults() { return build(default_document()); }

ToolConfig ToolConfig::from_overrides(const nlohmann::json& overrides) {
  check_keys(overrides, default_document(), "");
  json doc = default_document();
  doc.merge_patch(overrides);
  return build(std::move(doc));
}

ToolConfig ToolConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("config", "cannot read config file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw Error("config", path.string() + ": " + e.what());
  }
  return from_overrides(j);
}

}  // namespace aberrate
