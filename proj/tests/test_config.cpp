#include "aberrate/config.hpp"

#include <fstream>

#include <gtest/gtest.h>

#include "aberrate/error.hpp"
#include "support.hpp"

using namespace aberrate;
using nlohmann::json;

namespace {

std::string config_error(const json& overrides) {
  try {
    ToolConfig::from_overrides(overrides);
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), "config");
    return e.what();
  }
  return "";
}

// Every key of `doc` must be declared in the schema node, recursively.
void expect_declared(const json& doc, const json& schema, const json& root, const std::string& path) {
  const json* node = &schema;
  if (node->contains("$ref")) {
    const std::string ref = node->at("$ref");
    node = &root.at("$defs").at(ref.substr(ref.rfind('/') + 1));
  }
  if (doc.is_object()) {
    ASSERT_TRUE(node->contains("properties")) << path;
    EXPECT_EQ(node->value("additionalProperties", true), false) << path;
    for (const auto& [key, value] : doc.items()) {
      ASSERT_TRUE(node->at("properties").contains(key)) << path << "/" << key;
      expect_declared(value, node->at("properties").at(key), root, path + "/" + key);
    }
  } else if (doc.is_array() && node->contains("items")) {
    for (const auto& item : doc) expect_declared(item, node->at("items"), root, path + "[]");
  }
}

}  // namespace

TEST(Config, Defaults) {
  const auto cfg = ToolConfig::defaults();
  EXPECT_EQ(cfg.synthesis.grid_size, 256);
  EXPECT_EQ(cfg.synthesis.pad_factor, 2);
  EXPECT_EQ(cfg.synthesis.crop_size, 25);
  EXPECT_EQ(cfg.wavelengths[0], 0.6563);
  EXPECT_EQ(cfg.wavelengths[1], 0.5876);
  EXPECT_EQ(cfg.wavelengths[2], 0.4861);
  EXPECT_EQ(cfg.bank.baselines[0].radius, 3.0);
  EXPECT_EQ(cfg.bank.baselines[0].alias_sigma, 0.1);
  EXPECT_EQ(cfg.bank.baselines[4].radius, 10.0);
  EXPECT_EQ(cfg.bank.settings.tolerance, 0.05);
  EXPECT_EQ(cfg.bank.settings.synthesis.crop_size, 25);
  EXPECT_EQ(cfg.lens.encircled_fraction, 0.995);
  EXPECT_TRUE(cfg.lens.exclude_edge_field);
  EXPECT_EQ(cfg.corrupt.jpeg_quality, 0.9);
  EXPECT_EQ(cfg.corrupt.boundary, Boundary::zero);
  EXPECT_EQ(cfg.augment.alpha, 1.0);
  EXPECT_EQ(cfg.augment.boundary, Boundary::reflect);
  EXPECT_EQ(cfg.augment.mean[0], 0.485);
  EXPECT_EQ(cfg.workers, 1);
  EXPECT_EQ(cfg.raw, ToolConfig::default_document());
}

TEST(Config, OverridesMergeDeeply) {
  const auto cfg = ToolConfig::from_overrides({{"corrupt", {{"jpeg_quality", 0.75}}}, {"workers", 3}});
  EXPECT_EQ(cfg.corrupt.jpeg_quality, 0.75);
  EXPECT_EQ(cfg.corrupt.boundary, Boundary::zero);
  EXPECT_EQ(cfg.workers, 3);
  EXPECT_EQ(cfg.bank.workers, 3);
  EXPECT_EQ(cfg.raw.at("corrupt").at("jpeg_quality"), 0.75);
  EXPECT_EQ(cfg.raw.at("corrupt").at("crop_size"), 224);
}

TEST(Config, WavelengthsPropagate) {
  const auto cfg = ToolConfig::from_overrides({{"synthesis", {{"wavelengths_um", {{"green", 0.55}}}}}});
  EXPECT_EQ(cfg.wavelengths[1], 0.55);
  EXPECT_EQ(cfg.bank.settings.wavelengths[1], 0.55);
  EXPECT_EQ(cfg.lens.wavelengths[1], 0.55);
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
  EXPECT_NE(config_error({{"corupt", json::object()}}).find("corupt"), std::string::npos);
  EXPECT_NE(config_error({{"corrupt", {{"quality", 1}}}}).find("corrupt/quality"), std::string::npos);
  EXPECT_FALSE(config_error({{"workers", "four"}}).empty());
  EXPECT_FALSE(config_error({{"workers", 0}}).empty());
  EXPECT_FALSE(config_error({{"corrupt", {{"jpeg_quality", 1.5}}}}).empty());
  EXPECT_FALSE(config_error({{"corrupt", {{"boundary", "wrap"}}}}).empty());
  EXPECT_FALSE(config_error({{"augment", {{"std", {0.2, 0.0, 0.2}}}}}).empty());
  EXPECT_FALSE(config_error({{"augment", {{"mean", {0.2, 0.2}}}}}).empty());
  EXPECT_FALSE(config_error({{"synthesis", {{"crop_size", 24}}}}).empty());
  EXPECT_FALSE(config_error({{"bank", {{"baselines", json::array()}}}}).empty());
  EXPECT_FALSE(config_error({{"lens", {{"encircled_fraction", 1.5}}}}).empty());
  EXPECT_FALSE(config_error(json::array()).empty());
}

TEST(Config, LoadsFromFile) {
  testing_support::TempDir dir("cfg");
  { std::ofstream(dir / "c.json") << R"({"augment": {"alpha": 0.5}})"; }
  EXPECT_EQ(ToolConfig::load(dir / "c.json").augment.alpha, 0.5);
  { std::ofstream(dir / "bad.json") << "{not json"; }
  EXPECT_THROW(ToolConfig::load(dir / "bad.json"), Error);
  EXPECT_THROW(ToolConfig::load(dir / "missing.json"), Error);
}

TEST(Config, SchemaDeclaresEveryDefaultKey) {
  std::ifstream in(ABERRATE_SCHEMA_PATH);
  ASSERT_TRUE(in) << ABERRATE_SCHEMA_PATH;
  const json schema = json::parse(in);
  expect_declared(ToolConfig::default_document(), schema, schema, "");
}
