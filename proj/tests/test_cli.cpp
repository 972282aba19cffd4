#include "aberrate/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <json.hpp>

#include "aberrate/psfpack.hpp"
#include "aberrate/severity.hpp"
#include "support.hpp"

using namespace aberrate;
using nlohmann::json;
using testing_support::TempDir;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "aberrate");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

// A bank-shaped directory of disk kernels, enough for commands that only read the bank.
void write_fake_bank(const std::filesystem::path& dir) {
  severity::SeverityBank bank;
  for (const auto& fam : severity::families())
    for (int s = 1; s <= 5; ++s)
      for (int m = 0; m < 2; ++m) {
        severity::BankEntry e;
        e.family = fam.family;
        e.severity = s;
        e.pair_member = m;
        e.kernel = severity::disk_kernel({1.0 + s + m, 0.5});
        e.match.fringe = fam.fringes[m];
        bank.entries.push_back(std::move(e));
      }
  severity::write_bank(bank, dir, json::object());
}

void write_virtual_lens(const std::filesystem::path& dir, const std::string& id, double strength) {
  std::filesystem::create_directories(dir);
  const auto src = testing_support::virtual_lens(id, [&](int f, lens::Azimuth az) {
    return testing_support::degrading_coeffs(f, az, strength);
  });
  { std::ofstream(dir / "meta.json") << src.meta.to_json().dump(); }
  json coeffs = json::object();
  for (const auto& [key, c] : src.coefficients) coeffs[lens::key_name(key)] = c.to_json();
  { std::ofstream(dir / "coefficients.json") << coeffs.dump(); }
}

}  // namespace

TEST(Cli, HelpAndUsageErrors) {
  EXPECT_EQ(run({"--help"}).code, cli::kExitOk);
  EXPECT_EQ(run({}).code, cli::kExitUsage);
  EXPECT_EQ(run({"frobnicate"}).code, cli::kExitUsage);
  EXPECT_EQ(run({"mtf"}).code, cli::kExitUsage);
  const auto r = run({"--json", "match", "--family", "coma"});
  EXPECT_EQ(r.code, cli::kExitUsage);
  const auto j = json::parse(r.err);
  EXPECT_EQ(j.at("error").at("kind"), "usage");
  EXPECT_EQ(j.at("exit_code"), 2);
}

TEST(Cli, ModuleErrorsExitOneWithJson) {
  TempDir dir("cli");
  const auto r = run({"--json", "match", "--family", "vignetting", "--severity", "1"});
  EXPECT_EQ(r.code, cli::kExitUsage);
  { std::ofstream(dir / "bad.psfk") << "garbage"; }
  const auto bad = run({"--json", "mtf", "--kernel", (dir / "bad.psfk").string()});
  EXPECT_EQ(bad.code, cli::kExitModuleError);
  EXPECT_EQ(json::parse(bad.err).at("exit_code"), 1);
  const auto missing = run({"corrupt", "--input", dir.path().string(), "--output", (dir / "o").string(), "--source",
                            "bank:coma:3", "--bank", (dir / "nobank").string()});
  EXPECT_EQ(missing.code, cli::kExitModuleError);
  EXPECT_NE(missing.err.find("manifest.json"), std::string::npos);
}

TEST(Cli, GenKernelThenMtf) {
  TempDir dir("cli");
  const auto k = dir / "k.psfk";
  auto r = run({"gen-kernel", "--term", "4:0.3", "--align", "--output", k.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const Psf psf = psfpack::read(k);
  EXPECT_EQ(psf.height(), 25);
  EXPECT_TRUE(psf.normalized);

  r = run({"mtf", "--kernel", k.string(), "--csv", (dir / "m.csv").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto summary = json::parse(r.out);
  EXPECT_GT(summary.at("mean").at("mtf50").get<double>(), 0.0);
  EXPECT_EQ(summary.at("channel"), "lum");
  EXPECT_NE(testing_support::slurp(dir / "m.csv").find("frequency"), std::string::npos);

  ASSERT_EQ(run({"gen-kernel", "--disk", "4:0.5", "--output", (dir / "d.psfk").string()}).code, 0);
  const Image disk = severity::disk_kernel({4.0, 0.5}).kernel, stored = psfpack::read(dir / "d.psfk").kernel;
  for (std::size_t i = 0; i < disk.data().size(); ++i) ASSERT_NEAR(stored.data()[i], disk.data()[i], 1e-7);
  EXPECT_EQ(run({"gen-kernel", "--term", "99:0.1", "--output", (dir / "x.psfk").string()}).code, cli::kExitModuleError);
  EXPECT_EQ(run({"gen-kernel", "--term", "four", "--output", (dir / "x.psfk").string()}).code, cli::kExitUsage);
}

TEST(Cli, CorruptTwiceGivesIdenticalManifests) {
  TempDir dir("cli");
  write_fake_bank(dir / "bank");
  testing_support::write_toy_dataset(dir / "in", 6, 40, 48);
  for (const char* name : {"o1", "o2"}) {
    const auto r = run({"--workers", name[1] == '1' ? "1" : "4", "corrupt", "--input", (dir / "in").string(),
                        "--output", (dir / name).string(), "--task", "det", "--source", "bank:coma:3", "--seed", "7",
                        "--bank", (dir / "bank").string()});
    ASSERT_EQ(r.code, 0) << r.err;
  }
  const std::string m1 = testing_support::slurp(dir / "o1" / "manifest.json");
  EXPECT_EQ(m1, testing_support::slurp(dir / "o2" / "manifest.json"));
  const auto j = json::parse(m1);
  EXPECT_EQ(j.at("images"), 6);
  for (const auto& rec : j.at("records")) {
    const std::string k = rec.at("kernel");
    EXPECT_TRUE(k == "coma_s3_m0" || k == "coma_s3_m1") << k;
  }
}

TEST(Cli, AugmentPreviewWritesDraws) {
  TempDir dir("cli");
  write_fake_bank(dir / "bank");
  testing_support::write_toy_dataset(dir / "in", 3, 32, 32);
  const auto r = run({"augment-preview", "--bank", (dir / "bank").string(), "--input", (dir / "in").string(),
                      "--output", (dir / "out").string(), "--seed", "3", "--limit", "2"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto draws = json::parse(testing_support::slurp(dir / "out" / "draws.json"));
  EXPECT_EQ(draws.at("draws").size(), 2u);
}

TEST(Cli, Analyze) {
  TempDir dir("cli");
  { std::ofstream(dir / "r.csv") << "model,corruption,severity,metric,value\na,coma,3,acc,40\nb,coma,3,acc,30\n"
                                    "c,coma,3,acc,20\na,astig,3,acc,35\nb,astig,3,acc,36\nc,astig,3,acc,10\n"; }
  { std::ofstream(dir / "c.csv") << "model,metric,clean_value\na,acc,80\nb,acc,75\nc,acc,70\n"; }
  const auto r = run({"analyze", "--results", (dir / "r.csv").string(), "--clean", (dir / "c.csv").string(), "--group",
                      "model", "--kendall-severity", "3", "--metric", "acc", "--output", (dir / "out").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  for (const char* f : {"aggregate.csv", "deltas.csv", "delta_aggregate.json", "kendall.json"})
    EXPECT_TRUE(std::filesystem::exists(dir / "out" / f)) << f;
  const auto tau = json::parse(testing_support::slurp(dir / "out" / "kendall.json"));
  ASSERT_EQ(tau.size(), 1u);
  EXPECT_NEAR(tau[0].at("tau_b").get<double>(), 1.0 / 3.0, 1e-12);
  EXPECT_EQ(run({"analyze", "--results", (dir / "r.csv").string(), "--group", "colour", "--output",
                 (dir / "o2").string()}).code,
            cli::kExitUsage);
}

TEST(Cli, LensIngestSelectProject) {
  TempDir dir("cli");
  for (int i = 0; i < 3; ++i) {
    const std::string id = "L" + std::to_string(i);
    write_virtual_lens(dir / "raw" / id, id, 0.5 + i);
    const auto r = run({"lens-ingest", "--lens", (dir / "raw" / id).string(), "--output", (dir / "proc" / id).string()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(std::filesystem::exists(dir / "proc" / id / "record.json"));
  }
  auto r = run({"lens-select", "--lens-root", (dir / "proc").string(), "-n", "2"});
  ASSERT_EQ(r.code, 0) << r.err;
  // Quality is relative to each lens's own pitch, so the extremes are read back rather than assumed.
  std::vector<std::pair<double, std::string>> q;
  for (const char* id : {"L0", "L1", "L2"})
    q.emplace_back(json::parse(testing_support::slurp(dir / "proc" / id / "meta.json")).at("quality"), id);
  std::sort(q.begin(), q.end());
  EXPECT_NE(r.out.find("," + q.front().second + ","), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("," + q.back().second + ","), std::string::npos) << r.out;
  EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 3);
  EXPECT_EQ(run({"lens-select", "--lens-root", (dir / "raw").string(), "-n", "2"}).code, cli::kExitModuleError);

  r = run({"lens-project", "--lens", (dir / "raw" / "L1").string(), "--field", "0.7"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "id,field,azimuth,defocus_spherical,astigmatism,coma,magnitude");
  EXPECT_EQ(run({"lens-project", "--lens", (dir / "raw" / "L1").string(), "--field", "0.4"}).code,
            cli::kExitModuleError);

  testing_support::write_toy_dataset(dir / "in", 2, 40, 40);
  r = run({"corrupt", "--input", (dir / "in").string(), "--output", (dir / "o").string(), "--task", "det",
           "--source", "lens:L1:0.5", "--lens-root", (dir / "proc").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = json::parse(testing_support::slurp(dir / "o" / "manifest.json"));
  EXPECT_EQ(j.at("records")[0].at("kernel").get<std::string>().rfind("L1/field_50_az_", 0), 0u);
}

TEST(Cli, EnvironmentConfigTakesPrecedence) {
  TempDir dir("cli");
  { std::ofstream(dir / "bad.json") << R"({"nope": 1})"; }
  { std::ofstream(dir / "good.json") << R"({"workers": 2})"; }
  const std::string k = (dir / "k.psfk").string();
  ::setenv("ABERRATE_CONFIG", (dir / "bad.json").string().c_str(), 1);
  const auto r = run({"--config", (dir / "good.json").string(), "gen-kernel", "--output", k});
  ::unsetenv("ABERRATE_CONFIG");
  EXPECT_EQ(r.code, cli::kExitModuleError);
  EXPECT_NE(r.err.find("nope"), std::string::npos);
  EXPECT_EQ(run({"--config", (dir / "good.json").string(), "gen-kernel", "--output", k}).code, 0);
}
