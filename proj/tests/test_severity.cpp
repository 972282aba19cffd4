#include "aberrate/severity.hpp"

#include <cmath>
#include <fstream>

#include <gtest/gtest.h>

#include "aberrate/config.hpp"
#include "aberrate/error.hpp"
#include "aberrate/mtf.hpp"
#include "aberrate/psfpack.hpp"
#include "support.hpp"

using namespace aberrate;
using severity::DiskKernelSpec;

namespace {

double lum_mtf50(const Psf& p) { return mtf::summarize(mtf::mtf_from_psf(p, -1)).mean.mtf50; }

const severity::BankConfig& bank_config() {
  static const severity::BankConfig cfg = ToolConfig::defaults().bank;
  return cfg;
}

double inter_channel_l1(const Psf& p) {
  double d = 0.0;
  for (int y = 0; y < p.height(); ++y)
    for (int x = 0; x < p.width(); ++x)
      d += std::abs(p.kernel.at(0, y, x) - p.kernel.at(1, y, x)) + std::abs(p.kernel.at(1, y, x) - p.kernel.at(2, y, x));
  return d;
}

}  // namespace

TEST(Disk, ZeroRadiusIsIdentity) {
  const Psf p = severity::disk_kernel({0.0, 0.0});
  ASSERT_EQ(p.height(), 25);
  for (int c = 0; c < 3; ++c) {
    EXPECT_EQ(p.kernel.at(c, 12, 12), 1.0);
    EXPECT_EQ(p.kernel.channel_sum(c), 1.0);
  }
}

TEST(Disk, RadiusThreeFitsSevenBySeven) {
  const Psf p = severity::disk_kernel({3.0, 0.0});
  for (int c = 0; c < 3; ++c) {
    EXPECT_NEAR(p.kernel.channel_sum(c), 1.0, 1e-12);
    for (int y = 0; y < 25; ++y)
      for (int x = 0; x < 25; ++x)
        if (std::abs(y - 12) > 3 || std::abs(x - 12) > 3) {
          EXPECT_EQ(p.kernel.at(c, y, x), 0.0);
        }
  }
}

TEST(Disk, MonochromaticAndNormalized) {
  for (const auto& spec : bank_config().baselines) {
    const Psf p = severity::disk_kernel(spec);
    EXPECT_EQ(inter_channel_l1(p), 0.0);
    for (int c = 0; c < 3; ++c) EXPECT_NEAR(p.kernel.channel_sum(c), 1.0, 1e-12);
  }
}

TEST(Disk, LargerRadiusBlursMore) {
  EXPECT_LT(lum_mtf50(severity::disk_kernel({6.0, 0.5})), lum_mtf50(severity::disk_kernel({3.0, 0.1})));
}

TEST(Disk, BaselineMtf50MatchesIndependentComputation) {
  // Frozen from a separate NumPy implementation of the same disk construction and MTF pipeline.
  const double expected[] = {0.1153, 0.0873, 0.0582, 0.0443, 0.0350};
  for (int s = 0; s < 5; ++s)
    EXPECT_NEAR(lum_mtf50(severity::disk_kernel(bank_config().baselines[static_cast<std::size_t>(s)])), expected[s], 5e-4)
        << "severity " << s + 1;
}

TEST(Disk, TooLargeRejected) {
  EXPECT_THROW(severity::disk_kernel({12.0, 0.5}), Error);
  EXPECT_THROW(severity::disk_kernel({13.0, 0.0}), Error);
  EXPECT_THROW(severity::disk_kernel({-1.0, 0.0}), Error);
}

TEST(Families, PairsAreFixed) {
  using severity::Family;
  EXPECT_EQ(severity::family_info(Family::astigmatism).fringes, (std::array<int, 2>{5, 6}));
  EXPECT_EQ(severity::family_info(Family::coma).fringes, (std::array<int, 2>{7, 8}));
  EXPECT_EQ(severity::family_info(Family::defocus_spherical).fringes, (std::array<int, 2>{4, 9}));
  EXPECT_EQ(severity::family_info(Family::trefoil).fringes, (std::array<int, 2>{10, 11}));
  EXPECT_EQ(severity::family_by_name("coma").family, Family::coma);
  EXPECT_THROW(severity::family_by_name("tilt"), Error);
  EXPECT_EQ(severity::bank_file_name(Family::coma, 3, 1), "coma_s3_m1.psfk");
}

TEST(Objective, RejectsBadWeights) {
  EXPECT_THROW((severity::MatchObjective{0, 0, 0, 0, 40}).validate(), Error);
  EXPECT_THROW((severity::MatchObjective{-1, 1, 0, 0, 40}).validate(), Error);
}

TEST(Objective, SelfMatchIsZero) {
  const Psf base = severity::disk_kernel({4.0, 0.5});
  const severity::ObjectiveEvaluator ev(base, bank_config().objective);
  const auto t = ev.evaluate(base);
  EXPECT_EQ(t.mtf50_rel, 0.0);
  EXPECT_EQ(t.auc_rel, 0.0);
  EXPECT_NEAR(t.ssim, 1.0, 1e-12);
  EXPECT_NEAR(t.total, 0.0, 1e-12);
}

TEST(Chart, SlantedEdgeHasTwoLevels) {
  const Image chart = severity::slanted_edge_chart(224);
  ASSERT_EQ(chart.height(), 224);
  double lo = 255, hi = 0;
  for (double v : chart.data()) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  EXPECT_NEAR(lo, 51.0, 1e-9);
  EXPECT_NEAR(hi, 204.0, 1e-9);
}

TEST(Footprint, CentredNormalizedFootprint) {
  CoefficientSet c = baseline_chromatic_coeffs();
  c.add_all(7, 2.0);
  const Psf k = severity::footprint_kernel(c, bank_config().settings);
  ASSERT_EQ(k.height(), 25);
  ASSERT_EQ(k.width(), 25);
  for (int ch = 0; ch < 3; ++ch) EXPECT_NEAR(k.kernel.channel_sum(ch), 1.0, 1e-6);
  const auto com = center_of_mass(k);
  EXPECT_LE(std::abs(com.y - 12.0), 0.5);
  EXPECT_LE(std::abs(com.x - 12.0), 0.5);
  EXPECT_GT(inter_channel_l1(k), 0.0);
}

TEST(Match, IdentityBaselineKeepsZeroAberration) {
  const Psf identity = severity::disk_kernel({0.0, 0.0});
  const auto r = severity::match_kernel(identity, severity::family_info(severity::Family::astigmatism), {},
                                        bank_config().objective, bank_config().settings, {0.0, 0.0});
  EXPECT_EQ(r.members[0].offset, 0.0);
  EXPECT_EQ(r.members[1].offset, 0.0);
  EXPECT_TRUE(r.no_progress);
  EXPECT_TRUE(r.coefficients[0].empty() || r.coefficients[0].get(0, 5) == 0.0);
}

TEST(Match, DefocusMatchesDiskWithinToleranceByRecomputation) {
  const auto& cfg = bank_config();
  const Psf base = severity::disk_kernel(cfg.baselines[2]);
  const auto& fam = severity::family_info(severity::Family::defocus_spherical);
  const auto r = severity::match_kernel(base, fam, baseline_chromatic_coeffs(), cfg.objective, cfg.settings);
  const double target = lum_mtf50(base);
  for (int m = 0; m < 2; ++m) {
    const Psf k = severity::footprint_kernel(r.coefficients[static_cast<std::size_t>(m)], cfg.settings);
    const double got = lum_mtf50(k);
    EXPECT_LT(std::abs(got - target) / target, cfg.settings.tolerance) << "member " << m;
    EXPECT_NEAR(got, r.members[static_cast<std::size_t>(m)].terms.mtf50, 1e-12);
  }
  for (std::size_t i = 1; i < r.trace.size(); ++i) EXPECT_LE(r.trace[i], r.trace[i - 1]);
  // The offsets act on the pair's own indices only.
  EXPECT_EQ(r.coefficients[0].get(0, 9), baseline_chromatic_coeffs().get(0, 9));
  EXPECT_EQ(r.coefficients[1].get(0, 4), baseline_chromatic_coeffs().get(0, 4));
}

TEST(Match, AstigmatismSeverityThreeWithinThresholdAndDeterministic) {
  const auto& cfg = bank_config();
  const Psf base = severity::disk_kernel(cfg.baselines[2]);
  const auto& fam = severity::family_info(severity::Family::astigmatism);
  const auto a = severity::match_kernel(base, fam, baseline_chromatic_coeffs(), cfg.objective, cfg.settings);
  for (const auto& m : a.members) EXPECT_LE(m.terms.mtf50_rel, cfg.settings.tolerance);
  for (std::size_t i = 1; i < a.trace.size(); ++i) EXPECT_LE(a.trace[i], a.trace[i - 1]);
  const auto b = severity::match_kernel(base, fam, baseline_chromatic_coeffs(), cfg.objective, cfg.settings);
  EXPECT_EQ(a.members[0].offset, b.members[0].offset);
  EXPECT_EQ(a.members[1].offset, b.members[1].offset);
  EXPECT_EQ(a.trace, b.trace);
  const auto ka = psfpack::encode(severity::footprint_kernel(a.coefficients[0], cfg.settings));
  const auto kb = psfpack::encode(severity::footprint_kernel(b.coefficients[0], cfg.settings));
  EXPECT_EQ(ka, kb);
}

TEST(Match, InitialOffsetReachesTarget) {
  const auto& cfg = bank_config();
  const Psf base = severity::disk_kernel(cfg.baselines[1]);
  const severity::ObjectiveEvaluator ev(base, cfg.objective, cfg.settings.chart_size);
  const double a = severity::initial_offset(ev, baseline_chromatic_coeffs(), 7, cfg.settings);
  EXPECT_GT(a, 0.0);
  CoefficientSet c = baseline_chromatic_coeffs();
  c.add_all(7, a);
  const double got = lum_mtf50(severity::footprint_kernel(c, cfg.settings));
  EXPECT_NEAR(got, ev.baseline_mtf50(), 1e-3 * ev.baseline_mtf50());
}

TEST(Bank, WriteReadRoundTripAndIntegrity) {
  testing_support::TempDir dir("bank");
  severity::SeverityBank bank;
  for (const auto& fam : severity::families())
    for (int s = 1; s <= 5; ++s)
      for (int m = 0; m < 2; ++m) {
        severity::BankEntry e;
        e.family = fam.family;
        e.severity = s;
        e.pair_member = m;
        e.kernel = severity::disk_kernel({static_cast<double>(s), 0.5});
        e.match.fringe = fam.fringes[static_cast<std::size_t>(m)];
        bank.entries.push_back(e);
      }
  severity::write_bank(bank, dir.path(), {{"note", "test"}});
  const auto back = severity::read_bank(dir.path());
  ASSERT_EQ(back.entries.size(), 40u);
  EXPECT_EQ(back.manifest.at("kernel_count"), 40);
  EXPECT_EQ(psfpack::encode(back.at(severity::Family::trefoil, 4, 1).kernel),
            psfpack::encode(bank.at(severity::Family::trefoil, 4, 1).kernel));
  for (const auto& k : back.manifest.at("kernels")) {
    for (const char* key : {"family", "severity", "pair_member", "coefficients", "objective_residual", "psfpack_path",
                            "sha256"})
      EXPECT_TRUE(k.contains(key)) << key;
  }
  {
    std::ofstream f(dir / "coma_s2_m0.psfk", std::ios::binary | std::ios::app);
    f << 'x';
  }
  try {
    severity::read_bank(dir.path());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), "integrity");
  }
}
