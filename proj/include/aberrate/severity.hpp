#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "aberrate/image.hpp"
#include "aberrate/mtf.hpp"
#include "aberrate/psf.hpp"

namespace aberrate::severity {

inline constexpr int kSeverities = 5;
inline constexpr int kFootprint = 25;

// Filled disk optionally smoothed by a small Gaussian, as in the defocus-blur corruption of the
// common-corruptions benchmark.
struct DiskKernelSpec {
  double radius = 0.0;
  double alias_sigma = 0.0;
};

// Monochromatic disk on a kFootprint x kFootprint grid, identical in all three channels.
// Throws Error{"range"} when the smoothed disk does not fit.
Psf disk_kernel(const DiskKernelSpec& spec);

enum class Family { astigmatism, coma, defocus_spherical, trefoil };

struct FamilyInfo {
  Family family;
  std::string_view name;
  std::array<int, 2> fringes;  // pair member 0 and 1
};

const std::array<FamilyInfo, 4>& families();
const FamilyInfo& family_info(Family family);
// Throws Error{"usage"} for unknown names.
const FamilyInfo& family_by_name(std::string_view name);

struct MatchObjective {
  double w_mtf50 = 1.0;
  double w_auc = 0.0;
  double w_ssim = 0.0;
  double w_psnr = 0.0;
  double psnr_target_db = 40.0;

  void validate() const;
};

// Everything the matcher needs besides the objective weights.
struct MatchSettings {
  PsfSynthesisConfig synthesis;  // crop_size is the kernel footprint
  WavelengthTriple wavelengths;
  int candidate_crop = 63;       // synthesized larger, then centred and cut to the footprint
  double step = 0.1;             // coordinate-descent step in waves
  double min_step = 0.1 / 32.0;  // steps are halved down to this once 'step' stops improving
  double sweep_max = 5.0;        // initial-guess sweep range in waves
  int bisection_iterations = 30;
  int max_evaluations = 400;
  double tolerance = 0.05;  // relative orientation-averaged MTF50 mismatch
  int chart_size = 224;

  void validate() const;
};

struct ObjectiveTerms {
  double mtf50 = 0.0;      // orientation-averaged MTF50 of the candidate (cycles/px)
  double mtf50_rel = 0.0;  // |dMTF50| / MTF50_baseline
  double auc_rel = 0.0;    // mean over orientations of |dAUC|, relative to the baseline mean AUC
  double ssim = 1.0;
  double psnr_db = 0.0;
  double total = 0.0;
};

// Precomputes everything about the baseline so candidates can be scored cheaply.
class ObjectiveEvaluator {
 public:
  ObjectiveEvaluator(const Psf& baseline, const MatchObjective& objective, int chart_size = 224);

  ObjectiveTerms evaluate(const Psf& candidate) const;
  double baseline_mtf50() const { return baseline_summary_.mean.mtf50; }

 private:
  MatchObjective objective_;
  mtf::OrientedSummary baseline_summary_;
  Image chart_;
  Image baseline_blurred_;
};

// Grey square rotated by a few degrees on a darker background, 8-bit value range, 3 channels.
Image slanted_edge_chart(int size);

// Kernel for `coeffs` at the footprint size: synthesized at candidate_crop, shifted so the centre
// of mass is within 0.5 px of the centre, cut to the footprint, renormalized.
Psf footprint_kernel(const CoefficientSet& coeffs, const MatchSettings& settings);

struct MemberMatch {
  int fringe = 0;
  double initial_offset = 0.0;
  double offset = 0.0;
  ObjectiveTerms terms;
};

struct MatchResult {
  // init plus each member's offset on that member's own Fringe index.
  std::array<CoefficientSet, 2> coefficients;
  std::array<MemberMatch, 2> members;
  double objective = 0.0;      // summed over both members
  std::vector<double> trace;   // objective after the start point and every accepted step
  bool no_progress = false;    // no descent step improved on the initial guess
  int evaluations = 0;
};

// Offset (waves) along `fringe` whose kernel's MTF50 first reaches the baseline's, found by a
// sweep in `step` increments refined by bisection. Falls back to the best sweep point if the
// target is never reached.
double initial_offset(const ObjectiveEvaluator& evaluator, const CoefficientSet& init, int fringe,
                      const MatchSettings& settings);

// Coordinate descent over the two pair-member offsets, starting from the supplied initial guesses.
// Every accepted step strictly lowers the summed objective.
MatchResult match_kernel(const Psf& baseline, const FamilyInfo& family, const CoefficientSet& init,
                         const MatchObjective& objective, const MatchSettings& settings,
                         std::array<double, 2> start_offsets);

// Same, with the initial guesses from initial_offset().
MatchResult match_kernel(const Psf& baseline, const FamilyInfo& family, const CoefficientSet& init,
                         const MatchObjective& objective, const MatchSettings& settings);

struct BankEntry {
  Family family;
  int severity = 0;    // 1..5
  int pair_member = 0;
  Psf kernel;
  MemberMatch match;
  double baseline_mtf50 = 0.0;
  std::vector<double> trace;  // descent trace of the pair; not persisted
  std::filesystem::path psfpack_path;  // relative to the bank directory
  std::string sha256;
};

struct SeverityBank {
  std::vector<BankEntry> entries;  // ordered by family, severity, pair member
  nlohmann::json manifest;

  const BankEntry& at(Family family, int severity, int pair_member) const;
};

struct BankConfig {
  std::array<DiskKernelSpec, kSeverities> baselines;
  MatchObjective objective;
  MatchSettings settings;
  int workers = 1;
};

std::string bank_file_name(Family family, int severity, int pair_member);

// Matches every (family, severity) against its disk baseline, in parallel, and assembles the 40
// kernels. Throws Error{"match_failed"} listing every kernel outside the tolerance.
SeverityBank build_severity_bank(const BankConfig& config);

// Writes the PSFPACK files and manifest.json into `dir`, filling in paths and hashes.
void write_bank(SeverityBank& bank, const std::filesystem::path& dir, const nlohmann::json& config_echo);

// Reads manifest.json and the kernels it lists, verifying hashes.
SeverityBank read_bank(const std::filesystem::path& dir);

}  // namespace aberrate::severity
