#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "fourierhead/model.hpp"
#include "fourierhead/smoothness.hpp"
#include "fourierhead/synthetic.hpp"

namespace fourierhead {

struct SweepSpec {
  std::vector<DatasetKind> datasets = {DatasetKind::kGaussian, DatasetKind::kGmm2,
                                       DatasetKind::kBeta};
  std::vector<HeadKind> heads = {HeadKind::kLinear, HeadKind::kFourier};
  std::vector<std::size_t> frequencies = {2, 4, 6, 8, 10, 12, 14, 16, 18, 20};
  std::vector<double> gammas = {0.0, 1e-6};
  std::vector<std::uint64_t> seeds = {0, 1, 2, 3};
  Objective objective = Objective::kCrossEntropy;
  TrainConfig train;      // seed/objective/gamma fields overridden per cell
  DatasetSpec dataset;    // kind/seed overridden per cell
  std::size_t jobs = 1;

  void validate() const;
};

struct SweepCell {
  DatasetKind dataset = DatasetKind::kGaussian;
  HeadKind head = HeadKind::kLinear;
  std::size_t frequencies = 0;  // fourier head only
  double gamma = 0.0;           // fourier head only
  std::uint64_t seed = 0;
};

struct SweepRow {
  SweepCell cell;
  EvalReport report;
  bool failed = false;
  std::string error;
};

// s(N) = C1 - C2 / N^(2t-1), fitted by least squares with the decay exponent
// t profiled over a grid (t >= 2).
struct ScalingFit {
  double c1 = 0.0;
  double c2 = 0.0;
  double t = 2.0;
  double residual = 0.0;  // rms
  bool valid = false;     // c2 > 0 and residual small relative to the data spread
};

ScalingFit fit_scaling_law(const std::vector<double>& frequencies,
                           const std::vector<double>& smoothness_values);

struct SweepResult {
  SweepSpec spec;
  std::vector<SweepRow> rows;  // deterministic cell order regardless of jobs
  std::map<std::string, ScalingFit> smoothness_fits;  // per dataset, fourier cells at gamma 0
};

SweepResult run_sweep(const SweepSpec& spec);

// One (dataset, head, N, gamma, seed) training cell.
SweepRow run_cell(const SweepSpec& spec, const SweepCell& cell);
TrainedModel train_cell(const SweepSpec& spec, const SweepCell& cell, Dataset* dataset_out);

// Appendix-style validation of the smoothness metric: square-wave harmonic
// sweeps under both discrepancies plus a colored-noise bootstrap compared
// against spectral entropy.
struct SmoothnessValidationConfig {
  std::size_t harmonics = 100;      // L2 monotonicity scan
  std::size_t l1_harmonics = 140;   // L1 scan; its first inversion sits past 100
  std::size_t square_samples = 2048;
  std::size_t trials = 1000;
  std::size_t noise_length = 1024;
  std::size_t sigma_max = 1000;
  std::uint64_t seed = 0;
};

struct NoiseStats {
  double smoothness_mean = 0.0, smoothness_std = 0.0;
  double entropy_mean = 0.0, entropy_std = 0.0;
};

struct SmoothnessValidationReport {
  SmoothnessValidationConfig config;
  std::vector<double> square_l2;  // index h-1 = h harmonics
  std::vector<double> square_l1;
  bool l2_strictly_increasing = false;
  bool l1_inversion_above_80 = false;
  std::vector<std::pair<NoiseKind, NoiseStats>> noise;  // brown, pink, white, blue
  bool noise_smoothness_ordered = false;   // brown < pink < white < blue on means
  bool entropy_ordering_fails = false;     // the same ordering does not hold for entropy
  bool all_passed = false;
};

SmoothnessValidationReport run_smoothness_validation(const SmoothnessValidationConfig& config);

nlohmann::json sweep_spec_to_json(const SweepSpec& spec);
nlohmann::json scaling_fit_to_json(const ScalingFit& fit);
nlohmann::json smoothness_validation_to_json(const SmoothnessValidationReport& report);

// CSV with one row per sweep cell, '#' header comments carrying the resolved
// configuration, stable row order and canonical float formatting.
void write_sweep_csv(const SweepResult& result, const std::string& path);

// Predicted vs. true PMFs for a few test inputs, for plotting.
void write_pmf_samples_csv(const TrainedModel& trained, const Dataset& dataset,
                           std::size_t sample_count, const std::string& path);

}  // namespace fourierhead
