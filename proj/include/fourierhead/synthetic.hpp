#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "fourierhead/bins.hpp"
#include "fourierhead/random.hpp"

namespace fourierhead {

enum class DatasetKind { kGaussian, kGmm2, kBeta };

std::string to_string(DatasetKind k);
DatasetKind dataset_kind_from_string(const std::string& s);

struct DatasetSpec {
  DatasetKind kind = DatasetKind::kGaussian;
  double interval_lo = -0.8;  // I = [-0.8, 0.8]
  double interval_hi = 0.8;
  double sigma_sq = 0.01;
  std::size_t size = 5000;
  double train_fraction = 0.8;
  std::size_t num_bins = 50;  // uniform over [-1, 1]
  std::uint64_t seed = 0;
};

struct Triple {
  double x = 0.0, y = 0.0, z = 0.0;
  std::size_t qx = 0, qy = 0, qz = 0;
};

// Closed-form conditional density of z given (x, y). Sampling rejects draws
// outside [-1, 1], so the gaussian and gmm2 densities carry the matching
// truncation normalizer; the beta density is supported inside [-1, 1] as is.
class TrueConditional {
 public:
  TrueConditional(DatasetKind kind, double x, double y, double sigma_sq);

  double density(double z) const;

  // Kind-aware quadrature of density over [-1, 1]; tanh-sinh absorbs the
  // integrable singularities of the beta case.
  double integrate() const;

  DatasetKind kind() const { return kind_; }

 private:
  DatasetKind kind_;
  double x_, y_, sigma_;
  double trunc_mass_ = 1.0;   // gaussian/gmm2 normalizer over [-1, 1]
  double beta_a_ = 1.0, beta_b_ = 1.0, log_beta_norm_ = 0.0;
};

struct Dataset {
  DatasetSpec spec;
  BinLayout bins;
  std::vector<Triple> triples;  // seeded shuffle applied; first train_count entries train
  std::size_t train_count = 0;

  std::size_t test_count() const { return triples.size() - train_count; }
  const Triple& test_triple(std::size_t i) const { return triples[train_count + i]; }
  TrueConditional true_conditional(const Triple& t) const {
    return TrueConditional(spec.kind, t.x, t.y, spec.sigma_sq);
  }
};

Dataset generate(const DatasetSpec& spec);

// Same sampling stream, quantized by a caller-provided layout instead of the
// default uniform one.
Dataset generate(const DatasetSpec& spec, const BinLayout& bins);

// Density evaluated at the bin centers, scaled by bin width and renormalized;
// the KL reference distribution.
std::vector<double> quantized_true_conditional(const TrueConditional& tc, const BinLayout& bins);

void write_dataset_csv(const Dataset& dataset, const std::string& csv_path);
nlohmann::json dataset_spec_to_json(const DatasetSpec& spec);

}  // namespace fourierhead
