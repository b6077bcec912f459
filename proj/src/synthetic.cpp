#include "fourierhead/synthetic.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "fourierhead/quadrature.hpp"
#include "fourierhead/textio.hpp"
#include "fourierhead/version.hpp"

namespace fourierhead {

namespace {

constexpr double kMinBetaShape = 1e-8;

double normal_pdf(double z, double mean, double sigma) {
  const double t = (z - mean) / sigma;
  return std::exp(-0.5 * t * t) / (sigma * 2.506628274631000502415765);
}

double normal_cdf(double z, double mean, double sigma) {
  return 0.5 * (1.0 + std::erf((z - mean) / (sigma * 1.414213562373095048801689)));
}

double interval_mass(double mean, double sigma) {
  return normal_cdf(1.0, mean, sigma) - normal_cdf(-1.0, mean, sigma);
}

double sample_truncated_normal(SplitMix64& rng, double mean, double sigma) {
  for (;;) {
    const double v = rng.normal(mean, sigma);
    if (v >= -1.0 && v <= 1.0) return v;
  }
}

}  // namespace

std::string to_string(DatasetKind k) {
  switch (k) {
    case DatasetKind::kGaussian: return "gaussian";
    case DatasetKind::kGmm2: return "gmm2";
    case DatasetKind::kBeta: return "beta";
  }
  return "?";
}

DatasetKind dataset_kind_from_string(const std::string& s) {
  if (s == "gaussian") return DatasetKind::kGaussian;
  if (s == "gmm2" || s == "gmm-2") return DatasetKind::kGmm2;
  if (s == "beta") return DatasetKind::kBeta;
  throw std::invalid_argument("unknown dataset kind: " + s);
}

TrueConditional::TrueConditional(DatasetKind kind, double x, double y, double sigma_sq)
    : kind_(kind), x_(x), y_(y), sigma_(std::sqrt(sigma_sq)) {
  switch (kind_) {
    case DatasetKind::kGaussian:
      trunc_mass_ = interval_mass(y_, sigma_);
      break;
    case DatasetKind::kGmm2:
      trunc_mass_ = 0.5 * interval_mass(x_, sigma_) + 0.5 * interval_mass(y_, sigma_);
      break;
    case DatasetKind::kBeta:
      beta_a_ = std::max(100.0 * std::abs(x_), kMinBetaShape);
      beta_b_ = std::max(100.0 * std::abs(y_), kMinBetaShape);
      log_beta_norm_ = std::lgamma(beta_a_) + std::lgamma(beta_b_) - std::lgamma(beta_a_ + beta_b_);
      break;
  }
}

double TrueConditional::density(double z) const {
  if (z < -1.0 || z > 1.0) return 0.0;
  switch (kind_) {
    case DatasetKind::kGaussian:
      return normal_pdf(z, y_, sigma_) / trunc_mass_;
    case DatasetKind::kGmm2:
      return (0.5 * normal_pdf(z, x_, sigma_) + 0.5 * normal_pdf(z, y_, sigma_)) / trunc_mass_;
    case DatasetKind::kBeta: {
      const double w = std::abs(z);
      if (w <= 0.0 || w >= 1.0) {
        // Limits of w^(a-1) (1-w)^(b-1); only hit on the boundary of the support.
        const bool singular = (w <= 0.0) ? (beta_a_ < 1.0) : (beta_b_ < 1.0);
        if (singular) return std::numeric_limits<double>::infinity();
        const bool flat = (w <= 0.0) ? (beta_a_ == 1.0) : (beta_b_ == 1.0);
        return flat ? 0.5 * std::exp(-log_beta_norm_) : 0.0;
      }
      const double log_pdf =
          (beta_a_ - 1.0) * std::log(w) + (beta_b_ - 1.0) * std::log1p(-w) - log_beta_norm_;
      return 0.5 * std::exp(log_pdf);
    }
  }
  return 0.0;
}

double TrueConditional::integrate() const {
  if (kind_ == DatasetKind::kBeta) {
    // Both signs carry half the beta mass. Split at 1/2 and map each possibly
    // singular endpoint to the origin, where node offsets stay exact down to
    // subnormals (offsets from 1 round away at one ulp).
    const auto lower = [this](double w) {
      return std::exp((beta_a_ - 1.0) * std::log(w) + (beta_b_ - 1.0) * std::log1p(-w) -
                      log_beta_norm_);
    };
    const auto upper = [this](double v) {
      return std::exp((beta_b_ - 1.0) * std::log(v) + (beta_a_ - 1.0) * std::log1p(-v) -
                      log_beta_norm_);
    };
    return tanh_sinh_integrate(lower, 0.0, 0.5) + tanh_sinh_integrate(upper, 0.0, 0.5);
  }
  const auto f = [this](double z) { return density(z); };
  return tanh_sinh_integrate(f, -1.0, 1.0);
}

Dataset generate(const DatasetSpec& spec) {
  return generate(spec, uniform_bins(spec.num_bins, -1.0, 1.0));
}

Dataset generate(const DatasetSpec& spec, const BinLayout& bins) {
  if (spec.size == 0) throw std::invalid_argument("generate: empty dataset requested");
  if (!(spec.interval_lo < spec.interval_hi)) throw std::invalid_argument("generate: bad interval");
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0)) {
    throw std::invalid_argument("generate: train_fraction must be in (0,1)");
  }

  Dataset dataset;
  dataset.spec = spec;
  dataset.bins = bins;

  SplitMix64 rng(spec.seed);
  const double sigma = std::sqrt(spec.sigma_sq);
  dataset.triples.reserve(spec.size);
  for (std::size_t i = 0; i < spec.size; ++i) {
    Triple t;
    t.x = rng.uniform(spec.interval_lo, spec.interval_hi);
    switch (spec.kind) {
      case DatasetKind::kGaussian:
        t.y = sample_truncated_normal(rng, t.x, sigma);
        t.z = sample_truncated_normal(rng, t.y, sigma);
        break;
      case DatasetKind::kGmm2: {
        t.y = rng.uniform(spec.interval_lo, spec.interval_hi);
        for (;;) {
          const double center = (rng.next_u64() & 1ull) ? t.x : t.y;
          const double z = rng.normal(center, sigma);
          if (z >= -1.0 && z <= 1.0) {
            t.z = z;
            break;
          }
        }
        break;
      }
      case DatasetKind::kBeta: {
        t.y = sample_truncated_normal(rng, t.x, sigma);
        const double a = std::max(100.0 * std::abs(t.x), kMinBetaShape);
        const double b = std::max(100.0 * std::abs(t.y), kMinBetaShape);
        t.z = rng.sign() * rng.beta(a, b);
        break;
      }
    }
    t.qx = quantize(t.x, dataset.bins);
    t.qy = quantize(t.y, dataset.bins);
    t.qz = quantize(t.z, dataset.bins);
    dataset.triples.push_back(t);
  }

  // Fisher-Yates with the same pinned stream, then a deterministic 80-20 cut.
  for (std::size_t i = dataset.triples.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.below(i));
    std::swap(dataset.triples[i - 1], dataset.triples[j]);
  }
  dataset.train_count =
      static_cast<std::size_t>(std::floor(spec.train_fraction * static_cast<double>(spec.size)));
  return dataset;
}

std::vector<double> quantized_true_conditional(const TrueConditional& tc, const BinLayout& bins) {
  std::vector<double> probs(bins.size());
  double total = 0.0;
  for (std::size_t k = 0; k < bins.size(); ++k) {
    probs[k] = tc.density(bins.centers[k]) * bins.width(k);
    total += probs[k];
  }
  if (!(total > 0.0)) {
    throw std::runtime_error("quantized_true_conditional: density vanishes at every bin center");
  }
  for (double& p : probs) p /= total;
  return probs;
}

void write_dataset_csv(const Dataset& dataset, const std::string& csv_path) {
  std::ofstream out(csv_path);
  if (!out) throw std::runtime_error("cannot open " + csv_path);
  out << "x,y,z,qx,qy,qz\n";
  for (const Triple& t : dataset.triples) {
    out << format_double(t.x) << ',' << format_double(t.y) << ',' << format_double(t.z) << ','
        << t.qx << ',' << t.qy << ',' << t.qz << '\n';
  }
  // Sidecar with the resolved generation parameters.
  nlohmann::json sidecar;
  sidecar["spec"] = dataset_spec_to_json(dataset.spec);
  sidecar["bins"] = bin_layout_to_json(dataset.bins);
  sidecar["train_count"] = dataset.train_count;
  sidecar["version"] = kVersion;
  std::ofstream side(csv_path + ".json");
  if (!side) throw std::runtime_error("cannot open " + csv_path + ".json");
  side << sidecar.dump(2) << '\n';
}

nlohmann::json dataset_spec_to_json(const DatasetSpec& spec) {
  return nlohmann::json{{"kind", to_string(spec.kind)},
                        {"interval", {spec.interval_lo, spec.interval_hi}},
                        {"sigma_sq", spec.sigma_sq},
                        {"size", spec.size},
                        {"train_fraction", spec.train_fraction},
                        {"num_bins", spec.num_bins},
                        {"seed", spec.seed}};
}

}  // namespace fourierhead
