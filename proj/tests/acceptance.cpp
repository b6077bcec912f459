// Acceptance suite: exercises every release gate end to end and prints one
// PASS/FAIL line per criterion. Returns nonzero if any criterion fails.
//
//  1-5  fast property checks (density validity, bin-sum identity, smoothness
//       axioms, gradient checks, quantization)
//  6-7  square-wave and colored-noise studies
//  8-11 synthetic-dataset training comparisons across the four heads
//
// Everything is seeded and deterministic; a rerun reproduces identical
// numbers.

#include <cmath>
#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#include "fourierhead/bins.hpp"
#include "fourierhead/density.hpp"
#include "fourierhead/experiments.hpp"
#include "fourierhead/head.hpp"
#include "fourierhead/model.hpp"
#include "fourierhead/quadrature.hpp"
#include "fourierhead/random.hpp"
#include "fourierhead/smoothness.hpp"
#include "fourierhead/synthetic.hpp"

using namespace fourierhead;

namespace {

int g_failures = 0;

void report(int number, const std::string& name, bool ok, const std::string& detail) {
  std::printf("[%s] %2d. %s — %s\n", ok ? "PASS" : "FAIL", number, name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failures;
}

std::vector<Complex> random_coeffs(SplitMix64& rng, std::size_t count) {
  std::vector<Complex> a(count);
  for (auto& v : a) v = Complex(rng.normal(), rng.normal());
  return a;
}

// --- criterion 1: density validity -----------------------------------------

void criterion_density_validity() {
  SplitMix64 rng(101);
  double min_p = 1e300;
  double worst_integral = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng.below(12);
    const FourierDensity d = normalize(autocorrelate(random_coeffs(rng, n + 1)));
    for (int i = 0; i <= 2000; ++i) {
      min_p = std::min(min_p, eval_density(d, -1.0 + 2.0 * i / 2000.0));
    }
    const double integral =
        simpson_integrate([&](double z) { return eval_density(d, z); }, -1.0, 1.0, 10001);
    worst_integral = std::max(worst_integral, std::abs(integral - 1.0));
  }
  char buf[160];
  std::snprintf(buf, sizeof(buf), "min p = %.3g (>= -1e-9), max |integral - 1| = %.3g (<= 1e-6)",
                min_p, worst_integral);
  report(1, "density validity over 1000 random autocorrelations",
         min_p >= -1e-9 && worst_integral <= 1e-6, buf);
}

// --- criterion 2: bin-sum identity ------------------------------------------

void criterion_bin_sum() {
  SplitMix64 rng(102);
  double worst = 0.0;
  for (std::size_t m : {4, 10, 50, 128}) {
    const BinLayout bins = uniform_bins(m, -1.0, 1.0);
    for (std::size_t n = 0; 2 * n < m; ++n) {
      for (int rep = 0; rep < 3; ++rep) {
        const FourierDensity d = normalize(autocorrelate(random_coeffs(rng, n + 1)));
        double total = 0.0;
        for (double c : bins.centers) total += eval_density(d, c);
        worst = std::max(worst, std::abs(total - static_cast<double>(m) / 2.0));
      }
    }
  }
  char buf[120];
  std::snprintf(buf, sizeof(buf), "max |sum p(b_j) - m/2| = %.3g (<= 1e-6)", worst);
  report(2, "discretized density sums to m/2 whenever N < m/2", worst <= 1e-6, buf);
}

// --- criterion 3: smoothness axioms ------------------------------------------

void criterion_smoothness_axioms() {
  SplitMix64 rng(103);
  const std::vector<double> uniform(50, 0.02);
  const double s_uniform = std::abs(smoothness(uniform).value);

  double worst_shift = 0.0;
  double worst_tail = 0.0;
  const double tail_bound = std::sqrt(2.0) * (6.0 / (M_PI * M_PI)) / 1000.0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> y(50);
    double total = 0.0;
    for (double& v : y) {
      v = rng.uniform_open01();
      total += v;
    }
    for (double& v : y) v /= total;
    const double base = smoothness(y).value;
    const std::size_t shift = 1 + rng.below(49);
    std::vector<double> rotated(50);
    for (std::size_t i = 0; i < 50; ++i) rotated[i] = y[(i + shift) % 50];
    worst_shift = std::max(worst_shift, std::abs(smoothness(rotated).value - base));
    if (trial < 20) {
      const double wide = smoothness(y, {2000, Discrepancy::kL2}).value;
      worst_tail = std::max(worst_tail, std::abs(wide - base));
    }
  }
  char buf[180];
  std::snprintf(buf, sizeof(buf),
                "s(uniform) = %.3g (<= 1e-12), shift drift = %.3g (<= 1e-12), "
                "sigma tail = %.3g (<= %.3g)",
                s_uniform, worst_shift, worst_tail, tail_bound);
  report(3, "smoothness axioms (uniform zero, shift invariance, truncation bound)",
         s_uniform <= 1e-12 && worst_shift <= 1e-12 && worst_tail <= tail_bound, buf);
}

// --- criterion 4: gradient checks --------------------------------------------

struct GradSetup {
  MlpModel model;
  std::vector<double> features;
  std::vector<std::size_t> bins_t;
  std::vector<double> z_t, centers_t;
  std::size_t batch = 8;
};

GradSetup make_grad_setup(HeadKind head, std::uint64_t seed, const BinLayout& bins,
                          double init_shrink = 50.0) {
  ModelConfig cfg;
  cfg.head = head;
  cfg.hidden = {16, 8};
  cfg.num_bins = bins.size();
  cfg.num_frequencies = 5;
  cfg.init_shrink = init_shrink;
  SplitMix64 rng(seed);
  GradSetup s{MlpModel(cfg, bins, rng), {}, {}, {}, {}, 8};
  for (std::size_t i = 0; i < s.batch; ++i) {
    s.features.push_back(rng.uniform(-1.0, 1.0));
    s.features.push_back(rng.uniform(-1.0, 1.0));
    s.bins_t.push_back(rng.below(bins.size()));
    const double z = rng.uniform(-0.95, 0.95);
    s.z_t.push_back(z);
    s.centers_t.push_back(bins.centers[quantize(z, bins)]);
  }
  return s;
}

double max_grad_mismatch(GradSetup& s, Objective objective, double gamma, std::uint64_t seed) {
  TargetBatch targets{s.bins_t.data(), s.z_t.data(), s.centers_t.data()};
  s.model.zero_grads();
  s.model.batch_loss(s.features, s.batch, targets, objective, gamma, true);
  auto blocks = s.model.parameters();
  std::vector<double> analytic;
  std::vector<double*> coords;
  for (auto& b : blocks) {
    for (std::size_t i = 0; i < b.size; ++i) {
      analytic.push_back(b.grads[i]);
      coords.push_back(b.values + i);
    }
  }
  SplitMix64 rng(seed);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const std::size_t idx = rng.below(coords.size());
    const double saved = *coords[idx];
    const double h = 1e-5;
    *coords[idx] = saved + h;
    const double up = s.model.batch_loss(s.features, s.batch, targets, objective, gamma, false);
    *coords[idx] = saved - h;
    const double down = s.model.batch_loss(s.features, s.batch, targets, objective, gamma, false);
    *coords[idx] = saved;
    const double numeric = (up - down) / (2.0 * h);
    const double denom = std::max({std::abs(numeric), std::abs(analytic[idx]), 1e-4});
    worst = std::max(worst, std::abs(numeric - analytic[idx]) / denom);
  }
  return worst;
}

void criterion_gradients() {
  const BinLayout bins = uniform_bins(16, -1.0, 1.0);
  double worst = 0.0;
  {
    GradSetup s = make_grad_setup(HeadKind::kLinear, 41, bins);
    worst = std::max(worst, max_grad_mismatch(s, Objective::kCrossEntropy, 0.0, 141));
  }
  {
    GradSetup s = make_grad_setup(HeadKind::kFourier, 42, bins);
    worst = std::max(worst, max_grad_mismatch(s, Objective::kCrossEntropy, 1e-3, 142));
    GradSetup s2 = make_grad_setup(HeadKind::kFourier, 43, bins);
    worst = std::max(worst, max_grad_mismatch(s2, Objective::kMle, 1e-3, 143));
    // Unshrunk weights put the coefficient scale above the normalization
    // floor, covering the gradient through the normalizer.
    GradSetup s3 = make_grad_setup(HeadKind::kFourier, 47, bins, 1.0);
    worst = std::max(worst, max_grad_mismatch(s3, Objective::kCrossEntropy, 1e-3, 147));
  }
  {
    GradSetup s = make_grad_setup(HeadKind::kGmm, 44, bins);
    worst = std::max(worst, max_grad_mismatch(s, Objective::kCrossEntropy, 0.0, 144));
    GradSetup s2 = make_grad_setup(HeadKind::kGmm, 45, bins);
    worst = std::max(worst, max_grad_mismatch(s2, Objective::kMle, 0.0, 145));
  }
  {
    GradSetup s = make_grad_setup(HeadKind::kRegression, 46, bins);
    worst = std::max(worst, max_grad_mismatch(s, Objective::kMse, 0.0, 146));
  }
  char buf[120];
  std::snprintf(buf, sizeof(buf), "max relative mismatch vs central differences = %.3g (< 1e-4)",
                worst);
  report(4, "gradient checks for all four heads", worst < 1e-4, buf);
}

// --- criterion 5: quantization -----------------------------------------------

void criterion_quantization() {
  SplitMix64 rng(105);
  bool ok = true;
  double worst_ratio = 0.0;
  for (int trial = 0; trial < 25; ++trial) {
    std::vector<double> samples;
    const double center = rng.uniform(-0.5, 0.5);
    for (int i = 0; i < 600; ++i) samples.push_back(rng.normal(center, 0.3));
    const std::size_t m = 8 + rng.below(80);
    const double d = rng.uniform(0.0, 0.9);
    const BinLayout mixed = mixed_precision_bins(samples, m, d, -2.0, 2.0);
    const BinLayout uniform = uniform_bins(m, -2.0, 2.0);
    ok = ok && mixed.size() == m && mixed.edges.front() == -2.0 && mixed.edges.back() == 2.0;
    for (std::size_t k = 0; k + 1 < mixed.edges.size(); ++k) {
      ok = ok && mixed.edges[k] < mixed.edges[k + 1];
    }
    for (const BinLayout& bins : {mixed, uniform}) {
      for (int i = 0; i <= 500; ++i) {
        const double v = -2.0 + 4.0 * i / 500.0;
        const std::size_t k = quantize(v, bins);
        const double err = std::abs(dequantize(k, bins) - v);
        worst_ratio = std::max(worst_ratio, err / (0.5 * bins.width(k)));
      }
    }
  }
  char buf[140];
  std::snprintf(buf, sizeof(buf),
                "roundtrip error / (half width) max = %.4f (<= 1), layouts cover range", worst_ratio);
  report(5, "quantize/dequantize roundtrip and mixed-precision coverage",
         ok && worst_ratio <= 1.0 + 1e-12, buf);
}

// --- criteria 6-7: appendix-style smoothness validation ----------------------

void criteria_smoothness_validation() {
  SmoothnessValidationConfig config;  // 100/140 harmonics, 2048 samples, 1000 trials, 1024 length
  const SmoothnessValidationReport rep = run_smoothness_validation(config);

  char buf[200];
  std::snprintf(buf, sizeof(buf), "L2 strictly increasing over 1..%zu: %s; L1 inversion above 80: %s",
                config.harmonics, rep.l2_strictly_increasing ? "yes" : "no",
                rep.l1_inversion_above_80 ? "yes" : "no");
  report(6, "square-wave harmonic sweep (L2 monotone, L1 negative control)",
         rep.l2_strictly_increasing && rep.l1_inversion_above_80, buf);

  std::string detail = "smoothness means:";
  for (const auto& [kind, stats] : rep.noise) {
    char item[64];
    std::snprintf(item, sizeof(item), " %s=%.5f", to_string(kind).c_str(), stats.smoothness_mean);
    detail += item;
  }
  detail += "; entropy means:";
  for (const auto& [kind, stats] : rep.noise) {
    char item[64];
    std::snprintf(item, sizeof(item), " %s=%.4f", to_string(kind).c_str(), stats.entropy_mean);
    detail += item;
  }
  report(7, "colored-noise bootstrap (smoothness ordered, spectral entropy not)",
         rep.noise_smoothness_ordered && rep.entropy_ordering_fails, detail);
}

// --- criteria 8-11: synthetic-data training comparisons ----------------------

struct CellMeans {
  double kl = 0.0, smooth = 0.0, perplexity = 0.0;
  std::size_t count = 0;
};

CellMeans mean_over_seeds(const std::vector<SweepRow>& rows, DatasetKind dataset, HeadKind head,
                          std::size_t freq) {
  CellMeans m;
  for (const auto& row : rows) {
    if (row.failed || row.cell.dataset != dataset || row.cell.head != head) continue;
    if (head == HeadKind::kFourier && row.cell.frequencies != freq) continue;
    if (!row.report.kl) continue;
    m.kl += *row.report.kl;
    m.smooth += *row.report.smoothness;
    m.perplexity += row.report.perplexity.value_or(0.0);
    ++m.count;
  }
  if (m.count > 0) {
    m.kl /= static_cast<double>(m.count);
    m.smooth /= static_cast<double>(m.count);
    m.perplexity /= static_cast<double>(m.count);
  }
  return m;
}

void criteria_toy_training() {
  SweepSpec spec;  // defaults: all datasets, frequencies 2..20, seeds 0..3
  spec.heads = {HeadKind::kLinear, HeadKind::kFourier, HeadKind::kGmm};
  spec.gammas = {0.0};
  const SweepResult sweep = run_sweep(spec);

  const DatasetKind kinds[3] = {DatasetKind::kGaussian, DatasetKind::kGmm2, DatasetKind::kBeta};

  // 8: fourier (N=12) vs linear, plus the absolute window.
  {
    bool ok = true;
    std::string detail;
    for (DatasetKind d : kinds) {
      const CellMeans f = mean_over_seeds(sweep.rows, d, HeadKind::kFourier, 12);
      const CellMeans l = mean_over_seeds(sweep.rows, d, HeadKind::kLinear, 0);
      const bool row_ok = f.count == 4 && l.count == 4 && f.kl < l.kl && f.smooth < l.smooth &&
                          f.kl >= 0.05 && f.kl <= 0.25;
      ok = ok && row_ok;
      char item[160];
      std::snprintf(item, sizeof(item), "%s: F(kl=%.3f,sm=%.3f) L(kl=%.3f,sm=%.3f); ",
                    to_string(d).c_str(), f.kl, f.smooth, l.kl, l.smooth);
      detail += item;
    }
    report(8, "fourier (N=12) beats linear on KL and smoothness; KL in [0.05, 0.25]", ok, detail);
  }

  // 9: gmm vs fourier orderings.
  {
    bool ok = true;
    std::string detail;
    for (DatasetKind d : kinds) {
      const CellMeans f = mean_over_seeds(sweep.rows, d, HeadKind::kFourier, 12);
      const CellMeans g = mean_over_seeds(sweep.rows, d, HeadKind::kGmm, 0);
      const bool want_gmm = d != DatasetKind::kBeta;
      const bool row_ok = g.count == 4 && (want_gmm ? g.kl < f.kl : f.kl < g.kl);
      ok = ok && row_ok;
      char item[120];
      std::snprintf(item, sizeof(item), "%s: gmm=%.3f fourier=%.3f; ", to_string(d).c_str(), g.kl,
                    f.kl);
      detail += item;
    }
    report(9, "gmm wins KL on gaussian and gmm-2; fourier wins on beta", ok, detail);
  }

  // 10: smoothness grows with N and the scaling fit has C2 > 0.
  {
    bool ok = true;
    std::string detail;
    for (DatasetKind d : kinds) {
      const CellMeans low = mean_over_seeds(sweep.rows, d, HeadKind::kFourier, 2);
      const CellMeans high = mean_over_seeds(sweep.rows, d, HeadKind::kFourier, 20);
      const auto fit_it = sweep.smoothness_fits.find(to_string(d));
      const bool has_fit = fit_it != sweep.smoothness_fits.end();
      const double c2 = has_fit ? fit_it->second.c2 : 0.0;
      const bool row_ok = low.count == 4 && high.count == 4 && high.smooth > low.smooth &&
                          has_fit && c2 > 0.0;
      ok = ok && row_ok;
      char item[140];
      std::snprintf(item, sizeof(item), "%s: s(2)=%.4f s(20)=%.4f C2=%.3f; ", to_string(d).c_str(),
                    low.smooth, high.smooth, c2);
      detail += item;
    }
    report(10, "frequency sweep degrades smoothness with C2 > 0 in the scaling fit", ok, detail);
  }

  // 11: mle orderings (kl on all three; perplexity on beta).
  {
    SweepSpec mle;
    mle.heads = {HeadKind::kFourier, HeadKind::kGmm};
    mle.frequencies = {12};
    mle.gammas = {0.0};
    mle.objective = Objective::kMle;
    mle.train.objective = Objective::kMle;
    const SweepResult result = run_sweep(mle);
    bool ok = true;
    std::string detail;
    for (DatasetKind d : kinds) {
      const CellMeans f = mean_over_seeds(result.rows, d, HeadKind::kFourier, 12);
      const CellMeans g = mean_over_seeds(result.rows, d, HeadKind::kGmm, 0);
      bool row_ok = f.count == 4 && g.count == 4;
      if (d == DatasetKind::kBeta) {
        row_ok = row_ok && f.kl < g.kl && f.perplexity < g.perplexity;
      } else {
        row_ok = row_ok && g.kl < f.kl;
      }
      ok = ok && row_ok;
      char item[160];
      std::snprintf(item, sizeof(item), "%s: gmm(kl=%.3f,pp=%.3f) fourier(kl=%.3f,pp=%.3f); ",
                    to_string(d).c_str(), g.kl, g.perplexity, f.kl, f.perplexity);
      detail += item;
    }
    report(11, "mle sweep orderings (gmm on gaussian/gmm-2, fourier on beta incl. perplexity)", ok,
           detail);
  }
}

}  // namespace

int main(int argc, char** argv) {
  bool skip_training = false;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--skip-training") == 0) skip_training = true;
  }

  criterion_density_validity();
  criterion_bin_sum();
  criterion_smoothness_axioms();
  criterion_gradients();
  criterion_quantization();
  criteria_smoothness_validation();
  if (!skip_training) {
    criteria_toy_training();
  } else {
    std::printf("[SKIP]  8-11. training criteria skipped on request\n");
  }

  if (g_failures == 0) {
    std::printf("acceptance: all criteria passed\n");
    return 0;
  }
  std::printf("acceptance: %d criteria FAILED\n", g_failures);
  return 1;
}
