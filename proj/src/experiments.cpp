#include "fourierhead/experiments.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <thread>

#include <nlohmann/json.hpp>

#include "fourierhead/textio.hpp"
#include "fourierhead/version.hpp"

namespace fourierhead {

void SweepSpec::validate() const {
  if (datasets.empty() || heads.empty() || seeds.empty()) {
    throw std::invalid_argument("sweep: datasets, heads and seeds must be nonempty");
  }
  const bool has_fourier =
      std::find(heads.begin(), heads.end(), HeadKind::kFourier) != heads.end();
  if (has_fourier && (frequencies.empty() || gammas.empty())) {
    throw std::invalid_argument("sweep: fourier head needs frequencies and gammas");
  }
  if (jobs == 0) throw std::invalid_argument("sweep: jobs must be >= 1");
  train.validate();
}

ScalingFit fit_scaling_law(const std::vector<double>& frequencies,
                           const std::vector<double>& smoothness_values) {
  if (frequencies.size() != smoothness_values.size() || frequencies.size() < 3) {
    throw std::invalid_argument("fit_scaling_law: need >= 3 matched points");
  }
  const std::size_t n = frequencies.size();

  ScalingFit best;
  double best_sse = std::numeric_limits<double>::infinity();
  // The model is linear in (C1, C2) once t is fixed, so profile t on a grid.
  for (double t = 2.0; t <= 8.0 + 1e-9; t += 0.005) {
    const double expo = 2.0 * t - 1.0;
    double s11 = static_cast<double>(n), s12 = 0.0, s22 = 0.0, r1 = 0.0, r2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double phi = -std::pow(frequencies[i], -expo);
      s12 += phi;
      s22 += phi * phi;
      r1 += smoothness_values[i];
      r2 += phi * smoothness_values[i];
    }
    const double det = s11 * s22 - s12 * s12;
    if (std::abs(det) < 1e-300) continue;
    const double c1 = (r1 * s22 - r2 * s12) / det;
    const double c2 = (s11 * r2 - s12 * r1) / det;
    double sse = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double pred = c1 - c2 * std::pow(frequencies[i], -expo);
      sse += (smoothness_values[i] - pred) * (smoothness_values[i] - pred);
    }
    if (sse < best_sse) {
      best_sse = sse;
      best.c1 = c1;
      best.c2 = c2;
      best.t = t;
    }
  }
  best.residual = std::sqrt(best_sse / static_cast<double>(n));
  double lo = smoothness_values[0], hi = smoothness_values[0];
  for (double v : smoothness_values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  best.valid = best.c2 > 0.0 && best.residual <= 0.25 * (hi - lo) + 1e-12;
  return best;
}

TrainedModel train_cell(const SweepSpec& spec, const SweepCell& cell, Dataset* dataset_out) {
  DatasetSpec ds = spec.dataset;
  ds.kind = cell.dataset;
  ds.seed = cell.seed;
  const Dataset dataset = generate(ds);

  ModelConfig mc;
  mc.head = cell.head;
  mc.num_bins = dataset.bins.size();
  mc.num_frequencies = cell.frequencies;

  TrainConfig tc = spec.train;
  tc.seed = cell.seed;
  tc.gamma = cell.gamma;
  tc.objective = cell.head == HeadKind::kRegression ? Objective::kMse : spec.objective;

  TrainedModel trained = train(mc, dataset, tc);
  if (dataset_out) *dataset_out = dataset;
  return trained;
}

SweepRow run_cell(const SweepSpec& spec, const SweepCell& cell) {
  SweepRow row;
  row.cell = cell;
  try {
    Dataset dataset;
    const TrainedModel trained = train_cell(spec, cell, &dataset);
    row.report = evaluate(trained, dataset);
  } catch (const std::exception& e) {
    row.failed = true;
    row.error = e.what();
  }
  return row;
}

SweepResult run_sweep(const SweepSpec& spec) {
  spec.validate();

  std::vector<SweepCell> cells;
  for (DatasetKind dataset : spec.datasets) {
    for (HeadKind head : spec.heads) {
      if (head == HeadKind::kFourier) {
        for (std::size_t n : spec.frequencies) {
          for (double gamma : spec.gammas) {
            for (std::uint64_t seed : spec.seeds) cells.push_back({dataset, head, n, gamma, seed});
          }
        }
      } else {
        for (std::uint64_t seed : spec.seeds) cells.push_back({dataset, head, 0, 0.0, seed});
      }
    }
  }

  SweepResult result;
  result.spec = spec;
  result.rows.resize(cells.size());

  const std::size_t workers = std::min<std::size_t>(spec.jobs, cells.size());
  if (workers <= 1) {
    for (std::size_t i = 0; i < cells.size(); ++i) result.rows[i] = run_cell(spec, cells[i]);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&]() {
        for (;;) {
          const std::size_t i = next.fetch_add(1);
          if (i >= cells.size()) return;
          result.rows[i] = run_cell(spec, cells[i]);
        }
      });
    }
    for (auto& th : pool) th.join();
  }

  // Smoothness-vs-frequency fit per dataset over gamma=0 fourier cells.
  const bool has_fourier =
      std::find(spec.heads.begin(), spec.heads.end(), HeadKind::kFourier) != spec.heads.end();
  if (has_fourier && spec.frequencies.size() >= 3) {
    const double fit_gamma = spec.gammas.front();
    for (DatasetKind dataset : spec.datasets) {
      std::vector<double> ns, ss;
      for (std::size_t n : spec.frequencies) {
        double total = 0.0;
        std::size_t count = 0;
        for (const SweepRow& row : result.rows) {
          if (row.failed || row.cell.dataset != dataset || row.cell.head != HeadKind::kFourier)
            continue;
          if (row.cell.frequencies != n || row.cell.gamma != fit_gamma) continue;
          if (!row.report.smoothness) continue;
          total += *row.report.smoothness;
          ++count;
        }
        if (count > 0) {
          ns.push_back(static_cast<double>(n));
          ss.push_back(total / static_cast<double>(count));
        }
      }
      if (ns.size() >= 3) {
        result.smoothness_fits[to_string(dataset)] = fit_scaling_law(ns, ss);
      }
    }
  }
  return result;
}

SmoothnessValidationReport run_smoothness_validation(const SmoothnessValidationConfig& config) {
  SmoothnessValidationReport report;
  report.config = config;

  SmoothnessConfig l2{config.sigma_max, Discrepancy::kL2};
  SmoothnessConfig l1{config.sigma_max, Discrepancy::kL1};
  for (std::size_t h = 1; h <= std::max(config.harmonics, config.l1_harmonics); ++h) {
    const std::vector<double> wave = truncated_square_wave(h, config.square_samples);
    if (h <= config.harmonics) report.square_l2.push_back(smoothness(wave, l2).value);
    if (h <= config.l1_harmonics) report.square_l1.push_back(smoothness(wave, l1).value);
  }
  report.l2_strictly_increasing = true;
  for (std::size_t i = 0; i + 1 < report.square_l2.size(); ++i) {
    if (!(report.square_l2[i + 1] > report.square_l2[i] - 1e-12)) {
      report.l2_strictly_increasing = false;
      break;
    }
  }
  report.l1_inversion_above_80 = false;
  for (std::size_t i = 80; i < report.square_l1.size(); ++i) {
    if (report.square_l1[i] < report.square_l1[i - 1]) {
      report.l1_inversion_above_80 = true;
      break;
    }
  }

  const NoiseKind kinds[4] = {NoiseKind::kBrown, NoiseKind::kPink, NoiseKind::kWhite,
                              NoiseKind::kBlue};
  for (NoiseKind kind : kinds) {
    double s_sum = 0.0, s_sq = 0.0, h_sum = 0.0, h_sq = 0.0;
    for (std::size_t trial = 0; trial < config.trials; ++trial) {
      // Independent generator per trial; accumulation order is fixed.
      SplitMix64 rng(config.seed + 0x100000ull * static_cast<std::uint64_t>(kind) + trial);
      const std::vector<double> noise = colored_noise(kind, config.noise_length, rng);
      const double s = smoothness(noise, l2).value;
      const double h = spectral_entropy(noise);
      s_sum += s;
      s_sq += s * s;
      h_sum += h;
      h_sq += h * h;
    }
    const double n = static_cast<double>(config.trials);
    NoiseStats stats;
    stats.smoothness_mean = s_sum / n;
    stats.smoothness_std = std::sqrt(std::max(0.0, s_sq / n - stats.smoothness_mean * stats.smoothness_mean));
    stats.entropy_mean = h_sum / n;
    stats.entropy_std = std::sqrt(std::max(0.0, h_sq / n - stats.entropy_mean * stats.entropy_mean));
    report.noise.emplace_back(kind, stats);
  }

  const auto mean_s = [&](std::size_t i) { return report.noise[i].second.smoothness_mean; };
  const auto mean_h = [&](std::size_t i) { return report.noise[i].second.entropy_mean; };
  report.noise_smoothness_ordered =
      mean_s(0) < mean_s(1) && mean_s(1) < mean_s(2) && mean_s(2) < mean_s(3);
  const bool entropy_ordered =
      mean_h(0) < mean_h(1) && mean_h(1) < mean_h(2) && mean_h(2) < mean_h(3);
  report.entropy_ordering_fails = !entropy_ordered;

  report.all_passed = report.l2_strictly_increasing && report.l1_inversion_above_80 &&
                      report.noise_smoothness_ordered && report.entropy_ordering_fails;
  return report;
}

nlohmann::json sweep_spec_to_json(const SweepSpec& spec) {
  nlohmann::json j;
  nlohmann::json datasets = nlohmann::json::array();
  for (DatasetKind d : spec.datasets) datasets.push_back(to_string(d));
  nlohmann::json heads = nlohmann::json::array();
  for (HeadKind h : spec.heads) heads.push_back(to_string(h));
  j["datasets"] = datasets;
  j["heads"] = heads;
  j["frequencies"] = spec.frequencies;
  j["gammas"] = spec.gammas;
  j["seeds"] = spec.seeds;
  j["objective"] = to_string(spec.objective);
  j["jobs"] = spec.jobs;
  j["train"] = {{"learning_rate", spec.train.learning_rate},
                {"batch_size", spec.train.batch_size},
                {"epochs", spec.train.epochs}};
  j["dataset"] = dataset_spec_to_json(spec.dataset);
  j["version"] = kVersion;
  return j;
}

nlohmann::json scaling_fit_to_json(const ScalingFit& fit) {
  return nlohmann::json{{"C1", fit.c1},
                        {"C2", fit.c2},
                        {"t", fit.t},
                        {"residual", fit.residual},
                        {"valid", fit.valid}};
}

nlohmann::json smoothness_validation_to_json(const SmoothnessValidationReport& report) {
  nlohmann::json j;
  j["config"] = {{"harmonics", report.config.harmonics},
                 {"l1_harmonics", report.config.l1_harmonics},
                 {"square_samples", report.config.square_samples},
                 {"trials", report.config.trials},
                 {"noise_length", report.config.noise_length},
                 {"sigma_max", report.config.sigma_max},
                 {"seed", report.config.seed}};
  j["square_wave"] = {{"l2", report.square_l2},
                      {"l1", report.square_l1},
                      {"l2_strictly_increasing", report.l2_strictly_increasing},
                      {"l1_inversion_above_80", report.l1_inversion_above_80}};
  nlohmann::json noise;
  for (const auto& [kind, stats] : report.noise) {
    noise[to_string(kind)] = {{"smoothness_mean", stats.smoothness_mean},
                              {"smoothness_std", stats.smoothness_std},
                              {"spectral_entropy_mean", stats.entropy_mean},
                              {"spectral_entropy_std", stats.entropy_std}};
  }
  j["noise"] = noise;
  j["noise_smoothness_ordered"] = report.noise_smoothness_ordered;
  j["entropy_ordering_fails"] = report.entropy_ordering_fails;
  j["all_passed"] = report.all_passed;
  j["version"] = kVersion;
  return j;
}

void write_sweep_csv(const SweepResult& result, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "# config: " << sweep_spec_to_json(result.spec).dump() << "\n";
  out << "# version: " << kVersion << "\n";
  out << "dataset,head,frequencies,gamma,seed,kl,smoothness,mse,perplexity,status\n";
  for (const SweepRow& row : result.rows) {
    out << to_string(row.cell.dataset) << ',' << to_string(row.cell.head) << ','
        << row.cell.frequencies << ',' << format_double(row.cell.gamma) << ',' << row.cell.seed
        << ',';
    const auto opt = [](const std::optional<double>& v) {
      return v ? format_double(*v) : std::string();
    };
    if (row.failed) {
      out << ",,,," << "failed\n";
    } else {
      out << opt(row.report.kl) << ',' << opt(row.report.smoothness) << ','
          << format_double(row.report.mse) << ',' << opt(row.report.perplexity) << ",ok\n";
    }
  }
}

void write_pmf_samples_csv(const TrainedModel& trained, const Dataset& dataset,
                           std::size_t sample_count, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "# head: " << to_string(trained.model.config().head) << "\n";
  out << "# version: " << kVersion << "\n";
  out << "sample,bin,center,true_pmf,predicted_pmf\n";
  const std::size_t n = std::min(sample_count, dataset.test_count());
  for (std::size_t i = 0; i < n; ++i) {
    const Triple& t = dataset.test_triple(i);
    const double features[2] = {dataset.bins.centers[t.qx], dataset.bins.centers[t.qy]};
    const std::vector<double> pred =
        trained.model.predict_categorical(std::span(features, 2));
    const std::vector<double> ref =
        quantized_true_conditional(dataset.true_conditional(t), dataset.bins);
    for (std::size_t k = 0; k < pred.size(); ++k) {
      out << i << ',' << k << ',' << format_double(dataset.bins.centers[k]) << ','
          << format_double(ref[k]) << ',' << format_double(pred[k]) << '\n';
    }
  }
}

}  // namespace fourierhead
