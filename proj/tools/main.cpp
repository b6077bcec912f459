// Command-line driver for the fourier-head experiments: toy training runs,
// frequency/regularization sweeps, the smoothness-metric validation study,
// and small file utilities (density evaluation, bin building, smoothness
// scoring). Outputs are deterministic for fixed flags and seeds.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "fourierhead/bins.hpp"
#include "fourierhead/density.hpp"
#include "fourierhead/experiments.hpp"
#include "fourierhead/model.hpp"
#include "fourierhead/smoothness.hpp"
#include "fourierhead/synthetic.hpp"
#include "fourierhead/textio.hpp"
#include "fourierhead/version.hpp"

namespace fh = fourierhead;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitValidation = 2;

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t comma = text.find(',', pos);
    if (comma == std::string::npos) comma = text.size();
    const std::string item = text.substr(pos, comma - pos);
    const std::size_t dots = item.find("..");
    if (dots != std::string::npos) {
      const std::uint64_t lo = std::stoull(item.substr(0, dots));
      const std::uint64_t hi = std::stoull(item.substr(dots + 2));
      for (std::uint64_t s = lo; s <= hi; ++s) seeds.push_back(s);
    } else if (!item.empty()) {
      seeds.push_back(std::stoull(item));
    }
    pos = comma + 1;
  }
  if (seeds.empty()) throw CLI::ValidationError("--seeds", "empty seed list");
  return seeds;
}

template <typename T, typename Parse>
std::vector<T> parse_list(const std::string& text, Parse parse) {
  std::vector<T> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t comma = text.find(',', pos);
    if (comma == std::string::npos) comma = text.size();
    const std::string item = text.substr(pos, comma - pos);
    if (!item.empty()) out.push_back(parse(item));
    pos = comma + 1;
  }
  return out;
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << j.dump(2) << '\n';
}

// Values from --config override the corresponding flags.
json load_config_overrides(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path);
  json j;
  in >> j;
  if (!j.is_object()) throw std::runtime_error("config file must hold a JSON object");
  return j;
}

template <typename T>
void override_from(const json& cfg, const char* key, T& value) {
  if (cfg.contains(key)) value = cfg.at(key).get<T>();
}

struct CommonOptions {
  std::string out_dir = "out";
  std::string config_path;
  bool svg = false;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("--out", opts.out_dir, "output directory");
  cmd->add_option("--config", opts.config_path, "JSON config file; keys override flags");
  cmd->add_flag("--svg", opts.svg, "also emit SVG charts");
}

struct TrainFlags {
  std::string datasets = "gaussian,gmm2,beta";
  std::string heads = "linear,fourier";
  std::string frequencies = "2,4,6,8,10,12,14,16,18,20";
  std::string gammas = "0,1e-6";
  std::string seeds = "0..3";
  std::string objective = "cross_entropy";
  double learning_rate = 2e-3;
  std::size_t batch_size = 64;
  std::size_t epochs = 12;
  std::size_t dataset_size = 5000;
  std::size_t jobs = 1;
};

void add_train_flags(CLI::App* cmd, TrainFlags& flags) {
  cmd->add_option("--frequencies", flags.frequencies, "fourier frequency list");
  cmd->add_option("--gammas", flags.gammas, "fourier regularization list");
  cmd->add_option("--seeds", flags.seeds, "seed list, e.g. 0..3 or 0,2,5");
  cmd->add_option("--learning-rate", flags.learning_rate, "optimizer step size");
  cmd->add_option("--batch-size", flags.batch_size, "minibatch size");
  cmd->add_option("--epochs", flags.epochs, "training epochs");
  cmd->add_option("--dataset-size", flags.dataset_size, "synthetic dataset size");
  cmd->add_option("--jobs", flags.jobs, "parallel training cells");
}

void apply_config(const json& cfg, TrainFlags& flags) {
  override_from(cfg, "datasets", flags.datasets);
  override_from(cfg, "heads", flags.heads);
  override_from(cfg, "frequencies", flags.frequencies);
  override_from(cfg, "gammas", flags.gammas);
  override_from(cfg, "seeds", flags.seeds);
  override_from(cfg, "objective", flags.objective);
  override_from(cfg, "learning_rate", flags.learning_rate);
  override_from(cfg, "batch_size", flags.batch_size);
  override_from(cfg, "epochs", flags.epochs);
  override_from(cfg, "dataset_size", flags.dataset_size);
  override_from(cfg, "jobs", flags.jobs);
}

fh::SweepSpec build_spec(const TrainFlags& flags) {
  fh::SweepSpec spec;
  spec.datasets = parse_list<fh::DatasetKind>(
      flags.datasets, [](const std::string& s) { return fh::dataset_kind_from_string(s); });
  spec.heads = parse_list<fh::HeadKind>(
      flags.heads, [](const std::string& s) { return fh::head_kind_from_string(s); });
  spec.frequencies = parse_list<std::size_t>(
      flags.frequencies, [](const std::string& s) { return std::stoul(s); });
  spec.gammas =
      parse_list<double>(flags.gammas, [](const std::string& s) { return std::stod(s); });
  spec.seeds = parse_seed_list(flags.seeds);
  spec.objective = fh::objective_from_string(flags.objective);
  spec.train.learning_rate = flags.learning_rate;
  spec.train.batch_size = flags.batch_size;
  spec.train.epochs = flags.epochs;
  spec.train.objective = spec.objective;
  spec.dataset.size = flags.dataset_size;
  spec.jobs = flags.jobs;
  return spec;
}

json aggregate_rows(const std::vector<fh::SweepRow>& rows) {
  struct Moments {
    double sum = 0.0, sq = 0.0;
    std::size_t n = 0;
    void add(double v) {
      sum += v;
      sq += v * v;
      ++n;
    }
    void emit(json& agg, const char* name) const {
      if (n == 0) return;
      const double mean = sum / static_cast<double>(n);
      agg[std::string(name) + "_mean"] = mean;
      agg[std::string(name) + "_std"] =
          std::sqrt(std::max(0.0, sq / static_cast<double>(n) - mean * mean));
    }
  };
  Moments kl, sm, mse, perp;

  json cells = json::array();
  for (const auto& row : rows) {
    json cell;
    cell["dataset"] = fh::to_string(row.cell.dataset);
    cell["head"] = fh::to_string(row.cell.head);
    cell["frequencies"] = row.cell.frequencies;
    cell["gamma"] = row.cell.gamma;
    cell["seed"] = row.cell.seed;
    if (row.failed) {
      cell["status"] = "failed";
      cell["error"] = row.error;
    } else {
      cell["status"] = "ok";
      cell["report"] = fh::eval_report_to_json(row.report);
      mse.add(row.report.mse);
      if (row.report.kl) kl.add(*row.report.kl);
      if (row.report.smoothness) sm.add(*row.report.smoothness);
      if (row.report.perplexity) perp.add(*row.report.perplexity);
    }
    cells.push_back(cell);
  }
  json agg;
  mse.emit(agg, "mse");
  kl.emit(agg, "kl");
  sm.emit(agg, "smoothness");
  perp.emit(agg, "perplexity");
  return json{{"cells", cells}, {"aggregate", agg}};
}

void emit_sweep_svg(const fh::SweepResult& result, const fs::path& dir) {
  // Seed-averaged smoothness and KL vs frequency, one series per dataset.
  std::vector<fh::SvgSeries> smooth_series, kl_series;
  for (fh::DatasetKind dataset : result.spec.datasets) {
    fh::SvgSeries s{fh::to_string(dataset), {}, {}};
    fh::SvgSeries k{fh::to_string(dataset), {}, {}};
    for (std::size_t n : result.spec.frequencies) {
      double s_sum = 0.0, k_sum = 0.0;
      std::size_t count = 0;
      for (const auto& row : result.rows) {
        if (row.failed || row.cell.dataset != dataset || row.cell.head != fh::HeadKind::kFourier)
          continue;
        if (row.cell.frequencies != n || row.cell.gamma != result.spec.gammas.front()) continue;
        if (!row.report.smoothness || !row.report.kl) continue;
        s_sum += *row.report.smoothness;
        k_sum += *row.report.kl;
        ++count;
      }
      if (count == 0) continue;
      s.xs.push_back(static_cast<double>(n));
      s.ys.push_back(s_sum / static_cast<double>(count));
      k.xs.push_back(static_cast<double>(n));
      k.ys.push_back(k_sum / static_cast<double>(count));
    }
    if (!s.xs.empty()) smooth_series.push_back(std::move(s));
    if (!k.xs.empty()) kl_series.push_back(std::move(k));
  }
  if (!smooth_series.empty()) {
    fh::write_svg_chart((dir / "smoothness_vs_frequency.svg").string(),
                        "Fourier head smoothness vs frequency count", smooth_series);
  }
  if (!kl_series.empty()) {
    fh::write_svg_chart((dir / "kl_vs_frequency.svg").string(),
                        "Fourier head KL vs frequency count", kl_series);
  }
}

int cmd_sweep(const CommonOptions& common, const TrainFlags& flags, bool mle) {
  fh::SweepSpec spec = build_spec(flags);
  if (mle) {
    spec.objective = fh::Objective::kMle;
    spec.train.objective = fh::Objective::kMle;
  }
  fs::create_directories(common.out_dir);
  const fh::SweepResult result = fh::run_sweep(spec);

  const fs::path dir(common.out_dir);
  fh::write_sweep_csv(result, (dir / (mle ? "mle_sweep.csv" : "sweep.csv")).string());

  json report = aggregate_rows(result.rows);
  report["config"] = fh::sweep_spec_to_json(result.spec);
  report["version"] = fh::kVersion;
  if (!result.smoothness_fits.empty()) {
    json fits;
    for (const auto& [dataset, fit] : result.smoothness_fits) {
      fits[dataset] = fh::scaling_fit_to_json(fit);
    }
    report["scaling_fits"] = fits;
  }
  write_json(dir / (mle ? "mle_report.json" : "sweep_report.json"), report);
  if (common.svg) emit_sweep_svg(result, dir);

  std::size_t failed = 0;
  for (const auto& row : result.rows) failed += row.failed ? 1 : 0;
  std::cout << (mle ? "mle-sweep" : "sweep") << ": " << result.rows.size() << " cells, " << failed
            << " failed, outputs in " << common.out_dir << "\n";
  return failed == 0 ? kExitOk : kExitRuntime;
}

int cmd_train_toy(const CommonOptions& common, const TrainFlags& flags, const std::string& dataset,
                  const std::string& head, std::size_t frequencies, double gamma,
                  std::size_t pmf_samples) {
  fh::SweepSpec spec = build_spec(flags);
  spec.datasets = {fh::dataset_kind_from_string(dataset)};
  spec.heads = {fh::head_kind_from_string(head)};
  spec.frequencies = {frequencies};
  spec.gammas = {gamma};

  fs::create_directories(common.out_dir);
  const fs::path dir(common.out_dir);

  std::vector<fh::SweepRow> rows;
  for (std::uint64_t seed : spec.seeds) {
    fh::SweepCell cell{spec.datasets[0], spec.heads[0],
                       spec.heads[0] == fh::HeadKind::kFourier ? frequencies : 0,
                       spec.heads[0] == fh::HeadKind::kFourier ? gamma : 0.0, seed};
    fh::Dataset data;
    const fh::TrainedModel trained = fh::train_cell(spec, cell, &data);
    fh::SweepRow row;
    row.cell = cell;
    row.report = fh::evaluate(trained, data);
    rows.push_back(row);

    if (seed == spec.seeds.front() && spec.heads[0] != fh::HeadKind::kRegression) {
      fh::write_pmf_samples_csv(trained, data, pmf_samples,
                                (dir / ("pmf_samples_seed" + std::to_string(seed) + ".csv")).string());
    }
    json cell_report = fh::eval_report_to_json(row.report);
    cell_report["seed"] = seed;
    cell_report["config"] = fh::sweep_spec_to_json(spec);
    cell_report["version"] = fh::kVersion;
    write_json(dir / ("report_seed" + std::to_string(seed) + ".json"), cell_report);
  }

  json report = aggregate_rows(rows);
  report["config"] = fh::sweep_spec_to_json(spec);
  report["dataset"] = dataset;
  report["head"] = head;
  report["version"] = fh::kVersion;
  write_json(dir / "report.json", report);
  std::cout << "train-toy: " << rows.size() << " runs, outputs in " << common.out_dir << "\n";
  return kExitOk;
}

int cmd_validate_smoothness(const CommonOptions& common,
                            const fh::SmoothnessValidationConfig& config) {
  fs::create_directories(common.out_dir);
  const fh::SmoothnessValidationReport report = fh::run_smoothness_validation(config);
  const fs::path dir(common.out_dir);
  write_json(dir / "smoothness_validation.json", fh::smoothness_validation_to_json(report));
  if (common.svg) {
    std::vector<double> xs(report.square_l2.size());
    for (std::size_t i = 0; i < xs.size(); ++i) xs[i] = static_cast<double>(i + 1);
    fh::write_svg_chart((dir / "square_wave_smoothness.svg").string(),
                        "Square-wave smoothness vs harmonics",
                        {{"L2", xs, report.square_l2}, {"L1", xs, report.square_l1}});
  }
  std::cout << "square-wave L2 strictly increasing: "
            << (report.l2_strictly_increasing ? "yes" : "NO") << "\n"
            << "square-wave L1 inversion above 80 harmonics: "
            << (report.l1_inversion_above_80 ? "yes" : "NO") << "\n"
            << "noise smoothness ordered brown<pink<white<blue: "
            << (report.noise_smoothness_ordered ? "yes" : "NO") << "\n"
            << "spectral entropy fails that ordering: "
            << (report.entropy_ordering_fails ? "yes" : "NO") << "\n";
  return report.all_passed ? kExitOk : kExitValidation;
}

int cmd_density_eval(const CommonOptions& common, const std::string& density_path,
                     std::size_t points, bool periodic, double lo, double hi) {
  std::ifstream in(density_path);
  if (!in) throw std::runtime_error("cannot open " + density_path);
  json j;
  in >> j;
  fh::FourierDensity d = fh::density_from_json(j);
  if (!d.normalized) d = fh::normalize(d);

  fs::create_directories(common.out_dir);
  const fs::path out_path = fs::path(common.out_dir) / "density_eval.csv";
  std::ofstream out(out_path);
  if (!out) throw std::runtime_error("cannot open " + out_path.string());
  out << "# density: " << density_path << "\n# version: " << fh::kVersion << "\n";
  out << "z,p\n";
  for (std::size_t i = 0; i < points; ++i) {
    const double z = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
    out << fh::format_double(z) << ',' << fh::format_double(fh::eval_density(d, z, periodic))
        << '\n';
  }
  std::cout << "density-eval: wrote " << out_path.string() << "\n";
  return kExitOk;
}

int cmd_bins_build(const CommonOptions& common, const std::string& samples_path, std::size_t m,
                   double d, double lo, double hi, const std::string& strategy) {
  fh::BinLayout layout;
  if (fh::bin_strategy_from_string(strategy) == fh::BinStrategy::kUniform) {
    layout = fh::uniform_bins(m, lo, hi);
  } else {
    const std::vector<double> samples = fh::read_column_csv(samples_path);
    layout = fh::mixed_precision_bins(samples, m, d, lo, hi);
  }
  fs::create_directories(common.out_dir);
  json j = fh::bin_layout_to_json(layout);
  j["clamped_samples"] = layout.clamped_samples;
  j["version"] = fh::kVersion;
  write_json(fs::path(common.out_dir) / "bins.json", j);
  std::cout << "bins-build: wrote " << (fs::path(common.out_dir) / "bins.json").string() << "\n";
  return kExitOk;
}

int cmd_smoothness(const CommonOptions& common, const std::string& histogram_path,
                   std::size_t sigma_max, const std::string& discrepancy) {
  std::vector<double> y = fh::read_column_csv(histogram_path);
  double total = 0.0;
  for (double v : y) {
    if (v < 0.0) throw std::runtime_error("histogram entries must be nonnegative");
    total += v;
  }
  if (!(total > 0.0)) throw std::runtime_error("histogram sums to zero");
  for (double& v : y) v /= total;

  fh::SmoothnessConfig cfg{sigma_max, fh::discrepancy_from_string(discrepancy)};
  const fh::SmoothnessResult result = fh::smoothness(y, cfg);
  json j{{"value", result.value},
         {"sigma_max", result.sigma_max},
         {"truncation_bound", result.truncation_bound},
         {"discrepancy", fh::to_string(result.discrepancy)},
         {"version", fh::kVersion}};
  fs::create_directories(common.out_dir);
  write_json(fs::path(common.out_dir) / "smoothness.json", j);
  std::cout << "smoothness: " << fh::format_double(result.value) << " (truncation bound "
            << fh::format_double(result.truncation_bound) << ")\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fourier head experiments"};
  app.require_subcommand(1);
  app.set_version_flag("--version", fh::kVersion);

  CommonOptions common;
  TrainFlags flags;

  // train-toy
  auto* toy = app.add_subcommand("train-toy", "train one dataset/head cell across seeds");
  std::string toy_dataset = "gaussian", toy_head = "fourier";
  std::size_t toy_freq = 12, toy_pmf = 8;
  double toy_gamma = 0.0;
  toy->add_option("--dataset", toy_dataset, "gaussian|gmm2|beta");
  toy->add_option("--head", toy_head, "linear|fourier|gmm|regression");
  toy->add_option("--frequencies", toy_freq, "fourier frequency count");
  toy->add_option("--gamma", toy_gamma, "fourier regularization");
  toy->add_option("--pmf-samples", toy_pmf, "PMF sample CSV row count");
  toy->add_option("--seeds", flags.seeds, "seed list");
  toy->add_option("--objective", flags.objective, "cross_entropy|mle|mse");
  toy->add_option("--learning-rate", flags.learning_rate, "optimizer step size");
  toy->add_option("--batch-size", flags.batch_size, "minibatch size");
  toy->add_option("--epochs", flags.epochs, "training epochs");
  toy->add_option("--dataset-size", flags.dataset_size, "synthetic dataset size");
  add_common(toy, common);

  // sweep / mle-sweep
  auto* sweep = app.add_subcommand("sweep", "frequency/regularization sweep");
  sweep->add_option("--datasets", flags.datasets, "dataset list");
  sweep->add_option("--heads", flags.heads, "head list");
  add_train_flags(sweep, flags);
  add_common(sweep, common);

  auto* mle = app.add_subcommand("mle-sweep", "continuous-objective sweep (fourier vs gmm)");
  std::string mle_datasets = "gaussian,gmm2,beta";
  std::string mle_heads = "fourier,gmm";
  mle->add_option("--datasets", mle_datasets, "dataset list");
  mle->add_option("--heads", mle_heads, "head list");
  add_train_flags(mle, flags);
  add_common(mle, common);

  // validate-smoothness
  auto* validate = app.add_subcommand("validate-smoothness", "square-wave and noise studies");
  fh::SmoothnessValidationConfig vcfg;
  validate->add_option("--harmonics", vcfg.harmonics, "square-wave harmonic count");
  validate->add_option("--l1-harmonics", vcfg.l1_harmonics, "extent of the L1 harmonic scan");
  validate->add_option("--square-samples", vcfg.square_samples, "square-wave sample count");
  validate->add_option("--trials", vcfg.trials, "bootstrap trials per noise kind");
  validate->add_option("--noise-length", vcfg.noise_length, "noise sample count (power of two)");
  validate->add_option("--sigma-max", vcfg.sigma_max, "smoothness sigma truncation");
  validate->add_option("--seed", vcfg.seed, "bootstrap seed");
  add_common(validate, common);

  // density-eval
  auto* density = app.add_subcommand("density-eval", "evaluate a serialized density on a grid");
  std::string density_path;
  std::size_t density_points = 512;
  bool density_periodic = false;
  double density_lo = -1.0, density_hi = 1.0;
  density->add_option("--density", density_path, "FourierDensity JSON file")->required();
  density->add_option("--points", density_points, "grid size");
  density->add_option("--lo", density_lo, "grid start");
  density->add_option("--hi", density_hi, "grid end");
  density->add_flag("--periodic", density_periodic, "allow evaluation outside [-1,1]");
  add_common(density, common);

  // bins-build
  auto* bins = app.add_subcommand("bins-build", "build a bin layout from samples");
  std::string bins_samples, bins_strategy = "mixed_precision";
  std::size_t bins_m = 50;
  double bins_d = 0.2, bins_lo = -1.0, bins_hi = 1.0;
  bins->add_option("--samples", bins_samples, "single-column CSV of samples");
  bins->add_option("--bins", bins_m, "number of bins");
  bins->add_option("--dense-fraction", bins_d, "sparse-bin fraction d in [0,1)");
  bins->add_option("--lo", bins_lo, "range start");
  bins->add_option("--hi", bins_hi, "range end");
  bins->add_option("--strategy", bins_strategy, "uniform|mixed_precision");
  add_common(bins, common);

  // smoothness
  auto* smooth = app.add_subcommand("smoothness", "score a histogram CSV");
  std::string smooth_histogram, smooth_discrepancy = "L2";
  std::size_t smooth_sigma_max = 1000;
  smooth->add_option("--histogram", smooth_histogram, "single-column CSV")->required();
  smooth->add_option("--sigma-max", smooth_sigma_max, "sigma truncation");
  smooth->add_option("--discrepancy", smooth_discrepancy, "L2|L1");
  add_common(smooth, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    const json cfg = load_config_overrides(common.config_path);
    apply_config(cfg, flags);
    override_from(cfg, "out", common.out_dir);

    if (toy->parsed()) {
      override_from(cfg, "dataset", toy_dataset);
      override_from(cfg, "head", toy_head);
      override_from(cfg, "frequency", toy_freq);
      override_from(cfg, "gamma", toy_gamma);
      return cmd_train_toy(common, flags, toy_dataset, toy_head, toy_freq, toy_gamma, toy_pmf);
    }
    if (sweep->parsed()) return cmd_sweep(common, flags, false);
    if (mle->parsed()) {
      flags.datasets = mle_datasets;
      flags.heads = mle_heads;
      apply_config(cfg, flags);
      return cmd_sweep(common, flags, true);
    }
    if (validate->parsed()) {
      override_from(cfg, "harmonics", vcfg.harmonics);
      override_from(cfg, "square_samples", vcfg.square_samples);
      override_from(cfg, "trials", vcfg.trials);
      override_from(cfg, "noise_length", vcfg.noise_length);
      override_from(cfg, "sigma_max", vcfg.sigma_max);
      override_from(cfg, "seed", vcfg.seed);
      return cmd_validate_smoothness(common, vcfg);
    }
    if (density->parsed()) {
      return cmd_density_eval(common, density_path, density_points, density_periodic, density_lo,
                              density_hi);
    }
    if (bins->parsed()) {
      return cmd_bins_build(common, bins_samples, bins_m, bins_d, bins_lo, bins_hi, bins_strategy);
    }
    if (smooth->parsed()) {
      return cmd_smoothness(common, smooth_histogram, smooth_sigma_max, smooth_discrepancy);
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid configuration: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}
