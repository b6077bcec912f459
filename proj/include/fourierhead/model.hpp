#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "fourierhead/bins.hpp"
#include "fourierhead/density.hpp"
#include "fourierhead/random.hpp"
#include "fourierhead/synthetic.hpp"

namespace fourierhead {

enum class HeadKind { kLinear, kFourier, kGmm, kRegression };
enum class Objective { kCrossEntropy, kMle, kMse };

std::string to_string(HeadKind k);
HeadKind head_kind_from_string(const std::string& s);
std::string to_string(Objective o);
Objective objective_from_string(const std::string& s);

struct ModelConfig {
  HeadKind head = HeadKind::kLinear;
  std::size_t input_dim = 2;
  std::vector<std::size_t> hidden = {64, 32};
  std::size_t num_bins = 50;           // m; categorical heads
  std::size_t num_frequencies = 12;    // N; fourier head
  double init_shrink = 1000.0;         // fourier head weight shrink at init
  bool gmm_learn_weights = true;       // learned vs fixed 1/2 mixture weights
  double gmm_init_std = 0.30;          // initial component standard deviation
};

struct TrainConfig {
  double learning_rate = 2e-3;
  std::size_t batch_size = 64;
  std::size_t epochs = 12;
  std::uint64_t seed = 0;
  Objective objective = Objective::kCrossEntropy;
  double gamma = 0.0;  // fourier coefficient regularization strength
  bool checkpoint_best = true;  // restore the best test-loss epoch at the end

  void validate() const;
};

// Mutable view of one parameter tensor and its gradient accumulator.
struct ParamBlock {
  std::string name;
  double* values = nullptr;
  double* grads = nullptr;
  std::size_t size = 0;
};

// Supervision for one example; the objective picks which field it reads.
struct TargetBatch {
  const std::size_t* bins = nullptr;     // cross-entropy: observed bin index
  const double* z = nullptr;             // mle: continuous latent value
  const double* centers = nullptr;       // mse: dequantized bin center
};

// Two-hidden-layer ReLU MLP with an exchangeable final layer. All gradients
// are hand-derived; parameters() exposes every tensor for the optimizer and
// for finite-difference checks.
class MlpModel {
 public:
  MlpModel(const ModelConfig& config, const BinLayout& bins, SplitMix64& rng);

  const ModelConfig& config() const { return config_; }
  const BinLayout& bins() const { return bins_; }

  std::size_t parameter_count() const;
  std::vector<ParamBlock> parameters();
  std::vector<double> save_parameters() const;
  void load_parameters(std::span<const double> flat);
  void zero_grads();

  // Mean loss over the batch; accumulates parameter gradients unless
  // with_grad is false. features is batch x input_dim row-major.
  double batch_loss(std::span<const double> features, std::size_t batch,
                    const TargetBatch& targets, Objective objective, double gamma,
                    bool with_grad);

  // Inference entry points (single example).
  std::vector<double> predict_categorical(std::span<const double> features) const;
  double predict_scalar(std::span<const double> features) const;
  double continuous_nll(std::span<const double> features, double z, bool* floored) const;
  FourierDensity fourier_density(std::span<const double> features) const;  // fourier head only

 private:
  struct LinearLayer {
    std::size_t in = 0, out = 0;
    std::vector<double> w, b, gw, gb;
  };

  void forward_backbone(const double* features, std::size_t batch) const;
  std::vector<double> head_raw(std::span<const double> features) const;
  double head_loss_grad(const double* raw, std::size_t sample, const TargetBatch& targets,
                        Objective objective, double gamma, double* graw) const;

  ModelConfig config_;
  BinLayout bins_;
  std::vector<LinearLayer> layers_;  // backbone layers then the head layer
  std::vector<double> cos_table_, sin_table_;  // [k-1][j], fourier head

  // scratch (sized for the largest batch seen); one model instance is not
  // safe to share across threads
  mutable std::vector<std::vector<double>> acts_;   // post-activation per layer
  mutable std::vector<std::vector<double>> grads_;  // gradient buffers per layer
  mutable std::vector<double> scratch_a_, scratch_b_, scratch_c_, scratch_d_, scratch_e_,
      scratch_f_;
};

struct TrainedModel {
  MlpModel model;
  TrainConfig train_config;
  double best_test_loss = 0.0;
  std::size_t best_epoch = 0;
  std::vector<double> epoch_train_loss;
  std::vector<double> epoch_test_loss;
};

// Adam over shuffled minibatches with best-test-loss checkpointing; fully
// deterministic for a given config.
TrainedModel train(const ModelConfig& model_config, const Dataset& dataset,
                   const TrainConfig& train_config);

struct EvalReport {
  std::optional<double> kl;          // mean KL(quantized truth || prediction)
  std::optional<double> smoothness;  // mean smoothness of predicted categoricals
  double mse = 0.0;                  // expected value vs. dequantized target
  std::optional<double> perplexity;  // exp(mean nll); mle objective only
  std::size_t kl_floor_hits = 0;     // predictions floored at 1e-12 during KL
  std::size_t nll_floor_hits = 0;
  double best_test_loss = 0.0;
  std::size_t best_epoch = 0;
  std::size_t parameter_count = 0;
};

EvalReport evaluate(const TrainedModel& trained, const Dataset& dataset);

// KL(reference || prediction) with the prediction floored at 1e-12 and
// renormalized; floored reports whether the floor was needed.
double kl_divergence(std::span<const double> reference, std::span<const double> prediction,
                     bool* floored = nullptr);

// Discretized two-component Gaussian mixture from 6 raw head outputs:
// softmax weights (optionally fixed at 1/2), tanh means, softplus+1e-3 stds,
// PDF at bin centers times bin width, normalized.
std::vector<double> gmm_head_forward(std::span<const double> raw, const BinLayout& bins,
                                     bool learn_weights = true);

double expected_center(std::span<const double> categorical, const BinLayout& bins);

nlohmann::json eval_report_to_json(const EvalReport& report);

// Checkpoint format: configuration, bin layout, layer shapes and the flat
// parameter vector.
nlohmann::json model_to_json(const MlpModel& model);
MlpModel model_from_json(const nlohmann::json& j);

}  // namespace fourierhead
