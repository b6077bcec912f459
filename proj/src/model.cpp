#include "fourierhead/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "fourierhead/head.hpp"
#include "fourierhead/smoothness.hpp"
#include "fourierhead/version.hpp"

namespace fourierhead {

namespace {

constexpr double kPi = 3.141592653589793238462643;
constexpr double kProbFloor = 1e-12;   // inside logs of categorical losses
constexpr double kDensityFloor = 1e-12;
constexpr double kGmmStdFloor = 1e-3;

double softplus(double x) {
  if (x > 30.0) return x;
  if (x < -30.0) return std::exp(x);
  return std::log1p(std::exp(x));
}

double sigmoid(double x) {
  if (x >= 0.0) {
    const double e = std::exp(-x);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double normal_pdf(double z, double mean, double sigma) {
  const double t = (z - mean) / sigma;
  return std::exp(-0.5 * t * t) / (sigma * 2.506628274631000502415765);
}

struct GmmParams {
  double weight[2];
  double mean[2];
  double std[2];
  double mean_raw[2];
  double std_raw[2];
};

GmmParams decode_gmm(const double* raw, bool learn_weights) {
  GmmParams p;
  if (learn_weights) {
    const double mx = std::max(raw[0], raw[1]);
    const double e0 = std::exp(raw[0] - mx);
    const double e1 = std::exp(raw[1] - mx);
    p.weight[0] = e0 / (e0 + e1);
    p.weight[1] = e1 / (e0 + e1);
  } else {
    p.weight[0] = p.weight[1] = 0.5;
  }
  for (int i = 0; i < 2; ++i) {
    p.mean_raw[i] = raw[2 + i];
    p.std_raw[i] = raw[4 + i];
    p.mean[i] = std::tanh(p.mean_raw[i]);
    p.std[i] = softplus(p.std_raw[i]) + kGmmStdFloor;
  }
  return p;
}

// Maps (d loss / d weight, mean, std) back to the six raw outputs.
void gmm_backmap(const GmmParams& p, bool learn_weights, const double dweight[2],
                 const double dmean[2], const double dstd[2], double* graw) {
  if (learn_weights) {
    const double inner = dweight[0] * p.weight[0] + dweight[1] * p.weight[1];
    graw[0] += p.weight[0] * (dweight[0] - inner);
    graw[1] += p.weight[1] * (dweight[1] - inner);
  }
  for (int i = 0; i < 2; ++i) {
    graw[2 + i] += dmean[i] * (1.0 - p.mean[i] * p.mean[i]);
    graw[4 + i] += dstd[i] * sigmoid(p.std_raw[i]);
  }
}

}  // namespace

std::string to_string(HeadKind k) {
  switch (k) {
    case HeadKind::kLinear: return "linear";
    case HeadKind::kFourier: return "fourier";
    case HeadKind::kGmm: return "gmm";
    case HeadKind::kRegression: return "regression";
  }
  return "?";
}

HeadKind head_kind_from_string(const std::string& s) {
  if (s == "linear") return HeadKind::kLinear;
  if (s == "fourier") return HeadKind::kFourier;
  if (s == "gmm") return HeadKind::kGmm;
  if (s == "regression") return HeadKind::kRegression;
  throw std::invalid_argument("unknown head kind: " + s);
}

std::string to_string(Objective o) {
  switch (o) {
    case Objective::kCrossEntropy: return "cross_entropy";
    case Objective::kMle: return "mle";
    case Objective::kMse: return "mse";
  }
  return "?";
}

Objective objective_from_string(const std::string& s) {
  if (s == "cross_entropy" || s == "ce") return Objective::kCrossEntropy;
  if (s == "mle") return Objective::kMle;
  if (s == "mse") return Objective::kMse;
  throw std::invalid_argument("unknown objective: " + s);
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw std::invalid_argument("TrainConfig: learning_rate <= 0");
  if (batch_size == 0) throw std::invalid_argument("TrainConfig: batch_size == 0");
  if (epochs == 0) throw std::invalid_argument("TrainConfig: epochs == 0");
  if (gamma < 0.0) throw std::invalid_argument("TrainConfig: gamma < 0");
}

MlpModel::MlpModel(const ModelConfig& config, const BinLayout& bins, SplitMix64& rng)
    : config_(config), bins_(bins) {
  std::size_t raw_dim = 0;
  switch (config_.head) {
    case HeadKind::kLinear: raw_dim = config_.num_bins; break;
    case HeadKind::kFourier: raw_dim = 2 * (config_.num_frequencies + 1); break;
    case HeadKind::kGmm: raw_dim = 6; break;
    case HeadKind::kRegression: raw_dim = 1; break;
  }
  if (config_.head != HeadKind::kRegression && bins_.size() != config_.num_bins) {
    throw std::invalid_argument("MlpModel: bin layout size does not match num_bins");
  }
  if (config_.head == HeadKind::kFourier &&
      2 * config_.num_frequencies >= config_.num_bins) {
    throw std::invalid_argument("MlpModel: need num_frequencies < num_bins / 2");
  }

  std::vector<std::size_t> dims;
  dims.push_back(config_.input_dim);
  for (std::size_t h : config_.hidden) dims.push_back(h);
  dims.push_back(raw_dim);
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    LinearLayer layer;
    layer.in = dims[l];
    layer.out = dims[l + 1];
    layer.w.resize(layer.in * layer.out);
    layer.b.assign(layer.out, 0.0);
    layer.gw.assign(layer.w.size(), 0.0);
    layer.gb.assign(layer.out, 0.0);
    const bool is_head = (l + 2 == dims.size());
    // Uniform fan-in init on every layer, the convention the reference
    // framework applies to linear layers.
    const double bound = 1.0 / std::sqrt(static_cast<double>(layer.in));
    if (is_head && config_.head == HeadKind::kFourier) {
      HeadConfig hc;
      hc.input_dim = layer.in;
      hc.output_dim = config_.num_bins;
      hc.num_frequencies = config_.num_frequencies;
      hc.init_shrink = config_.init_shrink;
      const HeadWeights hw = init_head_weights(hc, rng);
      layer.w = hw.weight;
      layer.b = hw.bias;
    } else {
      for (double& v : layer.w) v = rng.uniform(-bound, bound);
      for (double& v : layer.b) v = rng.uniform(-bound, bound);
      if (is_head && config_.head == HeadKind::kGmm) {
        // Start the components at a moderate width instead of softplus(0);
        // the optimizer only has to fine-tune from there.
        const double target = std::max(config_.gmm_init_std - kGmmStdFloor, 1e-6);
        layer.b[4] = layer.b[5] = std::log(std::expm1(target));
      }
    }
    layers_.push_back(std::move(layer));
  }

  if (config_.head == HeadKind::kFourier && config_.num_frequencies > 0) {
    const std::size_t n = config_.num_frequencies;
    const std::size_t m = bins_.size();
    cos_table_.resize(n * m);
    sin_table_.resize(n * m);
    for (std::size_t k = 1; k <= n; ++k) {
      for (std::size_t j = 0; j < m; ++j) {
        const double a = static_cast<double>(k) * kPi * bins_.centers[j];
        cos_table_[(k - 1) * m + j] = std::cos(a);
        sin_table_[(k - 1) * m + j] = std::sin(a);
      }
    }
  }

  acts_.resize(layers_.size());
  grads_.resize(layers_.size());
}

std::size_t MlpModel::parameter_count() const {
  std::size_t total = 0;
  for (const auto& l : layers_) total += l.w.size() + l.b.size();
  return total;
}

std::vector<ParamBlock> MlpModel::parameters() {
  std::vector<ParamBlock> blocks;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const std::string tag = (l + 1 == layers_.size()) ? "head" : "layer" + std::to_string(l);
    blocks.push_back({tag + ".w", layers_[l].w.data(), layers_[l].gw.data(), layers_[l].w.size()});
    blocks.push_back({tag + ".b", layers_[l].b.data(), layers_[l].gb.data(), layers_[l].b.size()});
  }
  return blocks;
}

std::vector<double> MlpModel::save_parameters() const {
  std::vector<double> flat;
  flat.reserve(parameter_count());
  for (const auto& l : layers_) {
    flat.insert(flat.end(), l.w.begin(), l.w.end());
    flat.insert(flat.end(), l.b.begin(), l.b.end());
  }
  return flat;
}

void MlpModel::load_parameters(std::span<const double> flat) {
  if (flat.size() != parameter_count()) throw std::invalid_argument("load_parameters: size mismatch");
  std::size_t off = 0;
  for (auto& l : layers_) {
    std::copy(flat.begin() + off, flat.begin() + off + l.w.size(), l.w.begin());
    off += l.w.size();
    std::copy(flat.begin() + off, flat.begin() + off + l.b.size(), l.b.begin());
    off += l.b.size();
  }
}

void MlpModel::zero_grads() {
  for (auto& l : layers_) {
    std::fill(l.gw.begin(), l.gw.end(), 0.0);
    std::fill(l.gb.begin(), l.gb.end(), 0.0);
  }
}

void MlpModel::forward_backbone(const double* features, std::size_t batch) const {
  const double* x = features;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const LinearLayer& layer = layers_[l];
    auto& out = acts_[l];
    out.resize(batch * layer.out);
    for (std::size_t i = 0; i < batch; ++i) {
      const double* xi = x + i * layer.in;
      double* yi = out.data() + i * layer.out;
      for (std::size_t o = 0; o < layer.out; ++o) {
        const double* row = &layer.w[o * layer.in];
        double acc = layer.b[o];
        for (std::size_t j = 0; j < layer.in; ++j) acc += row[j] * xi[j];
        yi[o] = acc;
      }
    }
    if (l + 1 < layers_.size()) {
      for (double& v : out) v = v > 0.0 ? v : 0.0;  // ReLU on hidden layers
    }
    x = out.data();
  }
}

std::vector<double> MlpModel::head_raw(std::span<const double> features) const {
  if (features.size() != config_.input_dim) throw std::invalid_argument("head_raw: bad input size");
  forward_backbone(features.data(), 1);
  return acts_.back();
}

double MlpModel::head_loss_grad(const double* raw, std::size_t sample, const TargetBatch& targets,
                                Objective objective, double gamma, double* graw) const {
  const std::size_t m = bins_.size();
  switch (config_.head) {
    case HeadKind::kLinear: {
      // softmax cross-entropy
      const std::size_t t = targets.bins[sample];
      double mx = raw[0];
      for (std::size_t k = 1; k < m; ++k) mx = std::max(mx, raw[k]);
      double sum = 0.0;
      for (std::size_t k = 0; k < m; ++k) sum += std::exp(raw[k] - mx);
      const double logsum = std::log(sum) + mx;
      const double loss = logsum - raw[t];
      if (graw) {
        for (std::size_t k = 0; k < m; ++k) graw[k] += std::exp(raw[k] - logsum);
        graw[t] -= 1.0;
      }
      return loss;
    }

    case HeadKind::kRegression: {
      const double target = targets.centers[sample];
      const double diff = raw[0] - target;
      if (graw) graw[0] += 2.0 * diff;
      return diff * diff;
    }

    case HeadKind::kGmm: {
      const GmmParams p = decode_gmm(raw, config_.gmm_learn_weights);
      double dweight[2] = {0.0, 0.0};
      double dmean[2] = {0.0, 0.0};
      double dstd[2] = {0.0, 0.0};
      double loss = 0.0;
      if (objective == Objective::kCrossEntropy) {
        const std::size_t t = targets.bins[sample];
        // discretize: mass_j = sum_i w_i phi(b_j) * width_j, then normalize
        std::vector<double>& mass = scratch_a_;
        std::vector<double>& phi0 = scratch_b_;
        std::vector<double>& phi1 = scratch_c_;
        mass.resize(m);
        phi0.resize(m);
        phi1.resize(m);
        double total = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
          phi0[j] = normal_pdf(bins_.centers[j], p.mean[0], p.std[0]) * bins_.width(j);
          phi1[j] = normal_pdf(bins_.centers[j], p.mean[1], p.std[1]) * bins_.width(j);
          mass[j] = p.weight[0] * phi0[j] + p.weight[1] * phi1[j];
          total += mass[j];
        }
        const double q_t = mass[t] / total;
        loss = -std::log(q_t + kProbFloor);
        if (graw) {
          const double dq = -1.0 / (q_t + kProbFloor);
          // dL/dmass_j = dq * (delta_jt - q_t) / total
          for (std::size_t j = 0; j < m; ++j) {
            const double dmass = dq * ((j == t ? 1.0 : 0.0) - q_t) / total;
            const double* phis[2] = {phi0.data(), phi1.data()};
            for (int i = 0; i < 2; ++i) {
              const double phi = phis[i][j];
              const double dphi = dmass * p.weight[i];
              const double zc = bins_.centers[j] - p.mean[i];
              dweight[i] += dmass * phi;
              dmean[i] += dphi * phi * zc / (p.std[i] * p.std[i]);
              dstd[i] += dphi * phi * (zc * zc / (p.std[i] * p.std[i] * p.std[i]) - 1.0 / p.std[i]);
            }
          }
        }
      } else {  // kMle: continuous likelihood at the observed z
        const double z = targets.z[sample];
        const double phi[2] = {normal_pdf(z, p.mean[0], p.std[0]),
                               normal_pdf(z, p.mean[1], p.std[1])};
        const double mix = p.weight[0] * phi[0] + p.weight[1] * phi[1];
        if (mix < kDensityFloor) {
          loss = -std::log(kDensityFloor);
        } else {
          loss = -std::log(mix);
          if (graw) {
            const double dmix = -1.0 / mix;
            for (int i = 0; i < 2; ++i) {
              const double zc = z - p.mean[i];
              dweight[i] += dmix * phi[i];
              dmean[i] += dmix * p.weight[i] * phi[i] * zc / (p.std[i] * p.std[i]);
              dstd[i] += dmix * p.weight[i] * phi[i] *
                         (zc * zc / (p.std[i] * p.std[i] * p.std[i]) - 1.0 / p.std[i]);
            }
          }
        }
      }
      if (graw) gmm_backmap(p, config_.gmm_learn_weights, dweight, dmean, dstd, graw);
      return loss;
    }

    case HeadKind::kFourier: {
      const std::size_t n = config_.num_frequencies;
      // a_k = raw[2k] + i raw[2k+1]; c_k = sum_l a_l conj(a_{l+k})
      std::vector<double>& cre = scratch_a_;
      std::vector<double>& cim = scratch_b_;
      cre.assign(n + 1, 0.0);
      cim.assign(n + 1, 0.0);
      for (std::size_t k = 0; k <= n; ++k) {
        double re = 0.0, im = 0.0;
        for (std::size_t l = 0; l + k <= n; ++l) {
          const double xr = raw[2 * l], xi = raw[2 * l + 1];
          const double yr = raw[2 * (l + k)], yi = raw[2 * (l + k) + 1];
          re += xr * yr + xi * yi;
          im += xi * yr - xr * yi;
        }
        cre[k] = re;
        cim[k] = im;
      }
      const double r0 = cre[0];
      const double denom = std::max(r0, kCoefficientScaleFloor);
      const double inv = 1.0 / denom;

      const double reg_scale = gamma * 2.0 * kPi * kPi / static_cast<double>(m);
      double reg = 0.0;
      for (std::size_t k = 1; k <= n; ++k) {
        reg += static_cast<double>(k * k) * (cre[k] * cre[k] + cim[k] * cim[k]);
      }
      reg *= reg_scale;

      // d loss / d (re c_k, im c_k, inv); filled per objective below
      std::vector<double>& dcre = scratch_c_;
      std::vector<double>& dcim = scratch_d_;
      dcre.assign(n + 1, 0.0);
      dcim.assign(n + 1, 0.0);
      double dinv = 0.0;
      double loss = 0.0;

      if (objective == Objective::kCrossEntropy) {
        const std::size_t t = targets.bins[sample];
        std::vector<double>& p = scratch_e_;
        p.assign(m, 0.5);
        for (std::size_t k = 1; k <= n; ++k) {
          const double* crow = &cos_table_[(k - 1) * m];
          const double* srow = &sin_table_[(k - 1) * m];
          const double wr = inv * cre[k];
          const double wi = inv * cim[k];
          for (std::size_t j = 0; j < m; ++j) p[j] += wr * crow[j] - wi * srow[j];
        }
        double total = 0.0;
        for (std::size_t j = 0; j < m; ++j) total += p[j];
        const double q_t = std::max(p[t] / total, 0.0);  // rounding can dip below zero
        loss = -std::log(q_t + kProbFloor);
        if (graw) {
          const double dq = -1.0 / (q_t + kProbFloor);
          std::vector<double>& dp = scratch_f_;
          dp.resize(m);
          for (std::size_t j = 0; j < m; ++j) {
            dp[j] = dq * ((j == t ? 1.0 : 0.0) - q_t) / total;
          }
          for (std::size_t k = 1; k <= n; ++k) {
            const double* crow = &cos_table_[(k - 1) * m];
            const double* srow = &sin_table_[(k - 1) * m];
            double ak = 0.0, bk = 0.0;
            for (std::size_t j = 0; j < m; ++j) {
              ak += dp[j] * crow[j];
              bk += dp[j] * srow[j];
            }
            dcre[k] = inv * ak;
            dcim[k] = -inv * bk;
            dinv += cre[k] * ak - cim[k] * bk;
          }
        }
      } else {  // kMle
        const double z = targets.z[sample];
        double p = 0.5;
        for (std::size_t k = 1; k <= n; ++k) {
          const double a = static_cast<double>(k) * kPi * z;
          p += inv * (cre[k] * std::cos(a) - cim[k] * std::sin(a));
        }
        if (p < kDensityFloor) {
          loss = -std::log(kDensityFloor);  // flat region; only the reg term drives gradients
        } else {
          loss = -std::log(p);
          if (graw) {
            const double dp = -1.0 / p;
            for (std::size_t k = 1; k <= n; ++k) {
              const double a = static_cast<double>(k) * kPi * z;
              const double ck = std::cos(a), sk = std::sin(a);
              dcre[k] = inv * dp * ck;
              dcim[k] = -inv * dp * sk;
              dinv += dp * (cre[k] * ck - cim[k] * sk);
            }
          }
        }
      }

      if (graw) {
        for (std::size_t k = 1; k <= n; ++k) {
          dcre[k] += reg_scale * 2.0 * static_cast<double>(k * k) * cre[k];
          dcim[k] += reg_scale * 2.0 * static_cast<double>(k * k) * cim[k];
        }
        if (r0 > kCoefficientScaleFloor) {
          dcre[0] = -inv * inv * dinv;  // through the normalizer only
        }
        for (std::size_t k = 0; k <= n; ++k) {
          const double gre = dcre[k];
          const double gim = dcim[k];
          if (gre == 0.0 && gim == 0.0) continue;
          for (std::size_t l = 0; l + k <= n; ++l) {
            const double xr = raw[2 * l], xi = raw[2 * l + 1];
            const double yr = raw[2 * (l + k)], yi = raw[2 * (l + k) + 1];
            graw[2 * l] += gre * yr - gim * yi;
            graw[2 * l + 1] += gre * yi + gim * yr;
            graw[2 * (l + k)] += gre * xr + gim * xi;
            graw[2 * (l + k) + 1] += gre * xi - gim * xr;
          }
        }
      }
      return loss + reg;
    }
  }
  return 0.0;
}

double MlpModel::batch_loss(std::span<const double> features, std::size_t batch,
                            const TargetBatch& targets, Objective objective, double gamma,
                            bool with_grad) {
  if (features.size() != batch * config_.input_dim) {
    throw std::invalid_argument("batch_loss: feature buffer size mismatch");
  }
  forward_backbone(features.data(), batch);
  const std::size_t raw_dim = layers_.back().out;
  const double* raw = acts_.back().data();

  auto& graw = grads_.back();
  if (with_grad) graw.assign(batch * raw_dim, 0.0);

  double loss = 0.0;
  for (std::size_t i = 0; i < batch; ++i) {
    loss += head_loss_grad(raw + i * raw_dim, i, targets, objective, gamma,
                           with_grad ? graw.data() + i * raw_dim : nullptr);
  }
  const double inv_batch = 1.0 / static_cast<double>(batch);
  loss *= inv_batch;
  if (!with_grad) return loss;

  for (double& g : graw) g *= inv_batch;

  // Backward through the stack; grads_[l] holds dLoss/d(output of layer l).
  for (std::size_t l = layers_.size(); l-- > 0;) {
    LinearLayer& layer = layers_[l];
    const double* x = (l == 0) ? features.data() : acts_[l - 1].data();
    const double* gy = grads_[l].data();
    double* gx = nullptr;
    if (l > 0) {
      grads_[l - 1].assign(batch * layer.in, 0.0);
      gx = grads_[l - 1].data();
    }
    for (std::size_t i = 0; i < batch; ++i) {
      const double* xi = x + i * layer.in;
      const double* gyi = gy + i * layer.out;
      for (std::size_t o = 0; o < layer.out; ++o) {
        const double g = gyi[o];
        if (g == 0.0) continue;
        layer.gb[o] += g;
        double* gw_row = &layer.gw[o * layer.in];
        for (std::size_t j = 0; j < layer.in; ++j) gw_row[j] += g * xi[j];
        if (gx) {
          const double* w_row = &layer.w[o * layer.in];
          double* gxi = gx + i * layer.in;
          for (std::size_t j = 0; j < layer.in; ++j) gxi[j] += g * w_row[j];
        }
      }
    }
    if (l > 0) {
      // ReLU mask from the post-activation values.
      const auto& act = acts_[l - 1];
      auto& gprev = grads_[l - 1];
      for (std::size_t idx = 0; idx < gprev.size(); ++idx) {
        if (act[idx] <= 0.0) gprev[idx] = 0.0;
      }
    }
  }
  return loss;
}

std::vector<double> MlpModel::predict_categorical(std::span<const double> features) const {
  const std::vector<double> raw = head_raw(features);
  const std::size_t m = bins_.size();
  switch (config_.head) {
    case HeadKind::kLinear: {
      std::vector<double> probs(m);
      double mx = raw[0];
      for (std::size_t k = 1; k < m; ++k) mx = std::max(mx, raw[k]);
      double sum = 0.0;
      for (std::size_t k = 0; k < m; ++k) {
        probs[k] = std::exp(raw[k] - mx);
        sum += probs[k];
      }
      for (double& p : probs) p /= sum;
      return probs;
    }
    case HeadKind::kFourier: {
      const FourierDensity d = normalize(autocorrelate(autocorr_input_from_raw(raw)));
      return discretize_density(d, bins_);
    }
    case HeadKind::kGmm:
      return gmm_head_forward(raw, bins_, config_.gmm_learn_weights);
    case HeadKind::kRegression:
      throw std::logic_error("predict_categorical: regression head has no categorical output");
  }
  return {};
}

double MlpModel::predict_scalar(std::span<const double> features) const {
  if (config_.head != HeadKind::kRegression) {
    throw std::logic_error("predict_scalar: only the regression head predicts a scalar");
  }
  return head_raw(features)[0];
}

double MlpModel::continuous_nll(std::span<const double> features, double z, bool* floored) const {
  const std::vector<double> raw = head_raw(features);
  if (config_.head == HeadKind::kFourier) {
    const FourierDensity d = normalize(autocorrelate(autocorr_input_from_raw(raw)));
    const LogLikelihood ll = log_likelihood(d, z, kDensityFloor);
    if (floored) *floored = ll.floored;
    return -ll.value;
  }
  if (config_.head == HeadKind::kGmm) {
    const GmmParams p = decode_gmm(raw.data(), config_.gmm_learn_weights);
    const double mix = p.weight[0] * normal_pdf(z, p.mean[0], p.std[0]) +
                       p.weight[1] * normal_pdf(z, p.mean[1], p.std[1]);
    if (floored) *floored = mix < kDensityFloor;
    return -std::log(std::max(mix, kDensityFloor));
  }
  throw std::logic_error("continuous_nll: head has no continuous density");
}

FourierDensity MlpModel::fourier_density(std::span<const double> features) const {
  if (config_.head != HeadKind::kFourier) {
    throw std::logic_error("fourier_density: not a fourier head");
  }
  return normalize(autocorrelate(autocorr_input_from_raw(head_raw(features))));
}

namespace {

struct Adam {
  double lr = 1e-3, beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  std::vector<double> m, v;
  std::size_t t = 0;

  explicit Adam(std::size_t n) : m(n, 0.0), v(n, 0.0) {}

  void step(std::vector<ParamBlock>& blocks) {
    ++t;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t));
    std::size_t off = 0;
    for (auto& block : blocks) {
      for (std::size_t i = 0; i < block.size; ++i, ++off) {
        const double g = block.grads[i];
        m[off] = beta1 * m[off] + (1.0 - beta1) * g;
        v[off] = beta2 * v[off] + (1.0 - beta2) * g * g;
        block.values[i] -= lr * (m[off] / bc1) / (std::sqrt(v[off] / bc2) + eps);
      }
    }
  }
};

struct PreparedData {
  std::vector<double> features;      // n x input_dim
  std::vector<std::size_t> bins;
  std::vector<double> z;
  std::vector<double> centers;
  std::size_t count = 0;
};

PreparedData prepare(const Dataset& dataset, std::size_t begin, std::size_t end) {
  PreparedData d;
  d.count = end - begin;
  d.features.reserve(d.count * 2);
  d.bins.reserve(d.count);
  d.z.reserve(d.count);
  d.centers.reserve(d.count);
  for (std::size_t i = begin; i < end; ++i) {
    const Triple& t = dataset.triples[i];
    d.features.push_back(dataset.bins.centers[t.qx]);
    d.features.push_back(dataset.bins.centers[t.qy]);
    d.bins.push_back(t.qz);
    d.z.push_back(t.z);
    d.centers.push_back(dataset.bins.centers[t.qz]);
  }
  return d;
}

double dataset_loss(MlpModel& model, const PreparedData& d, Objective objective, double gamma,
                    std::size_t chunk) {
  double total = 0.0;
  for (std::size_t begin = 0; begin < d.count; begin += chunk) {
    const std::size_t n = std::min(chunk, d.count - begin);
    TargetBatch targets{d.bins.data() + begin, d.z.data() + begin, d.centers.data() + begin};
    const double loss = model.batch_loss(
        std::span<const double>(d.features.data() + begin * 2, n * 2), n, targets, objective,
        gamma, false);
    total += loss * static_cast<double>(n);
  }
  return total / static_cast<double>(d.count);
}

void check_compatibility(const ModelConfig& mc, const Dataset& dataset, const TrainConfig& tc) {
  const bool categorical = mc.head != HeadKind::kRegression;
  if (categorical && mc.num_bins != dataset.bins.size()) {
    throw std::invalid_argument("train: model bins and dataset bins disagree");
  }
  switch (mc.head) {
    case HeadKind::kLinear:
      if (tc.objective != Objective::kCrossEntropy) {
        throw std::invalid_argument("train: linear head requires the cross_entropy objective");
      }
      break;
    case HeadKind::kRegression:
      if (tc.objective != Objective::kMse) {
        throw std::invalid_argument("train: regression head requires the mse objective");
      }
      break;
    case HeadKind::kFourier:
    case HeadKind::kGmm:
      if (tc.objective == Objective::kMse) {
        throw std::invalid_argument("train: categorical heads train with cross_entropy or mle");
      }
      break;
  }
}

}  // namespace

TrainedModel train(const ModelConfig& model_config, const Dataset& dataset,
                   const TrainConfig& train_config) {
  train_config.validate();
  check_compatibility(model_config, dataset, train_config);
  if (dataset.train_count == 0 || dataset.test_count() == 0) {
    throw std::invalid_argument("train: dataset must have both train and test rows");
  }

  SplitMix64 rng(train_config.seed);
  MlpModel model(model_config, dataset.bins, rng);

  const PreparedData train_data = prepare(dataset, 0, dataset.train_count);
  const PreparedData test_data = prepare(dataset, dataset.train_count, dataset.triples.size());

  std::vector<std::size_t> order(train_data.count);
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  TrainedModel result{std::move(model), train_config, std::numeric_limits<double>::infinity(), 0,
                      {}, {}};
  MlpModel& net = result.model;
  auto blocks = net.parameters();
  Adam adam(net.parameter_count());
  adam.lr = train_config.learning_rate;

  std::vector<double> best_params = net.save_parameters();
  std::vector<double> batch_features;
  std::vector<std::size_t> batch_bins;
  std::vector<double> batch_z, batch_centers;

  for (std::size_t epoch = 1; epoch <= train_config.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(rng.below(i));
      std::swap(order[i - 1], order[j]);
    }
    double epoch_loss = 0.0;
    for (std::size_t begin = 0; begin < train_data.count; begin += train_config.batch_size) {
      const std::size_t n = std::min(train_config.batch_size, train_data.count - begin);
      batch_features.resize(n * 2);
      batch_bins.resize(n);
      batch_z.resize(n);
      batch_centers.resize(n);
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t src = order[begin + i];
        batch_features[2 * i] = train_data.features[2 * src];
        batch_features[2 * i + 1] = train_data.features[2 * src + 1];
        batch_bins[i] = train_data.bins[src];
        batch_z[i] = train_data.z[src];
        batch_centers[i] = train_data.centers[src];
      }
      TargetBatch targets{batch_bins.data(), batch_z.data(), batch_centers.data()};
      net.zero_grads();
      const double loss = net.batch_loss(batch_features, n, targets, train_config.objective,
                                         train_config.gamma, true);
      if (!std::isfinite(loss)) {
        std::ostringstream msg;
        msg << "train: non-finite loss " << loss << " at epoch " << epoch << ", batch offset "
            << begin << " (head " << to_string(model_config.head) << ", objective "
            << to_string(train_config.objective) << ")";
        throw std::runtime_error(msg.str());
      }
      adam.step(blocks);
      epoch_loss += loss * static_cast<double>(n);
    }
    epoch_loss /= static_cast<double>(train_data.count);
    result.epoch_train_loss.push_back(epoch_loss);

    const double test_loss =
        dataset_loss(net, test_data, train_config.objective, train_config.gamma, 256);
    result.epoch_test_loss.push_back(test_loss);
    if (test_loss < result.best_test_loss) {
      result.best_test_loss = test_loss;
      result.best_epoch = epoch;
      if (train_config.checkpoint_best) best_params = net.save_parameters();
    }
  }

  if (train_config.checkpoint_best) net.load_parameters(best_params);
  return result;
}

EvalReport evaluate(const TrainedModel& trained, const Dataset& dataset) {
  const MlpModel& model = trained.model;
  const bool categorical = model.config().head != HeadKind::kRegression;
  const bool mle = trained.train_config.objective == Objective::kMle;

  EvalReport report;
  report.best_test_loss = trained.best_test_loss;
  report.best_epoch = trained.best_epoch;
  report.parameter_count = model.parameter_count();

  double kl_sum = 0.0, smooth_sum = 0.0, mse_sum = 0.0, nll_sum = 0.0;
  const std::size_t n_test = dataset.test_count();
  if (n_test == 0) throw std::invalid_argument("evaluate: empty test split");

  for (std::size_t i = 0; i < n_test; ++i) {
    const Triple& t = dataset.test_triple(i);
    const double features[2] = {dataset.bins.centers[t.qx], dataset.bins.centers[t.qy]};
    const double target_center = dataset.bins.centers[t.qz];

    if (categorical) {
      const std::vector<double> pred = model.predict_categorical(std::span(features, 2));
      const std::vector<double> ref =
          quantized_true_conditional(dataset.true_conditional(t), dataset.bins);
      bool floored = false;
      kl_sum += kl_divergence(ref, pred, &floored);
      if (floored) ++report.kl_floor_hits;

      smooth_sum += smoothness(pred).value;
      const double diff = expected_center(pred, dataset.bins) - target_center;
      mse_sum += diff * diff;
    } else {
      const double diff = model.predict_scalar(std::span(features, 2)) - target_center;
      mse_sum += diff * diff;
    }

    if (mle) {
      bool floored = false;
      nll_sum += model.continuous_nll(std::span(features, 2), t.z, &floored);
      if (floored) ++report.nll_floor_hits;
    }
  }

  const double inv_n = 1.0 / static_cast<double>(n_test);
  report.mse = mse_sum * inv_n;
  if (categorical) {
    report.kl = kl_sum * inv_n;
    report.smoothness = smooth_sum * inv_n;
  }
  if (mle) report.perplexity = std::exp(nll_sum * inv_n);

  if (!std::isfinite(report.mse) || (report.kl && !std::isfinite(*report.kl)) ||
      (report.smoothness && !std::isfinite(*report.smoothness)) ||
      (report.perplexity && !std::isfinite(*report.perplexity))) {
    throw std::runtime_error("evaluate: non-finite metric");
  }
  return report;
}

double kl_divergence(std::span<const double> reference, std::span<const double> prediction,
                     bool* floored) {
  if (reference.size() != prediction.size()) {
    throw std::invalid_argument("kl_divergence: size mismatch");
  }
  double total = 0.0;
  bool hit = false;
  for (double p : prediction) {
    const double safe = std::max(p, kProbFloor);
    hit = hit || safe != p;
    total += safe;
  }
  if (floored) *floored = hit;
  double kl = 0.0;
  for (std::size_t k = 0; k < reference.size(); ++k) {
    if (reference[k] > 0.0) {
      kl += reference[k] *
            (std::log(reference[k]) - std::log(std::max(prediction[k], kProbFloor) / total));
    }
  }
  return kl;
}

std::vector<double> gmm_head_forward(std::span<const double> raw, const BinLayout& bins,
                                     bool learn_weights) {
  if (raw.size() != 6) throw std::invalid_argument("gmm_head_forward: expected 6 raw outputs");
  const GmmParams p = decode_gmm(raw.data(), learn_weights);
  std::vector<double> mass(bins.size());
  double total = 0.0;
  for (std::size_t j = 0; j < bins.size(); ++j) {
    mass[j] = (p.weight[0] * normal_pdf(bins.centers[j], p.mean[0], p.std[0]) +
               p.weight[1] * normal_pdf(bins.centers[j], p.mean[1], p.std[1])) *
              bins.width(j);
    total += mass[j];
  }
  if (!(total > 0.0)) throw std::runtime_error("gmm_head_forward: zero mass on all bins");
  for (double& v : mass) v /= total;
  return mass;
}

double expected_center(std::span<const double> categorical, const BinLayout& bins) {
  if (categorical.size() != bins.size()) {
    throw std::invalid_argument("expected_center: size mismatch");
  }
  double ev = 0.0;
  for (std::size_t k = 0; k < bins.size(); ++k) ev += categorical[k] * bins.centers[k];
  return ev;
}

nlohmann::json eval_report_to_json(const EvalReport& report) {
  nlohmann::json j;
  if (report.kl) j["kl"] = *report.kl;
  if (report.smoothness) j["smoothness"] = *report.smoothness;
  j["mse"] = report.mse;
  if (report.perplexity) j["perplexity"] = *report.perplexity;
  j["kl_floor_hits"] = report.kl_floor_hits;
  j["nll_floor_hits"] = report.nll_floor_hits;
  j["best_test_loss"] = report.best_test_loss;
  j["best_epoch"] = report.best_epoch;
  j["parameter_count"] = report.parameter_count;
  return j;
}

nlohmann::json model_to_json(const MlpModel& model) {
  nlohmann::json j;
  const ModelConfig& cfg = model.config();
  j["head"] = to_string(cfg.head);
  j["input_dim"] = cfg.input_dim;
  j["hidden"] = cfg.hidden;
  j["num_bins"] = cfg.num_bins;
  j["num_frequencies"] = cfg.num_frequencies;
  j["gmm_learn_weights"] = cfg.gmm_learn_weights;
  j["bins"] = bin_layout_to_json(model.bins());
  j["parameters"] = model.save_parameters();
  j["version"] = kVersion;
  return j;
}

MlpModel model_from_json(const nlohmann::json& j) {
  ModelConfig cfg;
  cfg.head = head_kind_from_string(j.at("head").get<std::string>());
  cfg.input_dim = j.at("input_dim").get<std::size_t>();
  cfg.hidden = j.at("hidden").get<std::vector<std::size_t>>();
  cfg.num_bins = j.at("num_bins").get<std::size_t>();
  cfg.num_frequencies = j.at("num_frequencies").get<std::size_t>();
  cfg.gmm_learn_weights = j.at("gmm_learn_weights").get<bool>();
  const BinLayout bins = bin_layout_from_json(j.at("bins"));
  SplitMix64 rng(0);  // overwritten below
  MlpModel model(cfg, bins, rng);
  model.load_parameters(j.at("parameters").get<std::vector<double>>());
  return model;
}

}  // namespace fourierhead
