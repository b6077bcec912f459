#include "fourierhead/bins.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace fourierhead {

namespace {

void finish_centers(BinLayout& layout) {
  const std::size_t m = layout.edges.size() - 1;
  layout.centers.resize(m);
  for (std::size_t k = 0; k < m; ++k) {
    layout.centers[k] = 0.5 * (layout.edges[k] + layout.edges[k + 1]);
  }
  for (std::size_t k = 0; k + 1 < layout.edges.size(); ++k) {
    if (!(layout.edges[k] < layout.edges[k + 1])) {
      throw std::runtime_error("bin edges are not strictly increasing");
    }
  }
}

// Linear-interpolation percentile of a sorted sample, p in [0, 100].
double percentile_sorted(const std::vector<double>& sorted, double p) {
  const std::size_t n = sorted.size();
  if (n == 1) return sorted[0];
  const double pos = (p / 100.0) * static_cast<double>(n - 1);
  const auto i = static_cast<std::size_t>(std::floor(pos));
  if (i + 1 >= n) return sorted[n - 1];
  const double frac = pos - static_cast<double>(i);
  return sorted[i] + frac * (sorted[i + 1] - sorted[i]);
}

void append_uniform_edges(std::vector<double>& edges, double lo, double hi, std::size_t count) {
  // Assumes edges.back() == lo; appends `count` bins covering [lo, hi].
  for (std::size_t k = 1; k < count; ++k) {
    edges.push_back(lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(count));
  }
  edges.push_back(hi);
}

}  // namespace

std::string to_string(BinStrategy s) {
  return s == BinStrategy::kUniform ? "uniform" : "mixed_precision";
}

BinStrategy bin_strategy_from_string(const std::string& s) {
  if (s == "uniform") return BinStrategy::kUniform;
  if (s == "mixed_precision") return BinStrategy::kMixedPrecision;
  throw std::invalid_argument("unknown bin strategy: " + s);
}

BinLayout uniform_bins(std::size_t m, double lo, double hi) {
  if (m < 2) throw std::invalid_argument("uniform_bins: need at least 2 bins");
  if (!(lo < hi)) throw std::invalid_argument("uniform_bins: invalid range");
  BinLayout layout;
  layout.strategy = BinStrategy::kUniform;
  layout.edges.reserve(m + 1);
  for (std::size_t k = 0; k <= m; ++k) {
    layout.edges.push_back(lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(m));
  }
  layout.edges.back() = hi;
  finish_centers(layout);
  return layout;
}

BinLayout mixed_precision_bins(std::span<const double> samples, std::size_t m, double d,
                               double lo, double hi) {
  if (m < 2) throw std::invalid_argument("mixed_precision_bins: need at least 2 bins");
  if (!(lo < hi)) throw std::invalid_argument("mixed_precision_bins: invalid range");
  if (samples.empty()) throw std::invalid_argument("mixed_precision_bins: samples empty");
  if (!(d >= 0.0 && d < 1.0)) throw std::invalid_argument("mixed_precision_bins: d outside [0,1)");

  std::size_t clamped = 0;
  std::vector<double> sorted;
  sorted.reserve(samples.size());
  for (double v : samples) {
    if (v < lo || v > hi) {
      ++clamped;
      v = std::clamp(v, lo, hi);
    }
    sorted.push_back(v);
  }
  std::sort(sorted.begin(), sorted.end());

  const double q_lo = percentile_sorted(sorted, 1.0);
  const double q_hi = percentile_sorted(sorted, 99.0);

  std::size_t sparse_total = static_cast<std::size_t>(std::floor(d * static_cast<double>(m)));
  const double len_left = q_lo - lo;
  const double len_right = hi - q_hi;
  // A flank narrower than one uniform-grid bin cannot hold useful bins; it is
  // treated as degenerate and its allotment returns to the dense range.
  const double min_flank = (hi - lo) / static_cast<double>(m);
  const bool left_ok = len_left > min_flank;
  const bool right_ok = len_right > min_flank;

  std::size_t left_count = 0;
  std::size_t right_count = 0;
  if (sparse_total > 0 && (left_ok || right_ok)) {
    if (left_ok && right_ok) {
      right_count = static_cast<std::size_t>(
          std::floor(static_cast<double>(sparse_total) * len_right / (len_left + len_right)));
      left_count = sparse_total - right_count;
    } else if (left_ok) {
      left_count = sparse_total;
    } else {
      right_count = sparse_total;
    }
  }
  const std::size_t dense_count = m - left_count - right_count;
  if (dense_count == 0) throw std::runtime_error("mixed_precision_bins: no bins left for dense range");

  const double dense_lo = left_count > 0 ? q_lo : lo;
  const double dense_hi = right_count > 0 ? q_hi : hi;

  BinLayout layout;
  layout.strategy = BinStrategy::kMixedPrecision;
  layout.dense_fraction = d;
  layout.dense_lo = dense_lo;
  layout.dense_hi = dense_hi;
  layout.clamped_samples = clamped;
  layout.edges.reserve(m + 1);
  layout.edges.push_back(lo);
  if (left_count > 0) append_uniform_edges(layout.edges, lo, dense_lo, left_count);
  append_uniform_edges(layout.edges, dense_lo, dense_hi, dense_count);
  if (right_count > 0) append_uniform_edges(layout.edges, dense_hi, hi, right_count);
  finish_centers(layout);
  return layout;
}

std::size_t quantize(double v, const BinLayout& bins) {
  const std::size_t m = bins.size();
  if (v <= bins.edges.front()) return 0;
  if (v >= bins.edges.back()) return m - 1;
  // First edge strictly greater than v, minus one.
  const auto it = std::upper_bound(bins.edges.begin(), bins.edges.end(), v);
  const auto k = static_cast<std::size_t>(it - bins.edges.begin()) - 1;
  return std::min(k, m - 1);
}

nlohmann::json bin_layout_to_json(const BinLayout& bins) {
  nlohmann::json j;
  j["strategy"] = to_string(bins.strategy);
  j["edges"] = bins.edges;
  if (bins.strategy == BinStrategy::kMixedPrecision) {
    j["d"] = bins.dense_fraction;
    j["dense_range"] = {bins.dense_lo, bins.dense_hi};
  }
  return j;
}

BinLayout bin_layout_from_json(const nlohmann::json& j) {
  BinLayout layout;
  layout.strategy = bin_strategy_from_string(j.at("strategy").get<std::string>());
  layout.edges = j.at("edges").get<std::vector<double>>();
  if (layout.edges.size() < 3) throw std::invalid_argument("bin layout: too few edges");
  if (layout.strategy == BinStrategy::kMixedPrecision) {
    layout.dense_fraction = j.at("d").get<double>();
    const auto range = j.at("dense_range").get<std::vector<double>>();
    if (range.size() != 2) throw std::invalid_argument("bin layout: bad dense_range");
    layout.dense_lo = range[0];
    layout.dense_hi = range[1];
  }
  finish_centers(layout);
  return layout;
}

}  // namespace fourierhead
