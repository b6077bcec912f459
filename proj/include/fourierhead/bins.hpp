#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace fourierhead {

enum class BinStrategy { kUniform, kMixedPrecision };

std::string to_string(BinStrategy s);
BinStrategy bin_strategy_from_string(const std::string& s);

// Partition of [lo, hi] into m contiguous bins. Bins are left-closed and
// right-open, except the last bin which is closed on both sides, so every
// value in [lo, hi] lands in exactly one bin.
struct BinLayout {
  std::vector<double> edges;    // m+1 strictly increasing values, edges.front()==lo
  std::vector<double> centers;  // midpoints of consecutive edges
  BinStrategy strategy = BinStrategy::kUniform;
  double dense_fraction = 0.0;          // d; mixed precision only
  double dense_lo = 0.0, dense_hi = 0.0;  // estimated dense range; mixed precision only
  std::size_t clamped_samples = 0;      // inputs outside [lo, hi] seen while building

  std::size_t size() const { return centers.size(); }
  double lo() const { return edges.front(); }
  double hi() const { return edges.back(); }
  double width(std::size_t k) const { return edges[k + 1] - edges[k]; }
};

// Equal-width bins; with lo=-1, hi=1 the centers are b_k = -1 + (1+2k)/m.
BinLayout uniform_bins(std::size_t m, double lo, double hi);

// Allocates m - floor(d*m) bins to the dense range (1st..99th percentile of
// samples) and splits the remaining floor(d*m) bins between the two flanking
// intervals in proportion to their lengths, remainder to the left flank.
// Degenerate flanks contribute their allotment back to the dense range.
// Samples outside [lo, hi] are clamped and counted in clamped_samples.
BinLayout mixed_precision_bins(std::span<const double> samples, std::size_t m, double d,
                               double lo, double hi);

// Index k with edges[k] <= v < edges[k+1]; out-of-range values clamp to the
// end bins and the last bin is closed on the right.
std::size_t quantize(double v, const BinLayout& bins);

inline double dequantize(std::size_t k, const BinLayout& bins) { return bins.centers[k]; }

nlohmann::json bin_layout_to_json(const BinLayout& bins);
BinLayout bin_layout_from_json(const nlohmann::json& j);

}  // namespace fourierhead
