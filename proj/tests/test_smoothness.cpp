#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "fourierhead/random.hpp"
#include "fourierhead/smoothness.hpp"

using namespace fourierhead;

namespace {

constexpr double kPi = 3.141592653589793238462643;

// Direct summation over sigma with explicit convolutions; the independent
// oracle for the spectral fast path.
double smoothness_brute_force(const std::vector<double>& y, std::size_t sigma_max,
                              Discrepancy discrepancy) {
  double total = 0.0;
  for (std::size_t sigma = 1; sigma <= sigma_max; ++sigma) {
    const DiscreteGaussianKernel kernel = gaussian_kernel(y.size(), static_cast<double>(sigma));
    const std::vector<double> smoothed = circular_convolve(y, kernel);
    double dist = 0.0;
    for (std::size_t j = 0; j < y.size(); ++j) {
      const double diff = y[j] - smoothed[j];
      dist += discrepancy == Discrepancy::kL2 ? diff * diff : std::abs(diff);
    }
    if (discrepancy == Discrepancy::kL2) dist = std::sqrt(dist);
    total += 6.0 / (kPi * kPi * sigma * sigma) * dist;
  }
  return total;
}

std::vector<double> random_histogram(SplitMix64& rng, std::size_t m) {
  std::vector<double> y(m);
  double total = 0.0;
  for (double& v : y) {
    v = rng.uniform_open01();
    total += v;
  }
  for (double& v : y) v /= total;
  return y;
}

}  // namespace

TEST_CASE("discrete gaussian kernel values at m=2, sigma=1") {
  const DiscreteGaussianKernel kernel = gaussian_kernel(2, 1.0);
  REQUIRE(kernel.weights.size() == 3);
  CHECK(kernel.weights[0] == doctest::Approx(0.27406862).epsilon(1e-6));
  CHECK(kernel.weights[1] == doctest::Approx(0.45186276).epsilon(1e-6));
  CHECK(kernel.weights[2] == doctest::Approx(0.27406862).epsilon(1e-6));
}

TEST_CASE("kernel weights sum to one and are symmetric") {
  for (std::size_t m : {2, 5, 17, 64}) {
    for (double sigma : {0.5, 1.0, 3.0, 25.0}) {
      const DiscreteGaussianKernel kernel = gaussian_kernel(m, sigma);
      const double total = std::accumulate(kernel.weights.begin(), kernel.weights.end(), 0.0);
      CHECK(std::abs(total - 1.0) <= 1e-12);
      for (std::size_t i = 0; i < kernel.weights.size(); ++i) {
        CHECK(kernel.weights[i] ==
              doctest::Approx(kernel.weights[kernel.weights.size() - 1 - i]).epsilon(1e-14));
      }
    }
  }
  CHECK_THROWS(gaussian_kernel(1, 1.0));
  CHECK_THROWS(gaussian_kernel(4, 0.0));
}

TEST_CASE("huge sigma flattens the kernel") {
  const std::size_t m = 6;
  const DiscreteGaussianKernel kernel = gaussian_kernel(m, 1e9);
  for (double w : kernel.weights) {
    CHECK(w == doctest::Approx(1.0 / static_cast<double>(2 * m - 1)).epsilon(1e-9));
  }
}

TEST_CASE("circular convolution hand example at m=2") {
  const DiscreteGaussianKernel kernel = gaussian_kernel(2, 1.0);
  const std::vector<double> y = {1.0, 0.0};
  const std::vector<double> out = circular_convolve(y, kernel);
  CHECK(out[0] == doctest::Approx(0.45186276).epsilon(1e-6));
  CHECK(out[1] == doctest::Approx(0.54813724).epsilon(1e-6));
}

TEST_CASE("circular convolution preserves mass and uniform signals") {
  SplitMix64 rng(1);
  const std::vector<double> uniform(8, 0.125);
  const DiscreteGaussianKernel kernel = gaussian_kernel(8, 2.0);
  const std::vector<double> out = circular_convolve(uniform, kernel);
  for (double v : out) CHECK(v == doctest::Approx(0.125).epsilon(1e-12));

  const std::vector<double> y = random_histogram(rng, 16);
  const DiscreteGaussianKernel k16 = gaussian_kernel(16, 1.5);
  const std::vector<double> conv = circular_convolve(y, k16);
  CHECK(std::accumulate(conv.begin(), conv.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));

  // Shift equivariance: convolving a rotation equals rotating the convolution.
  std::vector<double> rotated(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) rotated[i] = y[(i + 5) % y.size()];
  const std::vector<double> conv_rot = circular_convolve(rotated, k16);
  for (std::size_t i = 0; i < y.size(); ++i) {
    CHECK(conv_rot[i] == doctest::Approx(conv[(i + 5) % y.size()]).epsilon(1e-12));
  }
}

TEST_CASE("one-hot smoothed by a huge-sigma kernel approaches uniform") {
  // In the flat-kernel limit the 2m-1 taps fold onto m circular positions,
  // one of which receives a single tap; the deviation from uniform is at most
  // 1/(2m-1) there and vanishes as m grows.
  for (std::size_t m : {9, 61, 301}) {
    std::vector<double> onehot(m, 0.0);
    onehot[m / 3] = 1.0;
    const std::vector<double> out = circular_convolve(onehot, gaussian_kernel(m, 1e8));
    const double uniform = 1.0 / static_cast<double>(m);
    const double slack = 1.0 / static_cast<double>(2 * m - 1);
    for (double v : out) CHECK(std::abs(v - uniform) <= slack + 1e-9);
  }
}

TEST_CASE("circular convolution rejects mismatched kernels") {
  const DiscreteGaussianKernel kernel = gaussian_kernel(8, 1.0);
  const std::vector<double> y(7, 1.0 / 7.0);
  CHECK_THROWS(circular_convolve(y, kernel));
}

TEST_CASE("smoothness of the uniform distribution is zero") {
  for (std::size_t m : {4, 50, 128}) {
    const std::vector<double> uniform(m, 1.0 / static_cast<double>(m));
    CHECK(std::abs(smoothness(uniform).value) <= 1e-12);
  }
}

TEST_CASE("spectral fast path matches the brute-force oracle") {
  SplitMix64 rng(5);
  const std::size_t sigma_max = 300;
  SmoothnessConfig l2{sigma_max, Discrepancy::kL2};
  SmoothnessConfig l1{sigma_max, Discrepancy::kL1};

  std::vector<double> onehot(50, 0.0);
  onehot[7] = 1.0;
  const double oracle = smoothness_brute_force(onehot, sigma_max, Discrepancy::kL2);
  CHECK(oracle > 0.0);
  CHECK(smoothness(onehot, l2).value == doctest::Approx(oracle).epsilon(1e-9));

  for (int trial = 0; trial < 5; ++trial) {
    const std::vector<double> y = random_histogram(rng, 50);
    CHECK(smoothness(y, l2).value ==
          doctest::Approx(smoothness_brute_force(y, sigma_max, Discrepancy::kL2)).epsilon(1e-9));
  }

  // L1 goes through the FFT convolution on power-of-two lengths.
  const std::vector<double> y64 = random_histogram(rng, 64);
  CHECK(smoothness(y64, l1).value ==
        doctest::Approx(smoothness_brute_force(y64, sigma_max, Discrepancy::kL1)).epsilon(1e-9));
  // and through direct convolutions otherwise
  const std::vector<double> y20 = random_histogram(rng, 20);
  CHECK(smoothness(y20, l1).value ==
        doctest::Approx(smoothness_brute_force(y20, sigma_max, Discrepancy::kL1)).epsilon(1e-9));
}

TEST_CASE("every non-uniform histogram has strictly positive smoothness") {
  SplitMix64 rng(77);
  const SmoothnessConfig cfg{200, Discrepancy::kL2};
  double min_s = 1e300;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t m = 8 + rng.below(120);
    std::vector<double> y = random_histogram(rng, m);
    min_s = std::min(min_s, smoothness(y, cfg).value);
  }
  CHECK(min_s > 0.0);
}

TEST_CASE("smoothness is invariant under shifts and reflection") {
  SplitMix64 rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    const std::vector<double> y = random_histogram(rng, 50);
    const double base = smoothness(y).value;
    CHECK(base > 0.0);

    const std::size_t shift = 1 + rng.below(49);
    std::vector<double> rotated(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) rotated[i] = y[(i + shift) % y.size()];
    CHECK(std::abs(smoothness(rotated).value - base) <= 1e-12);

    std::vector<double> reflected(y.rbegin(), y.rend());
    CHECK(std::abs(smoothness(reflected).value - base) <= 1e-12);
  }
}

TEST_CASE("sigma truncation error stays under the documented bound") {
  SplitMix64 rng(8);
  const double bound = std::sqrt(2.0) * (6.0 / (kPi * kPi)) / 1000.0;
  for (int trial = 0; trial < 5; ++trial) {
    const std::vector<double> y = random_histogram(rng, 50);
    const double s1000 = smoothness(y, {1000, Discrepancy::kL2}).value;
    const double s2000 = smoothness(y, {2000, Discrepancy::kL2}).value;
    CHECK(std::abs(s2000 - s1000) <= bound);
    CHECK(smoothness(y).truncation_bound == doctest::Approx(bound));
  }
  std::vector<double> onehot(50, 0.0);
  onehot[0] = 1.0;
  CHECK(std::abs(smoothness(onehot, {2000, Discrepancy::kL2}).value -
                 smoothness(onehot, {1000, Discrepancy::kL2}).value) <= bound);
}

TEST_CASE("spectral entropy of pure tones") {
  const std::size_t m = 64;
  std::vector<double> tone(m), two(m);
  for (std::size_t j = 0; j < m; ++j) {
    const double x = static_cast<double>(j) / static_cast<double>(m);
    tone[j] = std::sin(2.0 * kPi * x);
    two[j] = std::sin(2.0 * kPi * x) + std::cos(4.0 * kPi * x);
  }
  CHECK(spectral_entropy(tone) == doctest::Approx(0.0).scale(1.0).epsilon(1e-9));
  CHECK(spectral_entropy(two) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK_THROWS(spectral_entropy(std::vector<double>(16, 0.0)));
}

TEST_CASE("truncated square waves are histograms and get rougher with harmonics") {
  const std::vector<double> one = truncated_square_wave(1, 512);
  CHECK(std::accumulate(one.begin(), one.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
  // Single harmonic: positive first half-period, clipped second half.
  std::size_t positive = 0;
  for (std::size_t i = 0; i < one.size(); ++i) positive += one[i] > 0.0 ? 1 : 0;
  CHECK(positive <= 257);
  CHECK(positive >= 255);

  SmoothnessConfig cfg{200, Discrepancy::kL2};
  double prev = -1.0;
  for (std::size_t h = 1; h <= 10; ++h) {
    const double s = smoothness(truncated_square_wave(h, 512), cfg).value;
    CHECK(s > prev - 1e-12);
    prev = s;
  }
  CHECK_THROWS(truncated_square_wave(0, 512));
  CHECK_THROWS(truncated_square_wave(3, 8));
}

TEST_CASE("white noise histograms are rescaled raw noise") {
  SplitMix64 rng(123);
  const std::vector<double> histogram = colored_noise(NoiseKind::kWhite, 256, rng);
  SplitMix64 replay(123);
  std::vector<double> raw(256);
  for (double& v : raw) v = replay.normal();
  const auto [mn_it, mx_it] = std::minmax_element(raw.begin(), raw.end());
  const double mn = *mn_it, mx = *mx_it;
  double total = 0.0;
  for (double& v : raw) {
    v = (v - mn) / (mx - mn);
    total += v;
  }
  for (double& v : raw) v /= total;
  REQUIRE(histogram.size() == raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    CHECK(histogram[i] == doctest::Approx(raw[i]).epsilon(1e-12));
  }
}

TEST_CASE("colored noise produces valid deterministic histograms") {
  for (NoiseKind kind :
       {NoiseKind::kBrown, NoiseKind::kPink, NoiseKind::kWhite, NoiseKind::kBlue}) {
    SplitMix64 rng(9);
    const std::vector<double> y = colored_noise(kind, 128, rng);
    REQUIRE(y.size() == 128);
    double total = 0.0;
    for (double v : y) {
      CHECK(v >= -1e-15);
      total += v;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
    SplitMix64 rng2(9);
    const std::vector<double> y2 = colored_noise(kind, 128, rng2);
    CHECK(std::equal(y.begin(), y.end(), y2.begin()));
  }
  SplitMix64 rng(1);
  CHECK_THROWS(colored_noise(NoiseKind::kPink, 100, rng));  // not a power of two
}

TEST_CASE("brown noise is smoother than white noise on average") {
  double brown = 0.0, white = 0.0;
  const SmoothnessConfig cfg{300, Discrepancy::kL2};
  for (std::uint64_t trial = 0; trial < 30; ++trial) {
    SplitMix64 rb(trial * 2 + 1), rw(trial * 2 + 2);
    brown += smoothness(colored_noise(NoiseKind::kBrown, 512, rb), cfg).value;
    white += smoothness(colored_noise(NoiseKind::kWhite, 512, rw), cfg).value;
  }
  CHECK(brown < white);
}
