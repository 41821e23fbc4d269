#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "mnflow/image.hpp"

namespace mnflow {

enum class Distribution { kGaussian, kLaplacian, kUniform };

/// a * n1 + b * n2 with independent zero-mean components.
struct Mixture {
  double a = 0.5;
  Distribution first = Distribution::kGaussian;
  double b = 0.5;
  Distribution second = Distribution::kUniform;

  friend bool operator==(const Mixture&, const Mixture&) = default;
};

using NoiseFamily = std::variant<Distribution, Mixture>;

struct NoiseSpec {
  NoiseFamily family = Distribution::kGaussian;
  double variance = 1.0;  // intensity^2
  std::uint64_t seed = 0;
};

struct SnrReport {
  double signal_variance = 0.0;
  double noise_variance = 0.0;
  double snr_db = 0.0;  // +inf when noise_variance == 0
  double mse = 0.0;
  double psnr_db = 0.0;  // peak 1.0; +inf when mse == 0
};

struct Degraded {
  Image noisy;
  NoiseSpec spec;
  SnrReport report;
};

/// Parses "gaussian", "laplacian", "uniform" or "mix:a,f1,b,f2".
/// Throws InvalidArgument on anything else.
NoiseFamily parse_noise_family(std::string_view text);
std::string to_string(const NoiseFamily& family);

/// Excess kurtosis of the family at any variance (0, 3, -1.2, or the
/// mixture value).
double family_excess_kurtosis(const NoiseFamily& family);

/// i.i.d. zero-mean draws with population variance spec.variance. Mixture
/// components are scaled so that a^2 v1 + b^2 v2 = spec.variance.
std::vector<double> sample_noise(const NoiseSpec& spec, std::size_t count);

/// Adds noise of variance var(image) / 10^(target/10). The realized noise is
/// rescaled so its population variance matches that target exactly; values
/// are not clamped.
Degraded degrade_to_snr(const Image& image, const NoiseFamily& family, double target_snr_db,
                        std::uint64_t seed);

/// SNR of degraded relative to clean: 10 log10(var(clean) / var(degraded - clean)),
/// plus MSE and PSNR. Row sums run in parallel and are combined in a fixed
/// order, so the result does not depend on the thread count.
SnrReport snr_between(const Image& clean, const Image& degraded);

/// Single-threaded reference for snr_between.
SnrReport snr_between_serial(const Image& clean, const Image& degraded);

/// Population variance.
double variance(std::span<const double> values);

}  // namespace mnflow
