#pragma once

#include <optional>
#include <span>

namespace mnflow {

/// Which samples feed the kurtosis estimate driving the adaptive norm mix.
enum class KurtosisMode {
  kResidual,          // centered, m-normalized excess kurtosis of the DFD residuals
  kLiteralIntensity,  // sum I^4 / (sum I^2)^2 - 3 over a causal run of raw intensities
};

struct KurtosisEstimate {
  double chi = 0.0;
  int window_size = 0;
  KurtosisMode mode = KurtosisMode::kResidual;
};

/// Shape of the kurtosis-to-mixing sigmoid. Both must be positive.
struct GammaParams {
  double c = 1.0;
  double A = 1.0;
};

/// Sample excess kurtosis m * sum v^4 / (sum v^2)^2 - 3 of the mean-centered
/// window. Returns nullopt when the centered RMS is below 1e-12 (kurtosis
/// undefined); callers fall back to chi = 0.
std::optional<KurtosisEstimate> excess_kurtosis_window(std::span<const double> values);

/// sum I^4 / (sum I^2)^2 - 3 on the raw values, with neither centering nor the
/// m factor. Returns nullopt when every value is (numerically) zero.
std::optional<KurtosisEstimate> literal_kurtosis_window(std::span<const double> values);

/// Dispatches on mode and applies the chi = 0 fallback for degenerate windows.
double window_kurtosis_or_neutral(std::span<const double> values, KurtosisMode mode);

/// Unnormalized fourth cumulant mean(v^4) - 3 mean(v^2)^2 of the centered values.
double fourth_cumulant(std::span<const double> values);

/// exp(-c chi) / (A + exp(-c chi)), evaluated without overflow. Decreasing in
/// chi: sub-Gaussian residuals push the mix toward the fourth norm.
double gamma_of_kurtosis(double chi, const GammaParams& params);

}  // namespace mnflow
