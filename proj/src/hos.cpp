#include "mnflow/hos.hpp"

#include <cmath>
#include <numeric>

#include "mnflow/errors.hpp"

namespace mnflow {

namespace {

constexpr double kDegenerateRms = 1e-12;

}  // namespace

std::optional<KurtosisEstimate> excess_kurtosis_window(std::span<const double> values) {
  const std::size_t m = values.size();
  if (m < 2) throw InvalidArgument("kurtosis window needs at least 2 samples");

  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / m;
  double s2 = 0.0;
  double s4 = 0.0;
  for (double v : values) {
    const double c = v - mean;
    const double c2 = c * c;
    s2 += c2;
    s4 += c2 * c2;
  }
  if (std::sqrt(s2 / m) < kDegenerateRms) return std::nullopt;
  return KurtosisEstimate{static_cast<double>(m) * s4 / (s2 * s2) - 3.0, static_cast<int>(m),
                          KurtosisMode::kResidual};
}

std::optional<KurtosisEstimate> literal_kurtosis_window(std::span<const double> values) {
  const std::size_t m = values.size();
  if (m < 2) throw InvalidArgument("kurtosis window needs at least 2 samples");

  double s2 = 0.0;
  double s4 = 0.0;
  for (double v : values) {
    s2 += v * v;
    s4 += v * v * v * v;
  }
  if (std::sqrt(s2 / m) < kDegenerateRms) return std::nullopt;
  return KurtosisEstimate{s4 / (s2 * s2) - 3.0, static_cast<int>(m),
                          KurtosisMode::kLiteralIntensity};
}

double window_kurtosis_or_neutral(std::span<const double> values, KurtosisMode mode) {
  const auto estimate = mode == KurtosisMode::kResidual ? excess_kurtosis_window(values)
                                                        : literal_kurtosis_window(values);
  return estimate ? estimate->chi : 0.0;
}

double fourth_cumulant(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n < 2) throw InvalidArgument("fourth cumulant needs at least 2 samples");
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double m2 = 0.0;
  double m4 = 0.0;
  for (double v : values) {
    const double c2 = (v - mean) * (v - mean);
    m2 += c2;
    m4 += c2 * c2;
  }
  m2 /= n;
  m4 /= n;
  return m4 - 3.0 * m2 * m2;
}

double gamma_of_kurtosis(double chi, const GammaParams& params) {
  const double t = params.c * chi;
  if (t >= 0.0) {
    const double e = std::exp(-t);
    return e / (params.A + e);
  }
  return 1.0 / (params.A * std::exp(t) + 1.0);
}

}  // namespace mnflow
