#include "mnflow/noise.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "mnflow/errors.hpp"

namespace mnflow {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Distribution parse_distribution(std::string_view name) {
  if (name == "gaussian") return Distribution::kGaussian;
  if (name == "laplacian") return Distribution::kLaplacian;
  if (name == "uniform") return Distribution::kUniform;
  throw InvalidArgument("unknown noise family '" + std::string(name) + "'");
}

std::string_view name_of(Distribution d) {
  switch (d) {
    case Distribution::kGaussian:
      return "gaussian";
    case Distribution::kLaplacian:
      return "laplacian";
    case Distribution::kUniform:
      return "uniform";
  }
  return "?";
}

double distribution_excess_kurtosis(Distribution d) {
  switch (d) {
    case Distribution::kGaussian:
      return 0.0;
    case Distribution::kLaplacian:
      return 3.0;
    case Distribution::kUniform:
      return -1.2;
  }
  return 0.0;
}

double parse_weight(std::string_view text) {
  double value = 0.0;
  std::istringstream in{std::string(text)};
  if (!(in >> value) || !in.eof() || !(value > 0.0) || !std::isfinite(value)) {
    throw InvalidArgument("mixture weight must be a positive number, got '" + std::string(text) +
                          "'");
  }
  return value;
}

// Uniform on the open interval (0,1) from 53 random bits.
double open_unit(std::mt19937_64& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

class Sampler {
 public:
  Sampler(Distribution d, double variance) : dist_(d), sigma_(std::sqrt(variance)) {}

  double operator()(std::mt19937_64& rng) {
    switch (dist_) {
      case Distribution::kGaussian:
        return sigma_ * normal_(rng);
      case Distribution::kLaplacian: {
        // Inverse CDF with scale b = sqrt(variance / 2).
        const double b = sigma_ / std::sqrt(2.0);
        const double p = open_unit(rng) - 0.5;
        return -b * std::copysign(1.0, p) * std::log1p(-2.0 * std::abs(p));
      }
      case Distribution::kUniform: {
        const double half_width = std::sqrt(3.0) * sigma_;
        return half_width * (2.0 * open_unit(rng) - 1.0);
      }
    }
    return 0.0;
  }

 private:
  Distribution dist_;
  double sigma_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

template <class RowFn>
void for_each_row_parallel(int height, RowFn&& fn) {
#pragma omp parallel for schedule(static)
  for (int y = 0; y < height; ++y) fn(y);
}

void check_same_shape(const Image& a, const Image& b) {
  if (!a.same_shape(b)) throw InvalidArgument("image dimensions differ");
}

SnrReport finish_report(double signal_var, double noise_var, double mse) {
  SnrReport r;
  r.signal_variance = signal_var;
  r.noise_variance = noise_var;
  r.mse = mse;
  r.snr_db = noise_var > 0.0 ? 10.0 * std::log10(signal_var / noise_var) : kInf;
  r.psnr_db = mse > 0.0 ? 10.0 * std::log10(1.0 / mse) : kInf;
  return r;
}

}  // namespace

NoiseFamily parse_noise_family(std::string_view text) {
  constexpr std::string_view kMixPrefix = "mix:";
  if (!text.starts_with(kMixPrefix)) return parse_distribution(text);

  std::vector<std::string_view> parts;
  std::string_view rest = text.substr(kMixPrefix.size());
  while (true) {
    const auto comma = rest.find(',');
    parts.push_back(rest.substr(0, comma));
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  if (parts.size() != 4) {
    throw InvalidArgument("mixture must be written mix:a,family1,b,family2");
  }
  Mixture m;
  m.a = parse_weight(parts[0]);
  m.first = parse_distribution(parts[1]);
  m.b = parse_weight(parts[2]);
  m.second = parse_distribution(parts[3]);
  return m;
}

std::string to_string(const NoiseFamily& family) {
  if (const auto* d = std::get_if<Distribution>(&family)) return std::string(name_of(*d));
  const auto& m = std::get<Mixture>(family);
  std::ostringstream out;
  out << "mix:" << m.a << ',' << name_of(m.first) << ',' << m.b << ',' << name_of(m.second);
  return out.str();
}

double family_excess_kurtosis(const NoiseFamily& family) {
  if (const auto* d = std::get_if<Distribution>(&family)) return distribution_excess_kurtosis(*d);
  // Fourth cumulants add for independent terms: k4(a n1 + b n2) = a^4 k4(n1) + b^4 k4(n2).
  const auto& m = std::get<Mixture>(family);
  const double a2 = m.a * m.a;
  const double b2 = m.b * m.b;
  return (a2 * a2 * distribution_excess_kurtosis(m.first) +
          b2 * b2 * distribution_excess_kurtosis(m.second)) /
         ((a2 + b2) * (a2 + b2));
}

std::vector<double> sample_noise(const NoiseSpec& spec, std::size_t count) {
  if (!(spec.variance > 0.0) || !std::isfinite(spec.variance)) {
    throw InvalidArgument("noise variance must be positive and finite");
  }
  if (count == 0) throw InvalidArgument("sample count must be at least 1");

  std::mt19937_64 rng(spec.seed);
  std::vector<double> out(count);
  if (const auto* d = std::get_if<Distribution>(&spec.family)) {
    Sampler sampler(*d, spec.variance);
    for (auto& v : out) v = sampler(rng);
    return out;
  }

  const auto& m = std::get<Mixture>(spec.family);
  const double component_variance = spec.variance / (m.a * m.a + m.b * m.b);
  Sampler first(m.first, component_variance);
  Sampler second(m.second, component_variance);
  for (auto& v : out) {
    const double n1 = first(rng);
    const double n2 = second(rng);
    v = m.a * n1 + m.b * n2;
  }
  return out;
}

double variance(std::span<const double> values) {
  if (values.empty()) return 0.0;
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return ss / n;
}

Degraded degrade_to_snr(const Image& image, const NoiseFamily& family, double target_snr_db,
                        std::uint64_t seed) {
  if (!std::isfinite(target_snr_db)) throw InvalidArgument("target SNR must be finite");
  const double signal_var = variance(image.pixels());
  if (!(signal_var > 0.0)) {
    throw InvalidArgument("cannot target an SNR on a constant image");
  }

  NoiseSpec spec{family, signal_var / std::pow(10.0, target_snr_db / 10.0), seed};
  if (!(spec.variance > 0.0)) {
    // Target so large the requested variance underflows: noise-free limit.
    spec.variance = std::numeric_limits<double>::min();
  }

  std::vector<double> noise = sample_noise(spec, image.size());
  const double realized = variance(noise);
  if (realized > 0.0) {
    const double scale = std::sqrt(spec.variance / realized);
    for (auto& v : noise) v *= scale;
  }

  Image noisy = image;
  auto px = noisy.pixels();
  for (std::size_t i = 0; i < px.size(); ++i) px[i] += noise[i];

  SnrReport report = snr_between(image, noisy);
  return {std::move(noisy), spec, report};
}

SnrReport snr_between(const Image& clean, const Image& degraded) {
  check_same_shape(clean, degraded);
  const int w = clean.width();
  const int h = clean.height();
  const double n = static_cast<double>(clean.size());

  std::vector<double> clean_sum(h), diff_sum(h);
  for_each_row_parallel(h, [&](int y) {
    double cs = 0.0, ds = 0.0;
    for (int x = 0; x < w; ++x) {
      cs += clean(x, y);
      ds += degraded(x, y) - clean(x, y);
    }
    clean_sum[y] = cs;
    diff_sum[y] = ds;
  });
  const double clean_mean = std::accumulate(clean_sum.begin(), clean_sum.end(), 0.0) / n;
  const double diff_mean = std::accumulate(diff_sum.begin(), diff_sum.end(), 0.0) / n;

  std::vector<double> clean_ss(h), diff_ss(h), diff_sq(h);
  for_each_row_parallel(h, [&](int y) {
    double css = 0.0, dss = 0.0, dsq = 0.0;
    for (int x = 0; x < w; ++x) {
      const double c = clean(x, y) - clean_mean;
      const double e = degraded(x, y) - clean(x, y);
      css += c * c;
      dss += (e - diff_mean) * (e - diff_mean);
      dsq += e * e;
    }
    clean_ss[y] = css;
    diff_ss[y] = dss;
    diff_sq[y] = dsq;
  });

  return finish_report(std::accumulate(clean_ss.begin(), clean_ss.end(), 0.0) / n,
                       std::accumulate(diff_ss.begin(), diff_ss.end(), 0.0) / n,
                       std::accumulate(diff_sq.begin(), diff_sq.end(), 0.0) / n);
}

SnrReport snr_between_serial(const Image& clean, const Image& degraded) {
  check_same_shape(clean, degraded);
  const auto c = clean.pixels();
  const auto d = degraded.pixels();
  std::vector<double> diff(c.size());
  double sq = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    diff[i] = d[i] - c[i];
    sq += diff[i] * diff[i];
  }
  return finish_report(variance(c), variance(diff), sq / static_cast<double>(c.size()));
}

}  // namespace mnflow
