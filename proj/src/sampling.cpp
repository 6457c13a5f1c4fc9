#include "repsim/sampling.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace repsim {

namespace {

[[noreturn]] void fail_domain(const std::string& what) {
  throw std::invalid_argument(what);
}

}  // namespace

void PowerLawSpec::validate() const {
  if (!(x_min > 0.0) || !std::isfinite(x_min)) {
    fail_domain("power law x_min must be finite and > 0, got " +
                std::to_string(x_min));
  }
  if (!(alpha > 1.0) || !std::isfinite(alpha)) {
    fail_domain("power law alpha must be finite and > 1, got " +
                std::to_string(alpha));
  }
}

void NormalSpec::validate() const {
  if (!std::isfinite(mu)) fail_domain("normal mu must be finite");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    fail_domain("normal sigma must be finite and > 0, got " +
                std::to_string(sigma));
  }
}

double power_law_cdf(double x, const PowerLawSpec& spec) {
  spec.validate();
  if (!std::isfinite(x)) fail_domain("power law cdf: x must be finite");
  if (x < spec.x_min) return 0.0;
  return 1.0 - std::pow(x / spec.x_min, 1.0 - spec.alpha);
}

double power_law_inverse_cdf(double u, const PowerLawSpec& spec) {
  spec.validate();
  if (!(u >= 0.0 && u < 1.0)) {
    fail_domain("power law inverse cdf: u must lie in [0, 1), got " +
                std::to_string(u));
  }
  return spec.x_min * std::pow(1.0 - u, -1.0 / (spec.alpha - 1.0));
}

std::vector<double> sample_power_law(RngStream& rng, const PowerLawSpec& spec,
                                     std::size_t n) {
  spec.validate();
  if (n == 0) fail_domain("sample_power_law: n must be >= 1");
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = power_law_inverse_cdf(rng.uniform01(), spec);
  }
  return out;
}

double normal_cdf(double x, const NormalSpec& spec) {
  spec.validate();
  if (!std::isfinite(x)) fail_domain("normal cdf: x must be finite");
  const double z = (x - spec.mu) / spec.sigma;
  return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

double negative_rating_probability(const NormalSpec& spec) {
  return normal_cdf(0.0, spec);
}

double sample_normal(RngStream& rng, const NormalSpec& spec) {
  spec.validate();
  const double u1 = rng.uniform01();
  const double u2 = rng.uniform01();
  // log1p(-u1) = log(1 - u1); 1 - u1 is in (0, 1] so this never overflows.
  const double r = std::sqrt(-2.0 * std::log1p(-u1));
  const double z = r * std::cos(2.0 * std::numbers::pi * u2);
  return spec.mu + spec.sigma * z;
}

double sample_exponential(RngStream& rng, double mean) {
  if (!(mean > 0.0) || !std::isfinite(mean)) {
    fail_domain("sample_exponential: mean must be finite and > 0, got " +
                std::to_string(mean));
  }
  return -mean * std::log1p(-rng.uniform01());
}

int sample_rating_sign(RngStream& rng, double p_neg) {
  if (!(p_neg >= 0.0 && p_neg <= 1.0)) {
    fail_domain("sample_rating_sign: p_neg must lie in [0, 1], got " +
                std::to_string(p_neg));
  }
  return rng.uniform01() < p_neg ? -1 : +1;
}

}  // namespace repsim
