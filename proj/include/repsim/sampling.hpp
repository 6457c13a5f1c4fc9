#pragma once

#include <cstddef>
#include <vector>

#include "repsim/rng.hpp"

namespace repsim {

// Pareto-type tail with density proportional to x^(-alpha) on [x_min, inf).
// CDF: F(x) = 1 - (x / x_min)^(1 - alpha).
struct PowerLawSpec {
  double x_min = 1.0;  // > 0
  double alpha = 2.5;  // > 1
  void validate() const;
};

struct NormalSpec {
  double mu = 0.0;
  double sigma = 1.0;  // > 0
  void validate() const;
};

double power_law_cdf(double x, const PowerLawSpec& spec);

// Inverse CDF: x_min * (1 - u)^(-1 / (alpha - 1)), u in [0, 1).
double power_law_inverse_cdf(double u, const PowerLawSpec& spec);

std::vector<double> sample_power_law(RngStream& rng, const PowerLawSpec& spec,
                                     std::size_t n);

// F(x) = 0.5 * erfc(-(x - mu) / (sigma * sqrt(2))).
double normal_cdf(double x, const NormalSpec& spec);

// Mass below zero: the chance a draw from `spec` comes out negative.
double negative_rating_probability(const NormalSpec& spec);

// Box-Muller, cosine branch only; consumes exactly two uniforms.
double sample_normal(RngStream& rng, const NormalSpec& spec);

// Inverse transform; consumes exactly one uniform. mean > 0.
double sample_exponential(RngStream& rng, double mean);

// -1 with probability p_neg, +1 otherwise; consumes one uniform.
int sample_rating_sign(RngStream& rng, double p_neg);

}  // namespace repsim
