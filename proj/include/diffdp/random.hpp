#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>

namespace diffdp {

// All stochastic routines take this engine by reference. Distribution objects
// are created per call so the engine state alone determines every draw; this
// is what makes checkpoint/resume bit-exact.
using Rng = std::mt19937_64;

Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0);

std::string serialize_rng(const Rng& rng);
Rng deserialize_rng(const std::string& text);

// Uniform on the open interval (0, 1).
double sample_uniform(Rng& rng);
double sample_uniform(Rng& rng, double lo, double hi);
double sample_normal(Rng& rng, double mean, double sd);

// log of a Gamma(shape, 1) variate; stays finite for very small shapes.
double sample_log_gamma(Rng& rng, double shape);
// Gamma with shape/rate parametrization.
double sample_gamma(Rng& rng, double shape, double rate);

// Beta draw clamped to the open unit interval, so stick values never hit 0 or 1
// even for small shapes.
double sample_beta(Rng& rng, double a, double b);

int sample_binomial(Rng& rng, int trials, double p);

// Index drawn with probability proportional to exp(log_weights[i]) by inverse
// CDF after log-sum-exp normalization. Throws NumericalError if every weight
// is -inf or any weight is NaN.
std::size_t sample_log_discrete(Rng& rng, std::span<const double> log_weights);

}  // namespace diffdp
