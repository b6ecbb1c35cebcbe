#pragma once

#include <cmath>

namespace quakeinv::special {

inline constexpr double ln_2pi = 1.8378770664093454836;
inline constexpr double ln_2 = 0.6931471805599453094;

/// Digamma psi(x) for x > 0. Recurrence psi(x) = psi(x+1) - 1/x lifts the
/// argument above 6, then the asymptotic series in 1/x^2 applies.
double digamma(double x);

/// log(1 + erf(z)), stable across the full range of z. Naive evaluation
/// underflows to log(0) around z < -5.8; erfc and its asymptotic expansion
/// cover the left tail.
double log1p_erf(double z);

/// Standard normal log pdf at z = (x - mu) / sigma, with the -ln sigma term.
inline double normal_logpdf(double x, double mu, double sigma) {
    const double z = (x - mu) / sigma;
    return -0.5 * z * z - std::log(sigma) - 0.5 * ln_2pi;
}

/// Standard normal cdf.
inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

/// Normalized truncated-normal log density on [lo, hi]; -inf outside.
double truncnorm_logpdf(double x, double mu, double sigma, double lo, double hi);

}  // namespace quakeinv::special
