#include "quakeinv/special.hpp"

#include <limits>

namespace quakeinv::special {

double digamma(double x) {
    double acc = 0.0;
    while (x < 10.0) {
        acc -= 1.0 / x;
        x += 1.0;
    }
    // asymptotic series: ln x - 1/(2x) - sum B_2n / (2n x^{2n})
    const double inv = 1.0 / x;
    const double inv2 = inv * inv;
    double series = std::log(x) - 0.5 * inv;
    series -= inv2 * (1.0 / 12.0 - inv2 * (1.0 / 120.0 - inv2 * (1.0 / 252.0 - inv2 * (1.0 / 240.0 - inv2 * (1.0 / 132.0)))));
    return acc + series;
}

double log1p_erf(double z) {
    if (z >= -0.7) return std::log1p(std::erf(z));
    const double t = -z;  // 1 + erf(z) = erfc(t), t > 0
    if (t < 25.0) return std::log(std::erfc(t));
    // erfc(t) ~ exp(-t^2) / (t sqrt(pi)) * (1 - 1/(2t^2) + 3/(4t^4) - 15/(8t^6))
    const double it2 = 1.0 / (t * t);
    const double corr = 1.0 - 0.5 * it2 * (1.0 - 1.5 * it2 * (1.0 - 2.5 * it2));
    return -t * t - std::log(t) - 0.5 * std::log(M_PI) + std::log(corr);
}

double truncnorm_logpdf(double x, double mu, double sigma, double lo, double hi) {
    if (x < lo || x > hi) return -std::numeric_limits<double>::infinity();
    const double mass = normal_cdf((hi - mu) / sigma) - normal_cdf((lo - mu) / sigma);
    return normal_logpdf(x, mu, sigma) - std::log(mass);
}

}  // namespace quakeinv::special
