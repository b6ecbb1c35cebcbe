#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "quakeinv/errors.hpp"
#include "quakeinv/priors.hpp"
#include "quakeinv/special.hpp"

using namespace quakeinv;
using namespace quakeinv::priors;
using geometry::EarthquakeParams;
using geometry::FaultGeometry;
using geometry::GeoSample;

namespace {

FaultGeometry flat_geometry(double depth = 30.0) {
    std::vector<GeoSample> samples;
    for (int i = 0; i <= 3; ++i)
        for (int j = 0; j <= 3; ++j)
            samples.push_back({-4.0 + 2.0 * i, 126.0 + 2.0 * j, depth, 90.0, 15.0});
    return FaultGeometry::from_samples(samples);
}

constexpr double neg_inf = -std::numeric_limits<double>::infinity();

}  // namespace

TEST_CASE("magnitude outside the truncation bounds has zero support") {
    const auto geom = flat_geometry();
    const PriorSpec spec;
    EarthquakeParams p{-1.0, 129.0, 0.0, 10.0, 0.0, 0.0};
    CHECK(log_prior(p, spec, geom) == neg_inf);
    p.magnitude = 6.4;
    CHECK(log_prior(p, spec, geom) == neg_inf);
    p.magnitude = 8.0;
    CHECK(log_prior(p, spec, geom) > neg_inf);
}

TEST_CASE("out-of-region and out-of-depth locations have zero support") {
    const auto geom = flat_geometry();
    const PriorSpec spec;
    CHECK(log_prior({30.0, 129.0, 0, 8, 0, 0}, spec, geom) == neg_inf);
    const auto deep = flat_geometry(80.0);  // outside (2.5, 50)
    CHECK(log_prior({-1.0, 129.0, 0, 8, 0, 0}, spec, deep) == neg_inf);
}

TEST_CASE("log prior decomposes into its closed-form components") {
    const auto geom = flat_geometry(30.0);  // interface at the depth-prior mode
    const PriorSpec spec;
    EarthquakeParams p{-1.0, 129.0, 3.0, 7.25, 0.0, -0.1};
    const double expect = special::truncnorm_logpdf(30.0, spec.depth_mu, spec.depth_sigma,
                                                    spec.depth_lo, spec.depth_hi) +
                          special::normal_logpdf(3.0, 0.0, spec.offset_sigma) -
                          spec.mag_rate * (7.25 - spec.mag_lo) +
                          special::normal_logpdf(0.0, 0.0, spec.dlogl_sigma) +
                          special::normal_logpdf(-0.1, 0.0, spec.dlogw_sigma);
    CHECK(log_prior(p, spec, geom) == doctest::Approx(expect).epsilon(1e-13));

    // dlogl at its mean contributes the component maximum -log(sigma sqrt(2 pi))
    EarthquakeParams q = p;
    q.dlogl = spec.dlogl_sigma;
    CHECK(log_prior(p, spec, geom) - log_prior(q, spec, geom) == doctest::Approx(0.5));
}

TEST_CASE("magnitude factor integrates to the truncated-exponential constant") {
    const auto geom = flat_geometry();
    const PriorSpec spec;
    EarthquakeParams p{-1.0, 129.0, 1.0, 0.0, 0.05, 0.0};

    // 64-point Gauss-Legendre over (mag_lo, mag_hi)
    const int n = 64;
    std::vector<double> x(n), w(n);
    for (int i = 0; i < n; ++i) {
        // Newton iteration on Legendre polynomials
        double t = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = t;
            for (int k = 2; k <= n; ++k) {
                const double pk = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = pk;
            }
            const double dp = n * (t * p1 - p0) / (t * t - 1.0);
            const double t_new = t - p1 / dp;
            if (std::abs(t_new - t) < 1e-15) {
                t = t_new;
                break;
            }
            t = t_new;
        }
        x[i] = t;
        double p0 = 1.0, p1 = t;
        for (int k = 2; k <= n; ++k) {
            const double pk = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
            p0 = p1;
            p1 = pk;
        }
        const double dp = n * (t * p1 - p0) / (t * t - 1.0);
        w[i] = 2.0 / ((1.0 - t * t) * dp * dp);
    }

    p.magnitude = spec.mag_lo;
    const double base = log_prior(p, spec, geom) + spec.mag_rate * 0.0;
    double integral = 0.0;
    for (int i = 0; i < n; ++i) {
        p.magnitude = 0.5 * (spec.mag_hi + spec.mag_lo) + 0.5 * (spec.mag_hi - spec.mag_lo) * x[i];
        integral += w[i] * std::exp(log_prior(p, spec, geom));
    }
    integral *= 0.5 * (spec.mag_hi - spec.mag_lo);

    const double z_texp = (1.0 - std::exp(-spec.mag_rate * (spec.mag_hi - spec.mag_lo))) /
                          spec.mag_rate;  // 1.5537396797031403
    CHECK(integral / std::exp(base) == doctest::Approx(z_texp).epsilon(1e-6));
}

TEST_CASE("prior draws respect their supports and the analytic magnitude mean") {
    const auto geom = flat_geometry();
    const PriorSpec spec;
    RngStream rng(20240517);
    const int n = 10000;
    double mean = 0.0, sumsq = 0.0;
    for (int k = 0; k < n; ++k) {
        const auto p = sample_prior(spec, geom, rng);
        CHECK(p.magnitude > spec.mag_lo);
        CHECK(p.magnitude < spec.mag_hi);
        const double depth = geom.interp(p.lat, p.lon).depth;
        CHECK(depth > spec.depth_lo);
        CHECK(depth < spec.depth_hi);
        CHECK(log_prior(p, spec, geom) > neg_inf);
        mean += p.magnitude;
        sumsq += p.magnitude * p.magnitude;
    }
    mean /= n;
    const double sd = std::sqrt((sumsq - n * mean * mean) / (n - 1));
    const double analytic_mean = 7.638349249633395;  // truncated exponential on (6.5, 9.5)
    CHECK(std::abs(mean - analytic_mean) < 3.0 * sd / std::sqrt(double(n)));
}

TEST_CASE("an impossible depth prior makes sampling fail loudly") {
    const auto deep = flat_geometry(80.0);
    const PriorSpec spec;
    RngStream rng(7);
    CHECK_THROWS_AS(sample_prior(spec, deep, rng), ConfigError);
}
