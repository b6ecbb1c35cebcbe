#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "quakeinv/errors.hpp"
#include "quakeinv/obsmodel.hpp"
#include "quakeinv/special.hpp"

using namespace quakeinv;
using namespace quakeinv::obsmodel;

namespace {

constexpr double neg_inf = -std::numeric_limits<double>::infinity();

// reference densities coded directly from the textbook forms
double ref_normal(double x, double mu, double s) {
    return std::exp(-0.5 * (x - mu) * (x - mu) / (s * s)) / (s * std::sqrt(2.0 * M_PI));
}
double ref_skew(double x, double loc, double sc, double a) {
    const double xt = (x - loc) / sc;
    const double phi = std::exp(-0.5 * xt * xt) / std::sqrt(2.0 * M_PI);
    const double cdf = special::normal_cdf(a * xt);  // Phi(a x~) via erfc
    return 2.0 / sc * phi * cdf;
}
double ref_chi(double x, double loc, double sc, double k) {
    if (x <= loc) return 0.0;
    const double xt = (x - loc) / sc;
    return std::exp((k - 1.0) * std::log(xt) - 0.5 * xt * xt -
                    (0.5 * k - 1.0) * std::log(2.0) - std::lgamma(0.5 * k)) /
           sc;
}

double simpson(const std::function<double(double)>& f, double a, double b, int n) {
    const double h = (b - a) / n;
    double acc = f(a) + f(b);
    for (int k = 1; k < n; ++k) acc += f(a + k * h) * (k % 2 ? 4.0 : 2.0);
    return acc * h / 3.0;
}

std::vector<wavesim::Gauge> two_gauges() {
    return {{"alpha", 0, 0, 0.05, M_PI / 4}, {"beta", 1, 1, 0.05, M_PI / 4}};
}

}  // namespace

TEST_CASE("skew-normal with zero skew equals the normal density everywhere") {
    std::mt19937_64 eng(5);
    std::uniform_real_distribution<double> u(-40.0, 60.0);
    const ObsDist sk{ObsFamily::skew_normal, 6.5, 1.5, 0.0};
    const ObsDist nm{ObsFamily::normal, 6.5, 1.5, 0.0};
    for (int k = 0; k < 100; ++k) {
        const double x = u(eng);
        CHECK(log_obs_density(sk, x) == doctest::Approx(log_obs_density(nm, x)).epsilon(1e-14));
    }
}

TEST_CASE("chi density vanishes at and below its location") {
    const ObsDist chi{ObsFamily::chi, 0.5, 1.5, 1.01};
    CHECK(log_obs_density(chi, 0.5) == neg_inf);
    CHECK(log_obs_density(chi, 0.2) == neg_inf);
    CHECK(log_obs_density(chi, 0.6) > neg_inf);
}

TEST_CASE("log densities match high-precision reference values") {
    CHECK(log_obs_density({ObsFamily::normal, 3, 0.8, 0}, 2.1) ==
          doctest::Approx(-1.328607481890462986).epsilon(1e-14));
    CHECK(log_obs_density({ObsFamily::skew_normal, 15, 5, 2}, 11.5) ==
          doctest::Approx(-4.596544118067156756).epsilon(1e-14));
    CHECK(log_obs_density({ObsFamily::skew_normal, 15, 5, 2}, 40.0) ==
          doctest::Approx(-14.335229265078827807).epsilon(1e-14));
    // deep left tail: ln(1+erf) must not underflow
    CHECK(log_obs_density({ObsFamily::skew_normal, 15, 5, 2}, -30.0) ==
          doctest::Approx(-208.1476025157930079).epsilon(1e-13));
    CHECK(log_obs_density({ObsFamily::chi, 0.5, 1.5, 1.01}, 1.7) ==
          doctest::Approx(-0.94719741898307333607).epsilon(1e-14));
    CHECK(log_obs_density({ObsFamily::chi, 0.5, 2, 1.01}, 0.6) ==
          doctest::Approx(-0.94385537865725207589).epsilon(1e-14));
}

TEST_CASE("every family integrates to one and matches the reference pdf") {
    const ObsDist cases[] = {{ObsFamily::normal, 3, 0.8, 0},
                             {ObsFamily::skew_normal, 15, 5, 2},
                             {ObsFamily::skew_normal, 45, 5, -1.5},
                             {ObsFamily::chi, 0.5, 1.5, 1.01},
                             {ObsFamily::chi, 0.5, 2, 3.0}};
    std::mt19937_64 eng(17);
    for (const auto& d : cases) {
        double lo, hi, mass;
        if (d.family == ObsFamily::chi) {
            lo = d.p1 + 1e-9;
            hi = d.p1 + 30.0 * d.p2;
            // trapezoid on a geometric mesh in x~: resolves the x~^(k-1)
            // cusp at the location to ~1e-9
            const int n = 200000;
            const double a = 1e-12, b = 30.0;
            const double lr = std::log(b / a);
            auto f = [&](double xt) {
                return std::exp(log_obs_density(d, d.p1 + d.p2 * xt)) * d.p2;
            };
            mass = 0.0;
            double x_prev = a, f_prev = f(a);
            for (int i = 1; i <= n; ++i) {
                const double x = a * std::exp(lr * i / n);
                const double fx = f(x);
                mass += 0.5 * (f_prev + fx) * (x - x_prev);
                x_prev = x;
                f_prev = fx;
            }
        } else {
            lo = d.p1 - 14.0 * d.p2;
            hi = d.p1 + 14.0 * d.p2;
            mass = simpson([&](double x) { return std::exp(log_obs_density(d, x)); }, lo, hi,
                           20000);
        }
        CHECK(mass == doctest::Approx(1.0).epsilon(1e-6));

        std::uniform_real_distribution<double> u(lo + 1e-3 * (hi - lo), hi - 0.4 * (hi - lo));
        for (int k = 0; k < 100; ++k) {
            const double x = u(eng);
            double ref = 0.0;
            switch (d.family) {
                case ObsFamily::normal: ref = ref_normal(x, d.p1, d.p2); break;
                case ObsFamily::skew_normal: ref = ref_skew(x, d.p1, d.p2, d.p3); break;
                case ObsFamily::chi: ref = ref_chi(x, d.p1, d.p2, d.p3); break;
            }
            REQUIRE(ref > 0.0);
            CHECK(log_obs_density(d, x) == doctest::Approx(std::log(ref)).epsilon(1e-10));
        }
    }
}

TEST_CASE("a single observation contributes exactly its own log density") {
    const auto gauges = two_gauges();
    const std::vector<Observation> obs = {{"alpha", ObsKind::height,
                                           {ObsFamily::normal, 3, 0.8, 0}}};
    const auto bound = bind_observations(obs, gauges);
    wavesim::ForwardOutput out;
    out.gauges = {{.arrival = 12.0, .max_height = 2.4, .inundation = 5.0},
                  {.arrival = 8.0, .max_height = 1.0, .inundation = 2.0}};
    CHECK(total_log_likelihood(out, bound) ==
          doctest::Approx(log_obs_density(obs[0].dist, 2.4)).epsilon(1e-15));
}

TEST_CASE("likelihood is additive and permutation invariant") {
    const auto gauges = two_gauges();
    std::vector<Observation> obs = {
        {"alpha", ObsKind::height, {ObsFamily::normal, 2, 0.5, 0}},
        {"alpha", ObsKind::arrival, {ObsFamily::skew_normal, 15, 5, 2}},
        {"beta", ObsKind::height, {ObsFamily::chi, 0.1, 1.5, 1.01}},
        {"beta", ObsKind::inundation, {ObsFamily::normal, 120, 40, 0}},
    };
    wavesim::ForwardOutput out;
    out.gauges = {{.arrival = 17.0, .max_height = 1.9, .inundation = 4.0},
                  {.arrival = 21.0, .max_height = 2.2, .inundation = 133.0}};

    const double total = total_log_likelihood(out, bind_observations(obs, gauges));
    const double first_two =
        total_log_likelihood(out, bind_observations({obs[0], obs[1]}, gauges));
    const double last_two =
        total_log_likelihood(out, bind_observations({obs[2], obs[3]}, gauges));
    CHECK(total == doctest::Approx(first_two + last_two).epsilon(1e-12));

    std::vector<Observation> shuffled = {obs[3], obs[1], obs[0], obs[2]};
    CHECK(total_log_likelihood(out, bind_observations(shuffled, gauges)) ==
          doctest::Approx(total).epsilon(1e-12));
}

TEST_CASE("moving a normal observation away from its mean never helps") {
    const auto gauges = two_gauges();
    const auto bound = bind_observations(
        {{"alpha", ObsKind::height, {ObsFamily::normal, 3, 0.8, 0}}}, gauges);
    wavesim::ForwardOutput out;
    out.gauges = {{0, 0, 0}, {0, 0, 0}};
    double prev = std::numeric_limits<double>::infinity();
    for (double v = 3.0; v < 9.0; v += 0.25) {
        out.gauges[0].max_height = v;
        const double ll = total_log_likelihood(out, bound);
        CHECK(ll <= prev);
        prev = ll;
    }
}

TEST_CASE("a wave that never arrives zeroes the likelihood") {
    const auto gauges = two_gauges();
    const auto bound = bind_observations(
        {{"alpha", ObsKind::arrival, {ObsFamily::normal, 45, 5, 0}},
         {"beta", ObsKind::height, {ObsFamily::normal, 3, 1, 0}}},
        gauges);
    wavesim::ForwardOutput out;
    out.gauges = {{.arrival = wavesim::arrival_never, .max_height = 2.0, .inundation = 1.0},
                  {.arrival = 30.0, .max_height = 3.0, .inundation = 3.0}};
    CHECK(total_log_likelihood(out, bound) == neg_inf);
}

TEST_CASE("dangling gauges and duplicate observations are configuration errors") {
    const auto gauges = two_gauges();
    CHECK_THROWS_WITH_AS(
        (void)bind_observations({{"gamma", ObsKind::height, {ObsFamily::normal, 1, 1, 0}}},
                                gauges),
        doctest::Contains("gamma"), ConfigError);
    CHECK_THROWS_AS(
        (void)bind_observations({{"alpha", ObsKind::height, {ObsFamily::normal, 1, 1, 0}},
                                 {"alpha", ObsKind::height, {ObsFamily::normal, 2, 1, 0}}},
                                gauges),
        ConfigError);
}

TEST_CASE("the 1852 observation set loads and evaluates at its means") {
    const std::string dir = QUAKEINV_DATA_DIR;
    const auto obs = load_observations(dir + "/observations_1852.csv");
    REQUIRE(obs.size() == 13);
    const auto gauges = wavesim::load_gauges(dir + "/gauges_1852.csv");
    REQUIRE(gauges.size() == 9);
    const auto bound = bind_observations(obs, gauges);

    // forward output equal to every distribution's mean
    wavesim::ForwardOutput out;
    out.gauges.assign(gauges.size(), {1.0, 1.0, 1.0});
    for (const auto& b : bound) {
        auto& g = out.gauges[b.gauge_idx];
        const double mean = b.dist.mean();
        switch (b.kind) {
            case ObsKind::height: g.max_height = mean; break;
            case ObsKind::arrival: g.arrival = mean; break;
            case ObsKind::inundation: g.inundation = mean; break;
        }
    }
    const double total = total_log_likelihood(out, bound);
    CHECK(std::isfinite(total));

    double oracle = 0.0;
    for (const auto& b : bound) {
        const double v = observable_value(out, b);
        switch (b.dist.family) {
            case ObsFamily::normal: oracle += std::log(ref_normal(v, b.dist.p1, b.dist.p2)); break;
            case ObsFamily::skew_normal:
                oracle += std::log(ref_skew(v, b.dist.p1, b.dist.p2, b.dist.p3));
                break;
            case ObsFamily::chi:
                oracle += std::log(ref_chi(v, b.dist.p1, b.dist.p2, b.dist.p3));
                break;
        }
    }
    CHECK(total == doctest::Approx(oracle).epsilon(1e-10));

    // Banda Neira arrival row carries the skew-normal (15, 5, 2)
    const auto bn = std::find_if(bound.begin(), bound.end(), [](const auto& b) {
        return b.gauge == "banda_neira" && b.kind == ObsKind::arrival;
    });
    REQUIRE(bn != bound.end());
    CHECK(bn->dist.family == ObsFamily::skew_normal);
    CHECK(bn->dist.p1 == 15.0);
    CHECK(bn->dist.p2 == 5.0);
    CHECK(bn->dist.p3 == 2.0);
}
