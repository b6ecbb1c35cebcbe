#include "quakeinv/priors.hpp"

#include <cmath>
#include <limits>

#include "quakeinv/errors.hpp"
#include "quakeinv/special.hpp"

namespace quakeinv::priors {

namespace {
constexpr double neg_inf = -std::numeric_limits<double>::infinity();
}

double log_prior(const geometry::EarthquakeParams& p, const PriorSpec& spec,
                 const geometry::FaultGeometry& geom) {
    if (!std::isfinite(p.lat) || !std::isfinite(p.lon) || !std::isfinite(p.depth_offset) ||
        !std::isfinite(p.magnitude) || !std::isfinite(p.dlogl) || !std::isfinite(p.dlogw))
        return neg_inf;
    if (p.magnitude < spec.mag_lo || p.magnitude > spec.mag_hi) return neg_inf;
    if (!geom.contains(p.lat, p.lon)) return neg_inf;

    const double depth = geom.interp(p.lat, p.lon).depth;
    const double lp_loc = special::truncnorm_logpdf(depth, spec.depth_mu, spec.depth_sigma,
                                                    spec.depth_lo, spec.depth_hi);
    if (lp_loc == neg_inf) return neg_inf;

    double lp = lp_loc;
    lp += special::normal_logpdf(p.depth_offset, 0.0, spec.offset_sigma);
    lp += -spec.mag_rate * (p.magnitude - spec.mag_lo);
    lp += special::normal_logpdf(p.dlogl, 0.0, spec.dlogl_sigma);
    lp += special::normal_logpdf(p.dlogw, 0.0, spec.dlogw_sigma);
    return lp;
}

geometry::EarthquakeParams sample_prior(const PriorSpec& spec,
                                        const geometry::FaultGeometry& geom, RngStream& rng) {
    geometry::EarthquakeParams p;

    // lat/lon: uniform proposals over the bounding region, thinned by the
    // depth-pre-image density
    const double mode = std::clamp(spec.depth_mu, spec.depth_lo, spec.depth_hi);
    const double logpdf_max = special::truncnorm_logpdf(mode, spec.depth_mu, spec.depth_sigma,
                                                        spec.depth_lo, spec.depth_hi);
    constexpr long max_attempts = 1000000;
    long attempt = 0;
    for (;; ++attempt) {
        if (attempt >= max_attempts)
            throw ConfigError("sample_prior: no lat/lon accepted after 10^6 proposals; "
                              "the geometry depths and the depth prior are incompatible");
        const double lat = geom.lat_min() + rng.uniform() * (geom.lat_max() - geom.lat_min());
        const double lon = geom.lon_min() + rng.uniform() * (geom.lon_max() - geom.lon_min());
        const double depth = geom.interp(lat, lon).depth;
        const double lp = special::truncnorm_logpdf(depth, spec.depth_mu, spec.depth_sigma,
                                                    spec.depth_lo, spec.depth_hi);
        if (lp == neg_inf) continue;
        if (std::log(rng.uniform() + 1e-300) < lp - logpdf_max) {
            p.lat = lat;
            p.lon = lon;
            break;
        }
    }

    p.depth_offset = spec.offset_sigma * rng.normal();

    // inverse cdf of the truncated exponential on [mag_lo, mag_hi]
    const double span_mass = 1.0 - std::exp(-spec.mag_rate * (spec.mag_hi - spec.mag_lo));
    p.magnitude = spec.mag_lo - std::log1p(-rng.uniform() * span_mass) / spec.mag_rate;

    p.dlogl = spec.dlogl_sigma * rng.normal();
    p.dlogw = spec.dlogw_sigma * rng.normal();
    return p;
}

}  // namespace quakeinv::priors
