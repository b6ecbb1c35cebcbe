#pragma once

#include "quakeinv/geometry.hpp"
#include "quakeinv/rng.hpp"

namespace quakeinv::priors {

/// Prior over the six source parameters. The lat/lon prior is the pre-image
/// of a truncated normal on interface depth: the density at (lat, lon) is
/// the truncated-normal density of the interpolated interface depth there,
/// with a uniform base measure over the geometry's bounding region and no
/// surface-to-depth Jacobian.
struct PriorSpec {
    double depth_mu = 30.0;       // km
    double depth_sigma = 5.0;     // km
    double depth_lo = 2.5;        // km
    double depth_hi = 50.0;       // km
    double offset_sigma = 5.0;    // km
    double mag_rate = 0.5;        // Gutenberg-Richter exponential rate
    double mag_lo = 6.5;          // Mw
    double mag_hi = 9.5;          // Mw
    double dlogl_sigma = 0.188;
    double dlogw_sigma = 0.172;
};

/// Unnormalized log prior density; -inf encodes zero support. The magnitude
/// term is exp(-rate * (m - mag_lo)) on [mag_lo, mag_hi] without its
/// normalization constant (constant factors cancel in MH ratios).
double log_prior(const geometry::EarthquakeParams& p, const PriorSpec& spec,
                 const geometry::FaultGeometry& geom);

/// Independent component draws; lat/lon by rejection against the
/// depth-pre-image density over the geometry bounding region. Throws
/// ConfigError if 10^6 consecutive proposals are rejected.
geometry::EarthquakeParams sample_prior(const PriorSpec& spec,
                                        const geometry::FaultGeometry& geom, RngStream& rng);

}  // namespace quakeinv::priors
