#pragma once

#include <string>
#include <vector>

#include "quakeinv/wavesim.hpp"

namespace quakeinv::obsmodel {

enum class ObsKind { height, arrival, inundation };

const char* to_string(ObsKind k);
ObsKind obs_kind_from_string(const std::string& s);

enum class ObsFamily { normal, skew_normal, chi };

const char* to_string(ObsFamily f);
ObsFamily obs_family_from_string(const std::string& s);

/// A parametric observation distribution.
///   normal       p1 = mean, p2 = std
///   skew_normal  p1 = location, p2 = scale, p3 = skew a
///   chi          p1 = location, p2 = scale, p3 = degrees of freedom
struct ObsDist {
    ObsFamily family = ObsFamily::normal;
    double p1 = 0.0, p2 = 1.0, p3 = 0.0;

    int n_params() const { return family == ObsFamily::normal ? 2 : 3; }
    /// Mean of the distribution (used by the synthetic-scenario generator).
    double mean() const;
};

/// Log density; -inf for values outside the support and for the arrival
/// sentinel (a wave that never arrived has probability zero under any
/// observation of it).
double log_obs_density(const ObsDist& d, double value);

/// One historical account: which gauge, which observable, what distribution.
struct Observation {
    std::string gauge;
    ObsKind kind = ObsKind::height;
    ObsDist dist;
};

/// Observation resolved against the scenario's gauge list.
struct BoundObservation {
    int gauge_idx = -1;
    ObsKind kind = ObsKind::height;
    ObsDist dist;
    std::string gauge;  // retained for report labels
};

/// Resolves gauge names to indices; ConfigError names any dangling gauge or
/// duplicate (gauge, kind) pair.
std::vector<BoundObservation> bind_observations(const std::vector<Observation>& obs,
                                                const std::vector<wavesim::Gauge>& gauges);

double observable_value(const wavesim::ForwardOutput& out, const BoundObservation& o);

/// Sum of the per-observation log densities at the forward output's values;
/// any -inf term makes the total -inf.
double total_log_likelihood(const wavesim::ForwardOutput& out,
                            const std::vector<BoundObservation>& obs);

/// Observations file: `gauge, kind, family, p1, p2[, p3]`.
std::vector<Observation> load_observations(const std::string& path);
void save_observations(const std::string& path, const std::vector<Observation>& obs);

}  // namespace quakeinv::obsmodel
