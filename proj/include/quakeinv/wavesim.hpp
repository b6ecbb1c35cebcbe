#pragma once

#include <limits>
#include <string>
#include <vector>

#include "quakeinv/grid.hpp"

namespace quakeinv::wavesim {

inline constexpr double gravity = 9.81;  // m/s^2

/// Still-water depth raster: positive = water depth (m), negative or zero =
/// land elevation. Registration must match the deformation grid it is used
/// with.
struct BathymetryGrid {
    GridSpec spec;
    std::vector<double> depth;

    double at(int i, int j) const { return depth[spec.idx(i, j)]; }
    bool wet(int i, int j) const { return at(i, j) > 0.0; }
};

BathymetryGrid load_bathymetry(const std::string& path);

/// A named shoreline point where observables are extracted.
struct Gauge {
    std::string name;
    double lat, lon;              // degrees
    double arrival_threshold;     // m
    double beach_slope;           // radians, in (0, pi/2)
};

/// Gauges file: `name, lat, lon, arrival_threshold_m, beach_slope_deg`.
std::vector<Gauge> load_gauges(const std::string& path);

inline constexpr double arrival_never = std::numeric_limits<double>::infinity();

/// Per-gauge observables of one forward run.
struct GaugeObs {
    double arrival = arrival_never;  // minutes; +inf if the threshold is never crossed
    double max_height = 0.0;         // m, crest amplitude above still water
    double inundation = 0.0;         // m
};

/// G(u): the simulated observables, ordered like the gauge list.
struct ForwardOutput {
    std::vector<GaugeObs> gauges;
};

struct SimOptions {
    double duration_min = 60.0;
    double cfl = 0.45;
    bool record_mass = false;
    bool warn_reflections = true;
};

/// Surface elevation recorded at each gauge every time step (index 0 is the
/// initial condition).
struct GaugeSeries {
    double dt_s = 0.0;
    std::vector<std::vector<double>> eta;  // [gauge][step]
    std::vector<double> mass;              // total wet-cell volume anomaly per step
    bool reflection_warning = false;
};

/// Propagates the deformation initial condition with an explicit staggered
/// linear long-wave scheme. Land cells and the outer boundary are
/// reflective walls. Throws NumericError (naming the step) if |eta| exceeds
/// 100 m anywhere.
GaugeSeries simulate(const Raster& dz, const BathymetryGrid& bathy,
                     const std::vector<Gauge>& gauges, const SimOptions& opt);

/// Reduces gauge series to observables: first threshold crossing (scanned
/// from step 1), crest amplitude, and the plane-beach inundation projection
/// max_height / tan(beach_slope).
ForwardOutput extract_observables(const GaugeSeries& series, const std::vector<Gauge>& gauges);

}  // namespace quakeinv::wavesim
