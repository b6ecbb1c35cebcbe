#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "quakeinv/geometry.hpp"
#include "quakeinv/mcmc.hpp"
#include "quakeinv/obsmodel.hpp"
#include "quakeinv/priors.hpp"
#include "quakeinv/sensitivity.hpp"
#include "quakeinv/wavesim.hpp"

namespace quakeinv::scenario {

/// How the synthetic-scenario generator widens its observation
/// distributions around the truth forward outputs.
struct SynthSpec {
    geometry::EarthquakeParams truth;
    double height_sigma_rel = 0.10;    // std as a fraction of the true height
    double arrival_sigma_min = 2.0;    // minutes
    double inundation_sigma_rel = 0.0; // 0 disables inundation observations
    bool observe_heights = true;
    bool observe_arrivals = true;
};

/// Everything a run needs, parsed from one flat key-value config file.
struct ScenarioConfig {
    std::string config_dir;  // directory of the config file; paths resolve against it
    std::string geometry_path, bathymetry_path, gauges_path, observations_path, output_dir;
    priors::PriorSpec prior;
    geometry::ScalingLaw scaling;
    double duration_min = 60.0;
    double cfl = 0.45;
    double split_length_km = 100.0;
    mcmc::SamplerConfig sampler;
    std::vector<std::vector<double>> initial_params;  // per chain; empty = prior draws
    std::optional<SynthSpec> synth;

    std::string resolve(const std::string& path) const;
};

/// Parses and applies defaults; no files are opened. ConfigError carries
/// file:line for malformed entries and names missing required keys.
ScenarioConfig parse_config(const std::string& path);

void save_config(const std::string& path, const ScenarioConfig& cfg);

/// A fully loaded scenario: config plus parsed artifacts with all
/// cross-references (observation gauge names) resolved.
struct Scenario {
    ScenarioConfig cfg;
    geometry::FaultGeometry geom;
    wavesim::BathymetryGrid bathy;
    std::vector<wavesim::Gauge> gauges;
    std::vector<obsmodel::Observation> observations;
    std::vector<obsmodel::BoundObservation> bound;

    std::vector<std::string> gauge_names() const;
    /// G(u): rupture -> deformation -> propagation -> observables.
    wavesim::ForwardOutput forward(const geometry::EarthquakeParams& p) const;
    /// The sampler closures over this scenario.
    mcmc::PosteriorModel model() const;
};

Scenario load_scenario(const std::string& config_path);

/// Runs the forward model at the truth, writes observations.csv centered on
/// the outputs plus truth.csv into out_dir, and returns the observations.
/// Errors if the truth never reaches a gauge whose arrival is observed.
std::vector<obsmodel::Observation> generate_synthetic_scenario(const Scenario& base,
                                                               const SynthSpec& synth,
                                                               const std::string& out_dir);

/// Synthetic constant-depth square basin over a uniform subduction
/// interface; writes geometry.csv, bathymetry.asc and gauges.csv.
struct BasinSpec {
    double center_lat = 0.0;
    double center_lon = 130.0;
    int cells = 100;
    double cell_deg = 0.05;
    double depth_m = 2000.0;
    double interface_depth_km = 30.0;
    double interface_strike_deg = 90.0;
    double interface_dip_deg = 15.0;
    double geometry_halfwidth_deg = 6.0;
    std::vector<wavesim::Gauge> gauges;  // empty = a default 5-gauge layout
};

void write_basin_scenario(const std::string& dir, const BasinSpec& spec);

/// Report writers (diagnose / sensitivity subcommands).
void write_diagnostics_csv(const std::string& path, const mcmc::Diagnostics& d,
                           const mcmc::SampleStore& store);
void write_fim_csv(const std::string& path, const sensitivity::FIMatrix& I,
                   const sensitivity::ObsParamVector& theta);
void write_sensitivity_csv(const std::string& path, const sensitivity::FIMatrix& I_rel,
                           const sensitivity::ObsParamVector& theta,
                           const sensitivity::WorstDirection& worst);
void write_param_sensitivity_csv(const std::string& path, const mcmc::SampleStore& store,
                                 const sensitivity::FIMatrix& I_rel,
                                 const sensitivity::WorstDirection& worst,
                                 double rel_perturbation);
void write_bounds_csv(const std::string& path, const mcmc::SampleStore& store,
                      const std::vector<double>& r_grid);

}  // namespace quakeinv::scenario
