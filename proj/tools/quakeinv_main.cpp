// quakeinv: Bayesian inversion of earthquake source parameters from
// tsunami observations. Subcommands cover the full workflow: a single
// forward run, posterior sampling, chain diagnostics, sensitivity and
// robustness reports, and synthetic-scenario generation.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "quakeinv/errors.hpp"
#include "quakeinv/okada.hpp"
#include "quakeinv/scenario.hpp"

namespace {

namespace fs = std::filesystem;
using namespace quakeinv;

constexpr int exit_ok = 0;
constexpr int exit_config = 1;
constexpr int exit_numeric = 2;
constexpr int exit_io = 3;

struct CommonOpts {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
};

scenario::Scenario load(const CommonOpts& opt) {
    auto sc = scenario::load_scenario(opt.config_path);
    if (opt.seed) sc.cfg.sampler.seed = *opt.seed;
    if (opt.workers) sc.cfg.sampler.workers = *opt.workers;
    return sc;
}

std::string out_dir(const scenario::Scenario& sc) {
    const std::string dir = sc.cfg.resolve(sc.cfg.output_dir);
    fs::create_directories(dir);
    return dir;
}

int cmd_forward(const CommonOpts& opt, const std::vector<double>& params, bool dump_dz) {
    const auto sc = load(opt);
    const auto p = geometry::EarthquakeParams::from_vector(params);
    if (dump_dz) {
        const auto rects = geometry::build_rupture(p, sc.geom, sc.cfg.scaling,
                                                   sc.cfg.split_length_km);
        const auto dz = okada::compute_deformation(rects, sc.bathy.spec);
        write_ascii_grid(out_dir(sc) + "/deformation.asc", dz);
    }
    const auto fwd = sc.forward(p);
    const double log_lik = obsmodel::total_log_likelihood(fwd, sc.bound);
    const double log_prior = priors::log_prior(p, sc.cfg.prior, sc.geom);

    std::cout << "gauge, height_m, arrival_min, inundation_m\n";
    for (std::size_t g = 0; g < sc.gauges.size(); ++g) {
        const auto& o = fwd.gauges[g];
        std::cout << sc.gauges[g].name << ", " << o.max_height << ", " << o.arrival << ", "
                  << o.inundation << "\n";
    }
    std::cout << "log_prior = " << log_prior << "\nlog_lik = " << log_lik
              << "\nlog_post = " << log_prior + log_lik << "\n";
    return exit_ok;
}

int cmd_sample(const CommonOpts& opt, const std::string& resume_from) {
    auto sc = load(opt);
    const std::string dir = out_dir(sc);
    const auto model = sc.model();
    const auto param_names = [] {
        std::vector<std::string> n;
        for (const char* s : geometry::EarthquakeParams::names()) n.emplace_back(s);
        return n;
    }();

    mcmc::SampleStore store;
    if (!resume_from.empty()) {
        store = mcmc::resume_sampler(sc.cfg.sampler, model, resume_from);
    } else {
        std::vector<std::vector<double>> inits = sc.cfg.initial_params;
        if (inits.empty()) {
            // fall back to prior draws rejected against zero-likelihood starts
            RngStream rng(sc.cfg.sampler.seed ^ 0x5eedULL);
            for (int c = 0; c < sc.cfg.sampler.n_chains; ++c) {
                for (int attempt = 0;; ++attempt) {
                    const auto p = priors::sample_prior(sc.cfg.prior, sc.geom, rng);
                    try {
                        if (obsmodel::total_log_likelihood(sc.forward(p), sc.bound) >
                            -std::numeric_limits<double>::infinity()) {
                            inits.push_back(p.to_vector());
                            break;
                        }
                    } catch (const DomainError&) {
                    } catch (const NumericError&) {
                    }
                    if (attempt >= 200)
                        throw ConfigError(
                            "no prior draw with positive likelihood found for chain " +
                            std::to_string(c) + "; set init_chain_<i> in [sampler]");
                }
            }
        }
        store = mcmc::run_sampler(sc.cfg.sampler, model, inits, param_names, sc.gauge_names(),
                                  dir);
    }
    std::cout << "wrote " << store.records.size() << " records to " << dir
              << "/samples.csv (posterior set from step " << store.posterior_start << ")\n";
    return exit_ok;
}

int cmd_diagnose(const CommonOpts& opt) {
    const auto sc = load(opt);
    const std::string dir = out_dir(sc);
    const auto store = mcmc::read_samples_csv(dir + "/samples.csv", sc.cfg.sampler);
    const auto d = mcmc::diagnostics(store);
    scenario::write_diagnostics_csv(dir + "/diagnostics.csv", d, store);
    std::cout << "posterior set: " << store.posterior_set().size() << " samples\n";
    for (std::size_t p = 0; p < store.param_names.size(); ++p)
        std::cout << store.param_names[p] << ": mean " << d.posterior[p].mean << " std "
                  << d.posterior[p].std << " [q05 " << d.posterior[p].q05 << ", q95 "
                  << d.posterior[p].q95 << "]\n";
    for (std::size_t c = 0; c < d.acceptance_rate.size(); ++c)
        std::cout << "chain " << c << " acceptance " << d.acceptance_rate[c] << "\n";
    std::cout << "wrote " << dir << "/diagnostics.csv\n";
    return exit_ok;
}

int cmd_sensitivity(const CommonOpts& opt) {
    const auto sc = load(opt);
    const std::string dir = out_dir(sc);
    const auto store = mcmc::read_samples_csv(dir + "/samples.csv", sc.cfg.sampler);
    const auto theta = sensitivity::ObsParamVector::from_observations(sc.bound);

    const auto I_abs = sensitivity::fim(store, sc.bound, sensitivity::FimMode::absolute);
    const auto I_rel = sensitivity::fim(store, sc.bound, sensitivity::FimMode::relative);
    const auto worst = sensitivity::worst_direction(I_rel);
    if (worst.degenerate)
        std::cerr << "[sensitivity] leading FIM eigenvalue is degenerate within tolerance\n";

    scenario::write_fim_csv(dir + "/fim.csv", I_abs, theta);
    scenario::write_sensitivity_csv(dir + "/sensitivity.csv", I_rel, theta, worst);
    scenario::write_param_sensitivity_csv(dir + "/param_sensitivity.csv", store, I_rel, worst,
                                          0.10);
    std::vector<double> r_grid;
    for (int k = 0; k < 60; ++k) r_grid.push_back(1e-4 * std::pow(10.0, 5.0 * k / 59.0));
    scenario::write_bounds_csv(dir + "/bounds.csv", store, r_grid);
    if (I_abs.samples_excluded > 0)
        std::cerr << "[sensitivity] " << I_abs.samples_excluded
                  << " posterior samples outside an observation support were excluded\n";
    std::cout << "wrote " << dir << "/{fim,sensitivity,param_sensitivity,bounds}.csv\n";
    return exit_ok;
}

int cmd_synth(const CommonOpts& opt, bool make_basin) {
    auto cfg = scenario::parse_config(opt.config_path);
    if (!cfg.synth) throw ConfigError(opt.config_path + ": synth requires a [synth] section");
    const std::string dir = cfg.resolve(cfg.output_dir);
    fs::create_directories(dir);

    if (make_basin) {
        scenario::BasinSpec basin;
        basin.center_lat = cfg.synth->truth.lat;
        basin.center_lon = cfg.synth->truth.lon;
        scenario::write_basin_scenario(dir, basin);
        cfg.geometry_path = dir + "/geometry.csv";
        cfg.bathymetry_path = dir + "/bathymetry.asc";
        cfg.gauges_path = dir + "/gauges.csv";
    }

    // the observations file may not exist yet; stage a placeholder config
    scenario::Scenario sc;
    sc.cfg = cfg;
    sc.geom = geometry::FaultGeometry::from_file(cfg.resolve(cfg.geometry_path));
    sc.bathy = wavesim::load_bathymetry(cfg.resolve(cfg.bathymetry_path));
    sc.gauges = wavesim::load_gauges(cfg.resolve(cfg.gauges_path));
    if (opt.seed) sc.cfg.sampler.seed = *opt.seed;

    scenario::generate_synthetic_scenario(sc, *cfg.synth, dir);

    scenario::ScenarioConfig ready = sc.cfg;
    ready.observations_path = dir + "/observations.csv";
    ready.config_dir.clear();  // paths written absolute below
    ready.geometry_path = fs::absolute(cfg.resolve(cfg.geometry_path)).string();
    ready.bathymetry_path = fs::absolute(cfg.resolve(cfg.bathymetry_path)).string();
    ready.gauges_path = fs::absolute(cfg.resolve(cfg.gauges_path)).string();
    ready.observations_path = fs::absolute(dir + "/observations.csv").string();
    ready.output_dir = fs::absolute(dir).string();
    scenario::save_config(dir + "/scenario.ini", ready);
    std::cout << "wrote synthetic scenario to " << dir << " (config: " << dir
              << "/scenario.ini)\n";
    return exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bayesian earthquake-source inversion from tsunami observations"};
    app.require_subcommand(1);

    CommonOpts common;
    std::uint64_t seed_value = 0;
    int workers_value = 0;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("config", common.config_path, "scenario config file")->required();
        sub->add_option("--seed", seed_value, "override the sampler seed")
            ->each([&](const std::string&) { common.seed = seed_value; });
        sub->add_option("--workers", workers_value, "parallel chain workers (0 = one per chain)")
            ->each([&](const std::string&) { common.workers = workers_value; });
    };

    auto* fwd = app.add_subcommand("forward", "run the forward model once and print observables");
    std::vector<double> fwd_params;
    bool fwd_dump = false;
    add_common(fwd);
    fwd->add_option("--params", fwd_params,
                    "lat lon depth_offset magnitude dlogl dlogw")
        ->expected(6)
        ->required();
    fwd->add_flag("--dump-deformation", fwd_dump, "write deformation.asc to the output dir");

    auto* sample = app.add_subcommand("sample", "run the multi-chain sampler");
    std::string resume_from;
    add_common(sample);
    sample->add_option("--resume", resume_from, "continue from a checkpoint directory");

    auto* diag = app.add_subcommand("diagnose", "rolling stats, acceptance, MAP/MLE, histograms");
    add_common(diag);

    auto* sens = app.add_subcommand("sensitivity", "FIM, relative-entropy and sensitivity reports");
    add_common(sens);

    auto* synth = app.add_subcommand("synth", "generate a synthetic scenario at a known truth");
    bool make_basin = false;
    add_common(synth);
    synth->add_flag("--basin", make_basin, "also generate a constant-depth basin scenario");

    CLI11_PARSE(app, argc, argv);

    try {
        if (fwd->parsed()) return cmd_forward(common, fwd_params, fwd_dump);
        if (sample->parsed()) return cmd_sample(common, resume_from);
        if (diag->parsed()) return cmd_diagnose(common);
        if (sens->parsed()) return cmd_sensitivity(common);
        if (synth->parsed()) return cmd_synth(common, make_basin);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return exit_config;
    } catch (const IoError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return exit_io;
    } catch (const NumericError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return exit_numeric;
    } catch (const DomainError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return exit_numeric;
    }
    return exit_ok;
}
