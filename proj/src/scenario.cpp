#include "quakeinv/scenario.hpp"

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "quakeinv/errors.hpp"
#include "quakeinv/okada.hpp"
#include "quakeinv/textio.hpp"

namespace quakeinv::scenario {

namespace fs = std::filesystem;
using textio::format_double;

namespace {

struct ConfigEntry {
    std::string value;
    std::size_t line;
    mutable bool used = false;
};

struct ConfigMap {
    std::string path;
    std::map<std::string, ConfigEntry> entries;  // "section.key"

    std::string ctx(const ConfigEntry& e) const {
        return path + ":" + std::to_string(e.line);
    }
    const ConfigEntry* find(const std::string& key) const {
        const auto it = entries.find(key);
        if (it == entries.end()) return nullptr;
        it->second.used = true;
        return &it->second;
    }
    std::string require(const std::string& key) const {
        const auto* e = find(key);
        if (!e) throw ConfigError(path + ": missing required key '" + key + "'");
        return e->value;
    }
    double number(const std::string& key, double fallback) const {
        const auto* e = find(key);
        return e ? textio::parse_double(e->value, ctx(*e)) : fallback;
    }
    long integer(const std::string& key, long fallback) const {
        const auto* e = find(key);
        return e ? textio::parse_long(e->value, ctx(*e)) : fallback;
    }
    bool boolean(const std::string& key, bool fallback) const {
        const auto* e = find(key);
        if (!e) return fallback;
        if (e->value == "true" || e->value == "1") return true;
        if (e->value == "false" || e->value == "0") return false;
        throw ConfigError(ctx(*e) + ": expected true/false, got '" + e->value + "'");
    }
    std::string text(const std::string& key, const std::string& fallback) const {
        const auto* e = find(key);
        return e ? e->value : fallback;
    }
};

ConfigMap read_config_map(const std::string& path) {
    ConfigMap cm;
    cm.path = path;
    const auto lines = textio::read_lines(path);
    std::string section;
    for (std::size_t ln = 0; ln < lines.size(); ++ln) {
        std::string line = lines[ln];
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = textio::trim(line);
        if (line.empty()) continue;
        const std::string ctx = path + ":" + std::to_string(ln + 1);
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(ctx + ": unterminated section header");
            section = textio::trim(line.substr(1, line.size() - 2));
            if (section.empty()) throw ConfigError(ctx + ": empty section name");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(ctx + ": expected 'key = value'");
        const std::string key = textio::trim(line.substr(0, eq));
        const std::string value = textio::trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError(ctx + ": empty key");
        if (section.empty()) throw ConfigError(ctx + ": key outside any [section]");
        const std::string full = section + "." + key;
        if (cm.entries.count(full))
            throw ConfigError(ctx + ": duplicate key '" + full + "'");
        cm.entries.emplace(full, ConfigEntry{value, ln + 1});
    }
    return cm;
}

std::vector<double> parse_number_list(const std::string& s, const std::string& ctx) {
    std::vector<double> out;
    for (const auto& f : textio::split_fields(s))
        if (!f.empty()) out.push_back(textio::parse_double(f, ctx));
    return out;
}

}  // namespace

std::string ScenarioConfig::resolve(const std::string& path) const {
    if (path.empty() || fs::path(path).is_absolute() || config_dir.empty()) return path;
    return (fs::path(config_dir) / path).string();
}

ScenarioConfig parse_config(const std::string& path) {
    const ConfigMap cm = read_config_map(path);
    ScenarioConfig cfg;
    cfg.config_dir = fs::path(path).has_parent_path()
                         ? fs::path(path).parent_path().string()
                         : std::string(".");

    cfg.geometry_path = cm.require("files.geometry");
    cfg.bathymetry_path = cm.require("files.bathymetry");
    cfg.gauges_path = cm.require("files.gauges");
    cfg.observations_path = cm.require("files.observations");
    cfg.output_dir = cm.text("files.output_dir", "out");

    auto& p = cfg.prior;
    p.depth_mu = cm.number("prior.depth_mu_km", p.depth_mu);
    p.depth_sigma = cm.number("prior.depth_sigma_km", p.depth_sigma);
    p.depth_lo = cm.number("prior.depth_lo_km", p.depth_lo);
    p.depth_hi = cm.number("prior.depth_hi_km", p.depth_hi);
    p.offset_sigma = cm.number("prior.offset_sigma_km", p.offset_sigma);
    p.mag_rate = cm.number("prior.magnitude_rate", p.mag_rate);
    p.mag_lo = cm.number("prior.magnitude_lo", p.mag_lo);
    p.mag_hi = cm.number("prior.magnitude_hi", p.mag_hi);
    p.dlogl_sigma = cm.number("prior.dlogl_sigma", p.dlogl_sigma);
    p.dlogw_sigma = cm.number("prior.dlogw_sigma", p.dlogw_sigma);
    if (!(p.depth_sigma > 0) || !(p.offset_sigma > 0) || !(p.dlogl_sigma > 0) ||
        !(p.dlogw_sigma > 0) || !(p.mag_rate > 0))
        throw ConfigError(path + ": prior scales and rate must be positive");
    if (!(p.depth_lo < p.depth_hi) || !(p.mag_lo < p.mag_hi))
        throw ConfigError(path + ": prior bounds must be ordered");

    auto& s = cfg.scaling;
    s.a_len = cm.number("scaling.a_length", s.a_len);
    s.b_len = cm.number("scaling.b_length", s.b_len);
    s.a_wid = cm.number("scaling.a_width", s.a_wid);
    s.b_wid = cm.number("scaling.b_width", s.b_wid);
    s.rigidity = cm.number("scaling.rigidity_pa", s.rigidity);
    if (!(s.b_len > 0) || !(s.b_wid > 0) || !(s.rigidity > 0))
        throw ConfigError(path + ": scaling law requires positive b_length, b_width, rigidity_pa");

    cfg.duration_min = cm.number("simulation.duration_min", cfg.duration_min);
    cfg.cfl = cm.number("simulation.cfl", cfg.cfl);
    cfg.split_length_km = cm.number("simulation.split_length_km", cfg.split_length_km);
    if (!(cfg.duration_min > 0)) throw ConfigError(path + ": duration_min must be positive");
    if (!(cfg.cfl > 0 && cfg.cfl < 1)) throw ConfigError(path + ": cfl must lie in (0, 1)");
    if (!(cfg.split_length_km > 0))
        throw ConfigError(path + ": split_length_km must be positive");

    auto& mc = cfg.sampler;
    mc.n_chains = static_cast<int>(cm.integer("sampler.chains", 4));
    mc.total_steps = cm.integer("sampler.steps", 1000);
    mc.resample_enabled = cm.boolean("sampler.resample_enabled", true);
    mc.resample_period = cm.integer("sampler.resample_period", 0);
    if (const auto* e = cm.find("sampler.resample_steps")) {
        for (double v : parse_number_list(e->value, cm.ctx(*e)))
            mc.resample_steps.push_back(static_cast<long>(v));
    }
    mc.burn_in = cm.integer("sampler.burn_in", 200);
    mc.seed = static_cast<std::uint64_t>(cm.integer("sampler.seed", 0));
    mc.workers = static_cast<int>(cm.integer("sampler.workers", 0));
    mc.proposal_stds = {
        cm.number("sampler.proposal_std_lat", 0.08),
        cm.number("sampler.proposal_std_lon", 0.08),
        cm.number("sampler.proposal_std_depth_offset", 1.0),
        cm.number("sampler.proposal_std_magnitude", 0.04),
        cm.number("sampler.proposal_std_dlogl", 0.03),
        cm.number("sampler.proposal_std_dlogw", 0.03),
    };
    for (int c = 0;; ++c) {
        const auto* e = cm.find("sampler.init_chain_" + std::to_string(c));
        if (!e) break;
        const auto v = parse_number_list(e->value, cm.ctx(*e));
        if (v.size() != geometry::EarthquakeParams::dim)
            throw ConfigError(cm.ctx(*e) + ": initial parameters need " +
                              std::to_string(geometry::EarthquakeParams::dim) + " values");
        cfg.initial_params.push_back(v);
    }
    if (!cfg.initial_params.empty() &&
        static_cast<int>(cfg.initial_params.size()) != mc.n_chains)
        throw ConfigError(path + ": provide init_chain_<i> for every chain or for none");

    if (cm.find("synth.truth_lat") || cm.find("synth.truth_lon") ||
        cm.find("synth.truth_magnitude")) {
        SynthSpec sy;
        sy.truth.lat = textio::parse_double(cm.require("synth.truth_lat"), path);
        sy.truth.lon = textio::parse_double(cm.require("synth.truth_lon"), path);
        sy.truth.magnitude = textio::parse_double(cm.require("synth.truth_magnitude"), path);
        sy.truth.depth_offset = cm.number("synth.truth_depth_offset", 0.0);
        sy.truth.dlogl = cm.number("synth.truth_dlogl", 0.0);
        sy.truth.dlogw = cm.number("synth.truth_dlogw", 0.0);
        sy.height_sigma_rel = cm.number("synth.height_sigma_rel", sy.height_sigma_rel);
        sy.arrival_sigma_min = cm.number("synth.arrival_sigma_min", sy.arrival_sigma_min);
        sy.inundation_sigma_rel = cm.number("synth.inundation_sigma_rel", 0.0);
        sy.observe_heights = cm.boolean("synth.observe_heights", true);
        sy.observe_arrivals = cm.boolean("synth.observe_arrivals", true);
        cfg.synth = sy;
    }

    for (const auto& [key, entry] : cm.entries)
        if (!entry.used)
            throw ConfigError(cm.ctx(entry) + ": unknown key '" + key + "'");
    return cfg;
}

void save_config(const std::string& path, const ScenarioConfig& cfg) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << "[files]\n";
    out << "geometry = " << cfg.geometry_path << "\n";
    out << "bathymetry = " << cfg.bathymetry_path << "\n";
    out << "gauges = " << cfg.gauges_path << "\n";
    out << "observations = " << cfg.observations_path << "\n";
    out << "output_dir = " << cfg.output_dir << "\n";

    const auto& p = cfg.prior;
    out << "\n[prior]\n";
    out << "depth_mu_km = " << format_double(p.depth_mu) << "\n";
    out << "depth_sigma_km = " << format_double(p.depth_sigma) << "\n";
    out << "depth_lo_km = " << format_double(p.depth_lo) << "\n";
    out << "depth_hi_km = " << format_double(p.depth_hi) << "\n";
    out << "offset_sigma_km = " << format_double(p.offset_sigma) << "\n";
    out << "magnitude_rate = " << format_double(p.mag_rate) << "\n";
    out << "magnitude_lo = " << format_double(p.mag_lo) << "\n";
    out << "magnitude_hi = " << format_double(p.mag_hi) << "\n";
    out << "dlogl_sigma = " << format_double(p.dlogl_sigma) << "\n";
    out << "dlogw_sigma = " << format_double(p.dlogw_sigma) << "\n";

    const auto& s = cfg.scaling;
    out << "\n[scaling]\n";
    out << "a_length = " << format_double(s.a_len) << "\n";
    out << "b_length = " << format_double(s.b_len) << "\n";
    out << "a_width = " << format_double(s.a_wid) << "\n";
    out << "b_width = " << format_double(s.b_wid) << "\n";
    out << "rigidity_pa = " << format_double(s.rigidity) << "\n";

    out << "\n[simulation]\n";
    out << "duration_min = " << format_double(cfg.duration_min) << "\n";
    out << "cfl = " << format_double(cfg.cfl) << "\n";
    out << "split_length_km = " << format_double(cfg.split_length_km) << "\n";

    const auto& mc = cfg.sampler;
    out << "\n[sampler]\n";
    out << "chains = " << mc.n_chains << "\n";
    out << "steps = " << mc.total_steps << "\n";
    out << "resample_enabled = " << (mc.resample_enabled ? "true" : "false") << "\n";
    out << "resample_period = " << mc.resample_period << "\n";
    if (!mc.resample_steps.empty()) {
        out << "resample_steps = ";
        for (std::size_t i = 0; i < mc.resample_steps.size(); ++i)
            out << (i ? ", " : "") << mc.resample_steps[i];
        out << "\n";
    }
    out << "burn_in = " << mc.burn_in << "\n";
    out << "seed = " << mc.seed << "\n";
    out << "workers = " << mc.workers << "\n";
    const char* std_names[] = {"lat", "lon", "depth_offset", "magnitude", "dlogl", "dlogw"};
    for (int d = 0; d < 6; ++d)
        out << "proposal_std_" << std_names[d] << " = " << format_double(mc.proposal_stds.at(d))
            << "\n";
    for (std::size_t c = 0; c < cfg.initial_params.size(); ++c) {
        out << "init_chain_" << c << " = ";
        for (std::size_t d = 0; d < cfg.initial_params[c].size(); ++d)
            out << (d ? ", " : "") << format_double(cfg.initial_params[c][d]);
        out << "\n";
    }

    if (cfg.synth) {
        const auto& sy = *cfg.synth;
        out << "\n[synth]\n";
        out << "truth_lat = " << format_double(sy.truth.lat) << "\n";
        out << "truth_lon = " << format_double(sy.truth.lon) << "\n";
        out << "truth_depth_offset = " << format_double(sy.truth.depth_offset) << "\n";
        out << "truth_magnitude = " << format_double(sy.truth.magnitude) << "\n";
        out << "truth_dlogl = " << format_double(sy.truth.dlogl) << "\n";
        out << "truth_dlogw = " << format_double(sy.truth.dlogw) << "\n";
        out << "height_sigma_rel = " << format_double(sy.height_sigma_rel) << "\n";
        out << "arrival_sigma_min = " << format_double(sy.arrival_sigma_min) << "\n";
        out << "inundation_sigma_rel = " << format_double(sy.inundation_sigma_rel) << "\n";
        out << "observe_heights = " << (sy.observe_heights ? "true" : "false") << "\n";
        out << "observe_arrivals = " << (sy.observe_arrivals ? "true" : "false") << "\n";
    }
    if (!out) throw IoError("write failed for " + path);
}

std::vector<std::string> Scenario::gauge_names() const {
    std::vector<std::string> names;
    names.reserve(gauges.size());
    for (const auto& g : gauges) names.push_back(g.name);
    return names;
}

namespace {
std::atomic<bool> reflection_checked{false};
}

wavesim::ForwardOutput Scenario::forward(const geometry::EarthquakeParams& p) const {
    const auto rects = geometry::build_rupture(p, geom, cfg.scaling, cfg.split_length_km);
    const auto dz = okada::compute_deformation(rects, bathy.spec);
    wavesim::SimOptions opt;
    opt.duration_min = cfg.duration_min;
    opt.cfl = cfg.cfl;
    opt.warn_reflections = !reflection_checked.exchange(true);
    const auto series = wavesim::simulate(dz, bathy, gauges, opt);
    return wavesim::extract_observables(series, gauges);
}

mcmc::PosteriorModel Scenario::model() const {
    mcmc::PosteriorModel m;
    m.log_prior = [this](const std::vector<double>& v) {
        return priors::log_prior(geometry::EarthquakeParams::from_vector(v), cfg.prior, geom);
    };
    m.forward = [this](const std::vector<double>& v) {
        return forward(geometry::EarthquakeParams::from_vector(v));
    };
    m.log_lik = [this](const wavesim::ForwardOutput& out) {
        return obsmodel::total_log_likelihood(out, bound);
    };
    return m;
}

Scenario load_scenario(const std::string& config_path) {
    ScenarioConfig cfg = parse_config(config_path);
    const std::string geometry_file = cfg.resolve(cfg.geometry_path);
    const std::string bathy_file = cfg.resolve(cfg.bathymetry_path);
    const std::string gauges_file = cfg.resolve(cfg.gauges_path);
    const std::string obs_file = cfg.resolve(cfg.observations_path);
    Scenario sc{std::move(cfg),
                geometry::FaultGeometry::from_file(geometry_file),
                wavesim::load_bathymetry(bathy_file),
                wavesim::load_gauges(gauges_file),
                obsmodel::load_observations(obs_file),
                {}};
    sc.bound = obsmodel::bind_observations(sc.observations, sc.gauges);
    return sc;
}

std::vector<obsmodel::Observation> generate_synthetic_scenario(const Scenario& base,
                                                               const SynthSpec& synth,
                                                               const std::string& out_dir) {
    if (priors::log_prior(synth.truth, base.cfg.prior, base.geom) ==
        -std::numeric_limits<double>::infinity())
        throw ConfigError("synthetic truth has zero prior density");

    const auto fwd = base.forward(synth.truth);
    std::vector<obsmodel::Observation> obs;
    for (std::size_t g = 0; g < base.gauges.size(); ++g) {
        const auto& o = fwd.gauges[g];
        const auto& name = base.gauges[g].name;
        if (synth.observe_heights) {
            const double sigma = synth.height_sigma_rel * o.max_height;
            if (!(sigma > 0))
                throw ConfigError("synthetic truth produces no wave height at gauge " + name);
            obs.push_back({name, obsmodel::ObsKind::height,
                           {obsmodel::ObsFamily::normal, o.max_height, sigma, 0.0}});
        }
        if (synth.observe_arrivals) {
            if (o.arrival == wavesim::arrival_never)
                throw ConfigError("synthetic truth produces no arrival at gauge " + name);
            obs.push_back({name, obsmodel::ObsKind::arrival,
                           {obsmodel::ObsFamily::normal, o.arrival, synth.arrival_sigma_min, 0.0}});
        }
        if (synth.inundation_sigma_rel > 0) {
            const double sigma = synth.inundation_sigma_rel * o.inundation;
            if (!(sigma > 0))
                throw ConfigError("synthetic truth produces no inundation at gauge " + name);
            obs.push_back({name, obsmodel::ObsKind::inundation,
                           {obsmodel::ObsFamily::normal, o.inundation, sigma, 0.0}});
        }
    }

    fs::create_directories(out_dir);
    obsmodel::save_observations(out_dir + "/observations.csv", obs);

    std::ofstream truth(out_dir + "/truth.csv");
    if (!truth) throw IoError("cannot write " + out_dir + "/truth.csv");
    truth << "lat, lon, depth_offset, magnitude, dlogl, dlogw";
    for (const auto& g : base.gauges)
        truth << ", " << g.name << "_height, " << g.name << "_arrival, " << g.name
              << "_inundation";
    truth << "\n";
    const auto tv = synth.truth.to_vector();
    for (std::size_t d = 0; d < tv.size(); ++d) truth << (d ? ", " : "") << format_double(tv[d]);
    for (const auto& g : fwd.gauges)
        truth << ", " << format_double(g.max_height) << ", " << format_double(g.arrival) << ", "
              << format_double(g.inundation);
    truth << "\n";
    if (!truth) throw IoError("write failed for " + out_dir + "/truth.csv");
    return obs;
}

void write_basin_scenario(const std::string& dir, const BasinSpec& spec) {
    fs::create_directories(dir);

    {
        std::ofstream geo(dir + "/geometry.csv");
        if (!geo) throw IoError("cannot write " + dir + "/geometry.csv");
        geo << "lat, lon, depth_km, strike_deg, dip_deg\n";
        const int n = 13;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                const double lat =
                    spec.center_lat + (2.0 * i / (n - 1) - 1.0) * spec.geometry_halfwidth_deg;
                const double lon =
                    spec.center_lon + (2.0 * j / (n - 1) - 1.0) * spec.geometry_halfwidth_deg;
                geo << format_double(lat) << ", " << format_double(lon) << ", "
                    << format_double(spec.interface_depth_km) << ", "
                    << format_double(spec.interface_strike_deg) << ", "
                    << format_double(spec.interface_dip_deg) << "\n";
            }
    }

    Raster bathy;
    bathy.spec.nlat = bathy.spec.nlon = spec.cells;
    bathy.spec.dlat = bathy.spec.dlon = spec.cell_deg;
    bathy.spec.lat0 = spec.center_lat - 0.5 * (spec.cells - 1) * spec.cell_deg;
    bathy.spec.lon0 = spec.center_lon - 0.5 * (spec.cells - 1) * spec.cell_deg;
    bathy.values.assign(bathy.spec.size(), spec.depth_m);
    write_ascii_grid(dir + "/bathymetry.asc", bathy);

    std::vector<wavesim::Gauge> gauges = spec.gauges;
    if (gauges.empty()) {
        const double la = spec.center_lat, lo = spec.center_lon;
        gauges = {{"g1", la + 0.8, lo - 1.6, 0.05, 10.0 * M_PI / 180.0},
                  {"g2", la - 0.7, lo - 0.8, 0.05, 10.0 * M_PI / 180.0},
                  {"g3", la + 0.9, lo + 0.4, 0.05, 10.0 * M_PI / 180.0},
                  {"g4", la - 0.6, lo + 1.3, 0.05, 10.0 * M_PI / 180.0},
                  {"g5", la + 0.5, lo + 1.9, 0.05, 10.0 * M_PI / 180.0}};
    }
    std::ofstream gf(dir + "/gauges.csv");
    if (!gf) throw IoError("cannot write " + dir + "/gauges.csv");
    gf << "name, lat, lon, arrival_threshold_m, beach_slope_deg\n";
    for (const auto& g : gauges)
        gf << g.name << ", " << format_double(g.lat) << ", " << format_double(g.lon) << ", "
           << format_double(g.arrival_threshold) << ", "
           << format_double(g.beach_slope * 180.0 / M_PI) << "\n";
}

void write_diagnostics_csv(const std::string& path, const mcmc::Diagnostics& d,
                           const mcmc::SampleStore& store) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << "record, parameter, index, value_a, value_b\n";
    for (std::size_t p = 0; p < store.param_names.size(); ++p) {
        const auto& roll = d.rolling[p];
        for (std::size_t k = 0; k < roll.steps.size(); ++k)
            out << "rolling, " << store.param_names[p] << ", " << roll.steps[k] << ", "
                << format_double(roll.mean[k]) << ", " << format_double(roll.std[k]) << "\n";
    }
    for (std::size_t c = 0; c < d.acceptance_rate.size(); ++c)
        out << "acceptance, chain_" << c << ", " << c << ", "
            << format_double(d.acceptance_rate[c]) << ", " << d.accepted[c] << "\n";
    static const char* stat_names[] = {"mean", "std", "q05", "q25", "q50", "q75", "q95"};
    for (std::size_t p = 0; p < store.param_names.size(); ++p) {
        const auto& s = d.posterior[p];
        const double vals[] = {s.mean, s.std, s.q05, s.q25, s.q50, s.q75, s.q95};
        for (int k = 0; k < 7; ++k)
            out << "posterior_" << stat_names[k] << ", " << store.param_names[p] << ", 0, "
                << format_double(vals[k]) << ", 0\n";
    }
    auto emit_record = [&](const char* tag, const mcmc::SampleRecord& r) {
        for (std::size_t p = 0; p < store.param_names.size(); ++p)
            out << tag << ", " << store.param_names[p] << ", " << r.step << ", "
                << format_double(r.params[p]) << ", " << r.chain << "\n";
        out << tag << ", log_post, " << r.step << ", " << format_double(r.log_post) << ", "
            << r.chain << "\n";
        out << tag << ", log_lik, " << r.step << ", " << format_double(r.log_lik) << ", "
            << r.chain << "\n";
    };
    emit_record("map", d.map_record);
    emit_record("mle", d.mle_record);

    // posterior-predictive histograms of the forward observables
    const auto post = store.posterior_set();
    static const char* kinds[] = {"height", "arrival", "inundation"};
    for (std::size_t g = 0; g < store.gauge_names.size(); ++g) {
        for (int kind = 0; kind < 3; ++kind) {
            std::vector<double> vals;
            vals.reserve(post.size());
            for (const auto* r : post) {
                const auto& go = r->forward.gauges[g];
                const double v = kind == 0 ? go.max_height
                                           : (kind == 1 ? go.arrival : go.inundation);
                if (std::isfinite(v)) vals.push_back(v);
            }
            if (vals.empty()) continue;
            const auto [mn, mx] = std::minmax_element(vals.begin(), vals.end());
            const int nbins = 30;
            const double lo = *mn, hi = std::max(*mx, lo + 1e-12);
            std::vector<long> counts(nbins, 0);
            for (double v : vals) {
                int b = static_cast<int>((v - lo) / (hi - lo) * nbins);
                b = std::clamp(b, 0, nbins - 1);
                ++counts[b];
            }
            for (int b = 0; b < nbins; ++b)
                out << "pp_hist, " << store.gauge_names[g] << "_" << kinds[kind] << ", " << b
                    << ", " << format_double(lo + (b + 0.5) * (hi - lo) / nbins) << ", "
                    << counts[b] << "\n";
        }
    }
    if (!out) throw IoError("write failed for " + path);
}

namespace {
std::string theta_label(const sensitivity::ObsParamEntry& e) {
    return e.gauge + ":" + obsmodel::to_string(e.kind) + ":" + e.param;
}
}  // namespace

void write_fim_csv(const std::string& path, const sensitivity::FIMatrix& I,
                   const sensitivity::ObsParamVector& theta) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << "# mode: " << (I.mode == sensitivity::FimMode::relative ? "relative" : "absolute")
        << ", samples_used: " << I.samples_used << ", samples_excluded: " << I.samples_excluded
        << "\n";
    out << "param_i, param_j, value\n";
    for (int i = 0; i < I.dim; ++i)
        for (int j = 0; j < I.dim; ++j)
            out << theta_label(theta.entries[i]) << ", " << theta_label(theta.entries[j]) << ", "
                << format_double(I.at(i, j)) << "\n";
    if (!out) throw IoError("write failed for " + path);
}

void write_sensitivity_csv(const std::string& path, const sensitivity::FIMatrix& I_rel,
                           const sensitivity::ObsParamVector& theta,
                           const sensitivity::WorstDirection& worst) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << "name, observation, distribution, parameter, value, FI, RE_10pct, sing_vec\n";
    for (int i = 0; i < I_rel.dim; ++i) {
        const auto& e = theta.entries[i];
        const double fi = I_rel.at(i, i);
        out << e.gauge << ", " << obsmodel::to_string(e.kind) << ", "
            << obsmodel::to_string(e.family) << ", " << e.param << ", "
            << format_double(e.value) << ", " << format_double(fi) << ", "
            << format_double(0.5 * 0.1 * 0.1 * fi) << ", "
            << format_double(worst.direction[i]) << "\n";
    }
    if (!out) throw IoError("write failed for " + path);
}

void write_param_sensitivity_csv(const std::string& path, const mcmc::SampleStore& store,
                                 const sensitivity::FIMatrix& I_rel,
                                 const sensitivity::WorstDirection& worst,
                                 double rel_perturbation) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << "parameter, variance, sensitivity_bound\n";
    const auto post = store.posterior_set();
    std::vector<double> v(worst.direction.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = rel_perturbation * worst.direction[i];
    for (std::size_t p = 0; p < store.param_names.size(); ++p) {
        std::vector<double> f;
        f.reserve(post.size());
        for (const auto* r : post) f.push_back(r->params[p]);
        double mean = 0;
        for (double x : f) mean += x;
        mean /= static_cast<double>(f.size());
        double var = 0;
        for (double x : f) var += (x - mean) * (x - mean);
        var = f.size() > 1 ? var / (static_cast<double>(f.size()) - 1.0) : 0.0;
        out << store.param_names[p] << ", " << format_double(var) << ", "
            << format_double(sensitivity::sensitivity_bound(f, v, I_rel)) << "\n";
    }
    if (!out) throw IoError("write failed for " + path);
}

void write_bounds_csv(const std::string& path, const mcmc::SampleStore& store,
                      const std::vector<double>& r_grid) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << "observable, R, lower, upper\n";
    const auto post = store.posterior_set();
    for (std::size_t p = 0; p < store.param_names.size(); ++p) {
        std::vector<double> f;
        f.reserve(post.size());
        for (const auto* r : post) f.push_back(r->params[p]);
        const auto curve = sensitivity::expectation_bounds(f, r_grid);
        for (std::size_t k = 0; k < curve.R.size(); ++k)
            out << store.param_names[p] << ", " << format_double(curve.R[k]) << ", "
                << format_double(curve.lower[k]) << ", " << format_double(curve.upper[k]) << "\n";
        out << store.param_names[p] << ", inf, " << format_double(curve.uniform_lower) << ", "
            << format_double(curve.uniform_upper) << "\n";
    }
    if (!out) throw IoError("write failed for " + path);
}

}  // namespace quakeinv::scenario
