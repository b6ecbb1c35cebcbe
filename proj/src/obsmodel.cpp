#include "quakeinv/obsmodel.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include "quakeinv/errors.hpp"
#include "quakeinv/special.hpp"
#include "quakeinv/textio.hpp"

namespace quakeinv::obsmodel {

namespace {
constexpr double neg_inf = -std::numeric_limits<double>::infinity();
}

const char* to_string(ObsKind k) {
    switch (k) {
        case ObsKind::height: return "height";
        case ObsKind::arrival: return "arrival";
        case ObsKind::inundation: return "inundation";
    }
    return "?";
}

ObsKind obs_kind_from_string(const std::string& s) {
    if (s == "height") return ObsKind::height;
    if (s == "arrival") return ObsKind::arrival;
    if (s == "inundation") return ObsKind::inundation;
    throw ConfigError("unknown observation kind '" + s + "'");
}

const char* to_string(ObsFamily f) {
    switch (f) {
        case ObsFamily::normal: return "normal";
        case ObsFamily::skew_normal: return "skewnorm";
        case ObsFamily::chi: return "chi";
    }
    return "?";
}

ObsFamily obs_family_from_string(const std::string& s) {
    if (s == "normal") return ObsFamily::normal;
    if (s == "skewnorm" || s == "skew_normal") return ObsFamily::skew_normal;
    if (s == "chi") return ObsFamily::chi;
    throw ConfigError("unknown observation family '" + s + "'");
}

double ObsDist::mean() const {
    switch (family) {
        case ObsFamily::normal:
            return p1;
        case ObsFamily::skew_normal: {
            const double delta = p3 / std::sqrt(1.0 + p3 * p3);
            return p1 + p2 * delta * std::sqrt(2.0 / M_PI);
        }
        case ObsFamily::chi: {
            // mean of the standard chi with k dof, scaled and shifted
            const double k = p3;
            const double m = std::sqrt(2.0) * std::exp(std::lgamma((k + 1.0) / 2.0) -
                                                       std::lgamma(k / 2.0));
            return p1 + p2 * m;
        }
    }
    return p1;
}

double log_obs_density(const ObsDist& d, double value) {
    if (!std::isfinite(value)) return neg_inf;
    switch (d.family) {
        case ObsFamily::normal:
            return special::normal_logpdf(value, d.p1, d.p2);
        case ObsFamily::skew_normal: {
            const double xt = (value - d.p1) / d.p2;
            const double z = d.p3 * xt / std::sqrt(2.0);
            return -0.5 * xt * xt - std::log(d.p2) - 0.5 * special::ln_2pi +
                   special::log1p_erf(z);
        }
        case ObsFamily::chi: {
            if (value <= d.p1) return neg_inf;
            const double xt = (value - d.p1) / d.p2;
            const double k = d.p3;
            return -0.5 * xt * xt - std::log(d.p2) - (0.5 * k - 1.0) * special::ln_2 -
                   std::lgamma(0.5 * k) + (k - 1.0) * std::log(xt);
        }
    }
    return neg_inf;
}

std::vector<BoundObservation> bind_observations(const std::vector<Observation>& obs,
                                                const std::vector<wavesim::Gauge>& gauges) {
    std::vector<BoundObservation> bound;
    bound.reserve(obs.size());
    for (const auto& o : obs) {
        int idx = -1;
        for (std::size_t g = 0; g < gauges.size(); ++g)
            if (gauges[g].name == o.gauge) {
                idx = static_cast<int>(g);
                break;
            }
        if (idx < 0)
            throw ConfigError("observation references unknown gauge '" + o.gauge + "'");
        for (const auto& b : bound)
            if (b.gauge_idx == idx && b.kind == o.kind)
                throw ConfigError("duplicate observation of " + std::string(to_string(o.kind)) +
                                  " at gauge '" + o.gauge + "'");
        bound.push_back({idx, o.kind, o.dist, o.gauge});
    }
    return bound;
}

double observable_value(const wavesim::ForwardOutput& out, const BoundObservation& o) {
    const auto& g = out.gauges.at(o.gauge_idx);
    switch (o.kind) {
        case ObsKind::height: return g.max_height;
        case ObsKind::arrival: return g.arrival;
        case ObsKind::inundation: return g.inundation;
    }
    return 0.0;
}

double total_log_likelihood(const wavesim::ForwardOutput& out,
                            const std::vector<BoundObservation>& obs) {
    double total = 0.0;
    for (const auto& o : obs) {
        const double lp = log_obs_density(o.dist, observable_value(out, o));
        if (lp == neg_inf) return neg_inf;
        total += lp;
    }
    return total;
}

std::vector<Observation> load_observations(const std::string& path) {
    const auto lines = textio::read_lines(path);
    std::vector<Observation> obs;
    bool header_seen = false;
    for (std::size_t ln = 0; ln < lines.size(); ++ln) {
        if (textio::is_skippable(lines[ln])) continue;
        if (!header_seen) {
            header_seen = true;
            continue;
        }
        const std::string ctx = path + ":" + std::to_string(ln + 1);
        const auto f = textio::split_fields(lines[ln]);
        if (f.size() < 5 || f.size() > 6)
            throw ConfigError(ctx + ": expected `gauge, kind, family, p1, p2[, p3]`");
        Observation o;
        o.gauge = f[0];
        try {
            o.kind = obs_kind_from_string(f[1]);
            o.dist.family = obs_family_from_string(f[2]);
        } catch (const ConfigError& e) {
            throw ConfigError(ctx + ": " + e.what());
        }
        o.dist.p1 = textio::parse_double(f[3], ctx);
        o.dist.p2 = textio::parse_double(f[4], ctx);
        if (o.dist.n_params() == 3) {
            if (f.size() != 6) throw ConfigError(ctx + ": family needs a third parameter");
            o.dist.p3 = textio::parse_double(f[5], ctx);
        } else if (f.size() == 6 && !f[5].empty()) {
            throw ConfigError(ctx + ": normal family takes exactly two parameters");
        }
        if (!(o.dist.p2 > 0)) throw ConfigError(ctx + ": scale parameter must be positive");
        if (o.dist.family == ObsFamily::chi && !(o.dist.p3 > 0))
            throw ConfigError(ctx + ": chi degrees of freedom must be positive");
        obs.push_back(std::move(o));
    }
    if (obs.empty()) throw ConfigError(path + ": no observations defined");
    return obs;
}

void save_observations(const std::string& path, const std::vector<Observation>& obs) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << "# gauge, kind, family, p1, p2[, p3]\n";
    out << "# normal: p1 = mean, p2 = std\n";
    out << "# skewnorm: p1 = location, p2 = scale, p3 = skew\n";
    out << "# chi: p1 = location, p2 = scale, p3 = dof\n";
    out << "gauge, kind, family, p1, p2, p3\n";
    for (const auto& o : obs) {
        out << o.gauge << ", " << to_string(o.kind) << ", " << to_string(o.dist.family) << ", "
            << textio::format_double(o.dist.p1) << ", " << textio::format_double(o.dist.p2);
        if (o.dist.n_params() == 3) out << ", " << textio::format_double(o.dist.p3);
        out << "\n";
    }
    if (!out) throw IoError("write failed for " + path);
}

}  // namespace quakeinv::obsmodel
