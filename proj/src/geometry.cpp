#include "quakeinv/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "quakeinv/errors.hpp"
#include "quakeinv/textio.hpp"

namespace quakeinv::geometry {

const std::array<const char*, EarthquakeParams::dim>& EarthquakeParams::names() {
    static const std::array<const char*, dim> n = {"lat", "lon", "depth_offset",
                                                   "magnitude", "dlogl", "dlogw"};
    return n;
}

std::vector<double> EarthquakeParams::to_vector() const {
    return {lat, lon, depth_offset, magnitude, dlogl, dlogw};
}

EarthquakeParams EarthquakeParams::from_vector(const std::vector<double>& v) {
    return {v.at(0), v.at(1), v.at(2), v.at(3), v.at(4), v.at(5)};
}

namespace {

// Strike wraps at 360; interpolate its unit vector and recover the angle.
struct StrikeAccum {
    double e = 0.0, n = 0.0;
    void add(double strike_deg, double w) {
        const double r = strike_deg * M_PI / 180.0;
        e += w * std::sin(r);
        n += w * std::cos(r);
    }
    double angle() const {
        double a = std::atan2(e, n) * 180.0 / M_PI;
        if (a < 0) a += 360.0;
        return a;
    }
};

}  // namespace

FaultGeometry FaultGeometry::from_samples(std::vector<GeoSample> samples) {
    if (samples.empty()) throw ConfigError("fault geometry needs at least one sample");
    for (const auto& s : samples) {
        if (!(s.depth > 0))
            throw ConfigError("fault geometry: depth must be positive");
        if (!(s.dip > 0 && s.dip <= 90))
            throw ConfigError("fault geometry: dip must lie in (0, 90]");
        if (!(s.strike >= 0 && s.strike < 360))
            throw ConfigError("fault geometry: strike must lie in [0, 360)");
    }

    FaultGeometry g;
    g.samples_ = std::move(samples);
    g.lat_min_ = g.lat_max_ = g.samples_[0].lat;
    g.lon_min_ = g.lon_max_ = g.samples_[0].lon;
    for (const auto& s : g.samples_) {
        g.lat_min_ = std::min(g.lat_min_, s.lat);
        g.lat_max_ = std::max(g.lat_max_, s.lat);
        g.lon_min_ = std::min(g.lon_min_, s.lon);
        g.lon_max_ = std::max(g.lon_max_, s.lon);
    }

    // detect a complete regular lattice
    const double tol = 1e-9;
    auto axis = [tol](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end(),
                            [tol](double a, double b) { return std::abs(a - b) < tol; }),
                v.end());
        return v;
    };
    std::vector<double> lats, lons;
    for (const auto& s : g.samples_) {
        lats.push_back(s.lat);
        lons.push_back(s.lon);
    }
    lats = axis(lats);
    lons = axis(lons);
    if (lats.size() >= 2 && lons.size() >= 2 &&
        lats.size() * lons.size() == g.samples_.size()) {
        auto uniform = [tol](const std::vector<double>& v) {
            const double d = v[1] - v[0];
            for (std::size_t i = 1; i + 1 < v.size(); ++i)
                if (std::abs(v[i + 1] - v[i] - d) > 1e-6 * std::max(1.0, std::abs(d)))
                    return false;
            return true;
        };
        if (uniform(lats) && uniform(lons)) {
            std::vector<std::size_t> index(lats.size() * lons.size(),
                                           std::numeric_limits<std::size_t>::max());
            auto slot = [tol](const std::vector<double>& v, double x) {
                const auto it = std::lower_bound(v.begin(), v.end(), x - tol);
                return static_cast<std::size_t>(it - v.begin());
            };
            bool complete = true;
            for (std::size_t k = 0; k < g.samples_.size(); ++k) {
                const auto i = slot(lats, g.samples_[k].lat);
                const auto j = slot(lons, g.samples_[k].lon);
                const auto cell = i * lons.size() + j;
                if (index[cell] != std::numeric_limits<std::size_t>::max()) {
                    complete = false;  // duplicate position
                    break;
                }
                index[cell] = k;
            }
            if (complete) {
                g.gridded_ = true;
                g.grid_lats_ = std::move(lats);
                g.grid_lons_ = std::move(lons);
                g.grid_index_ = std::move(index);
            }
        }
    }
    return g;
}

FaultGeometry FaultGeometry::from_file(const std::string& path) {
    const auto lines = textio::read_lines(path);
    std::vector<GeoSample> samples;
    bool header_seen = false;
    for (std::size_t ln = 0; ln < lines.size(); ++ln) {
        if (textio::is_skippable(lines[ln])) continue;
        if (!header_seen) {
            header_seen = true;  // first non-comment line is the header row
            continue;
        }
        const std::string ctx = path + ":" + std::to_string(ln + 1);
        const auto f = textio::split_fields(lines[ln]);
        if (f.size() != 5)
            throw ConfigError(ctx + ": expected 5 columns (lat, lon, depth_km, strike_deg, dip_deg)");
        samples.push_back({textio::parse_double(f[0], ctx), textio::parse_double(f[1], ctx),
                           textio::parse_double(f[2], ctx), textio::parse_double(f[3], ctx),
                           textio::parse_double(f[4], ctx)});
    }
    if (!header_seen) throw ConfigError(path + ": missing header row");
    try {
        return from_samples(std::move(samples));
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

bool FaultGeometry::contains(double lat, double lon) const {
    return lat >= lat_min_ && lat <= lat_max_ && lon >= lon_min_ && lon <= lon_max_;
}

InterpResult FaultGeometry::interp(double lat, double lon) const {
    if (!contains(lat, lon)) {
        std::ostringstream os;
        os << "geometry query (" << lat << ", " << lon << ") outside tabulated region ["
           << lat_min_ << ", " << lat_max_ << "] x [" << lon_min_ << ", " << lon_max_ << "]";
        throw DomainError(os.str());
    }
    return gridded_ ? interp_bilinear(lat, lon) : interp_idw(lat, lon);
}

InterpResult FaultGeometry::interp_bilinear(double lat, double lon) const {
    auto bracket = [](const std::vector<double>& v, double x) {
        auto hi = std::upper_bound(v.begin(), v.end(), x);
        std::size_t i1 = std::min<std::size_t>(v.size() - 1, hi - v.begin());
        std::size_t i0 = i1 == 0 ? 0 : i1 - 1;
        if (i1 == i0 && i1 + 1 < v.size()) ++i1;
        return std::pair<std::size_t, std::size_t>(i0, i1);
    };
    const auto [i0, i1] = bracket(grid_lats_, lat);
    const auto [j0, j1] = bracket(grid_lons_, lon);
    const double tlat = (i1 == i0) ? 0.0 : (lat - grid_lats_[i0]) / (grid_lats_[i1] - grid_lats_[i0]);
    const double tlon = (j1 == j0) ? 0.0 : (lon - grid_lons_[j0]) / (grid_lons_[j1] - grid_lons_[j0]);

    double depth = 0, dip = 0;
    StrikeAccum strike;
    const std::array<std::tuple<std::size_t, std::size_t, double>, 4> corners = {
        std::tuple{i0, j0, (1 - tlat) * (1 - tlon)}, std::tuple{i0, j1, (1 - tlat) * tlon},
        std::tuple{i1, j0, tlat * (1 - tlon)}, std::tuple{i1, j1, tlat * tlon}};
    for (const auto& [i, j, w] : corners) {
        const auto& s = samples_[grid_index_[i * grid_lons_.size() + j]];
        depth += w * s.depth;
        dip += w * s.dip;
        strike.add(s.strike, w);
    }
    return {depth, strike.angle(), dip};
}

InterpResult FaultGeometry::interp_idw(double lat, double lon) const {
    constexpr std::size_t k_neighbors = 4;
    // squared distance in a locally isotropic frame
    const double clat = std::cos(lat * M_PI / 180.0);
    std::vector<std::pair<double, std::size_t>> d2(samples_.size());
    for (std::size_t i = 0; i < samples_.size(); ++i) {
        const double dy = samples_[i].lat - lat;
        const double dx = (samples_[i].lon - lon) * clat;
        d2[i] = {dy * dy + dx * dx, i};
    }
    const std::size_t k = std::min(k_neighbors, samples_.size());
    std::partial_sort(d2.begin(), d2.begin() + k, d2.end());

    if (d2[0].first < 1e-20) {
        const auto& s = samples_[d2[0].second];
        return {s.depth, s.strike, s.dip};
    }
    double wsum = 0, depth = 0, dip = 0;
    StrikeAccum strike;
    for (std::size_t n = 0; n < k; ++n) {
        const double w = 1.0 / d2[n].first;  // inverse-distance power 2
        const auto& s = samples_[d2[n].second];
        wsum += w;
        depth += w * s.depth;
        dip += w * s.dip;
        strike.add(s.strike, w);
    }
    return {depth / wsum, strike.angle(), dip / wsum};
}

double moment_from_magnitude(double mw) { return std::pow(10.0, 1.5 * mw + 9.05); }

double magnitude_from_moment(double m0) { return (std::log10(m0) - 9.05) / 1.5; }

RuptureSize size_from_magnitude(double mw, double dlogl, double dlogw, const ScalingLaw& law) {
    const double length = std::pow(10.0, law.a_len + law.b_len * mw + dlogl);
    const double width = std::pow(10.0, law.a_wid + law.b_wid * mw + dlogw);
    const double slip = moment_from_magnitude(mw) / (law.rigidity * length * 1e3 * width * 1e3);
    return {length, width, slip};
}

std::vector<OkadaRect> build_rupture(const EarthquakeParams& p, const FaultGeometry& geom,
                                     const ScalingLaw& law, double split_length_km) {
    const RuptureSize size = size_from_magnitude(p.magnitude, p.dlogl, p.dlogw, law);
    const int n = std::max(1, static_cast<int>(std::ceil(size.length_km / split_length_km)));
    const double seg_len = size.length_km / n;

    // Walk outward from the centroid along the local strike direction,
    // recording positions at arc lengths (i - (n-1)/2) * seg_len.
    std::vector<std::pair<double, double>> centers(n);  // (lat, lon)
    const int mid_steps_per_seg = 8;
    const double ds = seg_len / mid_steps_per_seg;
    auto march = [&](int dir) {
        double lat = p.lat, lon = p.lon, s = 0.0;
        int placed_upto = 0;
        // target arcs on this side, nearest first
        std::vector<std::pair<double, int>> targets;
        for (int i = 0; i < n; ++i) {
            const double arc = (i - (n - 1) / 2.0) * seg_len;
            if ((dir > 0 && arc > 1e-12) || (dir < 0 && arc < -1e-12))
                targets.emplace_back(std::abs(arc), i);
            else if (std::abs(arc) <= 1e-12 && dir > 0)
                centers[i] = {lat, lon};
        }
        std::sort(targets.begin(), targets.end());
        for (const auto& [arc, idx] : targets) {
            while (s + 1e-12 < arc) {
                const double step = std::min(ds, arc - s);
                const InterpResult local = geom.interp(lat, lon);
                const double rad = local.strike * M_PI / 180.0;
                const double east = dir * step * std::sin(rad);
                const double north = dir * step * std::cos(rad);
                lat += north / km_per_deg;
                lon += east / (km_per_deg * std::cos(lat * M_PI / 180.0));
                s += step;
            }
            centers[idx] = {lat, lon};
            (void)placed_upto;
        }
    };
    march(+1);
    march(-1);

    std::vector<OkadaRect> rects;
    rects.reserve(n);
    for (int i = 0; i < n; ++i) {
        const auto [clat, clon] = centers[i];
        const InterpResult local = geom.interp(clat, clon);
        const double depth = local.depth + p.depth_offset;
        if (!(depth > 0)) {
            std::ostringstream os;
            os << "rupture centroid depth " << depth << " km at (" << clat << ", " << clon
               << ") is not positive";
            throw InvalidDepthError(os.str());
        }
        const double top = depth - 0.5 * size.width_km * std::sin(local.dip * M_PI / 180.0);
        if (!(top > 0)) {
            std::ostringstream os;
            os << "rupture upper edge reaches depth " << top << " km at (" << clat << ", "
               << clon << "); the fault plane breaches the surface";
            throw InvalidDepthError(os.str());
        }
        rects.push_back({clat, clon, depth, local.strike, local.dip, 90.0, seg_len,
                         size.width_km, size.slip_m});
    }
    return rects;
}

}  // namespace quakeinv::geometry
