#include "quakeinv/okada.hpp"

#include <cmath>
#include <sstream>

#include "quakeinv/errors.hpp"

namespace quakeinv::okada {

namespace {

// Okada (1985) closed forms for the vertical component, Chinnery corner
// differences over the rectangle. K is mu/(lambda+mu) for a Poisson solid.
constexpr double K = 0.5;
constexpr double cos_eps = 1e-6;
constexpr double tiny = 1e-14;

struct Frame {
    double sn, cs, q;
};

double strike_slip_z(double xi, double eta, const Frame& f) {
    const double d_bar = eta * f.sn - f.q * f.cs;
    const double r = std::sqrt(xi * xi + eta * eta + f.q * f.q);
    const double r_eta = r + eta;
    double a4;
    if (std::abs(f.cs) < cos_eps) {
        a4 = -K * f.q / (r + d_bar);
    } else {
        a4 = K / f.cs * (std::log(r + d_bar) - f.sn * std::log(r_eta));
    }
    return -(d_bar * f.q / (r * r_eta) + f.q * f.sn / r_eta + a4 * f.sn) / (2.0 * M_PI);
}

double dip_slip_z(double xi, double eta, const Frame& f) {
    const double d_bar = eta * f.sn - f.q * f.cs;
    const double r = std::sqrt(xi * xi + eta * eta + f.q * f.q);
    const double x = std::sqrt(xi * xi + f.q * f.q);
    double a5;
    if (std::abs(f.cs) < cos_eps) {
        a5 = -K * xi * f.sn / (r + d_bar);
    } else if (std::abs(xi) < tiny) {
        // one-sided limit at edge alignment; the eta corner difference
        // cancels the jump, leaving the continuous field value
        const double num = eta * (x + f.q * f.cs) + x * (r + x) * f.sn;
        a5 = (num == 0.0) ? 0.0 : 2.0 * K / f.cs * std::copysign(M_PI / 2.0, num);
    } else {
        a5 = 2.0 * K / f.cs *
             std::atan((eta * (x + f.q * f.cs) + x * (r + x) * f.sn) / (xi * (r + x) * f.cs));
    }
    const double tn = (std::abs(f.q) < tiny) ? 0.0 : std::atan(xi * eta / (f.q * r));
    return -(d_bar * f.q / (r * (r + xi)) + f.sn * tn - a5 * f.sn * f.cs) / (2.0 * M_PI);
}

}  // namespace

double uz_rectangle(double x_along, double y_downdip, double centroid_depth_km,
                    double dip_deg, double length_km, double width_km, double slip_m,
                    double rake_deg) {
    // clamp against the dip = 0 singularity of the half-space formulas
    const double dip = std::max(dip_deg, 1e-3);
    const double sn = std::sin(dip * M_PI / 180.0);
    const double cs = std::cos(dip * M_PI / 180.0);

    const double d_bottom = centroid_depth_km + 0.5 * width_km * sn;
    const double x = x_along + 0.5 * length_km;        // origin at the xi = 0 corner
    const double y = 0.5 * width_km * cs - y_downdip;  // up-dip from the bottom edge
    const Frame f{sn, cs, y * sn - d_bottom * cs};
    const double p = y * cs + d_bottom * sn;

    const double u1 = slip_m * std::cos(rake_deg * M_PI / 180.0);
    const double u2 = slip_m * std::sin(rake_deg * M_PI / 180.0);

    auto chinnery = [&](auto&& corner) {
        return corner(x, p, f) - corner(x, p - width_km, f) - corner(x - length_km, p, f) +
               corner(x - length_km, p - width_km, f);
    };
    double uz = 0.0;
    if (u1 != 0.0) uz += u1 * chinnery(strike_slip_z);
    if (u2 != 0.0) uz += u2 * chinnery(dip_slip_z);
    return uz;
}

DeformationGrid compute_deformation(const std::vector<geometry::OkadaRect>& rects,
                                    const GridSpec& grid) {
    for (const auto& r : rects) {
        if (!(r.depth > 0) || !(r.length > 0) || !(r.width > 0) || !(r.slip >= 0)) {
            std::ostringstream os;
            os << "invalid rectangle: depth " << r.depth << " km, length " << r.length
               << " km, width " << r.width << " km, slip " << r.slip << " m";
            throw DomainError(os.str());
        }
        if (!(r.rake >= 0 && r.rake < 360)) throw DomainError("rake must lie in [0, 360)");
    }

    DeformationGrid out;
    out.spec = grid;
    out.values.assign(grid.size(), 0.0);
    if (rects.empty()) return out;

    // flat-earth tangent plane anchored at the first rectangle's centroid
    const double lat_ref = rects[0].centroid_lat;
    const double m_per_deg_lat = geometry::km_per_deg;  // in km here
    const double m_per_deg_lon = geometry::km_per_deg * std::cos(lat_ref * M_PI / 180.0);
    const double nudge = 1e-6 * std::min(grid.dlat, grid.dlon);

    for (const auto& r : rects) {
        const double rad = r.strike * M_PI / 180.0;
        const double se = std::sin(rad), sn = std::cos(rad);  // strike unit vector (E, N)
        for (int i = 0; i < grid.nlat; ++i) {
            const double dn = (grid.lat(i) - r.centroid_lat) * m_per_deg_lat;
            for (int j = 0; j < grid.nlon; ++j) {
                const double de = (grid.lon(j) - r.centroid_lon) * m_per_deg_lon;
                const double x_along = de * se + dn * sn;
                const double y_downdip = de * sn - dn * se;  // dip direction = strike + 90
                double uz = uz_rectangle(x_along, y_downdip, r.depth, r.dip, r.length,
                                         r.width, r.slip, r.rake);
                if (!std::isfinite(uz)) {
                    // evaluation point sits on a rectangle edge; nudge it off
                    const double eps = nudge * m_per_deg_lat;
                    uz = uz_rectangle(x_along + eps, y_downdip + eps, r.depth, r.dip,
                                      r.length, r.width, r.slip, r.rake);
                }
                if (!std::isfinite(uz))
                    throw NumericError("Okada field non-finite after edge nudge");
                out.at(i, j) += uz;
            }
        }
    }
    return out;
}

}  // namespace quakeinv::okada
