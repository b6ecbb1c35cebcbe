#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

namespace quakeinv::geometry {

inline constexpr double earth_radius_km = 6371.0;
inline constexpr double km_per_deg = earth_radius_km * M_PI / 180.0;

/// The six inferred source parameters: centroid position, depth offset from
/// the subduction interface, moment magnitude, and log10 deviations of
/// rupture length/width from their magnitude-implied expected values.
struct EarthquakeParams {
    double lat = 0.0;           // degrees
    double lon = 0.0;           // degrees
    double depth_offset = 0.0;  // km
    double magnitude = 0.0;     // Mw
    double dlogl = 0.0;
    double dlogw = 0.0;

    static constexpr int dim = 6;
    static const std::array<const char*, dim>& names();
    std::vector<double> to_vector() const;
    static EarthquakeParams from_vector(const std::vector<double>& v);
};

/// One tabulated sample of the subduction-interface geometry.
struct GeoSample {
    double lat, lon;     // degrees
    double depth;        // km, > 0
    double strike, dip;  // degrees
};

struct InterpResult {
    double depth, strike, dip;
};

/// Tabulated interface geometry with interpolated lookup. Samples forming a
/// complete regular lattice get bilinear interpolation; scattered samples
/// get inverse-distance weighting (power 2) over the 4 nearest.
class FaultGeometry {
public:
    static FaultGeometry from_samples(std::vector<GeoSample> samples);
    static FaultGeometry from_file(const std::string& path);

    /// Interpolated (depth, strike, dip); exact at sample points.
    /// Throws DomainError for queries outside the bounding region.
    InterpResult interp(double lat, double lon) const;

    bool contains(double lat, double lon) const;
    double lat_min() const { return lat_min_; }
    double lat_max() const { return lat_max_; }
    double lon_min() const { return lon_min_; }
    double lon_max() const { return lon_max_; }
    bool gridded() const { return gridded_; }
    const std::vector<GeoSample>& samples() const { return samples_; }

private:
    std::vector<GeoSample> samples_;
    double lat_min_ = 0, lat_max_ = 0, lon_min_ = 0, lon_max_ = 0;
    bool gridded_ = false;
    std::vector<double> grid_lats_, grid_lons_;  // sorted axes when gridded
    std::vector<std::size_t> grid_index_;        // row-major sample lookup

    InterpResult interp_bilinear(double lat, double lon) const;
    InterpResult interp_idw(double lat, double lon) const;
};

/// Length/width regression coefficients (log10 km per Mw) and rigidity.
struct ScalingLaw {
    double a_len = -2.440;
    double b_len = 0.59;
    double a_wid = -1.010;
    double b_wid = 0.32;
    double rigidity = 4.0e10;  // Pa
};

struct RuptureSize {
    double length_km, width_km, slip_m;
};

/// Scalar seismic moment in N·m for a moment magnitude.
double moment_from_magnitude(double mw);
/// Inverse of the above.
double magnitude_from_moment(double m0);

/// Rupture dimensions from magnitude and the log10 offsets; slip balances
/// the seismic moment against rigidity * area.
RuptureSize size_from_magnitude(double mw, double dlogl, double dlogw, const ScalingLaw& law);

/// Rectangular dislocation in the Okada parameterization. Depth is the
/// fault-plane centroid depth, positive down.
struct OkadaRect {
    double centroid_lat, centroid_lon;  // degrees
    double depth;                       // km
    double strike, dip, rake;           // degrees
    double length, width;               // km
    double slip;                        // m
};

/// Maps the six-parameter description onto rectangles laid end to end along
/// the local strike direction through the centroid. Ruptures longer than
/// `split_length_km` are split into equal-length pieces, each taking
/// (depth, strike, dip) from the geometry at its own centroid.
///
/// Throws DomainError when a sub-rectangle centroid leaves the tabulated
/// region and InvalidDepthError when the offset depth puts any part of a
/// rectangle at or above the surface.
std::vector<OkadaRect> build_rupture(const EarthquakeParams& p, const FaultGeometry& geom,
                                     const ScalingLaw& law, double split_length_km = 100.0);

}  // namespace quakeinv::geometry
