#pragma once

#include <vector>

#include "quakeinv/geometry.hpp"
#include "quakeinv/grid.hpp"

namespace quakeinv::okada {

/// Vertical seafloor displacement (m) on a lat/lon grid.
using DeformationGrid = Raster;

/// Vertical surface displacement of one rectangular dislocation in a
/// homogeneous elastic half-space (Poisson solid), evaluated at an
/// observation point given in the fault-local frame:
///   x_along   along-strike offset from the fault-plane centroid (km)
///   y_downdip horizontal offset toward the dip direction (km)
/// The rectangle is length_km x width_km with its centroid at
/// centroid_depth_km (> 0, and deep enough that the plane stays buried).
double uz_rectangle(double x_along, double y_downdip, double centroid_depth_km,
                    double dip_deg, double length_km, double width_km, double slip_m,
                    double rake_deg);

/// Superposes the displacement fields of all rectangles on the grid.
/// Coordinates are mapped to a flat-earth tangent plane anchored at the
/// first rectangle's centroid. The result is finite everywhere; evaluation
/// points that land on a formula singularity are nudged by 1e-6 of a cell.
DeformationGrid compute_deformation(const std::vector<geometry::OkadaRect>& rects,
                                    const GridSpec& grid);

}  // namespace quakeinv::okada
