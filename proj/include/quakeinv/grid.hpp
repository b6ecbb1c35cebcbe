#pragma once

#include <string>
#include <vector>

namespace quakeinv {

/// Regular lat/lon raster. Values live at cell centers; row index 0 is the
/// southernmost row (the ESRI file order, north first, is flipped on read).
struct GridSpec {
    double lat0 = 0.0;  // center of cell (0, 0), degrees
    double lon0 = 0.0;
    int nlat = 0;
    int nlon = 0;
    double dlat = 0.0;  // degrees per cell
    double dlon = 0.0;

    double lat(int i) const { return lat0 + i * dlat; }
    double lon(int j) const { return lon0 + j * dlon; }
    std::size_t size() const { return static_cast<std::size_t>(nlat) * nlon; }
    std::size_t idx(int i, int j) const { return static_cast<std::size_t>(i) * nlon + j; }

    bool same_registration(const GridSpec& o, double tol = 1e-9) const;
};

struct Raster {
    GridSpec spec;
    std::vector<double> values;  // row-major, spec.idx(i, j)

    double& at(int i, int j) { return values[spec.idx(i, j)]; }
    double at(int i, int j) const { return values[spec.idx(i, j)]; }
};

/// ESRI ASCII grid I/O (ncols/nrows/xllcorner/yllcorner/cellsize/nodata_value
/// header, then rows north to south). nodata cells read as `nodata_fill`.
Raster read_ascii_grid(const std::string& path, double nodata_fill);
void write_ascii_grid(const std::string& path, const Raster& grid);

}  // namespace quakeinv
