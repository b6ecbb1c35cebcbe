#include "quakeinv/grid.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "quakeinv/errors.hpp"
#include "quakeinv/textio.hpp"

namespace quakeinv {

bool GridSpec::same_registration(const GridSpec& o, double tol) const {
    return nlat == o.nlat && nlon == o.nlon && std::abs(lat0 - o.lat0) <= tol &&
           std::abs(lon0 - o.lon0) <= tol && std::abs(dlat - o.dlat) <= tol &&
           std::abs(dlon - o.dlon) <= tol;
}

Raster read_ascii_grid(const std::string& path, double nodata_fill) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);

    long ncols = 0, nrows = 0;
    double xll = 0, yll = 0, cellsize = 0, nodata = -9999;
    bool have_nodata = false;
    std::string key;
    for (int k = 0; k < 6; ++k) {
        const auto pos = in.tellg();
        if (!(in >> key)) throw ConfigError(path + ": truncated ASCII grid header");
        for (auto& c : key) c = static_cast<char>(std::tolower(c));
        if (key == "ncols") in >> ncols;
        else if (key == "nrows") in >> nrows;
        else if (key == "xllcorner") in >> xll;
        else if (key == "yllcorner") in >> yll;
        else if (key == "cellsize") in >> cellsize;
        else if (key == "nodata_value") { in >> nodata; have_nodata = true; }
        else {
            // nodata_value is optional; anything else means data started
            in.seekg(pos);
            break;
        }
        if (!in) throw ConfigError(path + ": bad value for header key " + key);
    }
    (void)have_nodata;
    if (ncols <= 0 || nrows <= 0 || cellsize <= 0)
        throw ConfigError(path + ": ASCII grid header requires positive ncols, nrows, cellsize");

    Raster g;
    g.spec.nlon = static_cast<int>(ncols);
    g.spec.nlat = static_cast<int>(nrows);
    g.spec.dlon = cellsize;
    g.spec.dlat = cellsize;
    g.spec.lon0 = xll + 0.5 * cellsize;
    g.spec.lat0 = yll + 0.5 * cellsize;
    g.values.assign(g.spec.size(), 0.0);

    // file rows run north -> south; internal row 0 is the southernmost
    for (long r = 0; r < nrows; ++r) {
        const int i = static_cast<int>(nrows - 1 - r);
        for (long c = 0; c < ncols; ++c) {
            double v;
            if (!(in >> v)) throw ConfigError(path + ": truncated ASCII grid data");
            g.at(i, static_cast<int>(c)) = (v == nodata) ? nodata_fill : v;
        }
    }
    return g;
}

void write_ascii_grid(const std::string& path, const Raster& grid) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    const auto& s = grid.spec;
    out << "ncols " << s.nlon << "\n";
    out << "nrows " << s.nlat << "\n";
    out << "xllcorner " << textio::format_double(s.lon0 - 0.5 * s.dlon) << "\n";
    out << "yllcorner " << textio::format_double(s.lat0 - 0.5 * s.dlat) << "\n";
    out << "cellsize " << textio::format_double(s.dlon) << "\n";
    out << "nodata_value -9999\n";
    for (int r = 0; r < s.nlat; ++r) {
        const int i = s.nlat - 1 - r;
        for (int j = 0; j < s.nlon; ++j) {
            if (j) out << ' ';
            out << textio::format_double(grid.at(i, j));
        }
        out << "\n";
    }
    if (!out) throw IoError("write failed for " + path);
}

}  // namespace quakeinv
