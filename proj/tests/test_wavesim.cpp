#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <fstream>
#include <random>

#include "quakeinv/errors.hpp"
#include "quakeinv/geometry.hpp"
#include "quakeinv/wavesim.hpp"
#include "testutil.hpp"

using namespace quakeinv;
using namespace quakeinv::wavesim;

namespace {

// Constant-depth square basin at the equator (dx == dy) with a Gaussian
// surface hump centered on a cell center.
struct Basin {
    BathymetryGrid bathy;
    Raster dz;
    int center;

    Basin(int n, double cell_deg, double depth_m, double amp, double radius_cells) {
        bathy.spec.nlat = bathy.spec.nlon = n;
        bathy.spec.dlat = bathy.spec.dlon = cell_deg;
        bathy.spec.lat0 = -0.5 * (n - 1) * cell_deg;
        bathy.spec.lon0 = 130.0 - 0.5 * (n - 1) * cell_deg;
        bathy.depth.assign(bathy.spec.size(), depth_m);
        center = (n - 1) / 2;
        dz.spec = bathy.spec;
        dz.values.assign(bathy.spec.size(), 0.0);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                const double r2 = (i - center) * (i - center) + (j - center) * (j - center);
                dz.at(i, j) = amp * std::exp(-r2 / (2.0 * radius_cells * radius_cells));
            }
    }

    Gauge gauge_at(const std::string& name, int di, int dj, double threshold = 0.05,
                   double slope_deg = 45.0) const {
        return {name, bathy.spec.lat(center + di), bathy.spec.lon(center + dj), threshold,
                slope_deg * M_PI / 180.0};
    }
};

}  // namespace

TEST_CASE("null initial condition stays identically zero") {
    Basin basin(41, 0.02, 800.0, 0.0, 3.0);
    SimOptions opt;
    opt.duration_min = 10.0;
    opt.warn_reflections = false;
    const auto series = simulate(basin.dz, basin.bathy, {basin.gauge_at("g", 5, 5)}, opt);
    for (double v : series.eta[0]) CHECK(v == 0.0);
    const auto out = extract_observables(series, {basin.gauge_at("g", 5, 5)});
    CHECK(out.gauges[0].arrival == arrival_never);
    CHECK(out.gauges[0].max_height == 0.0);
    CHECK(out.gauges[0].inundation == 0.0);
}

TEST_CASE("leading edge travels at the long-wave speed sqrt(g h)") {
    const double depth = 1000.0;
    Basin basin(121, 0.02, depth, 1.0, 2.0);
    const int dist_cells = 35;
    const auto g = basin.gauge_at("g", 0, dist_cells, 0.05);
    SimOptions opt;
    opt.duration_min = 25.0;
    opt.warn_reflections = false;
    const auto series = simulate(basin.dz, basin.bathy, {g}, opt);
    const auto out = extract_observables(series, {g});

    const double dx_m = 0.02 * geometry::km_per_deg * 1e3;  // equator: dx == dy
    const double d = dist_cells * dx_m;
    const double t_expect_min = d / std::sqrt(gravity * depth) / 60.0;
    REQUIRE(out.gauges[0].arrival != arrival_never);
    CHECK(std::abs(out.gauges[0].arrival - t_expect_min) / t_expect_min < 0.10);
}

TEST_CASE("closed-basin volume drifts below 1e-8 relative over a full run") {
    Basin basin(81, 0.02, 1500.0, 1.0, 3.0);
    SimOptions opt;
    opt.duration_min = 40.0;
    opt.record_mass = true;
    opt.warn_reflections = false;
    const auto series = simulate(basin.dz, basin.bathy, {basin.gauge_at("g", 7, -4)}, opt);
    REQUIRE(series.mass.size() > 100);
    const double m0 = series.mass.front();
    REQUIRE(m0 > 0.0);
    for (double m : series.mass) CHECK(std::abs(m - m0) / m0 <= 1e-8);
}

TEST_CASE("scaling the source by two scales every sample exactly") {
    Basin basin(61, 0.02, 900.0, 0.8, 2.5);
    const std::vector<Gauge> gauges = {basin.gauge_at("a", 3, 9), basin.gauge_at("b", -11, 2)};
    SimOptions opt;
    opt.duration_min = 12.0;
    opt.warn_reflections = false;
    const auto s1 = simulate(basin.dz, basin.bathy, gauges, opt);
    Raster dz2 = basin.dz;
    for (double& v : dz2.values) v *= 2.0;
    const auto s2 = simulate(dz2, basin.bathy, gauges, opt);
    for (std::size_t g = 0; g < gauges.size(); ++g)
        for (std::size_t k = 0; k < s1.eta[g].size(); ++k)
            CHECK(s2.eta[g][k] == 2.0 * s1.eta[g][k]);
    const auto o1 = extract_observables(s1, gauges);
    const auto o2 = extract_observables(s2, gauges);
    for (std::size_t g = 0; g < gauges.size(); ++g)
        CHECK(o2.gauges[g].max_height == 2.0 * o1.gauges[g].max_height);
}

TEST_CASE("radially symmetric hump reaches equidistant gauges alike") {
    Basin basin(101, 0.02, 1200.0, 1.0, 2.5);
    const int r = 30;
    const std::vector<Gauge> gauges = {basin.gauge_at("e", 0, r), basin.gauge_at("w", 0, -r),
                                       basin.gauge_at("n", r, 0), basin.gauge_at("s", -r, 0)};
    SimOptions opt;
    opt.duration_min = 20.0;
    opt.warn_reflections = false;
    const auto series = simulate(basin.dz, basin.bathy, gauges, opt);
    const auto out = extract_observables(series, gauges);
    for (int g = 1; g < 4; ++g) {
        CHECK(std::abs(out.gauges[g].max_height - out.gauges[0].max_height) /
                  out.gauges[0].max_height <
              0.01);
        CHECK(std::abs(out.gauges[g].arrival - out.gauges[0].arrival) * 60.0 <=
              series.dt_s + 1e-9);
    }
}

TEST_CASE("halving the grid spacing moves gauge heights by less than 10%") {
    const double cell = 0.04, depth = 1000.0, amp = 1.0;
    const double radius_deg = 0.12;
    auto make = [&](int n, double c) {
        Basin b(n, c, depth, amp, radius_deg / c);
        return b;
    };
    Basin coarse = make(61, cell);
    Basin fine = make(121, cell / 2);
    // same physical gauge location: 10 coarse cells = 20 fine cells east
    const auto gc = coarse.gauge_at("g", 0, 14);
    const auto gf = fine.gauge_at("g", 0, 28);
    REQUIRE(gc.lon == doctest::Approx(gf.lon).epsilon(1e-12));
    SimOptions opt;
    opt.duration_min = 15.0;
    opt.warn_reflections = false;
    const auto oc = extract_observables(simulate(coarse.dz, coarse.bathy, {gc}, opt), {gc});
    const auto of = extract_observables(simulate(fine.dz, fine.bathy, {gf}, opt), {gf});
    REQUIRE(oc.gauges[0].max_height > 0.0);
    CHECK(std::abs(of.gauges[0].max_height - oc.gauges[0].max_height) /
              oc.gauges[0].max_height <
          0.10);
}

TEST_CASE("an over-CFL run is reported as an instability naming the step") {
    Basin basin(41, 0.02, 2000.0, 1.0, 2.0);
    SimOptions opt;
    opt.duration_min = 60.0;
    opt.cfl = 0.99;  // beyond the 2-D stability bound 1/sqrt(2)
    opt.warn_reflections = false;
    CHECK_THROWS_AS(simulate(basin.dz, basin.bathy, {basin.gauge_at("g", 4, 4)}, opt),
                    NumericError);
    try {
        simulate(basin.dz, basin.bathy, {basin.gauge_at("g", 4, 4)}, opt);
    } catch (const NumericError& e) {
        CHECK(std::string(e.what()).find("step") != std::string::npos);
    }
}

TEST_CASE("mismatched grid registration is rejected") {
    Basin basin(31, 0.02, 500.0, 0.5, 2.0);
    Raster dz = basin.dz;
    dz.spec.lon0 += 0.01;
    SimOptions opt;
    opt.warn_reflections = false;
    CHECK_THROWS_AS(simulate(dz, basin.bathy, {basin.gauge_at("g", 2, 2)}, opt), DomainError);
}

TEST_CASE("land cells wall off the interior and gauges fall back to wet neighbors") {
    Basin basin(61, 0.02, 700.0, 1.0, 2.5);
    // a dry island two cells wide
    const int c = basin.center;
    for (int i = c + 14; i <= c + 15; ++i)
        for (int j = c - 2; j <= c + 2; ++j) basin.bathy.depth[basin.bathy.spec.idx(i, j)] = -5.0;
    const Gauge on_island = {"isl", basin.bathy.spec.lat(c + 14), basin.bathy.spec.lon(c), 0.05,
                             M_PI / 4};
    SimOptions opt;
    opt.duration_min = 8.0;
    opt.record_mass = true;
    opt.warn_reflections = false;
    const auto series = simulate(basin.dz, basin.bathy, {on_island}, opt);
    const double m0 = series.mass.front();
    for (double m : series.mass) CHECK(std::abs(m - m0) / m0 <= 1e-8);
    for (double v : series.eta[0]) CHECK(std::isfinite(v));
}

TEST_CASE("extract_observables matches the sine-series closed form") {
    const double dt = 0.05;  // seconds
    const int quarter = 400;
    const double omega = 2.0 * M_PI / (4.0 * quarter * dt);
    GaugeSeries series;
    series.dt_s = dt;
    series.eta.resize(1);
    for (int k = 0; k <= 4 * quarter; ++k) series.eta[0].push_back(2.0 * std::sin(omega * k * dt));
    const Gauge g{"g", 0, 0, 0.5, M_PI / 4};
    const auto out = extract_observables(series, {g});
    const double t_cross = std::asin(0.25) / omega / 60.0;
    CHECK(std::abs(out.gauges[0].arrival - t_cross) * 60.0 <= dt + 1e-12);
    CHECK(out.gauges[0].max_height == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(out.gauges[0].inundation == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("extract_observables agrees with an exhaustive scan oracle") {
    std::mt19937_64 eng(11);
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    for (int trial = 0; trial < 25; ++trial) {
        GaugeSeries series;
        series.dt_s = 3.0;
        series.eta.resize(1);
        series.eta[0].push_back(0.0);
        for (int k = 0; k < 200; ++k) series.eta[0].push_back(u(eng));
        const Gauge g{"g", 0, 0, 1.2, 30.0 * M_PI / 180.0};
        const auto out = extract_observables(series, {g});

        double arrival = arrival_never, peak = 0.0;
        for (std::size_t k = 0; k < series.eta[0].size(); ++k) {
            if (k > 0 && arrival == arrival_never && std::abs(series.eta[0][k]) >= 1.2)
                arrival = k * series.dt_s / 60.0;
            peak = std::max(peak, series.eta[0][k]);
        }
        CHECK(out.gauges[0].arrival == arrival);
        CHECK(out.gauges[0].max_height == peak);
        CHECK(out.gauges[0].inundation == peak / std::tan(g.beach_slope));
    }
}

TEST_CASE("bathymetry and gauge files load with validation") {
    testutil::TempDir tmp("wavesim");
    {
        std::ofstream f(tmp.file("bathy.asc"));
        f << "ncols 4\nnrows 3\nxllcorner 100.0\nyllcorner -2.0\ncellsize 0.5\n"
          << "nodata_value -9999\n";
        f << "1 2 3 4\n5 6 7 8\n9 10 -9999 12\n";
    }
    const auto b = load_bathymetry(tmp.file("bathy.asc"));
    CHECK(b.spec.nlon == 4);
    CHECK(b.spec.nlat == 3);
    CHECK(b.spec.lon0 == doctest::Approx(100.25));
    CHECK(b.spec.lat0 == doctest::Approx(-1.75));
    // ESRI rows are north-first; internal row 0 is the southern row
    CHECK(b.at(0, 0) == 9.0);
    CHECK(b.at(2, 3) == 4.0);
    CHECK(b.at(0, 2) == -1.0);  // nodata became land

    {
        std::ofstream f(tmp.file("gauges.csv"));
        f << "name, lat, lon, arrival_threshold_m, beach_slope_deg\n";
        f << "alpha, -1.8, 100.4, 0.05, 10\n";
        f << "beta, -1.2, 101.3, 0.10, 25\n";
    }
    const auto gauges = load_gauges(tmp.file("gauges.csv"));
    REQUIRE(gauges.size() == 2);
    CHECK(gauges[1].beach_slope == doctest::Approx(25.0 * M_PI / 180.0));

    {
        std::ofstream f(tmp.file("dup.csv"));
        f << "name, lat, lon, arrival_threshold_m, beach_slope_deg\n";
        f << "alpha, -1.8, 100.4, 0.05, 10\n";
        f << "alpha, -1.2, 101.3, 0.10, 25\n";
    }
    CHECK_THROWS_AS(load_gauges(tmp.file("dup.csv")), ConfigError);
}
