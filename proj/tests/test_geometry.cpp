#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <fstream>
#include <random>

#include "quakeinv/errors.hpp"
#include "quakeinv/geometry.hpp"
#include "testutil.hpp"

using namespace quakeinv;
using namespace quakeinv::geometry;

namespace {

FaultGeometry gridded_geometry() {
    // depth varies linearly, strike/dip constant: bilinear reproduces it
    std::vector<GeoSample> samples;
    for (int i = 0; i <= 4; ++i)
        for (int j = 0; j <= 4; ++j) {
            const double lat = -6.0 + 2.0 * i;
            const double lon = 128.0 + 1.5 * j;
            samples.push_back({lat, lon, 20.0 + 2.0 * i + 1.0 * j, 75.0, 12.0});
        }
    return FaultGeometry::from_samples(samples);
}

}  // namespace

TEST_CASE("interp is exact at tabulated sample points") {
    const auto geom = gridded_geometry();
    CHECK(geom.gridded());
    for (const auto& s : geom.samples()) {
        const auto r = geom.interp(s.lat, s.lon);
        CHECK(r.depth == doctest::Approx(s.depth).epsilon(1e-12));
        CHECK(r.strike == doctest::Approx(s.strike).epsilon(1e-12));
        CHECK(r.dip == doctest::Approx(s.dip).epsilon(1e-12));
    }
}

TEST_CASE("midpoint of two samples differing only in depth interpolates linearly") {
    const FaultGeometry geom = FaultGeometry::from_samples(
        {{0.0, 100.0, 20.0, 90.0, 15.0}, {0.0, 101.0, 40.0, 90.0, 15.0}});
    const auto r = geom.interp(0.0, 100.5);
    CHECK(r.depth == doctest::Approx(30.0).epsilon(1e-12));
}

TEST_CASE("bilinear interpolation reproduces a bilinear depth field") {
    const auto geom = gridded_geometry();
    std::mt19937_64 eng(42);
    std::uniform_real_distribution<double> ulat(-6.0, 2.0), ulon(128.0, 134.0);
    for (int k = 0; k < 200; ++k) {
        const double lat = ulat(eng), lon = ulon(eng);
        const auto r = geom.interp(lat, lon);
        const double expect = 20.0 + 2.0 * (lat + 6.0) / 2.0 + 1.0 * (lon - 128.0) / 1.5;
        CHECK(r.depth == doctest::Approx(expect).epsilon(1e-10));
        CHECK(r.strike == doctest::Approx(75.0).epsilon(1e-10));
    }
}

TEST_CASE("scattered queries agree with a brute-force IDW reference") {
    std::mt19937_64 eng(7);
    std::uniform_real_distribution<double> ulat(-5.0, -1.0), ulon(129.0, 133.0);
    std::uniform_real_distribution<double> udepth(10.0, 45.0), ustrike(40.0, 140.0),
        udip(8.0, 25.0);
    std::vector<GeoSample> samples;
    for (int k = 0; k < 60; ++k)
        samples.push_back({ulat(eng), ulon(eng), udepth(eng), ustrike(eng), udip(eng)});
    const auto geom = FaultGeometry::from_samples(samples);
    CHECK_FALSE(geom.gridded());

    auto reference = [&](double lat, double lon) {
        const double clat = std::cos(lat * M_PI / 180.0);
        std::vector<std::pair<double, const GeoSample*>> all;
        for (const auto& s : samples) {
            const double dy = s.lat - lat, dx = (s.lon - lon) * clat;
            all.push_back({dy * dy + dx * dx, &s});
        }
        std::sort(all.begin(), all.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        double wsum = 0, depth = 0, dip = 0, se = 0, sn = 0;
        for (int n = 0; n < 4; ++n) {
            const double w = 1.0 / all[n].first;
            wsum += w;
            depth += w * all[n].second->depth;
            dip += w * all[n].second->dip;
            se += w * std::sin(all[n].second->strike * M_PI / 180.0);
            sn += w * std::cos(all[n].second->strike * M_PI / 180.0);
        }
        double strike = std::atan2(se, sn) * 180.0 / M_PI;
        if (strike < 0) strike += 360.0;
        return InterpResult{depth / wsum, strike, dip / wsum};
    };

    std::uniform_real_distribution<double> qlat(geom.lat_min(), geom.lat_max()),
        qlon(geom.lon_min(), geom.lon_max());
    for (int k = 0; k < 100; ++k) {
        const double lat = qlat(eng), lon = qlon(eng);
        const auto got = geom.interp(lat, lon);
        const auto want = reference(lat, lon);
        CHECK(got.depth == doctest::Approx(want.depth).epsilon(1e-12));
        CHECK(got.strike == doctest::Approx(want.strike).epsilon(1e-12));
        CHECK(got.dip == doctest::Approx(want.dip).epsilon(1e-12));
    }
}

TEST_CASE("strike interpolation handles the 360 wraparound") {
    const FaultGeometry geom = FaultGeometry::from_samples(
        {{0.0, 100.0, 20.0, 359.0, 15.0}, {0.0, 101.0, 20.0, 1.0, 15.0}});
    const auto r = geom.interp(0.0, 100.5);
    const double wrapped = r.strike > 180.0 ? r.strike - 360.0 : r.strike;
    CHECK(wrapped == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("out-of-region queries raise DomainError naming the point") {
    const auto geom = gridded_geometry();
    CHECK_THROWS_AS(geom.interp(50.0, 130.0), DomainError);
    try {
        geom.interp(50.0, 130.0);
    } catch (const DomainError& e) {
        CHECK(std::string(e.what()).find("50") != std::string::npos);
    }
}

TEST_CASE("geometry file round trip and validation") {
    testutil::TempDir tmp("geom");
    {
        std::ofstream f(tmp.file("geom.csv"));
        f << "lat, lon, depth_km, strike_deg, dip_deg\n";
        f << "# comment\n";
        f << "0.0, 100.0, 25.0, 80.0, 14.0\n";
        f << "1.0, 100.0, 30.0, 85.0, 16.0\n";
    }
    const auto geom = FaultGeometry::from_file(tmp.file("geom.csv"));
    CHECK(geom.samples().size() == 2);

    {
        std::ofstream f(tmp.file("bad.csv"));
        f << "lat, lon, depth_km, strike_deg, dip_deg\n";
        f << "0.0, 100.0, -3.0, 80.0, 14.0\n";
    }
    CHECK_THROWS_AS(FaultGeometry::from_file(tmp.file("bad.csv")), ConfigError);
}

TEST_CASE("size_from_magnitude matches the scaling law exactly at zero offsets") {
    const ScalingLaw law;
    const double mw = 8.0;
    const auto s = size_from_magnitude(mw, 0.0, 0.0, law);
    CHECK(s.length_km == doctest::Approx(std::pow(10.0, law.a_len + law.b_len * mw)).epsilon(1e-15));
    CHECK(s.width_km == doctest::Approx(std::pow(10.0, law.a_wid + law.b_wid * mw)).epsilon(1e-15));
}

TEST_CASE("magnitude round-trips through rupture size within 1e-9") {
    const ScalingLaw law;
    std::mt19937_64 eng(3);
    std::uniform_real_distribution<double> umw(6.5, 9.5), uoff(-0.4, 0.4);
    for (int k = 0; k < 100; ++k) {
        const double mw = umw(eng);
        const auto s = size_from_magnitude(mw, uoff(eng), uoff(eng), law);
        const double m0 = law.rigidity * (s.length_km * 1e3) * (s.width_km * 1e3) * s.slip_m;
        CHECK(magnitude_from_moment(m0) == doctest::Approx(mw).epsilon(1e-11));
        CHECK(std::abs(magnitude_from_moment(m0) - mw) < 1e-9);
    }
}

TEST_CASE("one magnitude unit multiplies the moment by 10^1.5") {
    CHECK(moment_from_magnitude(8.5) / moment_from_magnitude(7.5) ==
          doctest::Approx(std::pow(10.0, 1.5)).epsilon(1e-12));
}

TEST_CASE("rupture size is strictly increasing in magnitude") {
    const ScalingLaw law;
    double prev_l = 0, prev_w = 0, prev_s = 0;
    for (double mw = 6.5; mw <= 9.5; mw += 0.05) {
        const auto s = size_from_magnitude(mw, 0.1, -0.1, law);
        CHECK(s.length_km > prev_l);
        CHECK(s.width_km > prev_w);
        CHECK(s.slip_m > prev_s);
        prev_l = s.length_km;
        prev_w = s.width_km;
        prev_s = s.slip_m;
    }
}

TEST_CASE("short ruptures stay in one rectangle centered on the epicenter") {
    const auto geom = gridded_geometry();
    EarthquakeParams p{-2.0, 130.0, 0.0, 7.0, 0.0, 0.0};
    const auto rects = build_rupture(p, geom, ScalingLaw{});
    REQUIRE(rects.size() == 1);
    CHECK(rects[0].centroid_lat == doctest::Approx(p.lat));
    CHECK(rects[0].centroid_lon == doctest::Approx(p.lon));
    CHECK(rects[0].rake == 90.0);
}

TEST_CASE("constant-strike geometry gives collinear equal-strike sub-rectangles") {
    std::vector<GeoSample> samples;
    for (int i = 0; i <= 4; ++i)
        for (int j = 0; j <= 4; ++j)
            samples.push_back({-8.0 + 4.0 * i, 120.0 + 5.0 * j, 25.0, 90.0, 15.0});
    const auto geom = FaultGeometry::from_samples(samples);
    EarthquakeParams p{0.0, 130.0, 0.0, 9.0, 0.0, 0.0};
    const auto rects = build_rupture(p, geom, ScalingLaw{});
    REQUIRE(rects.size() > 2);
    for (const auto& r : rects) {
        CHECK(r.strike == doctest::Approx(90.0).epsilon(1e-9));
        // strike 90 runs along longitude: latitudes stay put
        CHECK(r.centroid_lat == doctest::Approx(p.lat).epsilon(1e-9));
    }
    for (std::size_t i = 1; i < rects.size(); ++i)
        CHECK(rects[i].centroid_lon > rects[i - 1].centroid_lon);
}

TEST_CASE("total moment is conserved on a curved interface") {
    // strike rotates with longitude; depth drifts gently
    std::vector<GeoSample> samples;
    for (int i = 0; i <= 10; ++i)
        for (int j = 0; j <= 10; ++j) {
            const double lat = -10.0 + 2.0 * i;
            const double lon = 120.0 + 2.0 * j;
            double strike = 70.0 + 3.0 * (lon - 120.0);
            samples.push_back({lat, lon, 25.0 + 0.3 * i, strike, 14.0});
        }
    const auto geom = FaultGeometry::from_samples(samples);
    const ScalingLaw law;
    for (double mw : {7.8, 8.6, 9.2}) {
        EarthquakeParams p{-1.0, 130.0, 2.0, mw, 0.05, -0.03};
        const auto rects = build_rupture(p, geom, law);
        long double total = 0.0L;
        for (const auto& r : rects)
            total += static_cast<long double>(law.rigidity) * (r.length * 1e3) *
                     (r.width * 1e3) * r.slip;
        const double m0 = moment_from_magnitude(mw);
        CHECK(std::abs(static_cast<double>(total) - m0) / m0 < 1e-6);
        if (mw > 8.0) CHECK(rects.size() > 1);
    }
}

TEST_CASE("build_rupture is deterministic") {
    const auto geom = gridded_geometry();
    EarthquakeParams p{-2.0, 131.0, 1.0, 8.8, 0.1, 0.0};
    const auto a = build_rupture(p, geom, ScalingLaw{});
    const auto b = build_rupture(p, geom, ScalingLaw{});
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].centroid_lat == b[i].centroid_lat);
        CHECK(a[i].centroid_lon == b[i].centroid_lon);
        CHECK(a[i].slip == b[i].slip);
    }
}

TEST_CASE("impossible depths raise InvalidDepthError") {
    const auto geom = gridded_geometry();  // interface ~20-30 km deep
    EarthquakeParams p{-2.0, 130.0, -25.0, 7.0, 0.0, 0.0};
    CHECK_THROWS_AS(build_rupture(p, geom, ScalingLaw{}), InvalidDepthError);
}

TEST_CASE("ruptures running outside the tabulated region raise DomainError") {
    std::vector<GeoSample> samples;
    for (int i = 0; i <= 2; ++i)
        for (int j = 0; j <= 2; ++j)
            samples.push_back({-0.2 + 0.2 * i, 129.8 + 0.2 * j, 25.0, 90.0, 15.0});
    const auto geom = FaultGeometry::from_samples(samples);  // tiny region
    EarthquakeParams p{0.0, 130.0, 0.0, 9.0, 0.0, 0.0};      // ~700 km rupture
    CHECK_THROWS_AS(build_rupture(p, geom, ScalingLaw{}), DomainError);
}
