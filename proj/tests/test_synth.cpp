#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "omnitrack/synth.hpp"
#include "omnitrack/metrics.hpp"

#include <cmath>
#include <filesystem>

using namespace omnitrack;
namespace fs = std::filesystem;

TEST_CASE("cap_mask membership at and beyond the radius") {
    ErpSize size(960, 480);
    CapSpec cap;
    cap.rho = deg2rad(10);
    cap.center = LonLat(0, 0);
    Mask m = cap_mask(cap, size);
    CHECK(m.get(480, 240));  // center pixel

    // A pixel two rows beyond the angular radius is out.
    double beyond = cap.rho + 2 * kPi / size.height;
    auto p = lonlat_to_pixel(LonLat(0, beyond), size);
    CHECK_FALSE(m.get(static_cast<int>(p.u), static_cast<int>(p.v)));

    CHECK_THROWS(cap_mask(CapSpec{LonLat(0, 0), deg2rad(95)}, size));
}

TEST_CASE("cap weighted area matches 2*pi*(1-cos rho)") {
    ErpSize size(1920, 960);
    auto weights = spherical_weights(size);
    for (double rho_deg : {5.0, 10.0, 20.0, 40.0}) {
        CapSpec cap;
        cap.rho = deg2rad(rho_deg);
        cap.center = LonLat(0.3, 0.2);
        Mask m = cap_mask(cap, size);
        double area = 0;
        for (int j = 0; j < size.height; ++j)
            for (int i = 0; i < size.width; ++i)
                if (m.get(i, j)) area += weights.at_row(j);
        double want = 2 * kPi * (1 - std::cos(cap.rho));
        REQUIRE(std::abs(area - want) / want < 0.005);
    }
}

TEST_CASE("cap area is latitude-invariant under weighting") {
    ErpSize size(1920, 960);
    auto weights = spherical_weights(size);
    auto area_at = [&](double lat_deg) {
        CapSpec cap;
        cap.rho = deg2rad(15);
        cap.center = LonLat(0, deg2rad(lat_deg));
        Mask m = cap_mask(cap, size);
        double area = 0;
        for (int j = 0; j < size.height; ++j)
            for (int i = 0; i < size.width; ++i)
                if (m.get(i, j)) area += weights.at_row(j);
        return area;
    };
    double eq = area_at(0), high = area_at(70);
    CHECK(high == doctest::Approx(eq).epsilon(0.01));
}

TEST_CASE("render_frame is deterministic and separates fg from bg") {
    ErpSize size(480, 240);
    CapSpec cap;
    cap.rho = deg2rad(15);
    cap.center = LonLat(0, 0);
    Image a = render_frame(cap, cap.center, size);
    Image b = render_frame(cap, cap.center, size);
    CHECK(a.data == b.data);
    Mask m = cap_mask(cap, size);
    for (int j = 0; j < size.height; ++j)
        for (int i = 0; i < size.width; ++i) {
            if (m.get(i, j)) {
                REQUIRE(a.at(i, j) == cap.fg);
            } else {
                REQUIRE(a.at(i, j) >= cap.bg_lo);
                REQUIRE(a.at(i, j) <= cap.bg_hi);
            }
        }
    // Background does not move between frames of a trajectory (same seed).
    Image c = render_frame(cap, LonLat(1.0, 0.1), size);
    Mask m2 = cap_mask(CapSpec{LonLat(1.0, 0.1), cap.rho}, size);
    for (int j = 0; j < size.height; ++j)
        for (int i = 0; i < size.width; ++i)
            if (!m.get(i, j) && !m2.get(i, j)) REQUIRE(a.at(i, j) == c.at(i, j));
}

TEST_CASE("trajectory_center endpoints") {
    Trajectory t;
    t.kind = TrajectoryKind::BorderCross;
    t.frames = 11;
    t.span_deg = 40;
    t.start = LonLat(deg2rad(160), 0);
    auto first = trajectory_center(t, 0);
    auto last = trajectory_center(t, 10);
    CHECK(rad2deg(first.lon) == doctest::Approx(160));
    CHECK(rad2deg(last.lon) == doctest::Approx(-160));  // wrapped past the seam

    t.kind = TrajectoryKind::PoleCross;
    t.start = LonLat(0, 0);
    t.max_lat_deg = 85;
    CHECK(rad2deg(trajectory_center(t, 5).lat) == doctest::Approx(85));
    CHECK(rad2deg(trajectory_center(t, 10).lat) == doctest::Approx(0));

    t.kind = TrajectoryKind::GreatCircle;
    t.start = LonLat(0, 0);
    t.span_deg = 30;
    auto mid = trajectory_center(t, 10);
    // An equator start sweeps the equator (westward with this axis choice).
    CHECK(std::abs(rad2deg(mid.lon)) == doctest::Approx(30));
    CHECK(mid.lat == doctest::Approx(0).epsilon(1e-9));

    t.kind = TrajectoryKind::Static;
    t.start = LonLat(0.7, -0.2);
    CHECK(trajectory_center(t, 3).lon == doctest::Approx(0.7));
}

TEST_CASE("generate_sequence writes a loadable dataset") {
    fs::path dir = fs::temp_directory_path() / "omnitrack_synth_test";
    fs::remove_all(dir);

    Trajectory t;
    t.kind = TrajectoryKind::Static;
    t.frames = 4;
    t.start = LonLat(0.2, 0.1);
    CapSpec cap;
    cap.rho = deg2rad(12);
    ErpSize size(480, 240);
    auto man = generate_sequence(t, cap, size, dir);
    CHECK(man.frame_count() == 4);
    CHECK(man.has_masks());
    CHECK(man.bbox.size() == 4);
    CHECK(man.bfov.size() == 4);

    // Static: all masks identical.
    Mask m0 = load_mask(man.mask_paths[0]);
    for (int k = 1; k < 4; ++k) REQUIRE(load_mask(man.mask_paths[k]).data == m0.data);
}

TEST_CASE("generated attributes match the trajectory") {
    fs::path base = fs::temp_directory_path() / "omnitrack_synth_attrs";
    fs::remove_all(base);
    ErpSize size(480, 240);
    CapSpec cap;
    cap.rho = deg2rad(10);

    Trajectory border;
    border.kind = TrajectoryKind::BorderCross;
    border.frames = 10;
    border.span_deg = 40;
    border.start = LonLat(deg2rad(160), 0);
    auto bman = generate_sequence(border, cap, size, base / "border");
    auto battrs = load_attributes(bman.attributes_path);
    CHECK(battrs.cb);

    Trajectory pole;
    pole.kind = TrajectoryKind::PoleCross;
    pole.frames = 10;
    pole.start = LonLat(0, 0);
    pole.max_lat_deg = 85;
    auto pman = generate_sequence(pole, cap, size, base / "pole");
    auto pattrs = load_attributes(pman.attributes_path);
    CHECK(pattrs.hl);
    CHECK(pattrs.lv);

    Trajectory still;
    still.frames = 5;
    still.start = LonLat(0, 0);
    auto sman = generate_sequence(still, cap, size, base / "still");
    auto sattrs = load_attributes(sman.attributes_path);
    CHECK_FALSE(sattrs.fm);
    CHECK_FALSE(sattrs.fms);
    CHECK_FALSE(sattrs.lv);
    CHECK_FALSE(sattrs.cb);
}
