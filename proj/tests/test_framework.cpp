#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "omnitrack/framework.hpp"
#include "omnitrack/synth.hpp"

#include <cmath>

using namespace omnitrack;

namespace {

// In-memory synthetic sequence: frames, analytic masks, cap centers.
struct MiniSeq {
    std::vector<Image> frames;
    std::vector<std::shared_ptr<const Mask>> masks;
    std::vector<LonLat> centers;
    ErpSize size{960, 480};
};

MiniSeq make_seq(const Trajectory& t, double rho_deg, const ErpSize& size) {
    MiniSeq s;
    s.size = size;
    CapSpec cap;
    cap.rho = deg2rad(rho_deg);
    for (int k = 0; k < t.frames; ++k) {
        LonLat c = trajectory_center(t, k);
        s.centers.push_back(c);
        CapSpec at = cap;
        at.center = c;
        s.masks.push_back(std::make_shared<Mask>(cap_mask(at, size)));
        s.frames.push_back(render_frame(cap, c, size));
    }
    return s;
}

std::vector<FrameResult> run_oracle(const MiniSeq& s) {
    auto tracker = make_oracle_tracker([&](int k) { return s.masks[k]; });
    InitTarget init;
    init.mask = s.masks[0];
    SearchPolicy policy;
    return track_sequence([&](int k) { return s.frames[k]; },
                          static_cast<int>(s.frames.size()), init, *tracker, policy, s.size);
}

}  // namespace

TEST_CASE("next_search_region policy arithmetic") {
    SearchPolicy p;
    BFoV a = next_search_region(BFoV(0, 0, deg2rad(20), deg2rad(10)), p);
    CHECK(rad2deg(a.theta) == doctest::Approx(40));
    CHECK(rad2deg(a.phi) == doctest::Approx(30));  // 2x10 clamped up to min_fov
    CHECK(a.gamma == doctest::Approx(0));

    BFoV b = next_search_region(BFoV(0, 0, deg2rad(200), deg2rad(100)), p);
    CHECK(rad2deg(b.theta) == doctest::Approx(360));
    CHECK(rad2deg(b.phi) == doctest::Approx(180));

    BFoV c = next_search_region(BFoV(kPi / 2, -kPi / 3, deg2rad(30), deg2rad(30)), p);
    CHECK(c.clon == doctest::Approx(kPi / 2));
    CHECK(c.clat == doctest::Approx(-kPi / 3));
}

TEST_CASE("one-frame sequence echoes the init target") {
    Trajectory t;
    t.frames = 1;
    t.start = LonLat(0.5, 0.2);
    MiniSeq s = make_seq(t, 12, ErpSize(960, 480));
    auto results = run_oracle(s);
    REQUIRE(results.size() == 1);
    auto want = mask_to_bfov(*s.masks[0], s.size);
    CHECK(rad2deg(results[0].bfov.clon) == doctest::Approx(rad2deg(want.clon)).epsilon(0.02));
    CHECK(rad2deg(results[0].bfov.theta) == doctest::Approx(rad2deg(want.theta)).epsilon(0.05));
    CHECK(results[0].confidence == doctest::Approx(1.0));
}

TEST_CASE("oracle tracker survives border and pole crossings") {
    // Full evaluation resolution: the lift error budget (closing radius) is
    // sized against a 512-wide local window on a 1920-wide panorama.
    ErpSize size(1920, 960);
    auto weights = spherical_weights(size);

    Trajectory border;
    border.kind = TrajectoryKind::BorderCross;
    border.frames = 8;
    border.span_deg = 40;
    border.start = LonLat(deg2rad(160), 0);

    // The pole leg needs enough frames that per-frame motion stays inside
    // the doubled search region (85 deg up and back down).
    Trajectory pole;
    pole.kind = TrajectoryKind::PoleCross;
    pole.frames = 24;
    pole.start = LonLat(0, 0);
    pole.max_lat_deg = 85;

    for (const Trajectory& t : {border, pole}) {
        MiniSeq s = make_seq(t, 10, size);
        auto results = run_oracle(s);
        REQUIRE(results.size() == static_cast<std::size_t>(t.frames));
        for (int k = 1; k < t.frames; ++k) {
            REQUIRE(results[k].mask);
            double j = region_similarity(*s.masks[k], *results[k].mask, &weights);
            REQUIRE(j >= 0.9);
            double err = geodesic_angle(LonLat(results[k].bfov.clon, results[k].bfov.clat),
                                        s.centers[k]);
            REQUIRE(rad2deg(err) < 1.0);
        }
    }
}

TEST_CASE("tracking is deterministic") {
    Trajectory t;
    t.kind = TrajectoryKind::GreatCircle;
    t.frames = 6;
    t.start = LonLat(0.3, 0.1);
    t.span_deg = 30;
    MiniSeq s = make_seq(t, 10, ErpSize(960, 480));
    auto a = run_oracle(s);
    auto b = run_oracle(s);
    REQUIRE(a.size() == b.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
        REQUIRE(a[k].bfov.clon == b[k].bfov.clon);
        REQUIRE(a[k].bfov.theta == b[k].bfov.theta);
        REQUIRE(a[k].bbox.cx == b[k].bbox.cx);
        REQUIRE(a[k].mask->data == b[k].mask->data);
    }
}

TEST_CASE("NCC tracker holds a static target") {
    Trajectory t;
    t.frames = 6;
    t.start = LonLat(0.4, -0.1);
    MiniSeq s = make_seq(t, 12, ErpSize(960, 480));

    auto tracker = make_ncc_tracker();
    InitTarget init;
    init.mask = s.masks[0];
    SearchPolicy policy;
    auto results = track_sequence([&](int k) { return s.frames[k]; }, 6, init, *tracker, policy,
                                  s.size);
    auto gt = mask_to_bbox(*s.masks[0]);
    for (int k = 1; k < 6; ++k) {
        REQUIRE(results[k].confidence > 0.5);
        double iou = dual_success(as_rbbox(gt), as_rbbox(results[k].bbox), s.size);
        REQUIRE(iou >= 0.5);
    }
}

TEST_CASE("NCC tracker reports lost on blank frames") {
    ErpSize size(960, 480);
    Trajectory t;
    t.frames = 1;
    t.start = LonLat(0, 0);
    MiniSeq s = make_seq(t, 10, size);

    Image blank(size.width, size.height, 1, 128);
    auto tracker = make_ncc_tracker();
    InitTarget init;
    init.mask = s.masks[0];
    SearchPolicy policy;
    auto results = track_sequence(
        [&](int k) { return k == 0 ? s.frames[0] : blank; }, 4, init, *tracker, policy, size);
    // Lost frames re-emit the previous result with zero confidence.
    for (int k = 1; k < 4; ++k) {
        REQUIRE(results[k].confidence == doctest::Approx(0.0));
        REQUIRE(results[k].bbox.cx == doctest::Approx(results[0].bbox.cx));
        REQUIRE(results[k].bbox.cy == doctest::Approx(results[0].bbox.cy));
    }
}

TEST_CASE("BFoV init works for box-only trackers") {
    Trajectory t;
    t.frames = 4;
    t.start = LonLat(-0.6, 0.25);
    MiniSeq s = make_seq(t, 12, ErpSize(960, 480));

    auto tracker = make_ncc_tracker();
    InitTarget init;
    init.bfov = mask_to_bfov(*s.masks[0], s.size);
    SearchPolicy policy;
    auto results = track_sequence([&](int k) { return s.frames[k]; }, 4, init, *tracker, policy,
                                  s.size);
    for (int k = 1; k < 4; ++k) {
        double err = rad2deg(geodesic_angle(LonLat(results[k].bfov.clon, results[k].bfov.clat),
                                            s.centers[k]));
        REQUIRE(err < 3.0);
    }
}
