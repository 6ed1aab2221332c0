#pragma once

// Analytic synthetic sequences: a spherical-cap target on a parameterized
// trajectory over a textured ERP background. Cap area, centroid, and
// bounding FoV are all closed-form, so every downstream value has an exact
// oracle.

#include <cstdint>
#include <filesystem>

#include "omnitrack/dataset_io.hpp"
#include "omnitrack/image.hpp"
#include "omnitrack/sphere_geom.hpp"

namespace omnitrack {

struct CapSpec {
    LonLat center;
    double rho = deg2rad(10);  // angular radius, (0, pi/2)
    std::uint8_t fg = 230;     // cap intensity
    std::uint8_t bg_lo = 90;   // background noise range
    std::uint8_t bg_hi = 150;
    std::uint64_t seed = 1;
};

enum class TrajectoryKind { Static, GreatCircle, PoleCross, BorderCross };

struct Trajectory {
    TrajectoryKind kind = TrajectoryKind::Static;
    int frames = 1;
    LonLat start;                // starting cap center
    double span_deg = 40.0;      // total sweep (ignored for Static)
    double max_lat_deg = 85.0;   // peak latitude for PoleCross
};

// Cap center at frame k.
LonLat trajectory_center(const Trajectory& t, int k);

// Membership mask of the cap: pixel centers within rho of the cap center.
Mask cap_mask(const CapSpec& c, const ErpSize& size);

// Single rendered frame: cap over deterministic per-pixel hash noise.
Image render_frame(const CapSpec& c, const LonLat& center, const ErpSize& size);

// Render the whole sequence and write the full dataset layout (frames/,
// mask/, the four annotation files, attributes.json).
SequenceManifest generate_sequence(const Trajectory& t, const CapSpec& c, const ErpSize& size,
                                   const std::filesystem::path& out);

}  // namespace omnitrack
