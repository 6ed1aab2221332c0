#include "omnitrack/synth.hpp"

#include "omnitrack/metrics.hpp"
#include "omnitrack/regions.hpp"

#include <cmath>

namespace fs = std::filesystem;

namespace omnitrack {

namespace {

// splitmix64; deterministic per-pixel texture.
std::uint64_t hash64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// Rodrigues rotation of v about unit axis u by angle a.
Vec3 rotate_about(const Vec3& v, const Vec3& u, double a) {
    double c = std::cos(a), s = std::sin(a);
    Vec3 cross{u.y * v.z - u.z * v.y, u.z * v.x - u.x * v.z, u.x * v.y - u.y * v.x};
    double d = u.dot(v);
    return {v.x * c + cross.x * s + u.x * d * (1 - c),
            v.y * c + cross.y * s + u.y * d * (1 - c),
            v.z * c + cross.z * s + u.z * d * (1 - c)};
}

}  // namespace

LonLat trajectory_center(const Trajectory& t, int k) {
    if (t.frames < 1) throw std::invalid_argument("trajectory_center: no frames");
    double s = t.frames > 1 ? static_cast<double>(k) / (t.frames - 1) : 0.0;
    switch (t.kind) {
        case TrajectoryKind::Static:
            return t.start;
        case TrajectoryKind::BorderCross:
            return LonLat(t.start.lon + deg2rad(t.span_deg) * s, t.start.lat);
        case TrajectoryKind::PoleCross: {
            // Triangle schedule: start lat -> max lat -> start lat.
            double up = s < 0.5 ? 2 * s : 2 * (1 - s);
            double lat = t.start.lat + (deg2rad(t.max_lat_deg) - t.start.lat) * up;
            return LonLat(t.start.lon, lat);
        }
        case TrajectoryKind::GreatCircle: {
            // Rotate the start direction about its local vertical axis; at
            // the equator this sweeps along the equator.
            Vec3 v = lonlat_to_vec(t.start);
            Mat3 r = bfov_rotation(t.start.lon, t.start.lat, 0.0);
            Vec3 axis = r.apply({0, -1, 0});
            return vec_to_lonlat(rotate_about(v, axis, deg2rad(t.span_deg) * s));
        }
    }
    throw std::logic_error("trajectory_center: bad kind");
}

Mask cap_mask(const CapSpec& c, const ErpSize& size) {
    if (!(c.rho > 0 && c.rho < kPi / 2))
        throw std::invalid_argument("cap_mask: rho outside (0, pi/2)");
    Mask m(size.width, size.height);
    double cr = std::cos(c.rho);
    double slc = std::sin(c.center.lat), clc = std::cos(c.center.lat);
    for (int j = 0; j < size.height; ++j) {
        double lat = (0.5 - (j + 0.5) / size.height) * kPi;
        double sl = std::sin(lat), cl = std::cos(lat);
        for (int i = 0; i < size.width; ++i) {
            double lon = ((i + 0.5) / size.width - 0.5) * 2 * kPi;
            double cosang = slc * sl + clc * cl * std::cos(lon - c.center.lon);
            if (cosang >= cr) m.set(i, j);
        }
    }
    return m;
}

Image render_frame(const CapSpec& c, const LonLat& center, const ErpSize& size) {
    CapSpec at = c;
    at.center = center;
    Mask m = cap_mask(at, size);
    Image img(size.width, size.height, 1);
    int range = std::max(1, c.bg_hi - c.bg_lo + 1);
    for (int j = 0; j < size.height; ++j) {
        for (int i = 0; i < size.width; ++i) {
            if (m.get(i, j)) {
                img.at(i, j) = c.fg;
            } else {
                std::uint64_t h =
                    hash64((static_cast<std::uint64_t>(j) << 32) ^ static_cast<std::uint64_t>(i) ^
                           (c.seed * 0x100000001b3ull));
                img.at(i, j) = static_cast<std::uint8_t>(c.bg_lo + h % range);
            }
        }
    }
    return img;
}

SequenceManifest generate_sequence(const Trajectory& t, const CapSpec& c, const ErpSize& size,
                                   const fs::path& out) {
    fs::create_directories(out / "frames");

    std::vector<FrameAnnotation> annotations(t.frames);
    for (int k = 0; k < t.frames; ++k) {
        LonLat center = trajectory_center(t, k);
        CapSpec at = c;
        at.center = center;
        Mask m = cap_mask(at, size);
        save_image(render_frame(c, center, size), out / "frames" / frame_filename(k));

        annotations[k].bbox = mask_to_bbox(m);
        annotations[k].rbbox = mask_to_rbbox(m);
        annotations[k].bfov = mask_to_bfov(m, size, false);
        annotations[k].rbfov = mask_to_bfov(m, size, true);
        annotations[k].mask = std::make_shared<Mask>(std::move(m));
    }
    write_results(annotations, out);
    save_attributes(compute_attributes(annotations, size), out / "attributes.json");
    return load_sequence(out);
}

}  // namespace omnitrack
