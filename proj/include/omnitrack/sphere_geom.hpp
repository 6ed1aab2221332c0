#pragma once

// Spherical camera model for equirectangular (ERP) images:
// pixel <-> (lon, lat) <-> unit vector conversions and the
// yaw-pitch-roll rotation used to place a bounding field-of-view.

#include <array>
#include <cmath>
#include <stdexcept>

namespace omnitrack {

inline constexpr double kPi = 3.14159265358979323846;

inline double deg2rad(double d) { return d * kPi / 180.0; }
inline double rad2deg(double r) { return r * 180.0 / kPi; }

// Wrap a longitude into [-pi, pi).
inline double wrap_lon(double lon) {
    lon = std::fmod(lon + kPi, 2.0 * kPi);
    if (lon < 0.0) lon += 2.0 * kPi;
    return lon - kPi;
}

// Wrap a horizontal pixel coordinate into [0, w).
inline double wrap_u(double u, double w) {
    u = std::fmod(u, w);
    if (u < 0.0) u += w;
    return u;
}

// ERP raster dimensions; the 2:1 aspect is mandatory.
struct ErpSize {
    int width = 0;
    int height = 0;

    ErpSize() = default;
    ErpSize(int w, int h) : width(w), height(h) {
        if (w < 2 || w != 2 * h)
            throw std::invalid_argument("ErpSize: ERP image must satisfy W = 2*H, W >= 2");
    }
};

// Spherical coordinates, lon in [-pi, pi), lat in [-pi/2, pi/2].
struct LonLat {
    double lon = 0.0;
    double lat = 0.0;

    LonLat() = default;
    LonLat(double lon_, double lat_) : lon(wrap_lon(lon_)), lat(lat_) {
        constexpr double eps = 1e-12;
        if (lat > kPi / 2 + eps || lat < -kPi / 2 - eps)
            throw std::domain_error("LonLat: latitude outside [-pi/2, pi/2]");
        if (lat > kPi / 2) lat = kPi / 2;
        if (lat < -kPi / 2) lat = -kPi / 2;
    }
};

// Continuous pixel coordinates on the ERP raster. u wraps modulo W, v does not.
struct PixelCoord {
    double u = 0.0;
    double v = 0.0;
};

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;

    double norm() const { return std::sqrt(x * x + y * y + z * z); }
    Vec3 normalized() const {
        double n = norm();
        if (n < 1e-300) throw std::domain_error("Vec3: cannot normalize zero vector");
        return {x / n, y / n, z / n};
    }
    double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
};

// Row-major 3x3 rotation matrix.
struct Mat3 {
    std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

    static Mat3 identity() { return {}; }

    Vec3 apply(const Vec3& v) const {
        return {m[0] * v.x + m[1] * v.y + m[2] * v.z,
                m[3] * v.x + m[4] * v.y + m[5] * v.z,
                m[6] * v.x + m[7] * v.y + m[8] * v.z};
    }
    Mat3 transpose() const {
        return {{m[0], m[3], m[6], m[1], m[4], m[7], m[2], m[5], m[8]}};
    }
    Mat3 operator*(const Mat3& o) const {
        Mat3 r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                double s = 0;
                for (int k = 0; k < 3; ++k) s += m[i * 3 + k] * o.m[k * 3 + j];
                r.m[i * 3 + j] = s;
            }
        return r;
    }
};

// u = (lon/2pi + 0.5)*W, v = (0.5 - lat/pi)*H, inverted.
inline LonLat pixel_to_lonlat(const PixelCoord& p, const ErpSize& size) {
    if (p.v < 0.0 || p.v > static_cast<double>(size.height))
        throw std::domain_error("pixel_to_lonlat: v outside [0, H]");
    double u = wrap_u(p.u, size.width);
    double lon = (u / size.width - 0.5) * 2.0 * kPi;
    double lat = (0.5 - p.v / size.height) * kPi;
    return LonLat(lon, lat);
}

inline PixelCoord lonlat_to_pixel(const LonLat& s, const ErpSize& size) {
    double u = (s.lon / (2.0 * kPi) + 0.5) * size.width;
    double v = (0.5 - s.lat / kPi) * size.height;
    return {wrap_u(u, size.width), v};
}

inline Vec3 lonlat_to_vec(const LonLat& s) {
    return {std::cos(s.lat) * std::sin(s.lon), -std::sin(s.lat),
            std::cos(s.lat) * std::cos(s.lon)};
}

// lon = atan2(x, z), lat = atan2(-y, hypot(x, z)).
// At the poles longitude is undefined; it is pinned to 0.
inline LonLat vec_to_lonlat(const Vec3& v) {
    Vec3 n = v.normalized();
    double hxz = std::hypot(n.x, n.z);
    double lat = std::atan2(-n.y, hxz);
    double lon = (hxz < 1e-15) ? 0.0 : std::atan2(n.x, n.z);
    return LonLat(lon, lat);
}

inline Mat3 rot_y(double a) {
    double c = std::cos(a), s = std::sin(a);
    return {{c, 0, s, 0, 1, 0, -s, 0, c}};
}
inline Mat3 rot_x(double a) {
    double c = std::cos(a), s = std::sin(a);
    return {{1, 0, 0, 0, c, -s, 0, s, c}};
}
inline Mat3 rot_z(double a) {
    double c = std::cos(a), s = std::sin(a);
    return {{c, -s, 0, s, c, 0, 0, 0, 1}};
}

// R_y(clon) * R_x(clat) * R_z(gamma): maps the local viewport frame
// (optical axis +z) onto the sphere location (clon, clat) with roll gamma.
inline Mat3 bfov_rotation(double clon, double clat, double gamma) {
    return rot_y(clon) * rot_x(clat) * rot_z(gamma);
}

// Central angle between two sphere points, in [0, pi].
inline double geodesic_angle(const LonLat& a, const LonLat& b) {
    double d = lonlat_to_vec(a).dot(lonlat_to_vec(b));
    d = std::max(-1.0, std::min(1.0, d));
    return std::acos(d);
}

}  // namespace omnitrack
