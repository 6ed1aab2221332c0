#include "omnitrack/regions.hpp"

#include <algorithm>
#include <cstddef>
#include <limits>

namespace omnitrack {

RBBox::RBBox(double cx_, double cy_, double w_, double h_, double gamma_)
    : cx(cx_), cy(cy_), w(w_), h(h_), gamma(gamma_) {
    if (w < h) {
        std::swap(w, h);
        gamma += kPi / 2;
    }
    gamma = std::fmod(gamma, kPi);
    if (gamma < 0) gamma += kPi;
    if (gamma >= kPi) gamma = 0;
}

BFoV::BFoV(double clon_, double clat_, double theta_, double phi_, double gamma_)
    : clon(wrap_lon(clon_)), clat(clat_), theta(theta_), phi(phi_), gamma(gamma_) {
    if (!(theta > 0 && theta <= 2 * kPi + 1e-9))
        throw std::invalid_argument("BFoV: theta outside (0, 2pi]");
    if (!(phi > 0 && phi <= kPi + 1e-9))
        throw std::invalid_argument("BFoV: phi outside (0, pi]");
    if (clat < -kPi / 2 - 1e-9 || clat > kPi / 2 + 1e-9)
        throw std::invalid_argument("BFoV: clat outside [-pi/2, pi/2]");
    theta = std::min(theta, 2 * kPi);
    phi = std::min(phi, kPi);
    clat = std::clamp(clat, -kPi / 2, kPi / 2);
}

namespace {

double linstep(double lo, double hi, int i, int n) {
    if (n <= 1) return 0.5 * (lo + hi);
    return lo + (hi - lo) * static_cast<double>(i) / (n - 1);
}

}  // namespace

DirGrid tangent_surface(double theta, double phi, int nx, int ny) {
    if (theta >= kPi || phi >= kPi)
        throw std::domain_error("tangent_surface: extent must be < 180 degrees");
    if (nx < 2 || ny < 2) throw std::invalid_argument("tangent_surface: grid too small");
    double hx = std::tan(theta / 2), hy = std::tan(phi / 2);
    DirGrid g;
    g.rows = ny;
    g.cols = nx;
    g.dirs.resize(static_cast<std::size_t>(nx) * ny);
    for (int j = 0; j < ny; ++j) {
        // Row 0 is the top of the viewport: negative Y (up on the sphere).
        double Y = linstep(-hy, hy, j, ny);
        for (int i = 0; i < nx; ++i) {
            double X = linstep(-hx, hx, i, nx);
            g.dirs[static_cast<std::size_t>(j) * nx + i] = Vec3{X, Y, 1.0}.normalized();
        }
    }
    return g;
}

DirGrid spherical_surface(double theta, double phi, int nx, int ny) {
    if (!(theta > 0 && theta <= 2 * kPi) || !(phi > 0 && phi <= kPi))
        throw std::invalid_argument("spherical_surface: extent out of range");
    if (nx < 2 || ny < 2) throw std::invalid_argument("spherical_surface: grid too small");
    DirGrid g;
    g.rows = ny;
    g.cols = nx;
    g.dirs.resize(static_cast<std::size_t>(nx) * ny);
    for (int j = 0; j < ny; ++j) {
        // Phi runs from +phi/2 (top row) down to -phi/2 so that row order
        // matches the tangent branch.
        double P = linstep(phi / 2, -phi / 2, j, ny);
        double cp = std::cos(P), sp = std::sin(P);
        for (int i = 0; i < nx; ++i) {
            double T = linstep(-theta / 2, theta / 2, i, nx);
            g.dirs[static_cast<std::size_t>(j) * nx + i] =
                Vec3{cp * std::sin(T), -sp, cp * std::cos(T)};
        }
    }
    return g;
}

SamplingGrid ebfov_grid(const BFoV& b, int out_w, int out_h, const ErpSize& size) {
    DirGrid dg = b.tangent_branch() ? tangent_surface(b.theta, b.phi, out_w, out_h)
                                    : spherical_surface(b.theta, b.phi, out_w, out_h);
    Mat3 rot = bfov_rotation(b.clon, b.clat, b.gamma);
    SamplingGrid g;
    g.rows = out_h;
    g.cols = out_w;
    g.erp = size;
    g.bfov = b;
    g.u.resize(dg.dirs.size());
    g.v.resize(dg.dirs.size());
    for (std::size_t k = 0; k < dg.dirs.size(); ++k) {
        PixelCoord p = lonlat_to_pixel(vec_to_lonlat(rot.apply(dg.dirs[k])), size);
        g.u[k] = p.u;
        g.v[k] = p.v;
    }
    return g;
}

PixelCoord local_point_to_erp(const BFoV& b, int out_w, int out_h, double lx, double ly,
                              const ErpSize& size) {
    // Grid entry i corresponds to local pixel center i + 0.5.
    double sx = std::clamp((lx - 0.5) / (out_w - 1), 0.0, 1.0);
    double sy = std::clamp((ly - 0.5) / (out_h - 1), 0.0, 1.0);
    Vec3 d;
    if (b.tangent_branch()) {
        double hx = std::tan(b.theta / 2), hy = std::tan(b.phi / 2);
        d = Vec3{-hx + 2 * hx * sx, -hy + 2 * hy * sy, 1.0}.normalized();
    } else {
        double T = -b.theta / 2 + b.theta * sx;
        double P = b.phi / 2 - b.phi * sy;
        d = {std::cos(P) * std::sin(T), -std::sin(P), std::cos(P) * std::cos(T)};
    }
    Mat3 rot = bfov_rotation(b.clon, b.clat, b.gamma);
    return lonlat_to_pixel(vec_to_lonlat(rot.apply(d)), size);
}

bool bfov_contains(const BFoV& b, const Mat3& rot_inv, const Vec3& dir) {
    Vec3 d = rot_inv.apply(dir);
    if (b.tangent_branch()) {
        if (d.z <= 0) return false;
        return std::abs(d.x) <= d.z * std::tan(b.theta / 2) &&
               std::abs(d.y) <= d.z * std::tan(b.phi / 2);
    }
    double T = std::atan2(d.x, d.z);
    double P = std::asin(std::clamp(-d.y, -1.0, 1.0));
    return std::abs(T) <= b.theta / 2 + 1e-12 && std::abs(P) <= b.phi / 2 + 1e-12;
}

Mask rasterize_bfov(const BFoV& b, const ErpSize& size) {
    Mat3 rinv = bfov_rotation(b.clon, b.clat, b.gamma).transpose();
    Mask m(size.width, size.height);
    std::vector<double> slon(size.width), clon(size.width);
    for (int i = 0; i < size.width; ++i) {
        double lon = ((i + 0.5) / size.width - 0.5) * 2 * kPi;
        slon[i] = std::sin(lon);
        clon[i] = std::cos(lon);
    }
    for (int j = 0; j < size.height; ++j) {
        double lat = (0.5 - (j + 0.5) / size.height) * kPi;
        double cl = std::cos(lat), sl = std::sin(lat);
        for (int i = 0; i < size.width; ++i) {
            Vec3 d{cl * slon[i], -sl, cl * clon[i]};
            if (bfov_contains(b, rinv, d)) m.set(i, j);
        }
    }
    return m;
}

BoundaryPolygon bfov_boundary(const BFoV& b, int samples_per_edge, const ErpSize& size) {
    if (samples_per_edge < 2) throw std::invalid_argument("bfov_boundary: need >= 2 samples");
    Mat3 rot = bfov_rotation(b.clon, b.clat, b.gamma);
    bool tangent = b.tangent_branch();
    double hx = tangent ? std::tan(b.theta / 2) : 0.0;
    double hy = tangent ? std::tan(b.phi / 2) : 0.0;

    auto eval = [&](double sx, double sy) {  // sx, sy in [0, 1]
        Vec3 d;
        if (tangent) {
            d = Vec3{-hx + 2 * hx * sx, -hy + 2 * hy * sy, 1.0}.normalized();
        } else {
            double T = -b.theta / 2 + b.theta * sx;
            double P = b.phi / 2 - b.phi * sy;
            d = {std::cos(P) * std::sin(T), -std::sin(P), std::cos(P) * std::cos(T)};
        }
        return lonlat_to_pixel(vec_to_lonlat(rot.apply(d)), size);
    };

    // Closed loop: top edge, right edge, bottom edge (reversed), left edge.
    std::vector<PixelCoord> loop;
    int n = samples_per_edge;
    for (int i = 0; i < n; ++i) loop.push_back(eval(static_cast<double>(i) / (n - 1), 0.0));
    for (int i = 1; i < n; ++i) loop.push_back(eval(1.0, static_cast<double>(i) / (n - 1)));
    for (int i = n - 2; i >= 0; --i) loop.push_back(eval(static_cast<double>(i) / (n - 1), 1.0));
    for (int i = n - 2; i > 0; --i) loop.push_back(eval(0.0, static_cast<double>(i) / (n - 1)));

    BoundaryPolygon poly;
    std::vector<PixelCoord> seg;
    for (std::size_t k = 0; k < loop.size(); ++k) {
        if (!seg.empty() && std::abs(loop[k].u - seg.back().u) > size.width / 2.0) {
            poly.segments.push_back(std::move(seg));
            seg.clear();
        }
        seg.push_back(loop[k]);
    }
    if (!seg.empty()) {
        // Rejoin with the first segment if the loop closes without a wrap.
        if (poly.segments.size() > 0 &&
            std::abs(seg.back().u - poly.segments.front().front().u) <= size.width / 2.0) {
            auto& first = poly.segments.front();
            seg.insert(seg.end(), first.begin(), first.end());
            first = std::move(seg);
        } else {
            poly.segments.push_back(std::move(seg));
        }
    }
    return poly;
}

namespace {

// Column occupancy cut for wrap-aware conversions: returns the column index
// at which to start reading (the column after the widest empty gap) and the
// resulting occupied width. Ties broken by leftmost gap.
struct WrapCut {
    int start = 0;   // first occupied column in the cut frame
    int width = 0;   // number of columns spanned after the cut
};

WrapCut find_wrap_cut(const std::vector<char>& col_occupied) {
    int w = static_cast<int>(col_occupied.size());
    int best_len = 0, best_start = -1;
    int run_len = 0, run_start = 0;
    // Scan twice around to measure circular runs of empty columns.
    for (int k = 0; k < 2 * w; ++k) {
        int i = k % w;
        if (!col_occupied[i]) {
            if (run_len == 0) run_start = k;
            ++run_len;
        } else {
            if (run_len > 0 && run_start < w && run_len > best_len) {
                best_len = std::min(run_len, w);
                best_start = run_start;
            }
            run_len = 0;
        }
    }
    if (run_len > 0 && run_start < w && run_len > best_len) {
        best_len = std::min(run_len, w);
        best_start = run_start;
    }
    WrapCut cut;
    if (best_len == 0) {
        cut.start = 0;
        cut.width = w;
    } else {
        cut.start = (best_start + best_len) % w;
        cut.width = w - best_len;
    }
    return cut;
}

std::vector<char> column_occupancy(const Mask& m) {
    std::vector<char> occ(m.width, 0);
    for (int j = 0; j < m.height; ++j)
        for (int i = 0; i < m.width; ++i)
            if (m.get(i, j)) occ[i] = 1;
    return occ;
}

// 8-connected boundary pixels, wrap-aware in u.
std::vector<std::pair<int, int>> boundary_pixels(const Mask& m) {
    std::vector<std::pair<int, int>> out;
    for (int j = 0; j < m.height; ++j) {
        for (int i = 0; i < m.width; ++i) {
            if (!m.get(i, j)) continue;
            bool border = false;
            for (int dj = -1; dj <= 1 && !border; ++dj) {
                int nj = j + dj;
                if (nj < 0 || nj >= m.height) {
                    border = true;
                    break;
                }
                for (int di = -1; di <= 1; ++di) {
                    int ni = (i + di + m.width) % m.width;
                    if (!m.get(ni, nj)) {
                        border = true;
                        break;
                    }
                }
            }
            if (border) out.emplace_back(i, j);
        }
    }
    return out;
}

// Andrew monotone chain convex hull.
std::vector<PixelCoord> convex_hull(std::vector<PixelCoord> pts) {
    auto cross = [](const PixelCoord& o, const PixelCoord& a, const PixelCoord& b) {
        return (a.u - o.u) * (b.v - o.v) - (a.v - o.v) * (b.u - o.u);
    };
    std::sort(pts.begin(), pts.end(), [](const PixelCoord& a, const PixelCoord& b) {
        return a.u < b.u || (a.u == b.u && a.v < b.v);
    });
    pts.erase(std::unique(pts.begin(), pts.end(),
                          [](const PixelCoord& a, const PixelCoord& b) {
                              return a.u == b.u && a.v == b.v;
                          }),
              pts.end());
    if (pts.size() < 3) return pts;
    std::vector<PixelCoord> hull(2 * pts.size());
    std::size_t k = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    std::size_t lower = k + 1;
    for (std::size_t i = pts.size() - 1; i-- > 0;) {
        while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    return hull;
}

// Rotating calipers: minimum-area rectangle aligned with some hull edge.
RBBox min_area_rect(const std::vector<PixelCoord>& hull) {
    if (hull.empty()) throw std::invalid_argument("min_area_rect: no points");
    if (hull.size() == 1) return RBBox(hull[0].u, hull[0].v, 0, 0, 0);

    double best_area = std::numeric_limits<double>::infinity();
    RBBox best;
    std::size_t n = hull.size();
    std::size_t edges = (n == 2) ? 1 : n;
    for (std::size_t e = 0; e < edges; ++e) {
        const PixelCoord& p0 = hull[e];
        const PixelCoord& p1 = hull[(e + 1) % n];
        double ex = p1.u - p0.u, ey = p1.v - p0.v;
        double len = std::hypot(ex, ey);
        if (len < 1e-12) continue;
        ex /= len;
        ey /= len;
        double min_a = 0, max_a = 0, min_b = 0, max_b = 0;
        bool first = true;
        for (const auto& p : hull) {
            double a = (p.u - p0.u) * ex + (p.v - p0.v) * ey;
            double b = -(p.u - p0.u) * ey + (p.v - p0.v) * ex;
            if (first) {
                min_a = max_a = a;
                min_b = max_b = b;
                first = false;
            } else {
                min_a = std::min(min_a, a);
                max_a = std::max(max_a, a);
                min_b = std::min(min_b, b);
                max_b = std::max(max_b, b);
            }
        }
        double w = max_a - min_a, h = max_b - min_b;
        double area = w * h;
        if (area < best_area - 1e-12) {
            best_area = area;
            double ca = 0.5 * (min_a + max_a), cb = 0.5 * (min_b + max_b);
            double cx = p0.u + ca * ex - cb * ey;
            double cy = p0.v + ca * ey + cb * ex;
            best = RBBox(cx, cy, w, h, std::atan2(ey, ex));
        }
    }
    return best;
}

}  // namespace

BBox mask_to_bbox(const Mask& m) {
    if (!m.any()) throw std::invalid_argument("mask_to_bbox: empty mask");
    auto occ = column_occupancy(m);
    WrapCut cut = find_wrap_cut(occ);

    int jmin = m.height, jmax = -1;
    int imin = m.width, imax = -1;
    for (int j = 0; j < m.height; ++j)
        for (int i = 0; i < m.width; ++i)
            if (m.get(i, j)) {
                int is = (i - cut.start + m.width) % m.width;
                imin = std::min(imin, is);
                imax = std::max(imax, is);
                jmin = std::min(jmin, j);
                jmax = std::max(jmax, j);
            }
    BBox b;
    b.w = imax - imin + 1;
    b.h = jmax - jmin + 1;
    b.cx = wrap_u(cut.start + (imin + imax + 1) / 2.0, m.width);
    b.cy = (jmin + jmax + 1) / 2.0;
    return b;
}

RBBox mask_to_rbbox(const Mask& m) {
    if (!m.any()) throw std::invalid_argument("mask_to_rbbox: empty mask");
    auto occ = column_occupancy(m);
    WrapCut cut = find_wrap_cut(occ);

    // Corner points of boundary pixels in the cut frame; corners make
    // axis-aligned rectangles come out at their true pixel extent.
    std::vector<PixelCoord> pts;
    for (auto [i, j] : boundary_pixels(m)) {
        double is = (i - cut.start + m.width) % m.width;
        pts.push_back({is, static_cast<double>(j)});
        pts.push_back({is + 1, static_cast<double>(j)});
        pts.push_back({is, static_cast<double>(j + 1)});
        pts.push_back({is + 1, static_cast<double>(j + 1)});
    }
    RBBox r = min_area_rect(convex_hull(std::move(pts)));
    r.cx = wrap_u(r.cx + cut.start, m.width);
    return r;
}

namespace {

// weights (when given) make the centroid a true spherical centroid; ERP
// pixel sets oversample high latitudes, which would otherwise drag the
// center toward the poles.
BFoV vecs_to_bfov(const std::vector<Vec3>& vecs, bool rotated,
                  const std::vector<double>* weights = nullptr) {
    Vec3 mean{0, 0, 0};
    double wsum = 0;
    for (std::size_t k = 0; k < vecs.size(); ++k) {
        double w = weights ? (*weights)[k] : 1.0;
        mean.x += vecs[k].x * w;
        mean.y += vecs[k].y * w;
        mean.z += vecs[k].z * w;
        wsum += w;
    }
    mean = {mean.x / wsum, mean.y / wsum, mean.z / wsum};
    if (mean.norm() < 1e-6)
        throw std::domain_error("mask_to_bfov: antipodally balanced mask, no stable center");
    LonLat c = vec_to_lonlat(mean);

    // Base frame with gamma = 0; a roll candidate is then a 2D rotation
    // of (x, y) in this frame.
    Mat3 rinv = bfov_rotation(c.lon, c.lat, 0.0).transpose();
    std::vector<Vec3> local(vecs.size());
    for (std::size_t k = 0; k < vecs.size(); ++k) local[k] = rinv.apply(vecs[k]);

    auto extents = [&](double gamma, double& theta, double& phi) {
        double cg = std::cos(gamma), sg = std::sin(gamma);
        double mt = 0, mp = 0;
        for (const auto& d : local) {
            double x = d.x * cg + d.y * sg;
            double y = -d.x * sg + d.y * cg;
            mt = std::max(mt, std::abs(std::atan2(x, d.z)));
            mp = std::max(mp, std::abs(std::asin(std::clamp(-y, -1.0, 1.0))));
        }
        theta = std::min(2 * mt, 2 * kPi);
        phi = std::min(2 * mp, kPi);
    };

    double gamma = 0.0, theta, phi;
    extents(0.0, theta, phi);
    if (rotated) {
        double best = theta * phi;
        for (int gdeg = 1; gdeg < 180; ++gdeg) {
            double g = deg2rad(gdeg), t, p;
            extents(g, t, p);
            if (t * p < best - 1e-12) {
                best = t * p;
                gamma = g;
                theta = t;
                phi = p;
            }
        }
    }
    theta = std::max(theta, 1e-6);
    phi = std::max(phi, 1e-6);
    return BFoV(c.lon, c.lat, theta, phi, gamma);
}

}  // namespace

BFoV mask_to_bfov(const Mask& m, const ErpSize& size, bool rotated) {
    if (!m.any()) throw std::invalid_argument("mask_to_bfov: empty mask");
    std::vector<Vec3> vecs;
    std::vector<double> weights;
    vecs.reserve(m.count());
    weights.reserve(m.count());
    for (int j = 0; j < m.height; ++j) {
        double lat = (0.5 - (j + 0.5) / size.height) * kPi;
        double cl = std::cos(lat), sl = std::sin(lat);
        for (int i = 0; i < m.width; ++i) {
            if (!m.get(i, j)) continue;
            double lon = ((i + 0.5) / size.width - 0.5) * 2 * kPi;
            vecs.push_back({cl * std::sin(lon), -sl, cl * std::cos(lon)});
            weights.push_back(cl);  // per-pixel solid angle is proportional to cos(lat)
        }
    }
    return vecs_to_bfov(vecs, rotated, &weights);
}

namespace {

Mask rasterize_points(const std::vector<PixelCoord>& pts, const ErpSize& size) {
    Mask m(size.width, size.height);
    for (const auto& p : pts) {
        int i = static_cast<int>(std::floor(wrap_u(p.u, size.width)));
        int j = std::clamp(static_cast<int>(std::floor(p.v)), 0, size.height - 1);
        i = std::clamp(i, 0, size.width - 1);
        m.set(i, j);
    }
    return m;
}

}  // namespace

BBox points_to_bbox(const std::vector<PixelCoord>& pts, const ErpSize& size) {
    if (pts.empty()) throw std::invalid_argument("points_to_bbox: no points");
    return mask_to_bbox(rasterize_points(pts, size));
}

RBBox points_to_rbbox(const std::vector<PixelCoord>& pts, const ErpSize& size) {
    if (pts.empty()) throw std::invalid_argument("points_to_rbbox: no points");
    return mask_to_rbbox(rasterize_points(pts, size));
}

BFoV points_to_bfov(const std::vector<PixelCoord>& pts, const ErpSize& size, bool rotated) {
    if (pts.empty()) throw std::invalid_argument("points_to_bfov: no points");
    std::vector<Vec3> vecs;
    vecs.reserve(pts.size());
    for (const auto& p : pts) vecs.push_back(lonlat_to_vec(pixel_to_lonlat(p, size)));
    return vecs_to_bfov(vecs, rotated);
}

}  // namespace omnitrack
