#pragma once

// Target representations on the ERP image and the sphere, the extended
// bounding-FoV region grids, region boundaries, and mask -> representation
// ground-truth conversion.

#include <vector>

#include "omnitrack/image.hpp"
#include "omnitrack/sphere_geom.hpp"

namespace omnitrack {

enum class RepKind { BBox, RBBox, BFoV, RBFoV };

// Axis-aligned box on the ERP image; cx is interpreted modulo W.
struct BBox {
    double cx = 0.0, cy = 0.0;
    double w = 0.0, h = 0.0;
};

// Rotated box; canonical form has w >= h and gamma in [0, pi).
struct RBBox {
    double cx = 0.0, cy = 0.0;
    double w = 0.0, h = 0.0;
    double gamma = 0.0;

    RBBox() = default;
    RBBox(double cx_, double cy_, double w_, double h_, double gamma_);
};

// Bounding field-of-view [clon, clat, theta, phi, gamma], radians.
struct BFoV {
    double clon = 0.0, clat = 0.0;
    double theta = 0.0, phi = 0.0;
    double gamma = 0.0;

    BFoV() = default;
    BFoV(double clon_, double clat_, double theta_, double phi_, double gamma_ = 0.0);

    // Tangent-plane branch applies when both extents are under 90 degrees.
    bool tangent_branch() const { return theta < kPi / 2 && phi < kPi / 2; }
};

// Grid of viewport-frame directions, row-major, before rotation onto the sphere.
struct DirGrid {
    int rows = 0;
    int cols = 0;
    std::vector<Vec3> dirs;  // rows*cols

    const Vec3& at(int i, int j) const { return dirs[static_cast<std::size_t>(j) * cols + i]; }
};

// Per-output-pixel ERP coordinates realizing a BFoV region at a chosen
// resolution; the carrier of the remap and its inverse.
struct SamplingGrid {
    int rows = 0;
    int cols = 0;
    std::vector<double> u;  // rows*cols, in [0, W)
    std::vector<double> v;  // rows*cols, in [0, H]
    ErpSize erp;
    BFoV bfov;

    double u_at(int i, int j) const { return u[static_cast<std::size_t>(j) * cols + i]; }
    double v_at(int i, int j) const { return v[static_cast<std::size_t>(j) * cols + i]; }
};

// Region outline on the ERP image, split into continuous segments where it
// wraps the vertical seam.
struct BoundaryPolygon {
    std::vector<std::vector<PixelCoord>> segments;
};

// Viewport directions on the tangent plane at the optical axis, X spanning
// [-tan(theta/2), tan(theta/2)] and Y [-tan(phi/2), tan(phi/2)], endpoints
// inclusive. Row 0 is the top of the viewport (negative Y).
DirGrid tangent_surface(double theta, double phi, int nx, int ny);

// Viewport directions on the spherical surface, Theta in [-theta/2, theta/2]
// across columns and Phi in [-phi/2, phi/2] down rows (row 0 at +phi/2).
DirGrid spherical_surface(double theta, double phi, int nx, int ny);

// Extended-BFoV sampling grid: tangent surface when theta, phi < 90 degrees,
// spherical surface otherwise, rotated by bfov_rotation and projected to ERP.
SamplingGrid ebfov_grid(const BFoV& b, int out_w, int out_h, const ErpSize& size);

// Map a continuous local-image pixel coordinate (same convention as the grid:
// column i holds local pixel center i + 0.5) to ERP coordinates analytically.
PixelCoord local_point_to_erp(const BFoV& b, int out_w, int out_h, double lx, double ly,
                              const ErpSize& size);

// Membership test for the eBFoV region: is the given direction inside the
// region of b? Used for rasterization (spherical IoU, init masks).
bool bfov_contains(const BFoV& b, const Mat3& rot_inv, const Vec3& dir);

// Rasterize the eBFoV region onto the ERP grid.
Mask rasterize_bfov(const BFoV& b, const ErpSize& size);

// Project the four viewport edges onto the ERP image.
BoundaryPolygon bfov_boundary(const BFoV& b, int samples_per_edge, const ErpSize& size);

// Minimal-width axis-aligned box containing the mask under longitude wrap.
BBox mask_to_bbox(const Mask& m);

// Minimum-area rotated rectangle over the mask's boundary pixels (convex hull
// based), computed after the same wrap shift as mask_to_bbox.
RBBox mask_to_rbbox(const Mask& m);

// Maximum bounding FoV of the mask: spherical-centroid center, extents from
// the rotated-frame parameterization; if `rotated`, gamma minimizes
// theta*phi over a 1-degree grid search.
BFoV mask_to_bfov(const Mask& m, const ErpSize& size, bool rotated = false);

// Same conversions applied to an explicit set of ERP sample points
// (continuous pixel coordinates); used when lifting local box predictions.
BBox points_to_bbox(const std::vector<PixelCoord>& pts, const ErpSize& size);
RBBox points_to_rbbox(const std::vector<PixelCoord>& pts, const ErpSize& size);
BFoV points_to_bfov(const std::vector<PixelCoord>& pts, const ErpSize& size, bool rotated);

}  // namespace omnitrack
