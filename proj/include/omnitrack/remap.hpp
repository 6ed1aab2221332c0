#pragma once

// The remap pair: extract a low-distortion local viewport image from an ERP
// frame through a sampling grid, and lift local predictions (masks, boxes)
// back onto the 360-degree frame.

#include <variant>

#include "omnitrack/image.hpp"
#include "omnitrack/regions.hpp"

namespace omnitrack {

// Local viewport image together with the grid that produced it.
struct LocalImage {
    Image image;
    SamplingGrid grid;
};

// Default closing radius for lifted masks: the worst-case sampling stride of
// the grid, so scatter holes are guaranteed to be covered.
int default_dilation_radius(int erp_width, int local_width);

// Bilinear viewport extraction with horizontal wrap and polar reflection.
LocalImage extract_region(const Image& img, const BFoV& b, int out_w, int out_h);

// Nearest-neighbor mask extraction through the same grid.
Mask extract_mask(const Mask& m, const SamplingGrid& grid);

// Scatter set local pixels to their nearest ERP pixel, then close with a
// disc of dilation_radius (wrap-aware in longitude). radius < 0 selects the
// default stride-derived radius.
Mask lift_mask(const Mask& local, const SamplingGrid& grid, const ErpSize& size,
               int dilation_radius = -1);

// Dense sample points of a local box mapped onto the ERP image.
std::vector<PixelCoord> lift_box_points(const RBBox& local_box, const SamplingGrid& grid,
                                        int samples = 64);

// Lift a local box prediction into the requested global representation.
std::variant<BBox, RBBox, BFoV> lift_box(const RBBox& local_box, const SamplingGrid& grid,
                                         const ErpSize& size, RepKind target);

}  // namespace omnitrack
