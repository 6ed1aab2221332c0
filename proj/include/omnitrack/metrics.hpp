#pragma once

// Tracking metrics (dual success/precision, angle precision, spherical IoU),
// segmentation metrics (region similarity and contour accuracy, plain and
// solid-angle weighted), the one-pass-evaluation aggregation, and the
// computed sequence attributes.

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "omnitrack/image.hpp"
#include "omnitrack/regions.hpp"

namespace omnitrack {

// Per-row solid angle of an ERP raster; constant along a row, sums to 4*pi.
struct SphericalWeights {
    ErpSize size;
    std::vector<double> row;  // length H, steradians per pixel

    double at_row(int j) const { return row[j]; }
};

SphericalWeights spherical_weights(const ErpSize& size);

// Area IoU of two (possibly rotated) rectangles via convex polygon clipping.
// Zero-area boxes give 0 by convention.
double iou_planar(const RBBox& a, const RBBox& b);
inline RBBox as_rbbox(const BBox& b) { return RBBox(b.cx, b.cy, b.w, b.h, 0.0); }

// Best IoU over the ground truth and its +-W horizontal copies.
double dual_success(const RBBox& gt, const RBBox& tr, const ErpSize& size);

// Smallest center distance over the three horizontal shifts. When
// `normalized`, the offset is divided componentwise by the ground-truth box
// size first (requires gt_box).
double dual_precision(const PixelCoord& gt_center, const PixelCoord& tr_center,
                      const ErpSize& size, const RBBox* gt_box = nullptr,
                      bool normalized = false);

enum class AngleMode { Geodesic, Literal };

// Angular distance of two sphere centers in degrees. Geodesic central angle
// is the primary mode; Literal is the plain L2 of (wrapped dlon, dlat).
double angle_precision(const LonLat& gt, const LonLat& tr, AngleMode mode = AngleMode::Geodesic);

// Solid-angle-weighted IoU of two eBFoV regions rasterized on `raster`.
double sphere_iou(const BFoV& a, const BFoV& b, const ErpSize& raster);

// Mask IoU; weighted by solid angle when weights are given. Both masks
// empty -> 1, exactly one empty -> 0.
double region_similarity(const Mask& gt, const Mask& tr,
                         const SphericalWeights* weights = nullptr);

// Wrap-aware 8-connected boundary pixels of a mask.
Mask mask_contour(const Mask& m);

// Default contour matching tolerance in pixels.
int default_contour_tol(const ErpSize& size);

// Boundary F-score with dilation-tolerance matching; weighted when weights
// are given. tol < 0 selects the default.
double contour_accuracy(const Mask& gt, const Mask& tr,
                        const SphericalWeights* weights = nullptr, int tol = -1);

// One frame of ground truth or tracker output; absent pieces are skipped by
// the metrics that need them.
struct FrameAnnotation {
    std::optional<BBox> bbox;
    std::optional<RBBox> rbbox;
    std::optional<BFoV> bfov;
    std::optional<BFoV> rbfov;
    std::shared_ptr<const Mask> mask;

    bool empty() const { return !bbox && !rbbox && !bfov && !rbfov && !mask; }
};

// Raw per-frame measurements prior to threshold aggregation.
struct FrameMeasures {
    std::optional<double> iou_bbox;
    std::optional<double> iou_rbbox;
    std::optional<double> prec_px;
    std::optional<double> prec_norm;
    std::optional<double> angle_deg;
    std::optional<double> iou_sphere;
    std::optional<double> iou_sphere_r;
    std::optional<double> j, f, j_sphere, f_sphere;
};

struct EvalOptions {
    ErpSize raster{1920, 960};   // rasterization grid for spherical IoU
    int contour_tol = -1;        // -1: derived from the frame size
    AngleMode angle_mode = AngleMode::Geodesic;
};

FrameMeasures measure_frame(const FrameAnnotation& gt, const FrameAnnotation& tr,
                            const ErpSize& size, const SphericalWeights& weights,
                            const EvalOptions& opts);

// Threshold-curve summary of one sequence.
struct SequenceEval {
    int frames_scored = 0;
    std::map<std::string, double> metrics;
    std::map<std::string, std::vector<double>> curves;
};

// OPE aggregation: the first frame is the init frame and is excluded.
SequenceEval ope_aggregate(const std::vector<FrameMeasures>& frames, bool skip_first = true);

SequenceEval ope_evaluate(const std::vector<FrameAnnotation>& gt,
                          const std::vector<FrameAnnotation>& tr, const ErpSize& size,
                          const EvalOptions& opts = {});

// Sequence attributes computed from annotations alone.
struct AttributeFlags {
    bool arc = false, sv = false, fm = false, lr = false, hr = false;
    bool cb = false, fms = false, lfov = false, lv = false, hl = false;

    static const std::vector<std::string>& names();
    bool get(const std::string& name) const;
    void set(const std::string& name, bool v);
};

AttributeFlags compute_attributes(const std::vector<FrameAnnotation>& gt, const ErpSize& size);

// Cross-sequence report: unweighted mean over sequences, with per-attribute
// breakdowns over the flagged subsets.
struct EvalReport {
    std::string tracker;
    ErpSize raster{1920, 960};
    std::vector<std::string> sequence_names;
    std::vector<SequenceEval> per_sequence;
    std::vector<AttributeFlags> attributes;
    std::map<std::string, double> aggregate;
    std::map<std::string, std::vector<double>> aggregate_curves;
    std::map<std::string, std::map<std::string, double>> attribute_breakdown;
};

EvalReport aggregate_report(const std::vector<std::string>& names,
                            const std::vector<SequenceEval>& evals,
                            const std::vector<AttributeFlags>& attrs,
                            const std::string& tracker, const ErpSize& raster);

// Threshold grids used by the curves (shared with report serialization).
std::vector<double> success_thresholds();        // 0:0.01:1, 101 samples
std::vector<double> precision_thresholds();      // 0:1:50 px
std::vector<double> norm_precision_thresholds(); // 0:0.01:0.5
std::vector<double> angle_thresholds();          // 0:0.1:20 degrees

}  // namespace omnitrack
