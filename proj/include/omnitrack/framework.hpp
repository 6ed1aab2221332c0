#pragma once

// The 360 tracking loop: extract a search-region viewport per frame, run a
// pluggable local tracker on it, lift the prediction back onto the sphere,
// and update the next search region.

#include <functional>
#include <memory>
#include <optional>

#include "omnitrack/metrics.hpp"
#include "omnitrack/remap.hpp"

namespace omnitrack {

struct LocalPrediction {
    enum class Kind { Box, Mask };
    Kind kind = Kind::Box;
    RBBox box;
    Mask mask;
    double confidence = 0.0;
    bool lost = false;
};

// Contract for a local (perspective) tracker. init is called once with the
// first viewport and the target given as a box or a mask (exactly one is
// non-null); update is called once per subsequent frame.
class LocalTracker {
public:
    virtual ~LocalTracker() = default;
    virtual void init(const LocalImage& view, const RBBox* box, const Mask* mask) = 0;
    virtual LocalPrediction update(const LocalImage& view) = 0;
};

struct FrameResult {
    BBox bbox;
    RBBox rbbox;
    BFoV bfov;
    BFoV rbfov;
    std::shared_ptr<const Mask> mask;  // present on the mask path
    double confidence = 0.0;
};

struct SearchPolicy {
    double expand_factor = 2.0;
    double min_fov_deg = 30.0;
    int local_size = 512;
};

// Search region for the next frame: same center, extents scaled by
// expand_factor and clamped to [min_fov, full sphere], roll reset to zero.
BFoV next_search_region(const BFoV& prev, const SearchPolicy& policy);

struct InitTarget {
    std::optional<BFoV> bfov;
    std::shared_ptr<const Mask> mask;  // ERP-frame mask
};

// One-pass tracking over a frame stream. frame_at(k) must return frame k of
// an ERP sequence; all frames share one size. On a lost signal the previous
// result is re-emitted with confidence 0 and the search region is kept.
std::vector<FrameResult> track_sequence(const std::function<Image(int)>& frame_at,
                                        int frame_count, const InitTarget& init,
                                        LocalTracker& tracker, const SearchPolicy& policy,
                                        const ErpSize& size);

// Baseline tracker: grayscale template matching by normalized
// cross-correlation; reports lost when the best score drops under 0.2.
std::unique_ptr<LocalTracker> make_ncc_tracker();

// Test/diagnostic tracker that replays ground-truth ERP masks by sampling
// them into the current viewport. Perfect except for remap error.
std::unique_ptr<LocalTracker> make_oracle_tracker(
    std::function<std::shared_ptr<const Mask>(int)> gt_mask_at);

}  // namespace omnitrack
