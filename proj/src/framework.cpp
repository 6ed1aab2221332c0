#include "omnitrack/framework.hpp"

#include <opencv2/imgproc.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace omnitrack {

BFoV next_search_region(const BFoV& prev, const SearchPolicy& policy) {
    double min_fov = deg2rad(policy.min_fov_deg);
    double theta = std::clamp(policy.expand_factor * prev.theta, min_fov, 2 * kPi);
    double phi = std::clamp(policy.expand_factor * prev.phi, min_fov, kPi);
    return BFoV(prev.clon, prev.clat, theta, phi, 0.0);
}

namespace {

// Plain (non-wrapping) axis-aligned box of a local-image mask.
RBBox local_mask_box(const Mask& m) {
    int imin = m.width, imax = -1, jmin = m.height, jmax = -1;
    for (int j = 0; j < m.height; ++j)
        for (int i = 0; i < m.width; ++i)
            if (m.get(i, j)) {
                imin = std::min(imin, i);
                imax = std::max(imax, i);
                jmin = std::min(jmin, j);
                jmax = std::max(jmax, j);
            }
    if (imax < 0) throw std::invalid_argument("local_mask_box: empty mask");
    return RBBox((imin + imax + 1) / 2.0, (jmin + jmax + 1) / 2.0, imax - imin + 1,
                 jmax - jmin + 1, 0.0);
}

FrameResult result_from_mask(const Mask& erp_mask, const ErpSize& size, double confidence) {
    FrameResult r;
    r.bbox = mask_to_bbox(erp_mask);
    r.rbbox = mask_to_rbbox(erp_mask);
    r.bfov = mask_to_bfov(erp_mask, size, false);
    r.rbfov = mask_to_bfov(erp_mask, size, true);
    r.mask = std::make_shared<Mask>(erp_mask);
    r.confidence = confidence;
    return r;
}

FrameResult result_from_points(const std::vector<PixelCoord>& pts, const ErpSize& size,
                               double confidence) {
    FrameResult r;
    r.bbox = points_to_bbox(pts, size);
    r.rbbox = points_to_rbbox(pts, size);
    r.bfov = points_to_bfov(pts, size, false);
    r.rbfov = points_to_bfov(pts, size, true);
    r.confidence = confidence;
    return r;
}

}  // namespace

std::vector<FrameResult> track_sequence(const std::function<Image(int)>& frame_at,
                                        int frame_count, const InitTarget& init,
                                        LocalTracker& tracker, const SearchPolicy& policy,
                                        const ErpSize& size) {
    if (frame_count < 1) throw std::invalid_argument("track_sequence: no frames");
    if (!init.bfov && !init.mask)
        throw std::invalid_argument("track_sequence: init requires a BFoV or a mask");
    if (init.mask && !init.mask->any())
        throw std::invalid_argument("track_sequence: init mask is empty");

    BFoV target_bfov = init.mask ? mask_to_bfov(*init.mask, size, false) : *init.bfov;
    BFoV search = next_search_region(target_bfov, policy);

    std::vector<FrameResult> results;
    results.reserve(frame_count);

    // Frame 0: map the init target into the first viewport and hand it to
    // the local tracker.
    {
        Image frame = frame_at(0);
        LocalImage view = extract_region(frame, search, policy.local_size, policy.local_size);
        Mask erp_mask = init.mask ? *init.mask : rasterize_bfov(*init.bfov, size);
        Mask local_mask = extract_mask(erp_mask, view.grid);
        if (!local_mask.any())
            throw std::invalid_argument("track_sequence: init target missing from viewport");
        if (init.mask) {
            tracker.init(view, nullptr, &local_mask);
        } else {
            RBBox box = local_mask_box(local_mask);
            tracker.init(view, &box, nullptr);
        }
        results.push_back(result_from_mask(erp_mask, size, 1.0));
        if (!init.mask) results.back().mask.reset();  // no gt mask on the BFoV path
    }

    for (int k = 1; k < frame_count; ++k) {
        Image frame = frame_at(k);
        LocalImage view = extract_region(frame, search, policy.local_size, policy.local_size);
        LocalPrediction pred = tracker.update(view);

        bool lost = pred.lost;
        FrameResult result;
        if (!lost) {
            try {
                if (pred.kind == LocalPrediction::Kind::Mask) {
                    Mask erp_mask = lift_mask(pred.mask, view.grid, size);
                    if (!erp_mask.any()) throw std::domain_error("lifted mask empty");
                    result = result_from_mask(erp_mask, size, pred.confidence);
                } else {
                    auto pts = lift_box_points(pred.box, view.grid);
                    result = result_from_points(pts, size, pred.confidence);
                }
            } catch (const std::exception&) {
                lost = true;  // degenerate lift counts as a lost frame
            }
        }
        if (lost) {
            result = results.back();
            result.confidence = 0.0;
            results.push_back(std::move(result));
            continue;  // keep the previous search region
        }
        results.push_back(result);
        search = next_search_region(result.bfov, policy);
    }
    return results;
}

namespace {

cv::Mat to_gray(const Image& img) {
    cv::Mat m(img.height, img.width, img.channels == 1 ? CV_8U : CV_8UC3,
              const_cast<std::uint8_t*>(img.data.data()));
    if (img.channels == 1) return m.clone();
    cv::Mat gray;
    cv::cvtColor(m, gray, cv::COLOR_BGR2GRAY);
    return gray;
}

class NccTracker : public LocalTracker {
public:
    void init(const LocalImage& view, const RBBox* box, const Mask* mask) override {
        RBBox b;
        if (box) {
            b = *box;
        } else if (mask) {
            b = local_mask_box(*mask);
        } else {
            throw std::invalid_argument("NccTracker: init needs a box or mask target");
        }
        cv::Mat gray = to_gray(view.image);
        int x0 = std::clamp(static_cast<int>(std::lround(b.cx - b.w / 2)), 0, gray.cols - 1);
        int y0 = std::clamp(static_cast<int>(std::lround(b.cy - b.h / 2)), 0, gray.rows - 1);
        int w = std::clamp(static_cast<int>(std::lround(b.w)), 1, gray.cols - x0);
        int h = std::clamp(static_cast<int>(std::lround(b.h)), 1, gray.rows - y0);
        if (w > gray.cols || h > gray.rows)
            throw std::invalid_argument("NccTracker: template larger than local image");
        template_ = gray(cv::Rect(x0, y0, w, h)).clone();
    }

    LocalPrediction update(const LocalImage& view) override {
        if (template_.empty()) throw std::logic_error("NccTracker: update before init");
        cv::Mat gray = to_gray(view.image);
        if (template_.cols > gray.cols || template_.rows > gray.rows)
            throw std::invalid_argument("NccTracker: template larger than local image");

        LocalPrediction pred;
        pred.kind = LocalPrediction::Kind::Box;

        cv::Scalar mean, stddev;
        cv::meanStdDev(gray, mean, stddev);
        cv::Scalar tmean, tstd;
        cv::meanStdDev(template_, tmean, tstd);
        if (stddev[0] < 1e-6 || tstd[0] < 1e-6) {
            pred.lost = true;  // zero-variance NCC is undefined
            pred.confidence = 0.0;
            return pred;
        }

        cv::Mat score;
        cv::matchTemplate(gray, template_, score, cv::TM_CCOEFF_NORMED);
        double min_v, max_v;
        cv::Point min_p, max_p;
        cv::minMaxLoc(score, &min_v, &max_v, &min_p, &max_p);
        if (!std::isfinite(max_v)) max_v = 0.0;

        pred.confidence = std::clamp(max_v, 0.0, 1.0);
        pred.lost = pred.confidence < 0.2;
        pred.box = RBBox(max_p.x + template_.cols / 2.0, max_p.y + template_.rows / 2.0,
                         template_.cols, template_.rows, 0.0);
        return pred;
    }

private:
    cv::Mat template_;
};

class OracleTracker : public LocalTracker {
public:
    explicit OracleTracker(std::function<std::shared_ptr<const Mask>(int)> gt_mask_at)
        : gt_mask_at_(std::move(gt_mask_at)) {}

    void init(const LocalImage&, const RBBox*, const Mask*) override { next_frame_ = 1; }

    LocalPrediction update(const LocalImage& view) override {
        int k = next_frame_++;
        LocalPrediction pred;
        pred.kind = LocalPrediction::Kind::Mask;
        auto gt = gt_mask_at_(k);
        if (!gt || !gt->any()) {
            pred.lost = true;
            return pred;
        }
        pred.mask = extract_mask(*gt, view.grid);
        pred.confidence = 1.0;
        pred.lost = !pred.mask.any();
        return pred;
    }

private:
    std::function<std::shared_ptr<const Mask>(int)> gt_mask_at_;
    int next_frame_ = 1;
};

}  // namespace

std::unique_ptr<LocalTracker> make_ncc_tracker() { return std::make_unique<NccTracker>(); }

std::unique_ptr<LocalTracker> make_oracle_tracker(
    std::function<std::shared_ptr<const Mask>(int)> gt_mask_at) {
    return std::make_unique<OracleTracker>(std::move(gt_mask_at));
}

}  // namespace omnitrack
