#include "omnitrack/remap.hpp"

#include <opencv2/imgproc.hpp>

#include <algorithm>
#include <cmath>

namespace omnitrack {

int default_dilation_radius(int erp_width, int local_width) {
    return static_cast<int>(std::ceil(static_cast<double>(erp_width) / local_width));
}

namespace {

// Resolve an integer pixel index with horizontal wrap and polar reflection:
// rows past a pole continue on the opposite meridian.
inline void resolve_index(int& i, int& j, int w, int h) {
    if (j < 0) {
        j = -1 - j;
        i += w / 2;
    } else if (j >= h) {
        j = 2 * h - 1 - j;
        i += w / 2;
    }
    i %= w;
    if (i < 0) i += w;
}

}  // namespace

LocalImage extract_region(const Image& img, const BFoV& b, int out_w, int out_h) {
    ErpSize size(img.width, img.height);
    LocalImage out;
    out.grid = ebfov_grid(b, out_w, out_h, size);
    out.image = Image(out_w, out_h, img.channels);

    const int w = img.width, h = img.height, ch = img.channels;
    for (int j = 0; j < out_h; ++j) {
        for (int i = 0; i < out_w; ++i) {
            double fu = out.grid.u_at(i, j) - 0.5;
            double fv = out.grid.v_at(i, j) - 0.5;
            int i0 = static_cast<int>(std::floor(fu));
            int j0 = static_cast<int>(std::floor(fv));
            double ax = fu - i0, ay = fv - j0;
            for (int c = 0; c < ch; ++c) {
                double acc = 0;
                for (int dj = 0; dj < 2; ++dj) {
                    for (int di = 0; di < 2; ++di) {
                        int si = i0 + di, sj = j0 + dj;
                        resolve_index(si, sj, w, h);
                        double wgt = (di ? ax : 1 - ax) * (dj ? ay : 1 - ay);
                        acc += wgt * img.at(si, sj, c);
                    }
                }
                out.image.at(i, j, c) = static_cast<std::uint8_t>(std::lround(acc));
            }
        }
    }
    return out;
}

Mask extract_mask(const Mask& m, const SamplingGrid& grid) {
    Mask out(grid.cols, grid.rows);
    for (int j = 0; j < grid.rows; ++j) {
        for (int i = 0; i < grid.cols; ++i) {
            int si = static_cast<int>(std::floor(grid.u_at(i, j)));
            int sj = static_cast<int>(std::floor(grid.v_at(i, j)));
            resolve_index(si, sj, m.width, m.height);
            if (m.get(si, sj)) out.set(i, j);
        }
    }
    return out;
}

Mask lift_mask(const Mask& local, const SamplingGrid& grid, const ErpSize& size,
               int dilation_radius) {
    if (local.width != grid.cols || local.height != grid.rows)
        throw std::invalid_argument("lift_mask: local mask does not match grid dimensions");
    if (dilation_radius < 0) dilation_radius = default_dilation_radius(size.width, grid.cols);

    Mask scattered(size.width, size.height);
    for (int j = 0; j < local.height; ++j) {
        for (int i = 0; i < local.width; ++i) {
            if (!local.get(i, j)) continue;
            int ei = static_cast<int>(std::floor(grid.u_at(i, j)));
            int ej = static_cast<int>(std::floor(grid.v_at(i, j)));
            resolve_index(ei, ej, size.width, size.height);
            scattered.set(ei, ej);
        }
    }
    if (dilation_radius == 0) return scattered;

    // Morphological closing with horizontal wrap: pad left/right columns
    // from the opposite side, close, crop.
    int r = dilation_radius;
    cv::Mat m(size.height, size.width, CV_8U, scattered.data.data());
    cv::Mat padded;
    cv::copyMakeBorder(m, padded, r, r, 0, 0, cv::BORDER_CONSTANT, 0);
    cv::Mat wrapped(padded.rows, padded.cols + 2 * r, CV_8U);
    padded.copyTo(wrapped(cv::Rect(r, 0, padded.cols, padded.rows)));
    padded.colRange(padded.cols - r, padded.cols).copyTo(wrapped(cv::Rect(0, 0, r, padded.rows)));
    padded.colRange(0, r).copyTo(wrapped(cv::Rect(r + padded.cols, 0, r, padded.rows)));

    cv::Mat kernel = cv::getStructuringElement(cv::MORPH_ELLIPSE, cv::Size(2 * r + 1, 2 * r + 1));
    cv::morphologyEx(wrapped, wrapped, cv::MORPH_CLOSE, kernel);

    Mask out(size.width, size.height);
    cv::Mat roi = wrapped(cv::Rect(r, r, size.width, size.height));
    for (int j = 0; j < size.height; ++j) {
        const std::uint8_t* row = roi.ptr<std::uint8_t>(j);
        for (int i = 0; i < size.width; ++i)
            if (row[i]) out.set(i, j);
    }
    return out;
}

std::vector<PixelCoord> lift_box_points(const RBBox& local_box, const SamplingGrid& grid,
                                        int samples) {
    double cg = std::cos(local_box.gamma), sg = std::sin(local_box.gamma);
    bool any_inside = false;
    std::vector<PixelCoord> pts;
    pts.reserve(static_cast<std::size_t>(samples) * samples);
    for (int j = 0; j < samples; ++j) {
        double sy = samples > 1 ? -1.0 + 2.0 * j / (samples - 1) : 0.0;
        for (int i = 0; i < samples; ++i) {
            double sx = samples > 1 ? -1.0 + 2.0 * i / (samples - 1) : 0.0;
            double dx = sx * local_box.w / 2, dy = sy * local_box.h / 2;
            double lx = local_box.cx + dx * cg - dy * sg;
            double ly = local_box.cy + dx * sg + dy * cg;
            if (lx >= 0 && lx <= grid.cols && ly >= 0 && ly <= grid.rows) any_inside = true;
            lx = std::clamp(lx, 0.0, static_cast<double>(grid.cols));
            ly = std::clamp(ly, 0.0, static_cast<double>(grid.rows));
            pts.push_back(local_point_to_erp(grid.bfov, grid.cols, grid.rows, lx, ly, grid.erp));
        }
    }
    if (!any_inside) throw std::invalid_argument("lift_box: box fully outside local image");
    return pts;
}

std::variant<BBox, RBBox, BFoV> lift_box(const RBBox& local_box, const SamplingGrid& grid,
                                         const ErpSize& size, RepKind target) {
    auto pts = lift_box_points(local_box, grid);
    switch (target) {
        case RepKind::BBox:
            return points_to_bbox(pts, size);
        case RepKind::RBBox:
            return points_to_rbbox(pts, size);
        case RepKind::BFoV:
            return points_to_bfov(pts, size, false);
        case RepKind::RBFoV:
            return points_to_bfov(pts, size, true);
    }
    throw std::logic_error("lift_box: bad representation kind");
}

}  // namespace omnitrack
