#include "omnitrack/metrics.hpp"

#include <opencv2/imgproc.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace omnitrack {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

SphericalWeights spherical_weights(const ErpSize& size) {
    SphericalWeights w;
    w.size = size;
    w.row.resize(size.height);
    double dtheta = kPi / size.height;
    double dphi = 2 * kPi / size.width;
    for (int j = 0; j < size.height; ++j) {
        double colat = kPi * (j + 0.5) / size.height;
        w.row[j] = dphi * (std::cos(colat - dtheta / 2) - std::cos(colat + dtheta / 2));
    }
    return w;
}

namespace {

struct Pt {
    double x, y;
};

std::vector<Pt> rect_corners(const RBBox& b) {
    double cg = std::cos(b.gamma), sg = std::sin(b.gamma);
    double hw = b.w / 2, hh = b.h / 2;
    std::vector<Pt> c(4);
    const double sx[4] = {-1, 1, 1, -1};
    const double sy[4] = {-1, -1, 1, 1};
    for (int k = 0; k < 4; ++k) {
        c[k] = {b.cx + sx[k] * hw * cg - sy[k] * hh * sg,
                b.cy + sx[k] * hw * sg + sy[k] * hh * cg};
    }
    return c;
}

// Sutherland-Hodgman clip of polygon `poly` by the half-plane left of the
// directed edge a->b (for a counterclockwise clip polygon in image coords).
std::vector<Pt> clip_halfplane(const std::vector<Pt>& poly, const Pt& a, const Pt& b) {
    auto side = [&](const Pt& p) {
        return (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
    };
    std::vector<Pt> out;
    std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Pt& p = poly[i];
        const Pt& q = poly[(i + 1) % n];
        double sp = side(p), sq = side(q);
        if (sp >= 0) out.push_back(p);
        if ((sp > 0 && sq < 0) || (sp < 0 && sq > 0)) {
            double t = sp / (sp - sq);
            out.push_back({p.x + t * (q.x - p.x), p.y + t * (q.y - p.y)});
        }
    }
    return out;
}

double polygon_area(const std::vector<Pt>& poly) {
    double a = 0;
    std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Pt& p = poly[i];
        const Pt& q = poly[(i + 1) % n];
        a += p.x * q.y - q.x * p.y;
    }
    return std::abs(a) / 2;
}

}  // namespace

double iou_planar(const RBBox& a, const RBBox& b) {
    double area_a = a.w * a.h, area_b = b.w * b.h;
    if (area_a <= 0 || area_b <= 0) return 0.0;
    std::vector<Pt> poly = rect_corners(a);
    std::vector<Pt> clip = rect_corners(b);
    for (int e = 0; e < 4 && !poly.empty(); ++e)
        poly = clip_halfplane(poly, clip[e], clip[(e + 1) % 4]);
    double inter = poly.size() >= 3 ? polygon_area(poly) : 0.0;
    double uni = area_a + area_b - inter;
    return uni > 0 ? inter / uni : 0.0;
}

double dual_success(const RBBox& gt, const RBBox& tr, const ErpSize& size) {
    double best = 0;
    for (int s = -1; s <= 1; ++s) {
        RBBox g = gt;
        g.cx += s * size.width;
        best = std::max(best, iou_planar(g, tr));
    }
    return best;
}

double dual_precision(const PixelCoord& gt_center, const PixelCoord& tr_center,
                      const ErpSize& size, const RBBox* gt_box, bool normalized) {
    if (normalized && !gt_box)
        throw std::invalid_argument("dual_precision: normalized mode requires the gt box");
    double best = kInf;
    for (int s = -1; s <= 1; ++s) {
        double dx = gt_center.u + s * size.width - tr_center.u;
        double dy = gt_center.v - tr_center.v;
        if (normalized) {
            dx /= gt_box->w;
            dy /= gt_box->h;
        }
        best = std::min(best, std::hypot(dx, dy));
    }
    return best;
}

double angle_precision(const LonLat& gt, const LonLat& tr, AngleMode mode) {
    if (mode == AngleMode::Geodesic) return rad2deg(geodesic_angle(gt, tr));
    double dlon = wrap_lon(gt.lon - tr.lon);
    double dlat = gt.lat - tr.lat;
    return rad2deg(std::hypot(dlon, dlat));
}

double sphere_iou(const BFoV& a, const BFoV& b, const ErpSize& raster) {
    Mat3 ainv = bfov_rotation(a.clon, a.clat, a.gamma).transpose();
    Mat3 binv = bfov_rotation(b.clon, b.clat, b.gamma).transpose();
    SphericalWeights w = spherical_weights(raster);

    std::vector<double> slon(raster.width), clon(raster.width);
    for (int i = 0; i < raster.width; ++i) {
        double lon = ((i + 0.5) / raster.width - 0.5) * 2 * kPi;
        slon[i] = std::sin(lon);
        clon[i] = std::cos(lon);
    }
    double inter = 0, uni = 0;
    for (int j = 0; j < raster.height; ++j) {
        double lat = (0.5 - (j + 0.5) / raster.height) * kPi;
        double cl = std::cos(lat), sl = std::sin(lat);
        double wj = w.row[j];
        for (int i = 0; i < raster.width; ++i) {
            Vec3 d{cl * slon[i], -sl, cl * clon[i]};
            bool ia = bfov_contains(a, ainv, d);
            bool ib = bfov_contains(b, binv, d);
            if (ia && ib) inter += wj;
            if (ia || ib) uni += wj;
        }
    }
    return uni > 0 ? inter / uni : 0.0;
}

double region_similarity(const Mask& gt, const Mask& tr, const SphericalWeights* weights) {
    if (gt.width != tr.width || gt.height != tr.height)
        throw std::invalid_argument("region_similarity: dimension mismatch");
    bool ge = !gt.any(), te = !tr.any();
    if (ge && te) return 1.0;
    if (ge || te) return 0.0;
    double inter = 0, uni = 0;
    for (int j = 0; j < gt.height; ++j) {
        double wj = weights ? weights->row[j] : 1.0;
        for (int i = 0; i < gt.width; ++i) {
            bool g = gt.get(i, j), t = tr.get(i, j);
            if (g && t) inter += wj;
            if (g || t) uni += wj;
        }
    }
    return uni > 0 ? inter / uni : 0.0;
}

Mask mask_contour(const Mask& m) {
    Mask c(m.width, m.height);
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
            if (border) c.set(i, j);
        }
    }
    return c;
}

int default_contour_tol(const ErpSize& size) {
    return static_cast<int>(
        std::ceil(0.008 * std::hypot(static_cast<double>(size.width), size.height)));
}

namespace {

// Disc dilation with horizontal wrap.
Mask dilate_wrap(const Mask& m, int r) {
    if (r <= 0) return m;
    cv::Mat src(m.height, m.width, CV_8U, const_cast<std::uint8_t*>(m.data.data()));
    cv::Mat padded;
    cv::copyMakeBorder(src, padded, r, r, 0, 0, cv::BORDER_CONSTANT, 0);
    cv::Mat wrapped(padded.rows, padded.cols + 2 * r, CV_8U);
    padded.copyTo(wrapped(cv::Rect(r, 0, padded.cols, padded.rows)));
    padded.colRange(padded.cols - r, padded.cols).copyTo(wrapped(cv::Rect(0, 0, r, padded.rows)));
    padded.colRange(0, r).copyTo(wrapped(cv::Rect(r + padded.cols, 0, r, padded.rows)));
    cv::Mat kernel = cv::getStructuringElement(cv::MORPH_ELLIPSE, cv::Size(2 * r + 1, 2 * r + 1));
    cv::dilate(wrapped, wrapped, kernel);
    Mask out(m.width, m.height);
    cv::Mat roi = wrapped(cv::Rect(r, r, m.width, m.height));
    for (int j = 0; j < m.height; ++j) {
        const std::uint8_t* row = roi.ptr<std::uint8_t>(j);
        for (int i = 0; i < m.width; ++i)
            if (row[i]) out.set(i, j);
    }
    return out;
}

// Weighted fraction of `contour` pixels that fall inside `matched_zone`.
double matched_fraction(const Mask& contour, const Mask& matched_zone,
                        const SphericalWeights* weights) {
    double num = 0, den = 0;
    for (int j = 0; j < contour.height; ++j) {
        double wj = weights ? weights->row[j] : 1.0;
        for (int i = 0; i < contour.width; ++i) {
            if (!contour.get(i, j)) continue;
            den += wj;
            if (matched_zone.get(i, j)) num += wj;
        }
    }
    return den > 0 ? num / den : 0.0;
}

}  // namespace

double contour_accuracy(const Mask& gt, const Mask& tr, const SphericalWeights* weights,
                        int tol) {
    if (gt.width != tr.width || gt.height != tr.height)
        throw std::invalid_argument("contour_accuracy: dimension mismatch");
    if (tol < 0) tol = default_contour_tol(ErpSize(gt.width, gt.height));
    Mask cg = mask_contour(gt);
    Mask ct = mask_contour(tr);
    bool ge = !cg.any(), te = !ct.any();
    if (ge && te) return 1.0;
    if (ge || te) return 0.0;
    Mask dg = dilate_wrap(cg, tol);
    Mask dt = dilate_wrap(ct, tol);
    double precision = matched_fraction(ct, dg, weights);
    double recall = matched_fraction(cg, dt, weights);
    if (precision + recall <= 0) return 0.0;
    return 2 * precision * recall / (precision + recall);
}

FrameMeasures measure_frame(const FrameAnnotation& gt, const FrameAnnotation& tr,
                            const ErpSize& size, const SphericalWeights& weights,
                            const EvalOptions& opts) {
    FrameMeasures out;
    // A missing prediction against available gt scores as a definite miss:
    // -1 fails every IoU threshold, +inf every distance threshold.
    if (gt.bbox) {
        if (tr.bbox) {
            out.iou_bbox = dual_success(as_rbbox(*gt.bbox), as_rbbox(*tr.bbox), size);
            RBBox gb = as_rbbox(*gt.bbox);
            out.prec_px = dual_precision({gt.bbox->cx, gt.bbox->cy}, {tr.bbox->cx, tr.bbox->cy},
                                         size, nullptr, false);
            out.prec_norm = dual_precision({gt.bbox->cx, gt.bbox->cy}, {tr.bbox->cx, tr.bbox->cy},
                                           size, &gb, true);
        } else {
            out.iou_bbox = -1.0;
            out.prec_px = kInf;
            out.prec_norm = kInf;
        }
    }
    if (gt.rbbox) {
        out.iou_rbbox = tr.rbbox ? dual_success(*gt.rbbox, *tr.rbbox, size) : -1.0;
    }
    if (gt.bfov) {
        if (tr.bfov) {
            out.angle_deg = angle_precision(LonLat(gt.bfov->clon, gt.bfov->clat),
                                            LonLat(tr.bfov->clon, tr.bfov->clat),
                                            opts.angle_mode);
            out.iou_sphere = sphere_iou(*gt.bfov, *tr.bfov, opts.raster);
        } else {
            out.angle_deg = kInf;
            out.iou_sphere = -1.0;
        }
    }
    if (gt.rbfov) {
        out.iou_sphere_r = tr.rbfov ? sphere_iou(*gt.rbfov, *tr.rbfov, opts.raster) : -1.0;
    }
    if (gt.mask) {
        if (tr.mask) {
            out.j = region_similarity(*gt.mask, *tr.mask);
            out.f = contour_accuracy(*gt.mask, *tr.mask, nullptr, opts.contour_tol);
            out.j_sphere = region_similarity(*gt.mask, *tr.mask, &weights);
            out.f_sphere = contour_accuracy(*gt.mask, *tr.mask, &weights, opts.contour_tol);
        } else {
            out.j = out.f = out.j_sphere = out.f_sphere = 0.0;
        }
    }
    return out;
}

std::vector<double> success_thresholds() {
    std::vector<double> t(101);
    for (int i = 0; i <= 100; ++i) t[i] = i / 100.0;
    return t;
}
std::vector<double> precision_thresholds() {
    std::vector<double> t(51);
    for (int i = 0; i <= 50; ++i) t[i] = i;
    return t;
}
std::vector<double> norm_precision_thresholds() {
    std::vector<double> t(51);
    for (int i = 0; i <= 50; ++i) t[i] = i / 100.0;
    return t;
}
std::vector<double> angle_thresholds() {
    std::vector<double> t(201);
    for (int i = 0; i <= 200; ++i) t[i] = i / 10.0;
    return t;
}

namespace {

std::vector<double> rate_curve_geq(const std::vector<double>& values,
                                   const std::vector<double>& thresholds) {
    std::vector<double> rates(thresholds.size(), 0.0);
    if (values.empty()) return rates;
    for (std::size_t k = 0; k < thresholds.size(); ++k) {
        int n = 0;
        for (double v : values)
            if (v >= thresholds[k]) ++n;
        rates[k] = static_cast<double>(n) / values.size();
    }
    return rates;
}

std::vector<double> rate_curve_leq(const std::vector<double>& values,
                                   const std::vector<double>& thresholds) {
    std::vector<double> rates(thresholds.size(), 0.0);
    if (values.empty()) return rates;
    for (std::size_t k = 0; k < thresholds.size(); ++k) {
        int n = 0;
        for (double v : values)
            if (v <= thresholds[k]) ++n;
        rates[k] = static_cast<double>(n) / values.size();
    }
    return rates;
}

double mean(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    double s = 0;
    for (double x : v) s += x;
    return s / v.size();
}

std::vector<double> collect(const std::vector<FrameMeasures>& frames, std::size_t first,
                            std::optional<double> FrameMeasures::*field) {
    std::vector<double> v;
    for (std::size_t k = first; k < frames.size(); ++k)
        if (frames[k].*field) v.push_back(*(frames[k].*field));
    return v;
}

}  // namespace

SequenceEval ope_aggregate(const std::vector<FrameMeasures>& frames, bool skip_first) {
    SequenceEval e;
    std::size_t first = skip_first ? 1 : 0;
    if (frames.size() <= first) return e;
    e.frames_scored = static_cast<int>(frames.size() - first);

    auto success_block = [&](std::optional<double> FrameMeasures::*field,
                             const std::string& curve_name, const std::string& auc_name) {
        auto vals = collect(frames, first, field);
        if (vals.empty()) return;
        auto curve = rate_curve_geq(vals, success_thresholds());
        e.metrics[auc_name] = mean(curve);
        e.curves[curve_name] = std::move(curve);
    };
    success_block(&FrameMeasures::iou_bbox, "success", "s_dual_auc");
    success_block(&FrameMeasures::iou_rbbox, "success_rbbox", "s_dual_auc_rbbox");
    success_block(&FrameMeasures::iou_sphere, "success_sphere", "s_sphere_auc");
    success_block(&FrameMeasures::iou_sphere_r, "success_sphere_rbfov", "s_sphere_auc_rbfov");

    if (auto vals = collect(frames, first, &FrameMeasures::prec_px); !vals.empty()) {
        auto curve = rate_curve_leq(vals, precision_thresholds());
        e.metrics["p_dual_at20"] = curve[20];
        e.curves["precision"] = std::move(curve);
    }
    if (auto vals = collect(frames, first, &FrameMeasures::prec_norm); !vals.empty()) {
        auto curve = rate_curve_leq(vals, norm_precision_thresholds());
        e.metrics["p_norm_auc"] = mean(curve);
        e.curves["norm_precision"] = std::move(curve);
    }
    if (auto vals = collect(frames, first, &FrameMeasures::angle_deg); !vals.empty()) {
        auto curve = rate_curve_leq(vals, angle_thresholds());
        e.metrics["p_angle_at3"] = curve[30];
        e.curves["angle"] = std::move(curve);
    }

    auto mean_metric = [&](std::optional<double> FrameMeasures::*field, const std::string& name) {
        auto vals = collect(frames, first, field);
        if (!vals.empty()) e.metrics[name] = mean(vals);
    };
    mean_metric(&FrameMeasures::j, "j");
    mean_metric(&FrameMeasures::f, "f");
    mean_metric(&FrameMeasures::j_sphere, "j_sphere");
    mean_metric(&FrameMeasures::f_sphere, "f_sphere");
    return e;
}

SequenceEval ope_evaluate(const std::vector<FrameAnnotation>& gt,
                          const std::vector<FrameAnnotation>& tr, const ErpSize& size,
                          const EvalOptions& opts) {
    if (gt.size() != tr.size())
        throw std::invalid_argument("ope_evaluate: stream length mismatch");
    SphericalWeights w = spherical_weights(size);
    std::vector<FrameMeasures> frames;
    frames.reserve(gt.size());
    for (std::size_t k = 0; k < gt.size(); ++k)
        frames.push_back(measure_frame(gt[k], tr[k], size, w, opts));
    return ope_aggregate(frames, true);
}

const std::vector<std::string>& AttributeFlags::names() {
    static const std::vector<std::string> n = {"ARC", "SV",  "FM",   "LR", "HR",
                                               "CB",  "FMS", "LFoV", "LV", "HL"};
    return n;
}

bool AttributeFlags::get(const std::string& name) const {
    if (name == "ARC") return arc;
    if (name == "SV") return sv;
    if (name == "FM") return fm;
    if (name == "LR") return lr;
    if (name == "HR") return hr;
    if (name == "CB") return cb;
    if (name == "FMS") return fms;
    if (name == "LFoV") return lfov;
    if (name == "LV") return lv;
    if (name == "HL") return hl;
    throw std::invalid_argument("AttributeFlags: unknown attribute " + name);
}

void AttributeFlags::set(const std::string& name, bool v) {
    if (name == "ARC") arc = v;
    else if (name == "SV") sv = v;
    else if (name == "FM") fm = v;
    else if (name == "LR") lr = v;
    else if (name == "HR") hr = v;
    else if (name == "CB") cb = v;
    else if (name == "FMS") fms = v;
    else if (name == "LFoV") lfov = v;
    else if (name == "LV") lv = v;
    else if (name == "HL") hl = v;
    else throw std::invalid_argument("AttributeFlags: unknown attribute " + name);
}

AttributeFlags compute_attributes(const std::vector<FrameAnnotation>& gt, const ErpSize& size) {
    if (gt.empty()) throw std::invalid_argument("compute_attributes: empty stream");
    AttributeFlags a;

    const FrameAnnotation* first_with_bbox = nullptr;
    for (const auto& f : gt)
        if (f.bbox) {
            first_with_bbox = &f;
            break;
        }

    double min_clat = kInf, max_clat = -kInf;
    const FrameAnnotation* prev = nullptr;
    for (const auto& f : gt) {
        if (f.bbox && first_with_bbox) {
            double aspect0 = first_with_bbox->bbox->w / first_with_bbox->bbox->h;
            double aspect = f.bbox->w / f.bbox->h;
            double r_aspect = aspect0 / aspect;
            if (r_aspect < 0.5 || r_aspect > 2.0) a.arc = true;
            double r_area = (first_with_bbox->bbox->w * first_with_bbox->bbox->h) /
                            (f.bbox->w * f.bbox->h);
            if (r_area < 0.5 || r_area > 2.0) a.sv = true;
        }
        if (f.mask) {
            std::size_t area = f.mask->count();
            if (area > 0 && area < 1000) a.lr = true;
            if (area > 500ull * 500ull) a.hr = true;
            // Border bands: any occupancy in the two outermost columns on
            // each side means the target straddles the seam.
            bool left = false, right = false;
            int w = f.mask->width;
            for (int j = 0; j < f.mask->height && !(left && right); ++j) {
                left = left || f.mask->get(0, j) || f.mask->get(1, j);
                right = right || f.mask->get(w - 1, j) || f.mask->get(w - 2, j);
            }
            if (left && right) a.cb = true;
        }
        if (f.bfov) {
            if (f.bfov->theta > deg2rad(90) || f.bfov->phi > deg2rad(90)) a.lfov = true;
            min_clat = std::min(min_clat, f.bfov->clat);
            max_clat = std::max(max_clat, f.bfov->clat);
            if (std::abs(f.bfov->clat) > deg2rad(60)) a.hl = true;
        }
        if (prev) {
            if (prev->bbox && f.bbox) {
                double motion = dual_precision({prev->bbox->cx, prev->bbox->cy},
                                               {f.bbox->cx, f.bbox->cy}, size);
                if (motion > std::sqrt(prev->bbox->w * prev->bbox->h)) a.fm = true;
            }
            if (prev->bfov && f.bfov) {
                double motion = geodesic_angle(LonLat(prev->bfov->clon, prev->bfov->clat),
                                               LonLat(f.bfov->clon, f.bfov->clat));
                if (motion > std::max(prev->bfov->theta, prev->bfov->phi)) a.fms = true;
            }
        }
        prev = &f;
    }
    if (max_clat - min_clat > deg2rad(50)) a.lv = true;
    return a;
}

EvalReport aggregate_report(const std::vector<std::string>& names,
                            const std::vector<SequenceEval>& evals,
                            const std::vector<AttributeFlags>& attrs,
                            const std::string& tracker, const ErpSize& raster) {
    if (names.size() != evals.size() || names.size() != attrs.size())
        throw std::invalid_argument("aggregate_report: input size mismatch");
    EvalReport r;
    r.tracker = tracker;
    r.raster = raster;
    r.sequence_names = names;
    r.per_sequence = evals;
    r.attributes = attrs;

    auto mean_over = [&](const std::vector<std::size_t>& idx) {
        std::map<std::string, double> agg;
        std::map<std::string, int> counts;
        for (std::size_t i : idx)
            for (const auto& [k, v] : evals[i].metrics) {
                agg[k] += v;
                counts[k] += 1;
            }
        for (auto& [k, v] : agg) v /= counts[k];
        return agg;
    };

    std::vector<std::size_t> all(evals.size());
    for (std::size_t i = 0; i < evals.size(); ++i) all[i] = i;
    r.aggregate = mean_over(all);

    // Mean curves across sequences that have them.
    std::map<std::string, std::pair<std::vector<double>, int>> curve_acc;
    for (const auto& e : evals)
        for (const auto& [k, c] : e.curves) {
            auto& [sum, n] = curve_acc[k];
            if (sum.empty()) sum.assign(c.size(), 0.0);
            for (std::size_t t = 0; t < c.size(); ++t) sum[t] += c[t];
            ++n;
        }
    for (auto& [k, acc] : curve_acc) {
        for (auto& v : acc.first) v /= acc.second;
        r.aggregate_curves[k] = std::move(acc.first);
    }

    for (const auto& name : AttributeFlags::names()) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < attrs.size(); ++i)
            if (attrs[i].get(name)) idx.push_back(i);
        if (!idx.empty()) r.attribute_breakdown[name] = mean_over(idx);
    }
    return r;
}

}  // namespace omnitrack
