#include "omnitrack/dataset_io.hpp"

#include <opencv2/imgcodecs.hpp>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cstring>
#include <fstream>

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace omnitrack {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

double parse_number(const std::string& field) {
    std::size_t b = field.find_first_not_of(" \t\r\n");
    std::size_t e = field.find_last_not_of(" \t\r\n");
    if (b == std::string::npos)
        throw IoError(IoCode::BadFormat, "empty numeric field");
    double v = 0;
    const char* first = field.data() + b;
    const char* last = field.data() + e + 1;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last)
        throw IoError(IoCode::BadFormat, "unparsable number: '" + field + "'");
    if (!std::isfinite(v))
        throw IoError(IoCode::BadValue, "non-finite value: '" + field + "'");
    return v;
}

std::vector<double> parse_numbers(const std::string& line, std::size_t expected) {
    auto fields = split_fields(line);
    if (fields.size() != expected)
        throw IoError(IoCode::BadFormat, "expected " + std::to_string(expected) +
                                             " fields, got " + std::to_string(fields.size()));
    std::vector<double> out;
    out.reserve(expected);
    for (const auto& f : fields) out.push_back(parse_number(f));
    return out;
}

std::vector<std::string> read_lines(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError(IoCode::IoFailure, "cannot open " + path.string());
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) lines.push_back(line);
    }
    return lines;
}

std::vector<fs::path> sorted_images(const fs::path& dir) {
    std::vector<fs::path> out;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (!e.is_regular_file()) continue;
        auto ext = e.path().extension().string();
        std::transform(ext.begin(), ext.end(), ext.begin(), ::tolower);
        if (ext == ".png" || ext == ".jpg" || ext == ".jpeg") out.push_back(e.path());
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

BBox parse_bbox_line(const std::string& line) {
    auto v = parse_numbers(line, 4);
    if (v[2] <= 0 || v[3] <= 0) throw IoError(IoCode::BadValue, "bbox with non-positive size");
    return BBox{v[0], v[1], v[2], v[3]};
}

RBBox parse_rbbox_line(const std::string& line) {
    auto v = parse_numbers(line, 5);
    if (v[2] <= 0 || v[3] <= 0) throw IoError(IoCode::BadValue, "rbbox with non-positive size");
    return RBBox(v[0], v[1], v[2], v[3], deg2rad(v[4]));
}

BFoV parse_bfov_line(const std::string& line) {
    auto v = parse_numbers(line, 5);
    if (v[1] < -90 || v[1] > 90) throw IoError(IoCode::BadValue, "bfov clat outside [-90, 90]");
    if (v[2] <= 0 || v[2] > 360) throw IoError(IoCode::BadValue, "bfov theta outside (0, 360]");
    if (v[3] <= 0 || v[3] > 180) throw IoError(IoCode::BadValue, "bfov phi outside (0, 180]");
    return BFoV(deg2rad(v[0]), deg2rad(v[1]), deg2rad(v[2]), deg2rad(v[3]), deg2rad(v[4]));
}

std::variant<BBox, RBBox, BFoV> parse_annotation_line(const std::string& line, RepKind kind) {
    switch (kind) {
        case RepKind::BBox:
            return parse_bbox_line(line);
        case RepKind::RBBox:
            return parse_rbbox_line(line);
        case RepKind::BFoV:
        case RepKind::RBFoV:
            return parse_bfov_line(line);
    }
    throw IoError(IoCode::BadFormat, "bad representation kind");
}

namespace {

std::string fmt6(std::initializer_list<double> vals) {
    std::string out;
    char buf[64];
    bool first = true;
    for (double v : vals) {
        std::snprintf(buf, sizeof(buf), "%.6f", v);
        if (!first) out += ',';
        out += buf;
        first = false;
    }
    return out;
}

}  // namespace

std::string format_annotation_line(const BBox& b) { return fmt6({b.cx, b.cy, b.w, b.h}); }
std::string format_annotation_line(const RBBox& b) {
    return fmt6({b.cx, b.cy, b.w, b.h, rad2deg(b.gamma)});
}
std::string format_annotation_line(const BFoV& b) {
    return fmt6({rad2deg(b.clon), rad2deg(b.clat), rad2deg(b.theta), rad2deg(b.phi),
                 rad2deg(b.gamma)});
}

SequenceManifest load_sequence(const fs::path& root) {
    SequenceManifest m;
    m.root = root;
    m.name = root.filename().string();
    fs::path frames = root / "frames";
    if (!fs::is_directory(frames))
        throw IoError(IoCode::MissingFrames, "no frames/ directory in " + root.string());
    m.frame_paths = sorted_images(frames);
    if (m.frame_paths.empty())
        throw IoError(IoCode::MissingFrames, "frames/ is empty in " + root.string());

    cv::Mat first = cv::imread(m.frame_paths.front().string(), cv::IMREAD_UNCHANGED);
    if (first.empty())
        throw IoError(IoCode::IoFailure, "cannot read " + m.frame_paths.front().string());
    if (first.cols != 2 * first.rows)
        throw IoError(IoCode::BadAspect, "frame is not 2:1 equirectangular: " +
                                             m.frame_paths.front().string());
    m.size = ErpSize(first.cols, first.rows);

    std::size_t n = m.frame_paths.size();
    if (fs::is_directory(root / "mask")) {
        m.mask_paths = sorted_images(root / "mask");
        if (m.mask_paths.size() != n)
            throw IoError(IoCode::CountMismatch, "mask count != frame count in " + root.string());
    }

    auto load_txt = [&](const char* name, auto parse, auto& dest) {
        fs::path p = root / name;
        if (!fs::exists(p)) return;
        auto lines = read_lines(p);
        if (lines.size() != n)
            throw IoError(IoCode::CountMismatch,
                          std::string(name) + " line count != frame count in " + root.string());
        for (const auto& l : lines) dest.push_back(parse(l));
    };
    load_txt("bbox.txt", parse_bbox_line, m.bbox);
    load_txt("rbbox.txt", parse_rbbox_line, m.rbbox);
    load_txt("bfov.txt", parse_bfov_line, m.bfov);
    load_txt("rbfov.txt", parse_bfov_line, m.rbfov);

    if (fs::exists(root / "attributes.json")) m.attributes_path = root / "attributes.json";
    return m;
}

Image load_image(const fs::path& path) {
    cv::Mat img = cv::imread(path.string(), cv::IMREAD_UNCHANGED);
    if (img.empty()) throw IoError(IoCode::IoFailure, "cannot read " + path.string());
    if (img.channels() != 1 && img.channels() != 3)
        throw IoError(IoCode::BadFormat, "unsupported channel count in " + path.string());
    Image out(img.cols, img.rows, img.channels());
    std::memcpy(out.data.data(), img.data, out.data.size());
    return out;
}

void save_image(const Image& img, const fs::path& path) {
    cv::Mat m(img.height, img.width, img.channels == 1 ? CV_8U : CV_8UC3,
              const_cast<std::uint8_t*>(img.data.data()));
    if (!cv::imwrite(path.string(), m))
        throw IoError(IoCode::IoFailure, "cannot write " + path.string());
}

Mask load_mask(const fs::path& path) {
    cv::Mat img = cv::imread(path.string(), cv::IMREAD_GRAYSCALE);
    if (img.empty()) throw IoError(IoCode::IoFailure, "cannot read " + path.string());
    Mask out(img.cols, img.rows);
    for (int j = 0; j < img.rows; ++j) {
        const std::uint8_t* row = img.ptr<std::uint8_t>(j);
        for (int i = 0; i < img.cols; ++i)
            if (row[i] > 127) out.set(i, j);
    }
    return out;
}

void save_mask(const Mask& m, const fs::path& path) {
    cv::Mat img(m.height, m.width, CV_8U);
    for (int j = 0; j < m.height; ++j) {
        std::uint8_t* row = img.ptr<std::uint8_t>(j);
        for (int i = 0; i < m.width; ++i) row[i] = m.get(i, j) ? 255 : 0;
    }
    if (!cv::imwrite(path.string(), img))
        throw IoError(IoCode::IoFailure, "cannot write " + path.string());
}

std::string frame_filename(int index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%06d.png", index);
    return buf;
}

void write_results(const std::vector<FrameAnnotation>& results, const fs::path& out_dir) {
    if (results.empty()) throw IoError(IoCode::BadValue, "write_results: empty result list");
    fs::create_directories(out_dir);

    auto write_txt = [&](const char* name, auto get) {
        bool have = false;
        for (const auto& r : results)
            if (get(r)) have = true;
        if (!have) return;
        std::ofstream out(out_dir / name);
        if (!out) throw IoError(IoCode::IoFailure, "cannot write " + (out_dir / name).string());
        for (const auto& r : results) {
            auto* v = get(r);
            if (!v) throw IoError(IoCode::BadValue, std::string("missing entry for ") + name);
            out << format_annotation_line(*v) << '\n';
        }
    };
    write_txt("bbox.txt", [](const FrameAnnotation& r) { return r.bbox ? &*r.bbox : nullptr; });
    write_txt("rbbox.txt", [](const FrameAnnotation& r) { return r.rbbox ? &*r.rbbox : nullptr; });
    write_txt("bfov.txt", [](const FrameAnnotation& r) { return r.bfov ? &*r.bfov : nullptr; });
    write_txt("rbfov.txt", [](const FrameAnnotation& r) { return r.rbfov ? &*r.rbfov : nullptr; });

    bool have_masks = false;
    for (const auto& r : results)
        if (r.mask) have_masks = true;
    if (have_masks) {
        fs::create_directories(out_dir / "mask");
        for (std::size_t k = 0; k < results.size(); ++k) {
            if (!results[k].mask) throw IoError(IoCode::BadValue, "missing mask entry");
            save_mask(*results[k].mask, out_dir / "mask" / frame_filename(static_cast<int>(k)));
        }
    }
}

std::vector<FrameAnnotation> load_results(const fs::path& dir, std::size_t expected_frames) {
    std::vector<FrameAnnotation> out(expected_frames);
    auto load_txt = [&](const char* name, auto assign) {
        fs::path p = dir / name;
        if (!fs::exists(p)) return;
        auto lines = read_lines(p);
        if (lines.size() != expected_frames)
            throw IoError(IoCode::CountMismatch,
                          std::string(name) + " line count != expected frame count");
        for (std::size_t k = 0; k < lines.size(); ++k) assign(out[k], lines[k]);
    };
    load_txt("bbox.txt",
             [](FrameAnnotation& r, const std::string& l) { r.bbox = parse_bbox_line(l); });
    load_txt("rbbox.txt",
             [](FrameAnnotation& r, const std::string& l) { r.rbbox = parse_rbbox_line(l); });
    load_txt("bfov.txt",
             [](FrameAnnotation& r, const std::string& l) { r.bfov = parse_bfov_line(l); });
    load_txt("rbfov.txt",
             [](FrameAnnotation& r, const std::string& l) { r.rbfov = parse_bfov_line(l); });

    if (fs::is_directory(dir / "mask")) {
        auto masks = sorted_images(dir / "mask");
        if (masks.size() != expected_frames)
            throw IoError(IoCode::CountMismatch, "mask count != expected frame count");
        for (std::size_t k = 0; k < masks.size(); ++k)
            out[k].mask = std::make_shared<Mask>(load_mask(masks[k]));
    }
    return out;
}

std::vector<FrameAnnotation> load_annotations(const SequenceManifest& seq, bool with_masks) {
    std::vector<FrameAnnotation> out(seq.frame_count());
    for (std::size_t k = 0; k < seq.frame_count(); ++k) {
        if (!seq.bbox.empty()) out[k].bbox = seq.bbox[k];
        if (!seq.rbbox.empty()) out[k].rbbox = seq.rbbox[k];
        if (!seq.bfov.empty()) out[k].bfov = seq.bfov[k];
        if (!seq.rbfov.empty()) out[k].rbfov = seq.rbfov[k];
        if (with_masks && seq.has_masks())
            out[k].mask = std::make_shared<Mask>(load_mask(seq.mask_paths[k]));
    }
    return out;
}

namespace {

const std::map<std::string, std::vector<double> (*)()>& curve_threshold_fns() {
    static const std::map<std::string, std::vector<double> (*)()> fns = {
        {"success", &success_thresholds},
        {"success_rbbox", &success_thresholds},
        {"success_sphere", &success_thresholds},
        {"success_sphere_rbfov", &success_thresholds},
        {"precision", &precision_thresholds},
        {"norm_precision", &norm_precision_thresholds},
        {"angle", &angle_thresholds},
    };
    return fns;
}

ordered_json curves_to_json(const std::map<std::string, std::vector<double>>& curves) {
    ordered_json out = ordered_json::object();
    for (const auto& [name, rates] : curves) {
        auto it = curve_threshold_fns().find(name);
        std::vector<double> ts = it != curve_threshold_fns().end()
                                     ? it->second()
                                     : std::vector<double>(rates.size(), 0.0);
        ordered_json arr = ordered_json::array();
        for (std::size_t k = 0; k < rates.size(); ++k)
            arr.push_back(ordered_json::array({ts[k], rates[k]}));
        out[name] = std::move(arr);
    }
    return out;
}

}  // namespace

void write_report(const EvalReport& report, const fs::path& path) {
    ordered_json j;
    j["schema"] = 1;
    j["tracker"] = report.tracker;
    j["raster"] = {{"width", report.raster.width}, {"height", report.raster.height}};
    ordered_json per_seq = ordered_json::object();
    for (std::size_t i = 0; i < report.per_sequence.size(); ++i) {
        const auto& e = report.per_sequence[i];
        ordered_json s;
        s["frames_scored"] = e.frames_scored;
        s["metrics"] = e.metrics;
        ordered_json attrs = ordered_json::object();
        for (const auto& name : AttributeFlags::names())
            attrs[name] = report.attributes[i].get(name);
        s["attributes"] = std::move(attrs);
        per_seq[report.sequence_names[i]] = std::move(s);
    }
    j["per_sequence"] = std::move(per_seq);
    j["aggregate"] = report.aggregate;
    j["attribute_breakdown"] = report.attribute_breakdown;
    j["curves"] = curves_to_json(report.aggregate_curves);

    std::ofstream out(path);
    if (!out) throw IoError(IoCode::IoFailure, "cannot write " + path.string());
    out << j.dump(2) << '\n';
}

void write_curves_csv(const EvalReport& report, const fs::path& dir) {
    fs::create_directories(dir);
    for (const auto& [name, rates] : report.aggregate_curves) {
        auto it = curve_threshold_fns().find(name);
        std::vector<double> ts = it != curve_threshold_fns().end()
                                     ? it->second()
                                     : std::vector<double>(rates.size(), 0.0);
        std::ofstream out(dir / (name + ".csv"));
        if (!out) throw IoError(IoCode::IoFailure, "cannot write curve CSV for " + name);
        out << "threshold,rate\n";
        for (std::size_t k = 0; k < rates.size(); ++k) out << ts[k] << ',' << rates[k] << '\n';
    }
}

void save_attributes(const AttributeFlags& computed, const fs::path& path) {
    ordered_json j;
    ordered_json c = ordered_json::object();
    for (const auto& name : AttributeFlags::names()) c[name] = computed.get(name);
    j["computed"] = std::move(c);
    std::ofstream out(path);
    if (!out) throw IoError(IoCode::IoFailure, "cannot write " + path.string());
    out << j.dump(2) << '\n';
}

AttributeFlags load_attributes(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError(IoCode::IoFailure, "cannot open " + path.string());
    ordered_json j;
    try {
        in >> j;
    } catch (const ordered_json::exception& e) {
        throw IoError(IoCode::BadFormat, std::string("attributes.json: ") + e.what());
    }
    AttributeFlags a;
    if (j.contains("computed"))
        for (const auto& name : AttributeFlags::names())
            if (j["computed"].contains(name)) a.set(name, j["computed"][name].get<bool>());
    return a;
}

}  // namespace omnitrack
