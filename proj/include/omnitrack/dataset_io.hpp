#pragma once

// Sequence directory layout, annotation text formats, mask raster I/O, and
// the evaluation report schema. Angles are degrees on disk, radians in
// memory.

#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "omnitrack/image.hpp"
#include "omnitrack/metrics.hpp"
#include "omnitrack/regions.hpp"

namespace omnitrack {

enum class IoCode {
    MissingFrames,
    CountMismatch,
    BadAspect,
    BadFormat,
    BadValue,
    IoFailure,
};

class IoError : public std::runtime_error {
public:
    IoError(IoCode code, const std::string& msg) : std::runtime_error(msg), code_(code) {}
    IoCode code() const { return code_; }

private:
    IoCode code_;
};

struct SequenceManifest {
    std::string name;
    std::filesystem::path root;
    std::vector<std::filesystem::path> frame_paths;
    std::vector<std::filesystem::path> mask_paths;  // empty when no masks
    std::vector<BBox> bbox;                          // empty when file absent
    std::vector<RBBox> rbbox;
    std::vector<BFoV> bfov;
    std::vector<BFoV> rbfov;
    std::filesystem::path attributes_path;  // empty when absent
    ErpSize size;

    std::size_t frame_count() const { return frame_paths.size(); }
    bool has_masks() const { return !mask_paths.empty(); }
};

// Validate and index a sequence directory: frames/ is required; mask/,
// bbox.txt, rbbox.txt, bfov.txt, rbfov.txt, attributes.json are optional
// but must be consistent with the frame count when present.
SequenceManifest load_sequence(const std::filesystem::path& root);

// Line formats: bbox "cx,cy,w,h"; rbbox "cx,cy,w,h,gamma_deg";
// (r)bfov "clon_deg,clat_deg,theta_deg,phi_deg,gamma_deg".
std::variant<BBox, RBBox, BFoV> parse_annotation_line(const std::string& line, RepKind kind);
BBox parse_bbox_line(const std::string& line);
RBBox parse_rbbox_line(const std::string& line);
BFoV parse_bfov_line(const std::string& line);

std::string format_annotation_line(const BBox& b);
std::string format_annotation_line(const RBBox& b);
std::string format_annotation_line(const BFoV& b);

// Image / mask rasters (PNG; masks are 8-bit 0/255).
Image load_image(const std::filesystem::path& path);
void save_image(const Image& img, const std::filesystem::path& path);
Mask load_mask(const std::filesystem::path& path);
void save_mask(const Mask& m, const std::filesystem::path& path);

// Zero-padded frame filename, e.g. 000012.png.
std::string frame_filename(int index);

// Write per-frame results: the four annotation files plus mask/*.png when
// masks are present.
void write_results(const std::vector<FrameAnnotation>& results,
                   const std::filesystem::path& out_dir);

// Read results written by write_results (or ground-truth files laid out the
// same way).
std::vector<FrameAnnotation> load_results(const std::filesystem::path& dir,
                                          std::size_t expected_frames);

// Ground-truth annotation stream of a manifest, masks loaded on demand.
std::vector<FrameAnnotation> load_annotations(const SequenceManifest& seq, bool with_masks);

// EvalReport JSON ("schema": 1) and curve CSVs.
void write_report(const EvalReport& report, const std::filesystem::path& path);
void write_curves_csv(const EvalReport& report, const std::filesystem::path& dir);

// attributes.json: computed flags (and manual ones, kept verbatim).
void save_attributes(const AttributeFlags& computed, const std::filesystem::path& path);
AttributeFlags load_attributes(const std::filesystem::path& path);

}  // namespace omnitrack
