// omnitrack CLI: synthetic data generation, mask -> ground-truth conversion,
// viewport extraction, tracking, and evaluation. Angles on the command line
// and in files are degrees.

#include <CLI11.hpp>

#include "omnitrack/dataset_io.hpp"
#include "omnitrack/framework.hpp"
#include "omnitrack/metrics.hpp"
#include "omnitrack/remap.hpp"
#include "omnitrack/synth.hpp"

#include <cstdlib>
#include <future>
#include <iostream>

namespace fs = std::filesystem;
using namespace omnitrack;

namespace {

ErpSize eval_raster_from_env() {
    const char* env = std::getenv("OMNITRACK_RASTER");
    if (!env) return ErpSize(1920, 960);
    int w = 0, h = 0;
    if (std::sscanf(env, "%dx%d", &w, &h) != 2)
        throw std::runtime_error("OMNITRACK_RASTER must look like 1920x960");
    return ErpSize(w, h);
}

BFoV parse_bfov_flag(const std::string& csv) {
    auto v = parse_annotation_line(csv, RepKind::BFoV);
    return std::get<BFoV>(v);
}

int run_convert(const fs::path& seq_dir) {
    SequenceManifest seq = load_sequence(seq_dir);
    if (!seq.has_masks()) throw std::runtime_error("convert: sequence has no mask/ directory");
    std::vector<FrameAnnotation> ann(seq.frame_count());
    for (std::size_t k = 0; k < seq.frame_count(); ++k) {
        Mask m = load_mask(seq.mask_paths[k]);
        ann[k].bbox = mask_to_bbox(m);
        ann[k].rbbox = mask_to_rbbox(m);
        ann[k].bfov = mask_to_bfov(m, seq.size, false);
        ann[k].rbfov = mask_to_bfov(m, seq.size, true);
        ann[k].mask = std::make_shared<Mask>(std::move(m));
    }
    save_attributes(compute_attributes(ann, seq.size), seq_dir / "attributes.json");
    for (auto& a : ann) a.mask.reset();  // keep existing mask files untouched
    write_results(ann, seq_dir);
    std::cout << "converted " << seq.frame_count() << " masks in " << seq_dir << "\n";
    return 0;
}

int run_unwarp(const fs::path& image_path, const std::string& bfov_csv, int out_size,
               const fs::path& out_path) {
    Image img = load_image(image_path);
    BFoV b = parse_bfov_flag(bfov_csv);
    std::cerr << "unwarp: " << (b.tangent_branch() ? "tangent" : "spherical")
              << " branch selected\n";
    LocalImage view = extract_region(img, b, out_size, out_size);
    save_image(view.image, out_path);
    std::cout << "wrote " << out_path << "\n";
    return 0;
}

int run_track(const fs::path& seq_dir, const std::string& tracker_name, const fs::path& out_dir,
              const SearchPolicy& policy) {
    SequenceManifest seq = load_sequence(seq_dir);
    ErpSize size = seq.size;

    InitTarget init;
    if (seq.has_masks()) {
        init.mask = std::make_shared<Mask>(load_mask(seq.mask_paths[0]));
    } else if (!seq.bfov.empty()) {
        init.bfov = seq.bfov[0];
    } else {
        throw std::runtime_error("track: sequence needs mask/ or bfov.txt for initialization");
    }

    std::unique_ptr<LocalTracker> tracker;
    if (tracker_name == "ncc") {
        tracker = make_ncc_tracker();
    } else if (tracker_name == "oracle") {
        if (!seq.has_masks()) throw std::runtime_error("track: oracle tracker needs gt masks");
        tracker = make_oracle_tracker([&seq](int k) {
            return std::make_shared<const Mask>(load_mask(seq.mask_paths[k]));
        });
    } else {
        throw std::runtime_error("track: unknown tracker '" + tracker_name + "'");
    }

    auto frame_at = [&seq](int k) { return load_image(seq.frame_paths[k]); };
    auto results = track_sequence(frame_at, static_cast<int>(seq.frame_count()), init, *tracker,
                                  policy, size);

    std::vector<FrameAnnotation> out(results.size());
    for (std::size_t k = 0; k < results.size(); ++k) {
        out[k].bbox = results[k].bbox;
        out[k].rbbox = results[k].rbbox;
        out[k].bfov = results[k].bfov;
        out[k].rbfov = results[k].rbfov;
        out[k].mask = results[k].mask;
    }
    // Mask output only when every frame produced one.
    bool all_masks = true;
    for (const auto& r : out)
        if (!r.mask) all_masks = false;
    if (!all_masks)
        for (auto& r : out) r.mask.reset();
    write_results(out, out_dir);
    std::cout << "tracked " << results.size() << " frames -> " << out_dir << "\n";
    return 0;
}

std::vector<fs::path> find_sequences(const fs::path& root) {
    if (fs::is_directory(root / "frames")) return {root};
    std::vector<fs::path> seqs;
    for (const auto& e : fs::directory_iterator(root))
        if (e.is_directory() && fs::is_directory(e.path() / "frames")) seqs.push_back(e.path());
    std::sort(seqs.begin(), seqs.end());
    if (seqs.empty()) throw std::runtime_error("eval: no sequences under " + root.string());
    return seqs;
}

int run_eval(const fs::path& seq_dir, const fs::path& results_dir, bool with_masks,
             const fs::path& report_path, const fs::path& curves_dir,
             const std::string& tracker_name, int jobs) {
    ErpSize raster = eval_raster_from_env();
    auto seq_roots = find_sequences(seq_dir);
    bool multi = seq_roots.size() > 1 || seq_roots[0] != seq_dir;

    auto eval_one = [&](const fs::path& root) {
        SequenceManifest seq = load_sequence(root);
        fs::path rdir = multi ? results_dir / seq.name : results_dir;
        auto gt = load_annotations(seq, with_masks);
        auto tr = load_results(rdir, seq.frame_count());
        if (!with_masks)
            for (auto& t : tr) t.mask.reset();
        EvalOptions opts;
        opts.raster = raster;
        auto eval = ope_evaluate(gt, tr, seq.size, opts);
        auto attrs = compute_attributes(gt, seq.size);
        return std::tuple{seq.name, eval, attrs};
    };

    std::vector<std::string> names;
    std::vector<SequenceEval> evals;
    std::vector<AttributeFlags> attrs;
    if (jobs > 1 && seq_roots.size() > 1) {
        std::vector<std::future<std::tuple<std::string, SequenceEval, AttributeFlags>>> futs;
        for (const auto& root : seq_roots)
            futs.push_back(std::async(std::launch::async, eval_one, root));
        for (auto& f : futs) {
            auto [n, e, a] = f.get();
            names.push_back(n);
            evals.push_back(e);
            attrs.push_back(a);
        }
    } else {
        for (const auto& root : seq_roots) {
            auto [n, e, a] = eval_one(root);
            names.push_back(n);
            evals.push_back(e);
            attrs.push_back(a);
        }
    }

    EvalReport report = aggregate_report(names, evals, attrs, tracker_name, raster);
    write_report(report, report_path);
    if (!curves_dir.empty()) write_curves_csv(report, curves_dir);
    for (const auto& [k, v] : report.aggregate) std::cout << k << " = " << v << "\n";
    std::cout << "report -> " << report_path << "\n";
    return 0;
}

int run_synth(const std::string& kind_name, int frames, double rho_deg, const fs::path& out,
              int width, std::uint64_t seed, double lon_deg, double lat_deg, double span_deg,
              double max_lat_deg, bool have_lon) {
    Trajectory t;
    if (kind_name == "static") t.kind = TrajectoryKind::Static;
    else if (kind_name == "great_circle") t.kind = TrajectoryKind::GreatCircle;
    else if (kind_name == "border_cross") t.kind = TrajectoryKind::BorderCross;
    else if (kind_name == "pole_cross") t.kind = TrajectoryKind::PoleCross;
    else throw std::runtime_error("synth: unknown kind '" + kind_name + "'");

    t.frames = frames;
    t.span_deg = span_deg;
    t.max_lat_deg = max_lat_deg;
    // Border crossings start west of the seam unless a start was given.
    if (!have_lon && t.kind == TrajectoryKind::BorderCross) lon_deg = 180.0 - span_deg / 2;
    t.start = LonLat(deg2rad(lon_deg), deg2rad(lat_deg));

    CapSpec cap;
    cap.rho = deg2rad(rho_deg);
    cap.seed = seed;

    ErpSize size(width, width / 2);
    auto seq = generate_sequence(t, cap, size, out);
    std::cout << "generated " << seq.frame_count() << " frames -> " << out << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"omnidirectional tracking toolkit"};
    app.require_subcommand(1);

    // convert
    std::string seq_dir;
    auto* convert = app.add_subcommand("convert", "convert masks to the four ground-truth files");
    convert->add_option("seq_dir", seq_dir, "sequence directory")->required();

    // unwarp
    std::string image_path, bfov_csv, unwarp_out = "local.png";
    int unwarp_size = 512;
    auto* unwarp = app.add_subcommand("unwarp", "extract a local viewport image");
    unwarp->add_option("image", image_path, "ERP image")->required();
    unwarp->add_option("--bfov", bfov_csv, "clon,clat,theta,phi,gamma in degrees")->required();
    unwarp->add_option("--size", unwarp_size, "output image side length");
    unwarp->add_option("--out", unwarp_out, "output path");

    // track
    std::string track_seq, tracker_name = "ncc", track_out;
    SearchPolicy policy;
    auto* track = app.add_subcommand("track", "run the 360 tracking framework");
    track->add_option("seq_dir", track_seq, "sequence directory")->required();
    track->add_option("--tracker", tracker_name, "ncc|oracle");
    track->add_option("--out", track_out, "results directory")->required();
    track->add_option("--expand", policy.expand_factor, "search region expansion factor");
    track->add_option("--min-fov", policy.min_fov_deg, "minimum search FoV in degrees");
    track->add_option("--local-size", policy.local_size, "local image side length");

    // eval
    std::string eval_seq, eval_results, eval_report = "report.json", eval_curves,
                eval_tracker = "tracker";
    bool eval_masks = false;
    int jobs = 1;
    auto* eval = app.add_subcommand("eval", "evaluate results against ground truth");
    eval->add_option("seq_dir", eval_seq, "sequence directory (or parent of sequences)")
        ->required();
    eval->add_option("--results", eval_results, "results directory")->required();
    eval->add_flag("--masks", eval_masks, "also score segmentation masks");
    eval->add_option("--out", eval_report, "report JSON path");
    eval->add_option("--curves", eval_curves, "directory for curve CSVs");
    eval->add_option("--tracker", eval_tracker, "tracker name recorded in the report");
    eval->add_option("--jobs", jobs, "parallel sequence evaluations");

    // synth
    std::string synth_kind = "static", synth_out;
    int synth_frames = 10, synth_width = 1920;
    double rho_deg = 10, lon_deg = 0, lat_deg = 0, span_deg = 40, max_lat_deg = 85;
    std::uint64_t seed = 1;
    auto* synth = app.add_subcommand("synth", "generate a synthetic oracle sequence");
    synth->add_option("--kind", synth_kind, "static|great_circle|border_cross|pole_cross");
    synth->add_option("--frames", synth_frames, "frame count");
    synth->add_option("--rho", rho_deg, "cap angular radius in degrees");
    synth->add_option("--out", synth_out, "output sequence directory")->required();
    synth->add_option("--size", synth_width, "ERP width (height is width/2)");
    synth->add_option("--seed", seed, "background noise seed");
    auto* lon_opt = synth->add_option("--lon", lon_deg, "start center longitude, degrees");
    synth->add_option("--lat", lat_deg, "start center latitude, degrees");
    synth->add_option("--span", span_deg, "trajectory sweep in degrees");
    synth->add_option("--max-lat", max_lat_deg, "peak latitude for pole_cross");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (convert->parsed()) return run_convert(seq_dir);
        if (unwarp->parsed()) return run_unwarp(image_path, bfov_csv, unwarp_size, unwarp_out);
        if (track->parsed()) return run_track(track_seq, tracker_name, track_out, policy);
        if (eval->parsed())
            return run_eval(eval_seq, eval_results, eval_masks, eval_report, eval_curves,
                            eval_tracker, jobs);
        if (synth->parsed())
            return run_synth(synth_kind, synth_frames, rho_deg, synth_out, synth_width, seed,
                             lon_deg, lat_deg, span_deg, max_lat_deg, lon_opt->count() > 0);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
