// xstitch command-line front end: stitch, synth, eval, sweep, segment-fallback.

#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "xstitch/compose.hpp"
#include "xstitch/error.hpp"
#include "xstitch/features.hpp"
#include "xstitch/io.hpp"
#include "xstitch/masks.hpp"
#include "xstitch/metrics.hpp"
#include "xstitch/sweep.hpp"
#include "xstitch/synth.hpp"

namespace fs = std::filesystem;
using namespace xstitch;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else if (c != ' ') {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) fail(ErrorKind::kIo, "cannot write " + path.string());
}

std::string format_psnr(double v) {
  if (std::isinf(v)) return "inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

// stitch

struct StitchArgs {
  std::vector<std::string> images, masks, features;
  bool auto_segment = false;
  double threshold = 0.9;
  int min_area = 0;  // 0 = scaled default
  std::string config, output, report;
  bool exact_order = false;
  std::optional<int> reference;
};

int cmd_stitch(const StitchArgs& a) {
  if (a.images.size() < 2) throw UsageError("stitch needs at least two images");
  if (!a.auto_segment && a.masks.size() != a.images.size()) {
    throw UsageError("give one --masks file per image or --auto-segment");
  }
  if (a.auto_segment && !a.masks.empty()) throw UsageError("--masks and --auto-segment are exclusive");
  if (!a.features.empty() && a.features.size() != a.images.size()) {
    throw UsageError("give one --features file per image");
  }

  PipelineConfig cfg = a.config.empty() ? PipelineConfig{} : load_config(a.config);
  if (a.exact_order) cfg.exact_order = true;
  if (a.reference) cfg.reference_override = *a.reference;
  if (!a.features.empty()) cfg.feature_source = FeatureSource::kFile;

  std::vector<Image> images;
  std::vector<Mask> masks;
  std::vector<FeatureMap> features;
  for (std::size_t i = 0; i < a.images.size(); ++i) {
    images.push_back(load_image_png(a.images[i]).image);
    const Image& img = images.back();
    if (a.auto_segment) {
      const int area = a.min_area > 0 ? a.min_area : default_min_area(img.width(), img.height());
      masks.push_back(fallback_segment(img, a.threshold, area));
    } else {
      masks.push_back(load_mask_png(a.masks[i]));
    }
  }
  for (const auto& f : a.features) features.push_back(load_feature_map(f));

  const StitchResult result = stitch_all(images, masks, cfg, features);
  save_panorama_png(a.output, result.panorama);
  fs::path report = a.report;
  if (report.empty()) report = fs::path(a.output).replace_extension(".json");
  write_text(report, report_to_json(result.report));
  std::fprintf(stderr, "stitched %zu images in %.1f ms, reference %d\n", images.size(),
               result.report.elapsed_ms, result.report.reference);
  return 0;
}

// synth

int cmd_synth(const SynthSpec& spec, const std::string& out) {
  const GroundTruth gt = generate(spec);
  write_synth_dataset(out, spec, gt);
  std::fprintf(stderr, "wrote %d slices to %s\n", spec.n_slices, out.c_str());
  return 0;
}

// eval

int cmd_eval(const std::string& panorama, const std::string& ground_truth, const std::string& report) {
  const MaskedImage pano = load_image_png(panorama);
  std::optional<ReportSummary> summary;
  if (!report.empty()) summary = read_report(report);

  fs::path gt_path = ground_truth;
  if (fs::is_directory(gt_path)) gt_path /= "manifest.json";
  MaskedImage truth;
  if (gt_path.extension() == ".json") {
    if (!summary) throw UsageError("evaluating against a dataset needs --report");
    const SynthManifest m = read_synth_manifest(gt_path);
    if (summary->reference < 0 || summary->reference >= static_cast<int>(m.true_h.size())) {
      fail(ErrorKind::kExtentMismatch, "report reference is not a slice of the dataset");
    }
    const Image gt = load_image_png(m.ground_truth).image;
    truth = ground_truth_view(gt, m.panorama_origin,
                              m.true_h[static_cast<std::size_t>(summary->reference)], summary->canvas);
  } else {
    truth = load_image_png(gt_path);
  }

  const MetricReport r = compare_valid(pano, truth);
  if (summary) {
    std::printf("ssim=%.6f psnr=%s elapsed_ms=%.1f\n", r.ssim, format_psnr(r.psnr).c_str(),
                summary->elapsed_ms);
  } else {
    std::printf("ssim=%.6f psnr=%s elapsed_ms=na\n", r.ssim, format_psnr(r.psnr).c_str());
  }
  return 0;
}

// sweep

struct SweepArgs {
  std::string out, buckets = "20-40,40-70,70-90", resolutions = "512,1024,1920", config;
  std::string warp = "projective";
  int seeds = 10, jobs = 1, slices = 5;
  std::uint64_t seed_base = 1;
  double magnitude = 0.25, noise = 0.02;
};

int cmd_sweep(const SweepArgs& a) {
  SweepGrid grid = SweepGrid::standard();
  grid.buckets.clear();
  grid.resolutions.clear();
  for (const auto& b : split(a.buckets, ',')) {
    const auto lh = split(b, '-');
    if (lh.size() != 2) throw UsageError("bucket '" + b + "' is not lo-hi");
    try {
      grid.buckets.push_back({std::stod(lh[0]) / 100.0, std::stod(lh[1]) / 100.0});
    } catch (const std::logic_error&) {
      throw UsageError("bucket '" + b + "' is not numeric");
    }
  }
  for (const auto& r : split(a.resolutions, ',')) {
    try {
      grid.resolutions.push_back(std::stoi(r));
    } catch (const std::logic_error&) {
      throw UsageError("resolution '" + r + "' is not an integer");
    }
  }
  if (grid.buckets.empty() || grid.resolutions.empty()) throw UsageError("sweep grid is empty");
  if (a.seeds < 1 || a.jobs < 1) throw UsageError("--seeds and --jobs must be positive");
  grid.seeds = a.seeds;
  grid.seed_base = a.seed_base;
  grid.base.warp_kind = model_kind_from_string(a.warp);
  grid.base.warp_magnitude = a.magnitude;
  grid.base.noise_sigma = a.noise;
  grid.base.n_slices = a.slices;
  if (!a.config.empty()) grid.pipeline = load_config(a.config);

  const auto cells = run_sweep(grid, a.jobs);
  const std::string table = sweep_table(cells);
  if (a.out.empty()) {
    std::fputs(table.c_str(), stdout);
  } else {
    write_text(a.out, table);
  }
  int failed = 0;
  for (const auto& c : cells) failed += c.ok() ? 0 : 1;
  if (failed > 0) std::fprintf(stderr, "%d of %zu cells had failed runs\n", failed, cells.size());
  return 0;
}

// segment-fallback

int cmd_segment(const std::string& image, const std::string& output, double threshold, int min_area) {
  const Image img = load_image_png(image).image;
  const int area = min_area > 0 ? min_area : default_min_area(img.width(), img.height());
  const Mask m = fallback_segment(img, threshold, area);
  save_mask_png(output, m);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Screw-guided X-ray image stitching"};
  const CLI::IsMember kWarpKinds({"translation", "similarity", "affine", "projective"});
  app.require_subcommand(1);

  StitchArgs st;
  auto* stitch = app.add_subcommand("stitch", "Stitch images into a panorama");
  stitch->add_option("--images", st.images, "Input PNGs")->required();
  stitch->add_option("--masks", st.masks, "Screw instance masks, one per image");
  stitch->add_flag("--auto-segment", st.auto_segment, "Threshold the images instead of reading masks");
  stitch->add_option("--threshold", st.threshold, "Auto-segment intensity threshold")->capture_default_str();
  stitch->add_option("--min-area", st.min_area, "Auto-segment minimum blob area (0: scaled default)");
  stitch->add_option("--config", st.config, "key=value pipeline config");
  stitch->add_option("--features", st.features, "Feature maps, one per image");
  stitch->add_flag("--exact-order", st.exact_order, "Exhaustive ordering (n <= 10)");
  stitch->add_option("--reference", st.reference, "Reference image index");
  stitch->add_option("--output", st.output, "Panorama PNG")->required();
  stitch->add_option("--report", st.report, "Report JSON (default: output with .json)");

  SynthSpec spec;
  std::string synth_out, synth_warp = "translation";
  auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset");
  synth->add_option("--out", synth_out, "Output directory")->required();
  synth->add_option("--resolution", spec.resolution)->capture_default_str();
  synth->add_option("--slices", spec.n_slices)->capture_default_str();
  synth->add_option("--overlap", spec.overlap_fraction)->capture_default_str();
  synth->add_option("--screws", spec.n_screws_per_slice)->capture_default_str();
  synth->add_option("--warp", synth_warp)->check(kWarpKinds)->capture_default_str();
  synth->add_option("--magnitude", spec.warp_magnitude)->capture_default_str();
  synth->add_option("--noise", spec.noise_sigma)->capture_default_str();
  synth->add_option("--seed", spec.seed)->capture_default_str();

  std::string ev_pano, ev_gt, ev_report;
  auto* eval = app.add_subcommand("eval", "SSIM and PSNR against ground truth");
  eval->add_option("--panorama", ev_pano)->required();
  eval->add_option("--ground-truth", ev_gt, "Dataset directory, manifest.json or PNG")->required();
  eval->add_option("--report", ev_report, "Stitch report JSON");

  SweepArgs sw;
  auto* sweep = app.add_subcommand("sweep", "Metrics over an overlap x resolution grid");
  sweep->add_option("--out", sw.out, "TSV table (default: stdout)");
  sweep->add_option("--buckets", sw.buckets, "Overlap percent ranges")->capture_default_str();
  sweep->add_option("--resolutions", sw.resolutions)->capture_default_str();
  sweep->add_option("--seeds", sw.seeds, "Runs per cell")->capture_default_str();
  sweep->add_option("--seed-base", sw.seed_base)->capture_default_str();
  sweep->add_option("--jobs", sw.jobs, "Concurrent cells")->capture_default_str();
  sweep->add_option("--warp", sw.warp)->check(kWarpKinds)->capture_default_str();
  sweep->add_option("--magnitude", sw.magnitude)->capture_default_str();
  sweep->add_option("--noise", sw.noise)->capture_default_str();
  sweep->add_option("--slices", sw.slices)->capture_default_str();
  sweep->add_option("--config", sw.config, "key=value pipeline config");

  std::string seg_in, seg_out;
  double seg_threshold = 0.9;
  int seg_area = 0;
  auto* seg = app.add_subcommand("segment-fallback", "Threshold segmentation of screws");
  seg->add_option("--image", seg_in)->required();
  seg->add_option("--output", seg_out, "Mask PNG, pixel value = label")->required();
  seg->add_option("--threshold", seg_threshold)->capture_default_str();
  seg->add_option("--min-area", seg_area, "0: scaled default");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (stitch->parsed()) return cmd_stitch(st);
    if (synth->parsed()) {
      spec.warp_kind = model_kind_from_string(synth_warp);
      return cmd_synth(spec, synth_out);
    }
    if (eval->parsed()) return cmd_eval(ev_pano, ev_gt, ev_report);
    if (sweep->parsed()) return cmd_sweep(sw);
    if (seg->parsed()) return cmd_segment(seg_in, seg_out, seg_threshold, seg_area);
  } catch (const UsageError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return kExitUsage;
  } catch (const StitchError& e) {
    std::fprintf(stderr, "error: %s: %s\n", std::string(to_string(e.kind())).c_str(), e.what());
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return kExitInternal;
  }
  return kExitUsage;
}
