#include "xstitch/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <thread>

#include "xstitch/error.hpp"

namespace xstitch {

MetricReport evaluate_stitch(const StitchResult& result, const GroundTruth& gt) {
  const int ref = result.report.reference;
  if (ref < 0 || ref >= static_cast<int>(gt.true_h.size())) {
    fail(ErrorKind::kInvalidArgument, "report reference is not a ground-truth slice");
  }
  const MaskedImage truth =
      ground_truth_view(gt.panorama, gt.panorama_origin, gt.true_h[static_cast<std::size_t>(ref)],
                        result.report.canvas.bbox);
  MetricReport m = compare_valid(result.panorama, truth);
  m.elapsed_ms = result.report.elapsed_ms;
  return m;
}

SweepGrid SweepGrid::standard() {
  SweepGrid g;
  g.buckets = {{0.2, 0.4}, {0.4, 0.7}, {0.7, 0.9}};
  g.resolutions = {512, 1024, 1920};
  g.base.warp_kind = ModelKind::kProjective;
  g.base.warp_magnitude = 0.25;
  g.base.noise_sigma = 0.02;
  return g;
}

double run_overlap(const OverlapBucket& bucket, int run, int seeds) {
  return bucket.lo + (bucket.hi - bucket.lo) * (run + 0.5) / seeds;
}

namespace {

SweepCell run_cell(const SweepGrid& grid, const OverlapBucket& bucket, int resolution) {
  SweepCell cell;
  cell.bucket = bucket;
  cell.resolution = resolution;
  double ssim_sum = 0.0, psnr_sum = 0.0, ms_sum = 0.0;
  for (int i = 0; i < grid.seeds; ++i) {
    ++cell.runs;
    SynthSpec spec = grid.base;
    spec.resolution = resolution;
    spec.overlap_fraction = run_overlap(bucket, i, grid.seeds);
    spec.seed = grid.seed_base + static_cast<std::uint64_t>(i);
    try {
      const GroundTruth gt = generate(spec);
      const StitchResult result = stitch_all(gt.slices, gt.masks, grid.pipeline);
      const MetricReport m = evaluate_stitch(result, gt);
      ssim_sum += m.ssim;
      psnr_sum += m.psnr;
      ms_sum += m.elapsed_ms;
    } catch (const StitchError& e) {
      if (cell.failures++ == 0) cell.first_error = std::string(to_string(e.kind())) + ": " + e.what();
    }
  }
  const int good = cell.runs - cell.failures;
  if (good > 0) {
    cell.mean_ssim = ssim_sum / good;
    cell.mean_psnr = psnr_sum / good;
    cell.mean_elapsed_ms = ms_sum / good;
  }
  return cell;
}

}  // namespace

std::vector<SweepCell> run_sweep(const SweepGrid& grid, int jobs) {
  if (grid.buckets.empty() || grid.resolutions.empty()) {
    fail(ErrorKind::kInvalidArgument, "sweep grid is empty");
  }
  if (grid.seeds < 1) fail(ErrorKind::kInvalidArgument, "sweep needs at least one seed per cell");
  for (const auto& b : grid.buckets) {
    if (!(b.lo <= b.hi)) fail(ErrorKind::kInvalidArgument, "overlap bucket bounds are reversed");
  }

  std::vector<std::pair<OverlapBucket, int>> work;
  for (const auto& b : grid.buckets) {
    for (int r : grid.resolutions) work.emplace_back(b, r);
  }
  std::vector<SweepCell> cells(work.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < work.size(); i = next++) {
      cells[i] = run_cell(grid, work[i].first, work[i].second);
    }
  };
  const int threads = std::clamp(jobs, 1, static_cast<int>(work.size()));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  return cells;
}

std::string sweep_table(const std::vector<SweepCell>& cells) {
  std::string out = "overlap\tresolution\truns\tfailures\tmean_ssim\tmean_psnr\tmean_elapsed_ms\terror\n";
  char line[256];
  for (const auto& c : cells) {
    std::snprintf(line, sizeof line, "%.0f-%.0f\t%d\t%d\t%d\t%.6f\t%.4f\t%.1f\t", 100 * c.bucket.lo,
                  100 * c.bucket.hi, c.resolution, c.runs, c.failures, c.mean_ssim, c.mean_psnr,
                  c.mean_elapsed_ms);
    out += line;
    out += c.first_error.empty() ? "-" : c.first_error;
    out += "\n";
  }
  return out;
}

}  // namespace xstitch
