#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "xstitch/compose.hpp"
#include "xstitch/metrics.hpp"
#include "xstitch/synth.hpp"

namespace xstitch {

/// SSIM and PSNR of a stitched panorama against the ground truth rendered in
/// the frame of the panorama's reference image, over the pixels valid in
/// both; elapsed_ms comes from the stitch report.
MetricReport evaluate_stitch(const StitchResult& result, const GroundTruth& gt);

/// Overlap fractions [lo, hi].
struct OverlapBucket {
  double lo = 0.0;
  double hi = 0.0;
};

struct SweepGrid {
  std::vector<OverlapBucket> buckets;
  std::vector<int> resolutions;
  int seeds = 10;               // runs per cell
  std::uint64_t seed_base = 1;  // run i of every cell uses seed_base + i
  SynthSpec base;               // resolution, overlap and seed are overridden
  PipelineConfig pipeline;

  /// The default battery: buckets 20-40, 40-70, 70-90 percent at 512, 1024
  /// and 1920 pixels; five slices of mildly projective warps (magnitude
  /// 0.25) with noise 0.02.
  static SweepGrid standard();
};

struct SweepCell {
  OverlapBucket bucket;
  int resolution = 0;
  int runs = 0;
  int failures = 0;
  double mean_ssim = 0.0;  // over successful runs
  double mean_psnr = 0.0;
  double mean_elapsed_ms = 0.0;
  std::string first_error;  // "<class>: <message>" of the first failed run

  bool ok() const { return failures == 0; }
};

/// Overlap of run i in a cell: stratified over the bucket, lo + (hi - lo) *
/// (i + 0.5) / seeds.
double run_overlap(const OverlapBucket& bucket, int run, int seeds);

/// One cell per (bucket, resolution), buckets outermost. Cells run on up to
/// `jobs` threads; results do not depend on `jobs`. A failed run is counted
/// in its cell and never aborts the sweep. Throws kInvalidArgument on an
/// empty grid or seeds < 1.
std::vector<SweepCell> run_sweep(const SweepGrid& grid, int jobs = 1);

/// Tab-separated table with a header row.
std::string sweep_table(const std::vector<SweepCell>& cells);

}  // namespace xstitch
