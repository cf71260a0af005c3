#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "xstitch/compose.hpp"
#include "xstitch/image.hpp"
#include "xstitch/masks.hpp"
#include "xstitch/synth.hpp"

namespace xstitch {

/// Reads an 8- or 16-bit PNG as intensities in [0,1]. RGB is averaged to
/// gray; an alpha channel becomes the validity mask (alpha > 0), otherwise
/// every pixel is valid. Throws kIo.
MaskedImage load_image_png(const std::filesystem::path& path);

/// Reads a grayscale PNG whose raw pixel values are instance labels.
/// Labels are compacted to 1..K in increasing order of their value.
Mask load_mask_png(const std::filesystem::path& path);

/// 16-bit gray + alpha, alpha = 65535 on valid pixels and 0 elsewhere.
void save_panorama_png(const std::filesystem::path& path, const MaskedImage& img);

/// 16-bit gray without alpha.
void save_image_png(const std::filesystem::path& path, const Image& img);

/// 16-bit gray, pixel value = label.
void save_mask_png(const std::filesystem::path& path, const Mask& mask);

/// Flat key=value config; '#' starts a comment, blank lines are ignored and
/// unknown keys or malformed values throw kConfig.
PipelineConfig parse_config(const std::string& text);
PipelineConfig load_config(const std::filesystem::path& path);

std::string report_to_json(const StitchReport& report);

/// The parts of a report document that evaluation needs.
struct ReportSummary {
  int reference = 0;
  BoundingBox canvas;  // reference-frame extent of the panorama
  double elapsed_ms = 0.0;
};
/// Throws kIo.
ReportSummary read_report(const std::filesystem::path& path);

/// Writes slices/, masks/, ground_truth.png and manifest.json under `dir`.
void write_synth_dataset(const std::filesystem::path& dir, const SynthSpec& spec,
                         const GroundTruth& gt);

struct SynthManifest {
  Point2 panorama_origin;  // generation-frame coordinate of ground-truth pixel (0, 0)
  std::filesystem::path ground_truth;
  std::vector<int> true_order;
  std::vector<std::filesystem::path> images;  // slice order
  std::vector<std::filesystem::path> masks;
  std::vector<Homography> true_h;
};
/// Reads manifest.json; paths come back resolved against its directory.
/// Throws kIo.
SynthManifest read_synth_manifest(const std::filesystem::path& path);

}  // namespace xstitch
