#include "xstitch/io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>

#include "json.hpp"
#include "xstitch/error.hpp"

namespace xstitch {

namespace {

using nlohmann::json;

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) fail(ErrorKind::kIo, "cannot open " + path.string());
  return f;
}

// Decoded PNG samples: `channels` values per pixel at their native depth.
struct RawPng {
  int width = 0;
  int height = 0;
  int channels = 0;
  int depth = 8;
  std::vector<std::uint16_t> samples;
};

RawPng read_png(const std::filesystem::path& path) {
  FilePtr f = open_file(path, "rb");
  unsigned char sig[8];
  if (std::fread(sig, 1, 8, f.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
    fail(ErrorKind::kIo, path.string() + " is not a PNG file");
  }
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) fail(ErrorKind::kIo, "libpng initialisation failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    fail(ErrorKind::kIo, "libpng initialisation failed");
  }
  RawPng out;
  std::vector<png_bytep> rows;
  std::vector<png_byte> buffer;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail(ErrorKind::kIo, "corrupt PNG " + path.string());
  }
  png_init_io(png, f.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);
  const png_byte color = png_get_color_type(png, info);
  const int bit_depth = png_get_bit_depth(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (bit_depth == 16) png_set_swap(png);  // native little-endian uint16
  png_read_update_info(png, info);

  out.width = static_cast<int>(png_get_image_width(png, info));
  out.height = static_cast<int>(png_get_image_height(png, info));
  out.channels = png_get_channels(png, info);
  out.depth = png_get_bit_depth(png, info);
  const std::size_t rowbytes = png_get_rowbytes(png, info);
  buffer.resize(rowbytes * static_cast<std::size_t>(out.height));
  rows.resize(static_cast<std::size_t>(out.height));
  for (int y = 0; y < out.height; ++y) rows[static_cast<std::size_t>(y)] = buffer.data() + rowbytes * y;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  const std::size_t n = static_cast<std::size_t>(out.width) * out.height * out.channels;
  out.samples.resize(n);
  if (out.depth == 16) {
    for (std::size_t i = 0; i < n; ++i) {
      out.samples[i] = static_cast<std::uint16_t>(buffer[2 * i] | (buffer[2 * i + 1] << 8));
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) out.samples[i] = buffer[i];
  }
  return out;
}

// channels: 1 gray, 2 gray+alpha; 16-bit samples.
void write_png16(const std::filesystem::path& path, int width, int height, int channels,
                 const std::vector<std::uint16_t>& samples) {
  FilePtr f = open_file(path, "wb");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) fail(ErrorKind::kIo, "libpng initialisation failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    fail(ErrorKind::kIo, "libpng initialisation failed");
  }
  std::vector<png_byte> buffer(samples.size() * 2);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    buffer[2 * i] = static_cast<png_byte>(samples[i] >> 8);
    buffer[2 * i + 1] = static_cast<png_byte>(samples[i] & 0xff);
  }
  std::vector<png_bytep> rows(static_cast<std::size_t>(height));
  const std::size_t rowbytes = static_cast<std::size_t>(width) * channels * 2;
  for (int y = 0; y < height; ++y) rows[static_cast<std::size_t>(y)] = buffer.data() + rowbytes * y;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    fail(ErrorKind::kIo, "cannot write " + path.string());
  }
  png_init_io(png, f.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 16,
               channels == 2 ? PNG_COLOR_TYPE_GRAY_ALPHA : PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  if (std::ferror(f.get())) fail(ErrorKind::kIo, "cannot write " + path.string());
}

std::uint16_t to16(double v) {
  return static_cast<std::uint16_t>(std::lround(std::clamp(v, 0.0, 1.0) * 65535.0));
}

json homography_json(const Homography& h) {
  const auto v = h.to_rows();
  return json::array({{v[0], v[1], v[2]}, {v[3], v[4], v[5]}, {v[6], v[7], v[8]}});
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used == v.size() && std::isfinite(d)) return d;
  } catch (const std::exception&) {
  }
  fail(ErrorKind::kConfig, "config key " + key + " expects a number, got '" + v + "'");
}

int parse_int(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const int i = std::stoi(v, &used);
    if (used == v.size()) return i;
  } catch (const std::exception&) {
  }
  fail(ErrorKind::kConfig, "config key " + key + " expects an integer, got '" + v + "'");
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  fail(ErrorKind::kConfig, "config key " + key + " expects true or false, got '" + v + "'");
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kIo, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    fail(ErrorKind::kIo, "malformed JSON in " + path.string() + ": " + e.what());
  }
}

}  // namespace

MaskedImage load_image_png(const std::filesystem::path& path) {
  const RawPng raw = read_png(path);
  const double scale = raw.depth == 16 ? 65535.0 : 255.0;
  const bool alpha = raw.channels == 2 || raw.channels == 4;
  const int colour = alpha ? raw.channels - 1 : raw.channels;
  std::vector<double> px(static_cast<std::size_t>(raw.width) * raw.height);
  ValidityMask valid(raw.width, raw.height, true);
  for (std::size_t i = 0; i < px.size(); ++i) {
    const std::uint16_t* s = raw.samples.data() + i * raw.channels;
    double sum = 0.0;
    for (int c = 0; c < colour; ++c) sum += s[c];
    px[i] = std::clamp(sum / (colour * scale), 0.0, 1.0);
    if (alpha && s[colour] == 0) valid.flags[i] = 0;
  }
  return {Image(raw.width, raw.height, std::move(px)), std::move(valid)};
}

Mask load_mask_png(const std::filesystem::path& path) {
  const RawPng raw = read_png(path);
  if (raw.channels != 1) fail(ErrorKind::kIo, path.string() + ": masks must be single-channel");
  std::map<std::uint16_t, std::int32_t> remap;
  for (std::uint16_t v : raw.samples) {
    if (v != 0) remap.emplace(v, 0);
  }
  std::int32_t next = 1;
  for (auto& [value, label] : remap) label = next++;
  std::vector<std::int32_t> labels(raw.samples.size(), 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (raw.samples[i] != 0) labels[i] = remap[raw.samples[i]];
  }
  return Mask(raw.width, raw.height, std::move(labels));
}

void save_panorama_png(const std::filesystem::path& path, const MaskedImage& img) {
  const int w = img.image.width();
  const int h = img.image.height();
  std::vector<std::uint16_t> samples(static_cast<std::size_t>(w) * h * 2);
  const auto px = img.image.pixels();
  for (std::size_t i = 0; i < px.size(); ++i) {
    const bool ok = img.valid.flags[i] != 0;
    samples[2 * i] = ok ? to16(px[i]) : 0;
    samples[2 * i + 1] = ok ? 65535 : 0;
  }
  write_png16(path, w, h, 2, samples);
}

void save_image_png(const std::filesystem::path& path, const Image& img) {
  std::vector<std::uint16_t> samples(img.size());
  const auto px = img.pixels();
  for (std::size_t i = 0; i < px.size(); ++i) samples[i] = to16(px[i]);
  write_png16(path, img.width(), img.height(), 1, samples);
}

void save_mask_png(const std::filesystem::path& path, const Mask& mask) {
  if (mask.label_count() > 65535) fail(ErrorKind::kIo, "too many labels for a 16-bit mask");
  std::vector<std::uint16_t> samples(mask.labels().size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    samples[i] = static_cast<std::uint16_t>(mask.labels()[i]);
  }
  write_png16(path, mask.width(), mask.height(), 1, samples);
}

PipelineConfig parse_config(const std::string& text) {
  PipelineConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      fail(ErrorKind::kConfig, "line " + std::to_string(lineno) + ": expected key=value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "tol_energy") {
      cfg.registration.tol_energy = parse_double(key, value);
    } else if (key == "max_iters") {
      cfg.registration.max_iters = parse_int(key, value);
    } else if (key == "gate_radius_fraction") {
      cfg.registration.gate_radius_fraction = parse_double(key, value);
    } else if (key == "allow_projective") {
      cfg.registration.allow_projective = parse_bool(key, value);
    } else if (key == "inlier_radius_fraction") {
      cfg.registration.inlier_radius_fraction = parse_double(key, value);
    } else if (key == "max_distortion_fraction") {
      cfg.registration.max_distortion_fraction = parse_double(key, value);
    } else if (key == "min_inliers") {
      cfg.registration.min_inliers = parse_int(key, value);
    } else if (key == "centroid_noise") {
      cfg.registration.centroid_noise = parse_double(key, value);
    } else if (key == "max_corner_sigma") {
      cfg.registration.max_corner_sigma = parse_double(key, value);
    } else if (key == "lambda_color") {
      cfg.weights.lambda_color = parse_double(key, value);
    } else if (key == "lambda_grad") {
      cfg.weights.lambda_grad = parse_double(key, value);
    } else if (key == "lambda_feat") {
      cfg.weights.lambda_feat = parse_double(key, value);
    } else if (key == "seam_axis") {
      if (value == "vertical") {
        cfg.seam_axis = StitchAxis::kVertical;
      } else if (value == "horizontal") {
        cfg.seam_axis = StitchAxis::kHorizontal;
      } else {
        fail(ErrorKind::kConfig, "seam_axis must be vertical or horizontal");
      }
    } else if (key == "feature_source") {
      if (value == "builtin") {
        cfg.feature_source = FeatureSource::kBuiltin;
      } else if (value == "file") {
        cfg.feature_source = FeatureSource::kFile;
      } else {
        fail(ErrorKind::kConfig, "feature_source must be builtin or file");
      }
    } else if (key == "k") {
      cfg.blend.k = parse_double(key, value);
    } else if (key == "band") {
      cfg.blend.band = parse_double(key, value);
    } else if (key == "exact_order") {
      cfg.exact_order = parse_bool(key, value);
    } else if (key == "reference_override") {
      if (value == "none" || value.empty()) {
        cfg.reference_override.reset();
      } else {
        cfg.reference_override = parse_int(key, value);
      }
    } else {
      fail(ErrorKind::kConfig, "unknown config key '" + key + "' on line " + std::to_string(lineno));
    }
  }
  try {
    cfg.validate();
  } catch (const StitchError& e) {
    fail(ErrorKind::kConfig, e.what());
  }
  return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kIo, "cannot open config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string report_to_json(const StitchReport& report) {
  json j;
  j["schema"] = "xstitch-report/1";
  j["order"] = report.order;
  j["reference"] = report.reference;
  json chained = json::array();
  for (const auto& h : report.chained) chained.push_back(homography_json(h));
  j["chained"] = chained;
  json pairs = json::array();
  for (const auto& p : report.pairs) {
    pairs.push_back({{"dst", p.dst},
                     {"src", p.src},
                     {"energy", p.energy},
                     {"model_kind", std::string(to_string(p.model_kind))},
                     {"iterations", p.iterations},
                     {"matches", p.matches}});
  }
  j["pairs"] = pairs;
  json fusions = json::array();
  for (const auto& f : report.fusions) {
    fusions.push_back({{"image", f.image},
                       {"previous", f.previous},
                       {"seam_cost", f.seam_cost},
                       {"seam_length", f.seam_length}});
  }
  j["fusions"] = fusions;
  j["canvas"] = {{"x0", report.canvas.bbox.x0},
                 {"y0", report.canvas.bbox.y0},
                 {"width", report.canvas.width()},
                 {"height", report.canvas.height()}};
  j["edge_count"] = report.edge_count;
  j["elapsed_ms"] = report.elapsed_ms;
  return j.dump(2) + "\n";
}

ReportSummary read_report(const std::filesystem::path& path) {
  const json j = read_json(path);
  try {
    ReportSummary r;
    r.reference = j.at("reference").get<int>();
    const json& c = j.at("canvas");
    const double x0 = c.at("x0").get<double>();
    const double y0 = c.at("y0").get<double>();
    r.canvas = BoundingBox{x0, y0, x0 + c.at("width").get<int>(), y0 + c.at("height").get<int>()};
    r.elapsed_ms = j.at("elapsed_ms").get<double>();
    return r;
  } catch (const json::exception& e) {
    fail(ErrorKind::kIo, path.string() + " is not a stitch report: " + e.what());
  }
}

SynthManifest read_synth_manifest(const std::filesystem::path& path) {
  const json j = read_json(path);
  const auto dir = path.parent_path();
  try {
    SynthManifest m;
    m.panorama_origin = {j.at("panorama_origin").at(0).get<double>(), j.at("panorama_origin").at(1).get<double>()};
    m.ground_truth = dir / j.at("ground_truth").get<std::string>();
    m.true_order = j.at("true_order").get<std::vector<int>>();
    for (const json& s : j.at("slices")) {
      m.images.push_back(dir / s.at("image").get<std::string>());
      m.masks.push_back(dir / s.at("mask").get<std::string>());
      Eigen::Matrix3d h;
      for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) h(r, c) = s.at("true_h").at(r).at(c).get<double>();
      }
      m.true_h.emplace_back(h);
    }
    return m;
  } catch (const json::exception& e) {
    fail(ErrorKind::kIo, path.string() + " is not a synth manifest: " + e.what());
  }
}

void write_synth_dataset(const std::filesystem::path& dir, const SynthSpec& spec,
                         const GroundTruth& gt) {
  std::error_code ec;
  std::filesystem::create_directories(dir / "slices", ec);
  std::filesystem::create_directories(dir / "masks", ec);
  if (ec) fail(ErrorKind::kIo, "cannot create " + dir.string());
  json slices = json::array();
  for (std::size_t i = 0; i < gt.slices.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "%03zu.png", i);
    save_image_png(dir / "slices" / name, gt.slices[i]);
    save_mask_png(dir / "masks" / name, gt.masks[i]);
    json centres = json::array();
    for (const Point2& p : gt.screw_centres[i]) centres.push_back({p.x, p.y});
    slices.push_back({{"image", std::string("slices/") + name},
                      {"mask", std::string("masks/") + name},
                      {"true_h", homography_json(gt.true_h[i])},
                      {"screw_centres", centres}});
  }
  save_image_png(dir / "ground_truth.png", gt.panorama);
  json j;
  j["schema"] = "xstitch-synth/1";
  j["spec"] = {{"resolution", spec.resolution},
               {"n_slices", spec.n_slices},
               {"overlap_fraction", spec.overlap_fraction},
               {"n_screws_per_slice", spec.n_screws_per_slice},
               {"warp_kind", std::string(to_string(spec.warp_kind))},
               {"warp_magnitude", spec.warp_magnitude},
               {"noise_sigma", spec.noise_sigma},
               {"seed", spec.seed}};
  j["true_order"] = gt.true_order;
  j["panorama_origin"] = {gt.panorama_origin.x, gt.panorama_origin.y};
  j["ground_truth"] = "ground_truth.png";
  j["slices"] = slices;
  std::ofstream out(dir / "manifest.json");
  if (!out) fail(ErrorKind::kIo, "cannot write manifest in " + dir.string());
  out << j.dump(2) << "\n";
}

}  // namespace xstitch
