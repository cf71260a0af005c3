#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;

namespace {

struct Workspace {
  fs::path dir;
  Workspace() {
    dir = fs::temp_directory_path() / ("xstitch_cli_" + std::to_string(std::random_device{}()));
    fs::create_directories(dir);
  }
  ~Workspace() { fs::remove_all(dir); }

  // Runs the CLI inside dir; stdout and stderr land in out.txt and err.txt.
  int run(const std::string& args) const {
    const std::string cmd = "cd '" + dir.string() + "' && '" XSTITCH_CLI "' " + args + " >out.txt 2>err.txt";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }
  std::string read(const std::string& name) const {
    std::ifstream in(dir / name);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }
};

std::string slices(const std::string& ds, int n, const char* kind) {
  std::string s;
  for (int i = 0; i < n; ++i) {
    char buf[64];
    std::snprintf(buf, sizeof buf, " %s/%s/%03d.png", ds.c_str(), kind, i);
    s += buf;
  }
  return s;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("synth, stitch and eval on a noiseless set") {
  Workspace w;
  REQUIRE(w.run("synth --out ds --resolution 256 --slices 3 --seed 5") == 0);
  CHECK(fs::exists(w.dir / "ds/manifest.json"));
  CHECK(fs::exists(w.dir / "ds/ground_truth.png"));

  REQUIRE(w.run("stitch --images" + slices("ds", 3, "slices") + " --masks" + slices("ds", 3, "masks") +
                " --output pano.png --report pano.json") == 0);
  CHECK(fs::exists(w.dir / "pano.png"));
  const auto report = nlohmann::json::parse(w.read("pano.json"));
  CHECK(report["order"].size() == 3);

  REQUIRE(w.run("eval --panorama pano.png --ground-truth ds --report pano.json") == 0);
  double ssim = 0, psnr = 0, ms = 0;
  REQUIRE(std::sscanf(w.read("out.txt").c_str(), "ssim=%lf psnr=%lf elapsed_ms=%lf", &ssim, &psnr, &ms) == 3);
  CHECK(ssim > 0.99);
  CHECK(ms == doctest::Approx(report["elapsed_ms"].get<double>()).epsilon(1e-3));

  REQUIRE(w.run("eval --panorama pano.png --ground-truth pano.png") == 0);
  CHECK(w.read("out.txt") == "ssim=1.000000 psnr=inf elapsed_ms=na\n");
}

TEST_CASE("stitch output is reproducible") {
  Workspace w;
  REQUIRE(w.run("synth --out ds --resolution 256 --slices 3 --warp affine --noise 0.02 --seed 6") == 0);
  const std::string args = "stitch --images" + slices("ds", 3, "slices") + " --auto-segment --output ";
  REQUIRE(w.run(args + "a.png") == 0);
  REQUIRE(w.run(args + "b.png") == 0);
  CHECK(w.read("a.png") == w.read("b.png"));
  auto ra = nlohmann::json::parse(w.read("a.json"));
  auto rb = nlohmann::json::parse(w.read("b.json"));
  ra.erase("elapsed_ms");
  rb.erase("elapsed_ms");
  CHECK(ra == rb);
}

TEST_CASE("segment-fallback writes label masks") {
  Workspace w;
  REQUIRE(w.run("synth --out ds --resolution 256 --slices 2 --screws 6 --seed 2") == 0);
  REQUIRE(w.run("segment-fallback --image ds/slices/000.png --output m.png") == 0);
  CHECK(fs::exists(w.dir / "m.png"));
}

TEST_CASE("exit codes") {
  Workspace w;
  REQUIRE(w.run("synth --out ds --resolution 256 --slices 3 --overlap 0.3 --seed 5") == 0);
  const auto manifest = nlohmann::json::parse(w.read("ds/manifest.json"));
  const int top = manifest["true_order"][0].get<int>();
  const int bottom = manifest["true_order"][2].get<int>();
  char pair[256];
  std::snprintf(pair, sizeof pair, "--images ds/slices/%03d.png ds/slices/%03d.png --masks ds/masks/%03d.png ds/masks/%03d.png",
                top, bottom, top, bottom);

  SUBCASE("one image is a usage error") {
    CHECK(w.run("stitch --images ds/slices/000.png --masks ds/masks/000.png --output p.png") == 64);
  }
  SUBCASE("missing masks is a usage error") {
    CHECK(w.run("stitch --images" + slices("ds", 3, "slices") + " --output p.png") == 64);
  }
  SUBCASE("unknown subcommand or flag is a usage error") {
    CHECK(w.run("frobnicate") == 64);
    CHECK(w.run("stitch --bogus") == 64);
    CHECK(w.run("synth --out x --warp rigid") == 64);
  }
  SUBCASE("disjoint pair is an empty overlap with its indices reported") {
    CHECK(w.run(std::string("stitch ") + pair + " --output p.png") == 2);
    CHECK(w.read("err.txt").find("(pair ") != std::string::npos);
  }
  SUBCASE("missing input is an I/O error") {
    CHECK(w.run("stitch --images nope.png ds/slices/000.png --auto-segment --output p.png") == 5);
    CHECK(w.run("eval --panorama nope.png --ground-truth ds/ground_truth.png") == 5);
  }
  SUBCASE("unknown config keys are rejected") {
    std::ofstream(w.dir / "bad.cfg") << "lambda_colour = 1\n";
    CHECK(w.run("stitch --images" + slices("ds", 3, "slices") + " --auto-segment --config bad.cfg --output p.png") == 6);
    CHECK(w.read("err.txt").find("lambda_colour") != std::string::npos);
  }
  SUBCASE("empty sweep grid is a usage error") {
    CHECK(w.run("sweep --buckets ''") == 64);
    CHECK(w.run("sweep --resolutions ''") == 64);
  }
  SUBCASE("infeasible synth spec") {
    CHECK(w.run("synth --out x --overlap 0.05") == 11);
  }
}

TEST_CASE("one-cell sweep is reproducible and records the cell") {
  Workspace w;
  const std::string args = "sweep --buckets 40-60 --resolutions 256 --seeds 2 --jobs 2 --out ";
  REQUIRE(w.run(args + "a.tsv") == 0);
  REQUIRE(w.run(args + "b.tsv") == 0);
  const std::string a = w.read("a.tsv"), b = w.read("b.tsv");
  CHECK(a.rfind("overlap\tresolution", 0) == 0);
  CHECK(a.find("\n40-60\t256\t2\t0\t") != std::string::npos);
  // identical up to the elapsed column
  auto metrics = [](const std::string& t) {
    const auto row = t.substr(t.find('\n') + 1);
    std::string out;
    int tab = 0;
    for (char c : row) {
      if (c == '\t') ++tab;
      if (tab != 6) out += c;
    }
    return out;
  };
  CHECK(metrics(a) == metrics(b));
}

}
