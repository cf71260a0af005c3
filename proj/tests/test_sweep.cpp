#include <algorithm>
#include <sstream>

#include "doctest.h"
#include "xstitch/error.hpp"
#include "xstitch/sweep.hpp"

using namespace xstitch;

namespace {

SweepGrid small_grid() {
  SweepGrid g = SweepGrid::standard();
  g.buckets = {{0.4, 0.6}, {0.6, 0.8}};
  g.resolutions = {256};
  g.seeds = 2;
  return g;
}

}  // namespace

TEST_SUITE("sweep") {

TEST_CASE("standard grid") {
  const SweepGrid g = SweepGrid::standard();
  CHECK(g.buckets.size() == 3);
  CHECK(g.buckets[0].lo == 0.2);
  CHECK(g.buckets[2].hi == 0.9);
  CHECK(g.resolutions == std::vector<int>{512, 1024, 1920});
  CHECK(g.seeds == 10);
}

TEST_CASE("runs are stratified across the bucket") {
  const OverlapBucket b{0.2, 0.4};
  CHECK(run_overlap(b, 0, 10) == doctest::Approx(0.21));
  CHECK(run_overlap(b, 9, 10) == doctest::Approx(0.39));
  CHECK(run_overlap(b, 0, 1) == doctest::Approx(0.3));
}

TEST_CASE("sweep tables are reproducible and independent of the job count") {
  // Every column but the wall-clock one must match.
  auto without_elapsed = [](const std::string& table) {
    std::string out, line;
    std::istringstream in(table);
    while (std::getline(in, line)) {
      std::istringstream cols(line);
      std::string col;
      for (int k = 0; std::getline(cols, col, '\t'); ++k) {
        if (k != 6) out += col + "|";
      }
      out += "\n";
    }
    return out;
  };
  const SweepGrid g = small_grid();
  const auto a = without_elapsed(sweep_table(run_sweep(g, 1)));
  CHECK(a == without_elapsed(sweep_table(run_sweep(g, 1))));
  CHECK(a == without_elapsed(sweep_table(run_sweep(g, 3))));
  CHECK(std::count(a.begin(), a.end(), '\n') == 3);
}

TEST_CASE("failed runs are recorded per cell") {
  SweepGrid g = small_grid();
  g.buckets = {{0.05, 0.1}};  // below the generator's minimum overlap
  g.seeds = 2;
  const auto cells = run_sweep(g);
  REQUIRE(cells.size() == 1);
  CHECK(cells[0].runs == 2);
  CHECK(cells[0].failures == 2);
  CHECK_FALSE(cells[0].ok());
  CHECK(cells[0].first_error.rfind("InfeasibleSpec", 0) == 0);
}

TEST_CASE("empty grids are rejected") {
  SweepGrid g = small_grid();
  g.buckets.clear();
  CHECK_THROWS_AS(run_sweep(g), StitchError);
  g = small_grid();
  g.resolutions.clear();
  CHECK_THROWS_AS(run_sweep(g), StitchError);
  g = small_grid();
  g.seeds = 0;
  CHECK_THROWS_AS(run_sweep(g), StitchError);
}

}
