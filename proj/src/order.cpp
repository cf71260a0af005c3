#include "xstitch/order.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>

namespace xstitch {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool edge_failure(ErrorKind kind) {
  return kind == ErrorKind::kNoValidMatches || kind == ErrorKind::kEmptyOverlap ||
         kind == ErrorKind::kDegenerateConfiguration;
}

// Homography taking image b into image a's frame, falling back to the
// inverse of the opposite registration.
Homography link(const PairwiseEnergyMatrix& m, int a, int b) {
  if (m.has_edge(a, b)) return m.h(a, b);
  if (m.has_edge(b, a)) return invert(m.h(b, a));
  throw StitchError(ErrorKind::kDisconnectedSet, "no registration links the pair")
      .with_pair(a, b);
}

}  // namespace

PairwiseEnergyMatrix::PairwiseEnergyMatrix(int n, std::vector<std::pair<int, int>> extents)
    : n_(n), extents_(std::move(extents)), entries_(static_cast<std::size_t>(n) * n) {
  if (static_cast<int>(extents_.size()) != n) {
    fail(ErrorKind::kInvalidArgument, "one extent per image is required");
  }
}

double PairwiseEnergyMatrix::energy(int i, int j) const {
  return has_edge(i, j) ? entry(i, j).registration->energy : kInf;
}

const Homography& PairwiseEnergyMatrix::h(int i, int j) const {
  if (!has_edge(i, j)) fail(ErrorKind::kInvalidArgument, "no registration for this pair");
  return entry(i, j).registration->h;
}

PairwiseEnergyMatrix PairwiseEnergyMatrix::from_energies(const std::vector<std::vector<double>>& e) {
  const int n = static_cast<int>(e.size());
  PairwiseEnergyMatrix m(n, std::vector<std::pair<int, int>>(static_cast<std::size_t>(n), {0, 0}));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const double v = e[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      if (std::isfinite(v)) {
        RegistrationResult r;
        r.energy = v;
        r.energy_history = {v};
        m.entry(i, j).registration = r;
      } else {
        m.entry(i, j).failure = ErrorKind::kEmptyOverlap;
      }
    }
  }
  return m;
}

PairwiseEnergyMatrix build_energy_matrix(const std::vector<CentroidSet>& centroid_sets,
                                         const RegistrationConfig& cfg) {
  const int n = static_cast<int>(centroid_sets.size());
  if (n < 2) fail(ErrorKind::kInvalidArgument, "at least two images are required");
  std::vector<std::pair<int, int>> extents;
  for (const auto& c : centroid_sets) extents.emplace_back(c.width, c.height);
  PairwiseEnergyMatrix m(n, std::move(extents));

  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n) * n);
  const int pairs = n * n;
#pragma omp parallel for schedule(dynamic)
  for (int p = 0; p < pairs; ++p) {
    const int i = p / n;
    const int j = p % n;
    if (i == j) continue;
    PairEntry& entry = m.entry(i, j);
    const CentroidSet& dst = centroid_sets[static_cast<std::size_t>(i)];
    const CentroidSet& src = centroid_sets[static_cast<std::size_t>(j)];
    try {
      if (dst.empty() || src.empty()) {
        fail(ErrorKind::kNoValidMatches, "image has no screw centroids");
      }
      RegistrationResult r = register_pair(dst, src, cfg);
      const double diag = std::hypot(dst.width, dst.height);
      if (diag > 0.0 && r.rms() > cfg.inlier_radius_fraction * diag) {
        entry.failure = ErrorKind::kEmptyOverlap;
        entry.message = "registration residual too large for a real overlap";
      } else if (r.inliers < cfg.min_inliers || 4 * r.conflicts > r.inliers) {
        entry.failure = ErrorKind::kEmptyOverlap;
        entry.message = "too few consistent screw matches for a real overlap";
      } else {
        entry.registration = std::move(r);
      }
    } catch (const StitchError& e) {
      if (edge_failure(e.kind())) {
        entry.failure = e.kind();
        entry.message = e.what();
      } else {
        errors[static_cast<std::size_t>(p)] = std::current_exception();
      }
    } catch (...) {
      errors[static_cast<std::size_t>(p)] = std::current_exception();
    }
  }
  for (std::size_t p = 0; p < errors.size(); ++p) {
    if (!errors[p]) continue;
    try {
      std::rethrow_exception(errors[p]);
    } catch (const StitchError& e) {
      throw e.with_pair(static_cast<int>(p) / n, static_cast<int>(p) % n);
    }
  }
  return m;
}

double path_energy(const PairwiseEnergyMatrix& m, const std::vector<int>& order) {
  double total = 0.0;
  for (std::size_t k = 1; k < order.size(); ++k) total += m.energy(order[k - 1], order[k]);
  return total;
}

std::vector<int> order_greedy(const PairwiseEnergyMatrix& m) {
  const int n = m.size();
  if (n < 2) fail(ErrorKind::kInvalidArgument, "ordering needs at least two images");
  int bi = -1, bj = -1;
  double best = kInf;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (m.has_edge(i, j) && m.energy(i, j) < best) {
        best = m.energy(i, j);
        bi = i;
        bj = j;
      }
    }
  }
  if (bi < 0) fail(ErrorKind::kDisconnectedSet, "no image pair registers");

  std::vector<int> path{bi, bj};
  std::vector<bool> used(static_cast<std::size_t>(n), false);
  used[static_cast<std::size_t>(bi)] = used[static_cast<std::size_t>(bj)] = true;
  while (static_cast<int>(path.size()) < n) {
    int pick = -1;
    bool at_head = false;
    double cost = kInf;
    for (int k = 0; k < n; ++k) {
      if (used[static_cast<std::size_t>(k)]) continue;
      if (m.has_edge(path.back(), k) && m.energy(path.back(), k) < cost) {
        cost = m.energy(path.back(), k);
        pick = k;
        at_head = false;
      }
      if (m.has_edge(k, path.front()) && m.energy(k, path.front()) < cost) {
        cost = m.energy(k, path.front());
        pick = k;
        at_head = true;
      }
    }
    if (pick < 0) {
      fail(ErrorKind::kDisconnectedSet, "the images do not form a single registered chain");
    }
    used[static_cast<std::size_t>(pick)] = true;
    if (at_head) {
      path.insert(path.begin(), pick);
    } else {
      path.push_back(pick);
    }
  }
  return path;
}

std::vector<int> order_exact(const PairwiseEnergyMatrix& m) {
  const int n = m.size();
  if (n > kMaxExactImages) {
    fail(ErrorKind::kTooManyImages, "exact ordering supports at most " +
                                        std::to_string(kMaxExactImages) + " images");
  }
  if (n < 2) fail(ErrorKind::kInvalidArgument, "ordering needs at least two images");
  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<int> best_perm;
  double best = kInf;
  do {
    double cost = 0.0;
    for (int k = 1; k < n && cost < best; ++k) {
      cost += m.energy(perm[static_cast<std::size_t>(k - 1)], perm[static_cast<std::size_t>(k)]);
    }
    // Strict improvement keeps the lexicographically first minimizer.
    if (cost < best) {
      best = cost;
      best_perm = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  if (best_perm.empty()) {
    fail(ErrorKind::kDisconnectedSet, "no ordering links every image");
  }
  return best_perm;
}

double axis_shift(const PairwiseEnergyMatrix& m, int i, int j, StitchAxis axis) {
  const auto [w, h] = m.extent(j);
  const Point2 centre{0.5 * w, 0.5 * h};
  const Point2 moved = apply_homography(link(m, i, j), centre);
  return axis == StitchAxis::kVertical ? moved.y - centre.y : moved.x - centre.x;
}

StitchPlan pick_reference_and_chain(const PairwiseEnergyMatrix& m, std::vector<int> order,
                                    std::optional<int> reference_override, StitchAxis axis) {
  const int n = m.size();
  std::vector<int> sorted = order;
  std::sort(sorted.begin(), sorted.end());
  if (static_cast<int>(order.size()) != n ||
      std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end() ||
      (n > 0 && (sorted.front() != 0 || sorted.back() != n - 1))) {
    fail(ErrorKind::kInvalidArgument, "order is not a permutation of the images");
  }

  StitchPlan plan;
  if (reference_override) {
    const int ref = *reference_override;
    const auto it = std::find(order.begin(), order.end(), ref);
    if (it == order.end()) fail(ErrorKind::kInvalidArgument, "reference index out of range");
    // Keep the reference in the first half of the chain.
    if (std::distance(order.begin(), it) > (n - 1) / 2) std::reverse(order.begin(), order.end());
    plan.reference = ref;
  } else {
    double mean = 0.0;
    for (int k = 1; k < n; ++k) {
      mean += axis_shift(m, order[static_cast<std::size_t>(k - 1)], order[static_cast<std::size_t>(k)], axis);
    }
    mean /= std::max(1, n - 1);
    if (std::abs(mean) < 1.0) {
      fail(ErrorKind::kAmbiguousOrientation,
           "mean step along the chain is below one pixel; pass an explicit reference");
    }
    if (mean < 0.0) std::reverse(order.begin(), order.end());
    plan.reference = order.front();
  }
  plan.order = order;

  plan.chained.assign(static_cast<std::size_t>(n), Homography::identity());
  const auto pos = static_cast<int>(
      std::distance(order.begin(), std::find(order.begin(), order.end(), plan.reference)));
  for (int k = pos + 1; k < n; ++k) {
    const int prev = order[static_cast<std::size_t>(k - 1)];
    const int cur = order[static_cast<std::size_t>(k)];
    plan.chained[static_cast<std::size_t>(cur)] =
        compose(plan.chained[static_cast<std::size_t>(prev)], link(m, prev, cur));
  }
  for (int k = pos - 1; k >= 0; --k) {
    const int next = order[static_cast<std::size_t>(k + 1)];
    const int cur = order[static_cast<std::size_t>(k)];
    plan.chained[static_cast<std::size_t>(cur)] =
        compose(plan.chained[static_cast<std::size_t>(next)], link(m, next, cur));
  }
  return plan;
}

}  // namespace xstitch
