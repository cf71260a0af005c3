#include "xstitch/register.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <tuple>

#include "xstitch/error.hpp"

namespace xstitch {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Hartley normalization: centroid to the origin, mean distance sqrt(2).
Eigen::Matrix3d normalizing_transform(std::span<const Point2> pts) {
  Point2 mean;
  for (Point2 p : pts) mean = mean + p;
  mean = (1.0 / static_cast<double>(pts.size())) * mean;
  double dist = 0.0;
  for (Point2 p : pts) dist += std::sqrt(squared_distance(p, mean));
  dist /= static_cast<double>(pts.size());
  const double s = dist > 0.0 ? std::sqrt(2.0) / dist : 1.0;
  Eigen::Matrix3d t;
  t << s, 0, -s * mean.x, 0, s, -s * mean.y, 0, 0, 1;
  return t;
}

Point2 transform_point(const Eigen::Matrix3d& m, Point2 p) {
  const Eigen::Vector3d v = m * Eigen::Vector3d(p.x, p.y, 1.0);
  return {v.x() / v.z(), v.y() / v.z()};
}

double geometric_cost(const Eigen::Matrix<double, 8, 1>& h, std::span<const Point2> src,
                      std::span<const Point2> dst) {
  double cost = 0.0;
  for (std::size_t i = 0; i < src.size(); ++i) {
    const double w = h(6) * src[i].x + h(7) * src[i].y + 1.0;
    const double u = (h(0) * src[i].x + h(1) * src[i].y + h(2)) / w;
    const double v = (h(3) * src[i].x + h(4) * src[i].y + h(5)) / w;
    cost += (u - dst[i].x) * (u - dst[i].x) + (v - dst[i].y) * (v - dst[i].y);
  }
  return cost;
}

// Levenberg-Marquardt on the reprojection error, entries normalized by h33.
Eigen::Matrix3d refine_projective(const Eigen::Matrix3d& initial, std::span<const Point2> src,
                                  std::span<const Point2> dst) {
  Eigen::Matrix<double, 8, 1> h;
  const Eigen::Matrix3d m0 = initial / initial(2, 2);
  for (int i = 0; i < 8; ++i) h(i) = m0(i / 3, i % 3);
  double cost = geometric_cost(h, src, dst);
  double lambda = 1e-3;
  for (int iter = 0; iter < 30 && cost > 0.0; ++iter) {
    Eigen::Matrix<double, 8, 8> jtj = Eigen::Matrix<double, 8, 8>::Zero();
    Eigen::Matrix<double, 8, 1> jtr = Eigen::Matrix<double, 8, 1>::Zero();
    for (std::size_t i = 0; i < src.size(); ++i) {
      const double x = src[i].x;
      const double y = src[i].y;
      const double w = h(6) * x + h(7) * y + 1.0;
      const double u = (h(0) * x + h(1) * y + h(2)) / w;
      const double v = (h(3) * x + h(4) * y + h(5)) / w;
      Eigen::Matrix<double, 8, 1> ju, jv;
      ju << x / w, y / w, 1.0 / w, 0, 0, 0, -x * u / w, -y * u / w;
      jv << 0, 0, 0, x / w, y / w, 1.0 / w, -x * v / w, -y * v / w;
      jtj += ju * ju.transpose() + jv * jv.transpose();
      jtr += ju * (u - dst[i].x) + jv * (v - dst[i].y);
    }
    bool improved = false;
    for (int attempt = 0; attempt < 8; ++attempt) {
      Eigen::Matrix<double, 8, 8> damped = jtj;
      damped.diagonal() *= (1.0 + lambda);
      const Eigen::Matrix<double, 8, 1> step = damped.ldlt().solve(-jtr);
      if (!step.allFinite()) break;
      const Eigen::Matrix<double, 8, 1> trial = h + step;
      const double trial_cost = geometric_cost(trial, src, dst);
      if (std::isfinite(trial_cost) && trial_cost < cost) {
        const double gain = cost - trial_cost;
        h = trial;
        cost = trial_cost;
        lambda = std::max(lambda * 0.1, 1e-12);
        improved = gain > 1e-15 * (1.0 + cost);
        break;
      }
      lambda *= 10.0;
    }
    if (!improved) break;
  }
  Eigen::Matrix3d m;
  m << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), 1.0;
  return m;
}

Homography fit_translation(std::span<const PointPair> pairs) {
  double tx = 0.0, ty = 0.0;
  for (const auto& p : pairs) {
    tx += p.dst.x - p.src.x;
    ty += p.dst.y - p.src.y;
  }
  const double n = static_cast<double>(pairs.size());
  return Homography::translation(tx / n, ty / n);
}

struct Centered {
  Point2 src_mean;
  Point2 dst_mean;
  std::vector<Point2> src;
  std::vector<Point2> dst;
  double spread = 0.0;  // sum of squared centered src norms
};

Centered center(std::span<const PointPair> pairs) {
  Centered c;
  for (const auto& p : pairs) {
    c.src_mean = c.src_mean + p.src;
    c.dst_mean = c.dst_mean + p.dst;
  }
  const double n = static_cast<double>(pairs.size());
  c.src_mean = (1.0 / n) * c.src_mean;
  c.dst_mean = (1.0 / n) * c.dst_mean;
  for (const auto& p : pairs) {
    c.src.push_back(p.src - c.src_mean);
    c.dst.push_back(p.dst - c.dst_mean);
    c.spread += squared_distance(p.src, c.src_mean);
  }
  return c;
}

// Relative threshold below which a point spread counts as collapsed.
constexpr double kDegenerateRatio = 1e-10;

Homography fit_similarity(std::span<const PointPair> pairs) {
  const Centered c = center(pairs);
  const double scale2 = std::max(1.0, c.src_mean.x * c.src_mean.x + c.src_mean.y * c.src_mean.y);
  if (c.spread <= kDegenerateRatio * scale2) {
    fail(ErrorKind::kDegenerateConfiguration, "similarity fit: source points coincide");
  }
  double a = 0.0, b = 0.0;
  for (std::size_t i = 0; i < c.src.size(); ++i) {
    a += c.src[i].x * c.dst[i].x + c.src[i].y * c.dst[i].y;
    b += c.src[i].x * c.dst[i].y - c.src[i].y * c.dst[i].x;
  }
  a /= c.spread;
  b /= c.spread;
  Eigen::Matrix3d m;
  m << a, -b, 0, b, a, 0, 0, 0, 1;
  m(0, 2) = c.dst_mean.x - (a * c.src_mean.x - b * c.src_mean.y);
  m(1, 2) = c.dst_mean.y - (b * c.src_mean.x + a * c.src_mean.y);
  try {
    return Homography(m);
  } catch (const StitchError&) {
    fail(ErrorKind::kDegenerateConfiguration, "similarity fit is singular");
  }
}

Homography fit_affine(std::span<const PointPair> pairs) {
  const Centered c = center(pairs);
  Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
  Eigen::Matrix2d cross = Eigen::Matrix2d::Zero();
  for (std::size_t i = 0; i < c.src.size(); ++i) {
    const Eigen::Vector2d s(c.src[i].x, c.src[i].y);
    const Eigen::Vector2d d(c.dst[i].x, c.dst[i].y);
    cov += s * s.transpose();
    cross += d * s.transpose();
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(cov);
  const double lo = eig.eigenvalues()(0);
  const double hi = eig.eigenvalues()(1);
  if (!(hi > 0.0) || lo <= kDegenerateRatio * hi) {
    fail(ErrorKind::kDegenerateConfiguration, "affine fit: source points are collinear");
  }
  const Eigen::Matrix2d a = cross * cov.inverse();
  Eigen::Matrix3d m = Eigen::Matrix3d::Identity();
  m.topLeftCorner<2, 2>() = a;
  const Eigen::Vector2d t =
      Eigen::Vector2d(c.dst_mean.x, c.dst_mean.y) - a * Eigen::Vector2d(c.src_mean.x, c.src_mean.y);
  m(0, 2) = t.x();
  m(1, 2) = t.y();
  try {
    return Homography(m);
  } catch (const StitchError&) {
    fail(ErrorKind::kDegenerateConfiguration, "affine fit is singular");
  }
}

Homography fit_projective(std::span<const PointPair> pairs) {
  std::vector<Point2> src, dst;
  for (const auto& p : pairs) {
    src.push_back(p.src);
    dst.push_back(p.dst);
  }
  const Eigen::Matrix3d ts = normalizing_transform(src);
  const Eigen::Matrix3d td = normalizing_transform(dst);
  std::vector<Point2> ns, nd;
  for (std::size_t i = 0; i < src.size(); ++i) {
    ns.push_back(transform_point(ts, src[i]));
    nd.push_back(transform_point(td, dst[i]));
  }
  const auto rows = static_cast<Eigen::Index>(2 * ns.size());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(std::max<Eigen::Index>(rows, 9), 9);
  for (std::size_t i = 0; i < ns.size(); ++i) {
    const double x = ns[i].x, y = ns[i].y, u = nd[i].x, v = nd[i].y;
    const auto r = static_cast<Eigen::Index>(2 * i);
    a.row(r) << -x, -y, -1, 0, 0, 0, u * x, u * y, u;
    a.row(r + 1) << 0, 0, 0, -x, -y, -1, v * x, v * y, v;
  }
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  if (!(s(0) > 0.0) || s(7) <= 1e-8 * s(0)) {
    fail(ErrorKind::kDegenerateConfiguration, "projective fit: correspondences are degenerate");
  }
  const Eigen::VectorXd h = svd.matrixV().col(8);
  Eigen::Matrix3d hn;
  hn << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), h(8);
  if (std::abs(hn(2, 2)) < kHomographyEpsilon) {
    fail(ErrorKind::kDegenerateConfiguration, "projective fit maps the origin to infinity");
  }
  hn = refine_projective(hn, ns, nd);
  const Eigen::Matrix3d m = td.inverse() * hn * ts;
  try {
    return Homography(m);
  } catch (const StitchError&) {
    fail(ErrorKind::kDegenerateConfiguration, "projective fit is singular");
  }
}

// Rejects fits that fold or flip I2's raster, rescale it beyond [0.9, 1.1],
// or bend it further than `max_distortion` of its larger side away from the
// closest similarity.
bool plausible(const Homography& h, const CentroidSet& src, double max_distortion) {
  if (src.width <= 0 || src.height <= 0) return true;
  const double w = src.width, hh = src.height;
  const Point2 corners[] = {{0, 0}, {w, 0}, {w, hh}, {0, hh}};
  const auto& m = h.matrix();
  Point2 mapped[4];
  for (int i = 0; i < 4; ++i) {
    const double den = m(2, 0) * corners[i].x + m(2, 1) * corners[i].y + m(2, 2);
    if (den <= 1e-6) return false;
    mapped[i] = apply_homography(h, corners[i]);
  }
  for (int i = 0; i < 4; ++i) {
    const Point2 a = mapped[i] - mapped[(i + 3) % 4];
    const Point2 b = mapped[(i + 1) % 4] - mapped[i];
    if (a.x * b.y - a.y * b.x <= 0.0) return false;
  }
  std::vector<PointPair> pairs;
  for (int i = 0; i < 4; ++i) pairs.push_back({corners[i], mapped[i]});
  const Homography sim = fit_similarity(pairs);
  const double scale = std::sqrt(std::abs(sim.matrix().topLeftCorner<2, 2>().determinant()));
  if (scale < 0.9 || scale > 1.1) return false;
  const double limit = max_distortion * std::max(w, hh);
  for (int i = 0; i < 4; ++i) {
    if (squared_distance(apply_homography(sim, corners[i]), mapped[i]) > limit * limit) return false;
  }
  return true;
}

int parameter_count(ModelKind kind) {
  switch (kind) {
    case ModelKind::kTranslation: return 2;
    case ModelKind::kSimilarity: return 4;
    case ModelKind::kAffine: return 6;
    case ModelKind::kProjective: return 8;
  }
  return 8;
}

// Rows of d(mapped point)/d(parameters) at p for the given kind, using the
// parametrization each estimator solves for.
Eigen::Matrix<double, 2, Eigen::Dynamic> point_jacobian(const Homography& h, ModelKind kind, Point2 p) {
  const double x = p.x, y = p.y;
  Eigen::Matrix<double, 2, Eigen::Dynamic> j;
  switch (kind) {
    case ModelKind::kTranslation:
      j.resize(2, 2);
      j << 1, 0, 0, 1;
      break;
    case ModelKind::kSimilarity:
      j.resize(2, 4);
      j << x, -y, 1, 0, y, x, 0, 1;
      break;
    case ModelKind::kAffine:
      j.resize(2, 6);
      j << x, y, 1, 0, 0, 0, 0, 0, 0, x, y, 1;
      break;
    case ModelKind::kProjective: {
      const auto& m = h.matrix();
      const double w = m(2, 0) * x + m(2, 1) * y + m(2, 2);
      const Point2 q = apply_homography(h, p);
      j.resize(2, 8);
      j << x / w, y / w, 1 / w, 0, 0, 0, -x * q.x / w, -y * q.x / w,
           0, 0, 0, x / w, y / w, 1 / w, -x * q.y / w, -y * q.y / w;
      break;
    }
  }
  return j;
}

// Largest standard deviation of a mapped I2 corner when each matched centroid
// carries independent noise of `noise` pixels per coordinate.
double corner_sigma(const Homography& h, ModelKind kind, std::span<const PointPair> pairs,
                    const CentroidSet& src, double noise) {
  if (src.width <= 0 || src.height <= 0) return 0.0;
  const int p = parameter_count(kind);
  Eigen::MatrixXd normal = Eigen::MatrixXd::Zero(p, p);
  for (const auto& pair : pairs) {
    const auto j = point_jacobian(h, kind, pair.src);
    normal += j.transpose() * j;
  }
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(normal);
  if (ldlt.info() != Eigen::Success || ldlt.rcond() < 1e-14) return std::numeric_limits<double>::infinity();
  const double w = src.width, hh = src.height;
  double worst = 0.0;
  for (Point2 c : {Point2{0, 0}, Point2{w, 0}, Point2{w, hh}, Point2{0, hh}}) {
    const auto j = point_jacobian(h, kind, c);
    const Eigen::MatrixXd cov = j * ldlt.solve(Eigen::MatrixXd(j.transpose()));
    worst = std::max(worst, std::sqrt(std::max(0.0, cov.trace())));
  }
  return noise * worst;
}

// 10% quantile of the chi-square distribution (Wilson-Hilferty).
double chi_square_lower(int dof) {
  const double k = dof;
  const double a = 2.0 / (9.0 * k);
  const double c = 1.0 - a - 1.2815515655446004 * std::sqrt(a);
  return std::max(k * c * c * c, 1e-3);
}

// Floor on the estimated centroid noise, pixels.
constexpr double kMinNoise = 1e-6;

struct Fit {
  Homography h;
  ModelKind kind;
};

double residual_sum(std::span<const PointPair> pairs, const Homography& h) {
  double sum = 0.0;
  for (const auto& p : pairs) sum += squared_distance(apply_homography(h, p.src), p.dst);
  return sum;
}

// Centroid noise is bounded above (90%) from the residual of the richest
// plausible fit that leaves spare degrees of freedom, or taken from
// cfg.centroid_noise when none does. The simplest kind whose extra residual
// over the richest fit that noise explains (chi-square mean plus three
// deviations) and whose predicted corner spread stays within
// cfg.max_corner_sigma wins. Failing that, the kind with the least predicted
// corner variance plus mean squared excess residual.
std::optional<Fit> fit_model(std::span<const PointPair> pairs, const CentroidSet& src,
                             const RegistrationConfig& cfg) {
  struct Candidate {
    Fit fit;
    double rss;
  };
  const int n = static_cast<int>(pairs.size());
  std::vector<Candidate> fits;
  for (int k = 0; k <= static_cast<int>(ModelKind::kProjective); ++k) {
    const auto kind = static_cast<ModelKind>(k);
    if (kind == ModelKind::kProjective && !cfg.allow_projective) continue;
    if (n < minimum_pairs(kind)) continue;
    try {
      Homography h = estimate_transform(pairs, kind);
      if (kind != ModelKind::kTranslation && !plausible(h, src, cfg.max_distortion_fraction)) continue;
      fits.push_back({Fit{h, kind}, residual_sum(pairs, h)});
    } catch (const StitchError& e) {
      if (e.kind() != ErrorKind::kDegenerateConfiguration) throw;
    }
  }
  if (fits.empty()) return std::nullopt;

  double noise_bound = cfg.centroid_noise;
  for (auto it = fits.rbegin(); it != fits.rend(); ++it) {
    const int dof = 2 * n - parameter_count(it->fit.kind);
    if (dof > 0) {
      noise_bound = std::max(std::sqrt(it->rss / chi_square_lower(dof)), kMinNoise);
      break;
    }
  }
  const Candidate& rich = fits.back();
  const Fit* best = nullptr;
  double best_error = std::numeric_limits<double>::infinity();
  for (const auto& c : fits) {
    const double df = parameter_count(rich.fit.kind) - parameter_count(c.fit.kind);
    const double excess = c.rss - rich.rss;
    const double spread = c.fit.kind == ModelKind::kTranslation
                              ? 0.0
                              : corner_sigma(c.fit.h, c.fit.kind, pairs, src, noise_bound);
    if (excess <= noise_bound * noise_bound * (df + 3.0 * std::sqrt(2.0 * df)) &&
        spread <= cfg.max_corner_sigma) {
      return c.fit;
    }
    const double error = spread * spread + std::max(0.0, excess) / n;
    if (error < best_error) {
      best_error = error;
      best = &c.fit;
    }
  }
  return *best;
}

std::optional<double> try_energy(const CentroidSet& c1, const CentroidSet& c2, const Homography& h,
                                 double inset) {
  try {
    return align_energy(c1, c2, h, true, inset);
  } catch (const StitchError& e) {
    if (e.kind() != ErrorKind::kEmptyOverlap) throw;
    return std::nullopt;
  }
}

}  // namespace

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::kTranslation: return "translation";
    case ModelKind::kSimilarity: return "similarity";
    case ModelKind::kAffine: return "affine";
    case ModelKind::kProjective: return "projective";
  }
  return "unknown";
}

ModelKind model_kind_from_string(std::string_view name) {
  for (int k = 0; k <= 3; ++k) {
    if (to_string(static_cast<ModelKind>(k)) == name) return static_cast<ModelKind>(k);
  }
  fail(ErrorKind::kInvalidArgument, "unknown model kind '" + std::string(name) + "'");
}

int minimum_pairs(ModelKind kind) {
  switch (kind) {
    case ModelKind::kTranslation: return 1;
    case ModelKind::kSimilarity: return 2;
    case ModelKind::kAffine: return 3;
    case ModelKind::kProjective: return 4;
  }
  return 4;
}

double RegistrationResult::rms() const {
  return overlap_count > 0 ? std::sqrt(energy / overlap_count) : 0.0;
}

bool in_overlap(const CentroidSet& dst, Point2 p, double inset) {
  if (dst.width <= 0 || dst.height <= 0) return true;
  return p.x >= inset && p.y >= inset && p.x <= dst.width - 1 - inset &&
         p.y <= dst.height - 1 - inset;
}

double overlap_inset(const CentroidSet& dst) {
  return dst.empty() ? 0.0 : dst.max_instance_radius + 1.0;
}

double align_energy(const CentroidSet& c1, const CentroidSet& c2, const Homography& h,
                    bool overlap_only, double inset) {
  if (c1.empty()) fail(ErrorKind::kInvalidArgument, "align_energy: destination set is empty");
  double energy = 0.0;
  int counted = 0;
  for (Point2 src : c2.points) {
    Point2 p;
    try {
      p = apply_homography(h, src);
    } catch (const StitchError&) {
      continue;
    }
    if (overlap_only && !in_overlap(c1, p, inset)) continue;
    double best = kInf;
    for (Point2 q : c1.points) best = std::min(best, squared_distance(p, q));
    energy += best;
    ++counted;
  }
  if (overlap_only && counted == 0) {
    fail(ErrorKind::kEmptyOverlap, "no warped centroid falls inside the destination image");
  }
  return energy;
}

Homography estimate_transform(std::span<const PointPair> pairs, ModelKind kind) {
  if (static_cast<int>(pairs.size()) < minimum_pairs(kind)) {
    fail(ErrorKind::kInvalidArgument, std::string(to_string(kind)) + " fit needs at least " +
                                          std::to_string(minimum_pairs(kind)) + " pairs");
  }
  switch (kind) {
    case ModelKind::kTranslation: return fit_translation(pairs);
    case ModelKind::kSimilarity: return fit_similarity(pairs);
    case ModelKind::kAffine: return fit_affine(pairs);
    case ModelKind::kProjective: return fit_projective(pairs);
  }
  fail(ErrorKind::kInvalidArgument, "unknown model kind");
}

std::vector<Correspondence> match_centroids(const CentroidSet& c1, const CentroidSet& c2,
                                            const Homography& h, double gate, double inset) {
  std::vector<Correspondence> matches;
  std::vector<int> owner(c1.size(), -1);  // index into matches per I1 centroid
  for (std::size_t j = 0; j < c2.size(); ++j) {
    Point2 p;
    try {
      p = apply_homography(h, c2.points[j]);
    } catch (const StitchError&) {
      continue;
    }
    if (!in_overlap(c1, p, inset)) continue;
    int best = -1;
    double best_d2 = kInf;
    for (std::size_t i = 0; i < c1.size(); ++i) {
      const double d2 = squared_distance(p, c1.points[i]);
      if (d2 < best_d2) {
        best_d2 = d2;
        best = static_cast<int>(i);
      }
    }
    const double d = std::sqrt(best_d2);
    if (best < 0 || d > gate) continue;
    const int prev = owner[static_cast<std::size_t>(best)];
    if (prev >= 0) {
      if (matches[static_cast<std::size_t>(prev)].distance <= d) continue;
      matches[static_cast<std::size_t>(prev)] = {static_cast<int>(j), best, d};
      continue;
    }
    owner[static_cast<std::size_t>(best)] = static_cast<int>(matches.size());
    matches.push_back({static_cast<int>(j), best, d});
  }
  return matches;
}

std::pair<int, int> consensus(const CentroidSet& c1, const CentroidSet& c2, const Homography& h,
                              double radius) {
  const double inset1 = overlap_inset(c1);
  const double inset2 = overlap_inset(c2);
  const auto matches = match_centroids(c1, c2, h, radius, inset1);
  const int inliers = static_cast<int>(matches.size());
  int conflicts = 0;
  for (Point2 p : c2.points) {
    try {
      if (in_overlap(c1, apply_homography(h, p), inset1)) ++conflicts;
    } catch (const StitchError&) {
    }
  }
  conflicts -= inliers;
  std::vector<bool> matched(c1.size(), false);
  for (const auto& m : matches) matched[static_cast<std::size_t>(m.dst_index)] = true;
  try {
    const Homography inv = invert(h);
    for (std::size_t i = 0; i < c1.size(); ++i) {
      if (matched[i]) continue;
      try {
        if (in_overlap(c2, apply_homography(inv, c1.points[i]), inset2)) ++conflicts;
      } catch (const StitchError&) {
      }
    }
  } catch (const StitchError&) {
  }
  return {inliers, conflicts};
}

namespace {

// One ICP run from `init`; nullopt when nothing matches at the start.
std::optional<RegistrationResult> icp(const CentroidSet& c1, const CentroidSet& c2,
                                      const RegistrationConfig& cfg, const Homography& init,
                                      double gate, double inset) {
  RegistrationResult result;
  result.h = init;
  const auto initial = try_energy(c1, c2, init, inset);
  if (!initial) return std::nullopt;
  result.energy = *initial;
  result.energy_history.push_back(result.energy);

  auto matches = match_centroids(c1, c2, result.h, gate, inset);
  if (matches.empty()) return std::nullopt;
  result.matches = static_cast<int>(matches.size());

  for (int iter = 0; iter < cfg.max_iters; ++iter) {
    std::vector<PointPair> pairs;
    for (const auto& m : matches) {
      pairs.push_back({c2.points[static_cast<std::size_t>(m.src_index)],
                       c1.points[static_cast<std::size_t>(m.dst_index)]});
    }
    const auto fit = fit_model(pairs, c2, cfg);
    if (!fit) break;
    const auto energy = try_energy(c1, c2, fit->h, inset);
    if (!energy || *energy > result.energy) break;
    const double improvement = result.energy - *energy;
    result.h = fit->h;
    result.model_kind = fit->kind;
    result.energy = *energy;
    result.energy_history.push_back(*energy);
    result.matches = static_cast<int>(pairs.size());
    ++result.iterations;
    if (improvement < cfg.tol_energy) break;
    matches = match_centroids(c1, c2, result.h, gate, inset);
    if (matches.empty()) break;
  }
  return result;
}

}  // namespace

RegistrationResult register_pair(const CentroidSet& c1, const CentroidSet& c2,
                                 const RegistrationConfig& cfg) {
  if (c1.empty() || c2.empty()) fail(ErrorKind::kInvalidArgument, "register_pair: empty centroid set");
  const bool bounded = c1.width > 0 && c1.height > 0;
  const double diag = bounded ? std::hypot(c1.width, c1.height) : 0.0;
  const double gate = bounded ? cfg.gate_radius_fraction * diag : kInf;
  const double radius = bounded ? cfg.inlier_radius_fraction * diag : 1.0;
  const double inset = overlap_inset(c1);

  std::vector<Point2> starts{c1.mean() - c2.mean()};
  for (Point2 p1 : c1.points) {
    for (Point2 p2 : c2.points) starts.push_back(p1 - p2);
  }

  std::optional<RegistrationResult> best;
  int best_score = 0;
  for (Point2 shift : starts) {
    auto run = icp(c1, c2, cfg, Homography::translation(shift.x, shift.y), gate, inset);
    if (!run) continue;
    std::tie(run->inliers, run->conflicts) = consensus(c1, c2, run->h, radius);
    const int score = run->inliers - run->conflicts;
    if (!best || score > best_score || (score == best_score && run->energy < best->energy)) {
      best = std::move(run);
      best_score = score;
    }
  }
  if (!best) fail(ErrorKind::kNoValidMatches, "no initial placement yields a match within the gate");

  best->overlap_count = 0;
  for (Point2 p : c2.points) {
    try {
      if (in_overlap(c1, apply_homography(best->h, p), inset)) ++best->overlap_count;
    } catch (const StitchError&) {
    }
  }
  return *best;
}

}  // namespace xstitch
