#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tcplab/errors.hpp"
#include "tcplab/face_mask.hpp"
#include "tcplab/parallel.hpp"
#include "tcplab/rng.hpp"
#include "tcplab/tcp.hpp"
#include "tcplab/tensor.hpp"

namespace tcplab {

inline constexpr std::uint64_t kDefaultSeed = 20190527;

struct SolverConfig {
  double tol = kDefaultTol;
  double dedup_radius = 1e-5;  // infinity-norm
  int newton_max_iter = 100;
  int grid_starts_per_axis = 9;
  double start_box_radius = 5.0;
  int random_starts = 16;
  std::uint64_t seed = kDefaultSeed;

  /// More than this many distinct roots on one face signals a continuum.
  int posdim_root_count = 25;
  /// sigma_min / sigma_max below this at a root signals a continuum.
  double posdim_singular_ratio = 1e-6;

  void validate() const {
    if (!(tol > 0) || !(dedup_radius > 0) || newton_max_iter <= 0 || grid_starts_per_axis <= 0 ||
        !(start_box_radius > 0) || random_starts < 0)
      throw ArgumentError("SolverConfig: tolerances, radii and counts must be positive");
    if (!(tol < dedup_radius)) throw ArgumentError("SolverConfig: tol must be smaller than dedup_radius");
  }
};

enum class SolutionStatus { ExactEmpty, Finite, NonIsolated, UnboundedSuspect };

inline const char* to_string(SolutionStatus s) {
  switch (s) {
    case SolutionStatus::ExactEmpty: return "exact-empty";
    case SolutionStatus::Finite: return "finite";
    case SolutionStatus::NonIsolated: return "non-isolated";
    case SolutionStatus::UnboundedSuspect: return "unbounded-suspect";
  }
  return "?";
}

struct SolutionPoint {
  Vec x;
  FaceMask face;
  double kkt_res = 0.0;
};

struct Ray {
  Vec direction;  // unit Euclidean norm
  FaceMask face;
};

struct SolveMeta {
  double tol = 0.0;
  double dedup_radius = 0.0;
  std::uint64_t seed = 0;
  int newton_max_iter = 0;
  int grid_starts_per_axis = 0;
  double start_box_radius = 0.0;
  int random_starts = 0;
  std::size_t faces = 0;
  std::size_t newton_starts = 0;
  bool homogeneous = false;
};

struct SolutionSet {
  std::vector<SolutionPoint> points;
  std::vector<Ray> rays;
  std::vector<FaceMask> posdim_suspect;
  /// Roots found on faces flagged posdim_suspect; samples of the continuum,
  /// not isolated solutions.
  std::vector<Vec> component_samples;
  SolutionStatus status = SolutionStatus::ExactEmpty;
  SolveMeta meta;

  std::vector<Vec> point_list() const {
    std::vector<Vec> out;
    out.reserve(points.size());
    for (const auto& p : points) out.push_back(p.x);
    return out;
  }

  /// Isolated points plus continuum samples.
  std::vector<Vec> all_found() const {
    auto out = point_list();
    out.insert(out.end(), component_samples.begin(), component_samples.end());
    return out;
  }

  double max_norm() const {
    double m = 0.0;
    for (const auto& x : all_found()) m = std::max(m, x.norm());
    return m;
  }
};

namespace detail {

inline bool lex_less(const Vec& a, const Vec& b) {
  return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(), b.data() + b.size());
}

inline bool near_inf(const Vec& a, const Vec& b, double radius) {
  return (a - b).lpNorm<Eigen::Infinity>() < radius;
}

/// The square face system, optionally augmented with sum(y) = 1 for the
/// homogeneous problem restricted to the simplex.
struct ReducedSystem {
  const FaceSystem& face;
  bool normalized;

  Vec eval(const Vec& y) const {
    Vec g = face.evaluate(y);
    if (!normalized) return g;
    Vec out(g.size() + 1);
    out << g, y.sum() - 1.0;
    return out;
  }

  Mat jac(const Vec& y) const {
    Mat j = face.jacobian(y);
    if (!normalized) return j;
    Mat out(j.rows() + 1, j.cols());
    out.topRows(j.rows()) = j;
    out.row(j.rows()).setOnes();
    return out;
  }
};

struct NewtonOutcome {
  Vec y;
  double residual = std::numeric_limits<double>::infinity();
  bool converged = false;
};

inline double inf_norm(const Vec& g) { return g.size() == 0 ? 0.0 : g.lpNorm<Eigen::Infinity>(); }

/// Damped Gauss-Newton with Armijo backtracking on 0.5 ||G||^2. Steps are
/// minimum-norm least-squares solutions, so square, rank-deficient and
/// overdetermined systems share one code path. After reaching `target` the
/// iteration keeps going while the residual at least halves; this drives
/// double roots (e.g. y^2 = 0) toward zero instead of stopping at sqrt(target).
template <class System>
NewtonOutcome damped_newton(const System& sys, Vec y, double target, int max_iter, const std::string& context) {
  NewtonOutcome out;
  Vec g = sys.eval(y);
  if (g.hasNaN()) throw NumericError("NaN while evaluating face system " + context);
  double r = inf_norm(g);
  bool converged = r <= target;
  int stall = 0;
  for (int it = 0; it < max_iter && r > 0.0; ++it) {
    const Mat j = sys.jac(y);
    Vec d = j.completeOrthogonalDecomposition().solve(-g);
    const Vec grad = j.transpose() * g;
    double slope = grad.dot(d);
    if (!(slope < 0.0) || !d.allFinite()) {
      d = -grad;
      slope = -grad.squaredNorm();
      if (!(slope < 0.0)) break;
    }
    const double phi = 0.5 * g.squaredNorm();
    double t = 1.0;
    Vec y_try, g_try;
    bool accepted = false;
    while (t > 1e-12) {
      y_try = y + t * d;
      g_try = sys.eval(y_try);
      const double phi_try = g_try.allFinite() ? 0.5 * g_try.squaredNorm() : std::numeric_limits<double>::infinity();
      if (phi_try <= phi + 1e-4 * t * slope) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) break;
    const double r_try = inf_norm(g_try);
    if (converged && !(r_try < 0.5 * r)) {
      if (r_try < r) {
        y = y_try;
        r = r_try;
      }
      break;
    }
    // Stalled at a nonzero local minimum of the merit function.
    stall = (!converged && r_try > 0.99 * r) ? stall + 1 : 0;
    y = std::move(y_try);
    g = std::move(g_try);
    r = r_try;
    if (r <= target) converged = true;
    if (stall >= 5) break;
    if (y.lpNorm<Eigen::Infinity>() > 1e8) break;
  }
  out.y = std::move(y);
  out.residual = r;
  out.converged = r <= target;
  return out;
}

inline std::vector<Vec> start_points(int k, int per_axis, double box, int random_count, std::uint64_t seed) {
  std::vector<Vec> starts;
  double total = std::pow(static_cast<double>(per_axis), k);
  if (total > 5e6) throw ResourceError("face solver: multistart grid exceeds 5e6 starts");
  std::vector<int> digit(static_cast<std::size_t>(k), 0);
  for (std::size_t s = 0; s < static_cast<std::size_t>(total); ++s) {
    Vec y(k);
    for (int v = 0; v < k; ++v) y[v] = box * (digit[static_cast<std::size_t>(v)] + 0.5) / per_axis;
    starts.push_back(std::move(y));
    for (int v = k - 1; v >= 0; --v) {
      if (++digit[static_cast<std::size_t>(v)] < per_axis) break;
      digit[static_cast<std::size_t>(v)] = 0;
    }
  }
  Rng rng(seed);
  for (int s = 0; s < random_count; ++s) {
    Vec y(k);
    for (int v = 0; v < k; ++v) y[v] = rng.uniform(0.0, box);
    starts.push_back(std::move(y));
  }
  return starts;
}

/// Face system in the free coordinates of alpha with some of them pinned to
/// `level` through extra linear rows.
struct PinnedSystem {
  const FaceSystem& face;
  std::vector<int> pinned_slots;
  double level;

  Vec eval(const Vec& y) const {
    Vec g = face.evaluate(y);
    Vec out(g.size() + static_cast<Eigen::Index>(pinned_slots.size()));
    out.head(g.size()) = g;
    for (std::size_t r = 0; r < pinned_slots.size(); ++r)
      out[g.size() + static_cast<Eigen::Index>(r)] = y[pinned_slots[r]] - level;
    return out;
  }

  Mat jac(const Vec& y) const {
    Mat j = face.jacobian(y);
    Mat out = Mat::Zero(j.rows() + static_cast<Eigen::Index>(pinned_slots.size()), j.cols());
    out.topRows(j.rows()) = j;
    for (std::size_t r = 0; r < pinned_slots.size(); ++r) out(j.rows() + static_cast<Eigen::Index>(r), pinned_slots[r]) = 1.0;
    return out;
  }
};

/// True when zeroing some small free coordinate of x keeps it a solution: the
/// root then belongs to a larger face (Newton on a double root stalls near
/// sqrt(eps) instead of reaching zero).
inline bool snaps_to_larger_face(const TcpInstance& inst, const FaceSystem& fs, const Vec& x, double tol) {
  const double small = 1e3 * tol * (1.0 + x.lpNorm<Eigen::Infinity>());
  Vec snapped = x;
  bool any = false;
  for (int i : fs.free_indices()) {
    if (x[i] < small) {
      snapped[i] = 0.0;
      any = true;
    }
  }
  return any && residual(inst, snapped).is_solution(tol);
}

/// Whether a solution x on face `beta` is a limit of solutions living on the
/// smaller face `alpha`: pin the coordinates of beta \ alpha to a small
/// positive level and look for a nearby root of alpha's system.
inline bool is_limit_of_face(const TcpInstance& inst, const Vec& x, const FaceMask& beta, const FaceMask& alpha,
                             const SolverConfig& cfg) {
  const FaceSystem fs(inst, alpha);
  const double level = 1e-3 * (1.0 + x.lpNorm<Eigen::Infinity>());
  std::vector<int> slots;
  for (int k = 0; k < fs.num_free(); ++k)
    if (beta.contains(fs.free_indices()[static_cast<std::size_t>(k)])) slots.push_back(k);
  const PinnedSystem sys{fs, slots, level};
  Vec y0 = fs.restrict(x);
  for (int s : slots) y0[s] = level;
  const NewtonOutcome nr = damped_newton(sys, y0, cfg.tol / 10.0, cfg.newton_max_iter, "closure check");
  if (!nr.converged) return false;
  if (!fs.satisfies_signs(nr.y, cfg.tol)) return false;
  const Vec z = fs.embed(nr.y);
  return residual(inst, z).is_solution(cfg.tol) && (z - x).lpNorm<Eigen::Infinity>() < 0.1;
}

template <class System>
bool singular_at(const System& sys, const Vec& y, double ratio) {
  const Mat j = sys.jac(y);
  if (j.size() == 0) return false;
  Eigen::JacobiSVD<Mat> svd(j);
  const Vec sv = svd.singularValues();
  const double hi = sv.maxCoeff();
  const double lo = sv.minCoeff();
  return hi == 0.0 || lo < ratio * hi;
}

/// Per-face result shared by the inhomogeneous and the homogeneous search.
struct FaceOutcome {
  FaceMask face;
  std::vector<Vec> roots;  // in R^n, deduplicated, in start order
  bool posdim = false;
  std::vector<Vec> ray_directions;
  std::size_t starts = 0;
};

inline FaceOutcome search_face(const TcpInstance& inst, const FaceMask& alpha, const SolverConfig& cfg,
                               bool homogeneous) {
  const FaceSystem fs(inst, alpha);
  FaceOutcome out;
  out.face = alpha;
  const int k = fs.num_free();
  if (k == 0) {
    if (homogeneous) return out;
    const Vec s = fs.side_values(Vec(0));
    if (s.minCoeff() >= -cfg.tol) out.roots.push_back(Vec::Zero(inst.dim()));
    return out;
  }

  const ReducedSystem sys{fs, homogeneous};
  const double box = homogeneous ? 1.0 : cfg.start_box_radius;
  const std::uint64_t face_seed = stream_seed(cfg.seed, (std::uint64_t{alpha.bits()} << 1) | (homogeneous ? 1u : 0u));
  const auto starts = start_points(k, cfg.grid_starts_per_axis, box, cfg.random_starts, face_seed);
  out.starts = starts.size();
  const std::string context = "on face " + alpha.to_string() + (homogeneous ? " (homogeneous)" : "");
  const double target = cfg.tol / 10.0;

  std::vector<Vec> local;
  for (const auto& y0 : starts) {
    const NewtonOutcome nr = damped_newton(sys, y0, target, cfg.newton_max_iter, context);
    if (!nr.converged) continue;
    // Roots with a coordinate in [0, tol] belong to a larger face; that face's
    // own search reports them.
    if (!fs.satisfies_signs(nr.y, cfg.tol)) continue;
    const Vec x = fs.embed(nr.y);
    if (!residual(inst, x).is_solution(cfg.tol)) continue;
    if (snaps_to_larger_face(inst, fs, x, cfg.tol)) continue;
    bool dup = false;
    for (const auto& prev : local) dup = dup || near_inf(prev, nr.y, cfg.dedup_radius);
    if (!dup) local.push_back(nr.y);
  }

  bool posdim = !local.empty() && fs.underdetermined();
  posdim = posdim || static_cast<int>(local.size()) > cfg.posdim_root_count;
  for (const auto& y : local) {
    if (posdim) break;
    posdim = singular_at(sys, y, cfg.posdim_singular_ratio);
  }
  out.posdim = posdim;
  for (const auto& y : local) out.roots.push_back(fs.embed(y));

  if (posdim && !homogeneous) {
    // A free coordinate whose whole ray keeps every condition satisfied is a
    // recession direction of Sol(A, a).
    for (int v = 0; v < k; ++v) {
      bool found = false;
      for (const auto& y : local) {
        bool ok = true;
        for (double t : {1.0, 10.0, 100.0, 1e3, 1e4}) {
          Vec yt = y;
          yt[v] += t;
          if (inf_norm(fs.evaluate(yt)) > cfg.tol || !fs.satisfies_signs(yt, cfg.tol)) {
            ok = false;
            break;
          }
        }
        if (ok) {
          found = true;
          break;
        }
      }
      if (found) {
        Vec dir = Vec::Zero(inst.dim());
        dir[fs.free_indices()[static_cast<std::size_t>(v)]] = 1.0;
        out.ray_directions.push_back(dir);
      }
    }
  }
  return out;
}

inline SolveMeta make_meta(const SolverConfig& cfg, bool homogeneous) {
  SolveMeta m;
  m.tol = cfg.tol;
  m.dedup_radius = cfg.dedup_radius;
  m.seed = cfg.seed;
  m.newton_max_iter = cfg.newton_max_iter;
  m.grid_starts_per_axis = cfg.grid_starts_per_axis;
  m.start_box_radius = cfg.start_box_radius;
  m.random_starts = cfg.random_starts;
  m.homogeneous = homogeneous;
  return m;
}

inline SolutionSet assemble(const TcpInstance& inst, const std::vector<FaceOutcome>& faces, const SolverConfig& cfg,
                            bool homogeneous) {
  SolutionSet out;
  out.meta = make_meta(cfg, homogeneous);
  out.meta.faces = faces.size();
  std::vector<FaceMask> continua;
  for (const auto& f : faces)
    if (f.posdim) continua.push_back(f.face);
  // A point is not isolated if it is the limit of a continuum on a smaller face.
  auto in_closure = [&](const Vec& x, const FaceMask& beta) {
    for (const auto& alpha : continua) {
      if (alpha == beta || (alpha.bits() & ~beta.bits()) != 0) continue;
      if (is_limit_of_face(inst, x, beta, alpha, cfg)) return true;
    }
    return false;
  };
  for (const auto& f : faces) {
    out.meta.newton_starts += f.starts;
    if (f.posdim) out.posdim_suspect.push_back(f.face);
    for (const auto& x : f.roots) {
      if (homogeneous) {
        out.rays.push_back({x / x.norm(), f.face});
        continue;
      }
      if (f.posdim || in_closure(x, f.face)) {
        out.component_samples.push_back(x);
        continue;
      }
      bool dup = false;
      for (const auto& p : out.points) dup = dup || near_inf(p.x, x, cfg.dedup_radius);
      if (dup) continue;
      const KktPoint kp{x, inst.map(x)};
      out.points.push_back({x, f.face, kkt_residual(inst, kp)});
    }
    for (const auto& d : f.ray_directions) out.rays.push_back({d, f.face});
  }
  std::sort(out.points.begin(), out.points.end(),
            [](const SolutionPoint& a, const SolutionPoint& b) { return lex_less(a.x, b.x); });
  std::stable_sort(out.rays.begin(), out.rays.end(), [](const Ray& a, const Ray& b) {
    if (lex_less(a.direction, b.direction)) return true;
    if (lex_less(b.direction, a.direction)) return false;
    return a.face < b.face;
  });
  std::sort(out.component_samples.begin(), out.component_samples.end(), lex_less);
  return out;
}

inline std::vector<FaceOutcome> search_all_faces(const TcpInstance& inst, const SolverConfig& cfg, bool homogeneous) {
  const auto masks = enumerate_faces(inst.dim());
  std::vector<FaceOutcome> faces(masks.size());
  parallel_for(masks.size(), [&](std::size_t i) { faces[i] = search_face(inst, masks[i], cfg, homogeneous); });
  return faces;
}

}  // namespace detail

/// Solutions of TCP(A, a) lying on the pseudo-face K_alpha. Status is
/// exact-empty, finite or non-isolated; boundedness is decided by solve().
inline SolutionSet solve_face(const TcpInstance& inst, const FaceMask& alpha, const SolverConfig& cfg = {}) {
  cfg.validate();
  if (alpha.dim() != inst.dim()) throw ArgumentError("solve_face: mask dimension mismatch");
  std::vector<detail::FaceOutcome> faces{detail::search_face(inst, alpha, cfg, false)};
  SolutionSet out = detail::assemble(inst, faces, cfg, false);
  out.status = !out.posdim_suspect.empty() ? SolutionStatus::NonIsolated
               : out.points.empty()        ? SolutionStatus::ExactEmpty
                                           : SolutionStatus::Finite;
  return out;
}

/// Sol(A, 0) searched on the simplex slice {x >= 0, sum x = 1}. Every root is
/// returned as a unit-norm ray; no rays means Sol(A, 0) = {0}.
inline SolutionSet homogeneous_solve(const Tensor& a, const SolverConfig& cfg = {}) {
  cfg.validate();
  const TcpInstance inst(a, Vec::Zero(a.dim()));
  const auto faces = detail::search_all_faces(inst, cfg, true);
  SolutionSet out = detail::assemble(inst, faces, cfg, true);
  out.status = out.rays.empty() ? SolutionStatus::ExactEmpty : SolutionStatus::UnboundedSuspect;
  return out;
}

/// Sol(A, a) with a precomputed homogeneous cone (reused across many offsets).
inline SolutionSet solve(const TcpInstance& inst, const SolverConfig& cfg, const SolutionSet& cone) {
  cfg.validate();
  const auto faces = detail::search_all_faces(inst, cfg, false);
  SolutionSet out = detail::assemble(inst, faces, cfg, false);
  const bool any = !out.points.empty() || !out.rays.empty() || !out.component_samples.empty();
  if (!any)
    out.status = SolutionStatus::ExactEmpty;
  else if (!cone.rays.empty())
    out.status = SolutionStatus::UnboundedSuspect;
  else if (!out.posdim_suspect.empty())
    out.status = SolutionStatus::NonIsolated;
  else
    out.status = SolutionStatus::Finite;
  return out;
}

inline SolutionSet solve(const TcpInstance& inst, const SolverConfig& cfg = {}) {
  return solve(inst, cfg, homogeneous_solve(inst.tensor(), cfg));
}

/// d (2d - 1)^(5n) with d = max(2, m - 1): cap on the number of connected
/// components of Sol(A, a).
inline std::uint64_t chi_bound(int m, int n) {
  if (m < 2 || n < 2) throw ArgumentError("chi_bound: m and n must be >= 2");
  const std::uint64_t d = static_cast<std::uint64_t>(std::max(2, m - 1));
  std::uint64_t out = d;
  for (int k = 0; k < 5 * n; ++k) {
    if (__builtin_mul_overflow(out, 2 * d - 1, &out))
      throw ResourceError("chi_bound: value exceeds 64 bits for m=" + std::to_string(m) + ", n=" + std::to_string(n));
  }
  return out;
}

/// sup_{z in s1} dist(z, s2). Zero for empty s1, +infinity when s2 is empty and
/// s1 is not.
inline double hausdorff_excess(std::span<const Vec> s1, std::span<const Vec> s2) {
  if (s1.empty()) return 0.0;
  if (s2.empty()) return std::numeric_limits<double>::infinity();
  double worst = 0.0;
  for (const auto& z : s1) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& w : s2) best = std::min(best, (z - w).norm());
    worst = std::max(worst, best);
  }
  return worst;
}

inline double hausdorff_excess(const std::vector<Vec>& s1, const std::vector<Vec>& s2) {
  return hausdorff_excess(std::span<const Vec>(s1), std::span<const Vec>(s2));
}

}  // namespace tcplab
