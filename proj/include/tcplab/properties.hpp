#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <queue>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "tcplab/face_solver.hpp"
#include "tcplab/parallel.hpp"
#include "tcplab/rng.hpp"
#include "tcplab/tcp.hpp"
#include "tcplab/tensor.hpp"

namespace tcplab {

enum class Property { R0, Copositive, Monotone, GUS };
enum class Verdict { HoldsNumerically, Fails, Inconclusive };

inline const char* to_string(Property p) {
  switch (p) {
    case Property::R0: return "R0";
    case Property::Copositive: return "Copositive";
    case Property::Monotone: return "Monotone";
    case Property::GUS: return "GUS";
  }
  return "?";
}

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::HoldsNumerically: return "holds-numerically";
    case Verdict::Fails: return "fails";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "?";
}

/// "holds-numerically" only means no counterexample was found at the recorded
/// effort. A "fails" verdict always carries a certificate:
///   R0         -> nonzero x in Sol(A, 0)
///   Copositive -> x in the simplex with A x^m < -tol
///   Monotone   -> pair (x, y) with <F(y) - F(x), y - x> < -tol
///   GUS        -> offset a for which TCP(A, a) does not have exactly one solution
struct PropertyReport {
  Property property = Property::R0;
  Verdict verdict = Verdict::Inconclusive;
  std::optional<Vec> certificate;
  std::optional<Vec> certificate_partner;  // y of a monotonicity pair
  double certificate_value = 0.0;
  nlohmann::ordered_json effort = nlohmann::ordered_json::object();
  std::string note;
};

struct PropertyConfig {
  SolverConfig solver;
  int simplex_grid = 200;            // points per axis of the simplex lattice
  std::size_t simplex_max_nodes = 2'000'000;
  int polish_cells = 20;
  int polish_iters = 200;
  double monotone_box = 2.0;
  int monotone_grid = 6;             // grid points per axis in [0, box]
  int monotone_random_pairs = 2000;
  int gus_gaussian_samples = 200;
  double certificate_tol = 1e-6;
};

inline PropertyReport check_r0(const Tensor& a, const PropertyConfig& cfg = {}) {
  const SolutionSet cone = homogeneous_solve(a, cfg.solver);
  PropertyReport rep;
  rep.property = Property::R0;
  rep.effort["faces"] = cone.meta.faces;
  rep.effort["newton_starts"] = cone.meta.newton_starts;
  rep.effort["tol"] = cfg.solver.tol;
  if (cone.rays.empty()) {
    rep.verdict = Verdict::HoldsNumerically;
    return rep;
  }
  rep.verdict = Verdict::Fails;
  rep.certificate = cone.rays.front().direction;
  rep.certificate_value = residual(TcpInstance(a, Vec::Zero(a.dim())), *rep.certificate).max();
  rep.note = std::to_string(cone.rays.size()) + " homogeneous ray(s)";
  return rep;
}

namespace detail {

/// Euclidean projection onto {x >= 0, sum x = 1}.
inline Vec project_simplex(const Vec& v) {
  std::vector<double> u(v.data(), v.data() + v.size());
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    cumulative += u[k];
    const double candidate = (cumulative - 1.0) / static_cast<double>(k + 1);
    if (u[k] - candidate > 0) theta = candidate;
  }
  return (v.array() - theta).max(0.0).matrix();
}

/// Projected gradient with Armijo backtracking on the simplex.
inline Vec simplex_descent(const Tensor& a, Vec x, int iters) {
  double fx = form(a, x);
  for (int it = 0; it < iters; ++it) {
    const Vec g = form_gradient(a, x);
    double step = 1.0;
    bool moved = false;
    while (step > 1e-12) {
      const Vec cand = project_simplex(x - step * g);
      const double fc = form(a, cand);
      if (fc <= fx - 1e-4 * g.dot(x - cand)) {
        moved = (cand - x).lpNorm<Eigen::Infinity>() > 1e-15;
        x = cand;
        fx = fc;
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;
  }
  return x;
}

inline std::size_t simplex_nodes(int per_axis, int n) {
  // C(N + n - 1, n - 1), saturating.
  double c = 1.0;
  for (int k = 1; k <= n - 1; ++k) c = c * (per_axis + k) / k;
  return c > 1e18 ? std::numeric_limits<std::size_t>::max() : static_cast<std::size_t>(std::llround(c));
}

}  // namespace detail

/// Minimizes A x^m over the unit simplex: lattice scan with spacing 1/N
/// followed by projected-gradient polish from the best cells.
inline PropertyReport check_copositive(const Tensor& a, const PropertyConfig& cfg = {}) {
  const int n = a.dim();
  int per_axis = std::max(1, cfg.simplex_grid);
  while (per_axis > 1 && detail::simplex_nodes(per_axis, n) > cfg.simplex_max_nodes) per_axis = per_axis * 3 / 4;

  using Entry = std::pair<double, std::vector<int>>;
  auto worse = [](const Entry& l, const Entry& r) { return l.first < r.first; };
  std::priority_queue<Entry, std::vector<Entry>, decltype(worse)> best(worse);  // max-heap of the k best
  std::vector<int> comp(static_cast<std::size_t>(n), 0);
  std::size_t visited = 0;
  Vec x(n);
  // Enumerate compositions of per_axis into n parts.
  auto recurse = [&](auto&& self, int pos, int remaining) -> void {
    if (pos == n - 1) {
      comp[static_cast<std::size_t>(pos)] = remaining;
      for (int i = 0; i < n; ++i) x[i] = static_cast<double>(comp[static_cast<std::size_t>(i)]) / per_axis;
      const double v = form(a, x);
      ++visited;
      if (static_cast<int>(best.size()) < cfg.polish_cells) {
        best.emplace(v, comp);
      } else if (v < best.top().first) {
        best.pop();
        best.emplace(v, comp);
      }
      return;
    }
    for (int c = remaining; c >= 0; --c) {
      comp[static_cast<std::size_t>(pos)] = c;
      self(self, pos + 1, remaining - c);
    }
  };
  recurse(recurse, 0, per_axis);

  double min_value = std::numeric_limits<double>::infinity();
  Vec argmin;
  std::vector<Entry> cells;
  while (!best.empty()) {
    cells.push_back(best.top());
    best.pop();
  }
  std::reverse(cells.begin(), cells.end());  // ascending value
  for (const auto& [value, c] : cells) {
    Vec start(n);
    for (int i = 0; i < n; ++i) start[i] = static_cast<double>(c[static_cast<std::size_t>(i)]) / per_axis;
    const Vec polished = detail::simplex_descent(a, start, cfg.polish_iters);
    const double pv = form(a, polished);
    const double sv = form(a, start);
    const Vec& pick = pv < sv ? polished : start;
    const double v = std::min(pv, sv);
    if (v < min_value) {
      min_value = v;
      argmin = pick;
    }
  }

  PropertyReport rep;
  rep.property = Property::Copositive;
  rep.effort["simplex_grid"] = per_axis;
  rep.effort["lattice_nodes"] = visited;
  rep.effort["polished_cells"] = cells.size();
  rep.effort["min_value"] = min_value;
  rep.effort["tol"] = cfg.solver.tol;
  if (min_value < -cfg.solver.tol) {
    rep.verdict = Verdict::Fails;
    rep.certificate = argmin;
    rep.certificate_value = min_value;
  } else {
    rep.verdict = Verdict::HoldsNumerically;
  }
  return rep;
}

/// Samples pairs in [0, R]^n (full grid pairs plus seeded random pairs) for
/// <F(y) - F(x), y - x> < -tol. A copositivity counterexample y also refutes
/// monotonicity through the pair (0, y), so the copositivity check runs as a
/// final sweep.
inline PropertyReport check_monotone(const Tensor& a, const Vec& offset, const PropertyConfig& cfg = {}) {
  const int n = a.dim();
  detail::require_dim(a, offset, "check_monotone");
  const TcpInstance inst(a, offset);
  PropertyReport rep;
  rep.property = Property::Monotone;

  std::vector<Vec> grid;
  const int g = std::max(2, cfg.monotone_grid);
  const double total = std::pow(static_cast<double>(g), n);
  if (total <= 4096) {
    std::vector<int> d(static_cast<std::size_t>(n), 0);
    for (std::size_t s = 0; s < static_cast<std::size_t>(total); ++s) {
      Vec x(n);
      for (int i = 0; i < n; ++i) x[i] = cfg.monotone_box * d[static_cast<std::size_t>(i)] / (g - 1);
      grid.push_back(std::move(x));
      for (int i = n - 1; i >= 0; --i) {
        if (++d[static_cast<std::size_t>(i)] < g) break;
        d[static_cast<std::size_t>(i)] = 0;
      }
    }
  }
  std::vector<Vec> images;
  images.reserve(grid.size());
  for (const auto& x : grid) images.push_back(inst.map(x));

  double worst = std::numeric_limits<double>::infinity();
  Vec wx, wy;
  auto consider = [&](const Vec& x, const Vec& fx, const Vec& y, const Vec& fy) {
    const double v = (fy - fx).dot(y - x);
    if (v < worst) {
      worst = v;
      wx = x;
      wy = y;
    }
  };
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < grid.size(); ++i)
    for (std::size_t j = i + 1; j < grid.size(); ++j, ++pairs) consider(grid[i], images[i], grid[j], images[j]);

  Rng rng(stream_seed(cfg.solver.seed, 0x6d6f6e6fULL));
  for (int s = 0; s < cfg.monotone_random_pairs; ++s, ++pairs) {
    Vec x(n), y(n);
    for (int i = 0; i < n; ++i) x[i] = rng.uniform(0.0, cfg.monotone_box);
    for (int i = 0; i < n; ++i) y[i] = rng.uniform(0.0, cfg.monotone_box);
    consider(x, inst.map(x), y, inst.map(y));
  }
  rep.effort["box"] = cfg.monotone_box;
  rep.effort["grid_per_axis"] = grid.empty() ? 0 : g;
  rep.effort["pairs"] = pairs;
  rep.effort["tol"] = cfg.solver.tol;

  if (worst < -cfg.solver.tol) {
    rep.verdict = Verdict::Fails;
    rep.certificate = wx;
    rep.certificate_partner = wy;
    rep.certificate_value = worst;
    return rep;
  }
  const PropertyReport cop = check_copositive(a, cfg);
  rep.effort["copositive_sweep"] = to_string(cop.verdict);
  if (cop.verdict == Verdict::Fails) {
    rep.verdict = Verdict::Fails;
    rep.certificate = Vec::Zero(n);
    rep.certificate_partner = *cop.certificate;
    rep.certificate_value = (inst.map(*cop.certificate) - inst.map(Vec::Zero(n))).dot(*cop.certificate);
    rep.note = "pair (0, y) from a copositivity counterexample";
    return rep;
  }
  rep.verdict = Verdict::HoldsNumerically;
  return rep;
}

/// Solution count of TCP(A, a) as used by the GUS probe: the number of
/// isolated points, or -1 when the set is (suspected) positive-dimensional or
/// unbounded.
inline int gus_count(const SolutionSet& s) {
  if (!s.posdim_suspect.empty() || !s.rays.empty() || s.status == SolutionStatus::UnboundedSuspect) return -1;
  return static_cast<int>(s.points.size());
}

/// Solves TCP(A, a) over the sign-pattern grid {-1, 0, 1}^n followed by seeded
/// Gaussian offsets; fails on the first offset without exactly one solution.
inline PropertyReport probe_gus(const Tensor& a, const PropertyConfig& cfg = {}) {
  const int n = a.dim();
  std::vector<Vec> offsets;
  const std::size_t patterns = static_cast<std::size_t>(std::llround(std::pow(3.0, n)));
  for (std::size_t p = 0; p < patterns; ++p) {
    Vec v(n);
    std::size_t rest = p;
    for (int i = n - 1; i >= 0; --i) {
      v[i] = static_cast<double>(rest % 3) - 1.0;
      rest /= 3;
    }
    offsets.push_back(v);
  }
  for (int s = 0; s < cfg.gus_gaussian_samples; ++s) {
    Rng rng(stream_seed(cfg.solver.seed ^ 0x67757300ULL, static_cast<std::uint64_t>(s)));
    Vec v(n);
    for (int i = 0; i < n; ++i) v[i] = rng.normal();
    offsets.push_back(v);
  }

  const SolutionSet cone = homogeneous_solve(a, cfg.solver);
  std::vector<int> counts(offsets.size());
  parallel_for(offsets.size(), [&](std::size_t k) {
    counts[k] = gus_count(solve(TcpInstance(a, offsets[k]), cfg.solver, cone));
  });

  PropertyReport rep;
  rep.property = Property::GUS;
  rep.effort["sign_patterns"] = patterns;
  rep.effort["gaussian_samples"] = cfg.gus_gaussian_samples;
  rep.effort["seed"] = cfg.solver.seed;
  for (std::size_t k = 0; k < offsets.size(); ++k) {
    if (counts[k] == 1) continue;
    rep.verdict = Verdict::Fails;
    rep.certificate = offsets[k];
    rep.certificate_value = counts[k];
    rep.note = counts[k] < 0 ? "positive-dimensional or unbounded solution set"
                             : std::to_string(counts[k]) + " solution(s)";
    return rep;
  }
  rep.verdict = Verdict::HoldsNumerically;
  return rep;
}

/// Independent re-check of a "fails" certificate at `tol` (default 1e-6),
/// recomputed from the tensor entries. `offset` is used by Monotone only.
inline bool certificate_valid(const PropertyReport& rep, const Tensor& a, const Vec& offset = Vec(),
                              const PropertyConfig& cfg = {}, double tol = 1e-6) {
  if (rep.verdict != Verdict::Fails) return true;
  if (!rep.certificate) return false;
  const Vec& x = *rep.certificate;
  if (x.size() != a.dim() || !x.allFinite()) return false;
  switch (rep.property) {
    case Property::R0:
      return std::abs(x.norm() - 1.0) <= tol && residual(TcpInstance(a, Vec::Zero(a.dim())), x).is_solution(tol);
    case Property::Copositive:
      return x.minCoeff() >= -tol && std::abs(x.sum() - 1.0) <= tol && form(a, x) < -cfg.solver.tol;
    case Property::Monotone: {
      if (!rep.certificate_partner || offset.size() != a.dim()) return false;
      const Vec& y = *rep.certificate_partner;
      if (x.minCoeff() < 0 || y.minCoeff() < 0) return false;
      return (contract(a, y) - contract(a, x)).dot(y - x) < -cfg.solver.tol;
    }
    case Property::GUS:
      return gus_count(solve(TcpInstance(a, x), cfg.solver)) != 1;
  }
  return false;
}

struct LscVerdict {
  bool not_lsc = false;
  std::optional<FaceMask> face;  // face carrying the positive-dimensional piece
};

/// Lower semicontinuity forces Sol(A, a) to be finite, so a suspected
/// positive-dimensional piece refutes lsc at (A, a). The converse is not
/// claimed.
inline LscVerdict lsc_witness(const TcpInstance& inst, const SolverConfig& cfg = {}) {
  const SolutionSet s = solve(inst, cfg);
  if (s.posdim_suspect.empty()) return {};
  return {true, s.posdim_suspect.front()};
}

/// q in int(C^+) for the cone generated by `rays`: <r, q> > tol for every ray.
/// With no rays (R0 case, C = {0}) every q qualifies.
inline bool int_dual_cone_member(const std::vector<Vec>& rays, const Vec& q, double tol = kDefaultTol) {
  return std::all_of(rays.begin(), rays.end(), [&](const Vec& r) {
    if (r.size() != q.size()) throw ArgumentError("int_dual_cone_member: dimension mismatch");
    return r.dot(q) > tol;
  });
}

inline std::vector<Vec> ray_directions(const SolutionSet& s) {
  std::vector<Vec> out;
  for (const auto& r : s.rays) out.push_back(r.direction);
  return out;
}

}  // namespace tcplab
