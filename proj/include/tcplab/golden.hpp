#pragma once

#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "tcplab/builtin.hpp"
#include "tcplab/face_solver.hpp"

namespace tcplab {

/// One row of a closed-form solution table.
struct GoldenCase {
  std::string table;
  std::string tensor;  // builtin name
  Vec a;
  std::vector<Vec> points;                   // expected isolated points
  bool posdim = false;                       // expected continuum
  std::vector<Vec> rays;                     // expected recession directions (unit)
  std::function<double(const Vec&)> on_continuum;  // zero on the expected continuum
};

struct GoldenResult {
  GoldenCase c;
  std::string expected;
  std::string computed;
  double point_error = 0.0;  // two-sided Hausdorff distance of point lists
  std::size_t n_points = 0;  // isolated points returned by solve
  bool pass = false;
};

namespace detail {

inline Vec v2(double x, double y) {
  Vec v(2);
  v << x, y;
  return v;
}

inline std::string fmt_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", std::abs(v) < 5e-13 ? 0.0 : v);
  return buf;
}

inline std::string fmt_vec(const Vec& v) {
  std::string s = "(";
  for (Eigen::Index i = 0; i < v.size(); ++i) s += (i ? "," : "") + fmt_num(v[i]);
  return s + ")";
}

inline std::string fmt_set(const std::vector<Vec>& pts, bool posdim, const std::vector<Vec>& rays) {
  std::string s = "{";
  for (std::size_t k = 0; k < pts.size(); ++k) s += (k ? "," : "") + fmt_vec(pts[k]);
  s += "}";
  if (posdim) s += " +continuum";
  for (const auto& r : rays) s += " +ray" + fmt_vec(r);
  return s;
}

inline std::vector<Vec> unique_directions(const std::vector<Ray>& rays, double tol) {
  std::vector<Vec> out;
  for (const auto& r : rays) {
    bool seen = false;
    for (const auto& d : out) seen = seen || (d - r.direction).norm() <= tol;
    if (!seen) out.push_back(r.direction);
  }
  return out;
}

}  // namespace detail

/// Every row of the closed-form tables for the four built-in tensors
/// (m = 3, n = 2).
inline std::vector<GoldenCase> golden_cases() {
  using detail::v2;
  auto circle = [](double r2) { return [r2](const Vec& x) { return std::abs(x.squaredNorm() - r2); }; };
  std::vector<GoldenCase> cs;
  // Example-1 tensor.
  cs.push_back({"ex1", "ex1", v2(2, 1), {v2(0, 0), v2(0, 1)}, false, {}, {}});
  cs.push_back({"ex1", "ex1", v2(4, 1), {v2(0, 0), v2(0, 1)}, false, {}, {}});
  cs.push_back({"ex1", "ex1", v2(3, 0), {v2(0, 0)}, false, {}, {}});
  cs.push_back({"ex1", "ex1", v2(1, 2), {v2(0, 0), v2(1, 0)}, false, {}, {}});
  cs.push_back({"ex1", "ex1", v2(1, 1), {v2(0, 0)}, true, {}, circle(1)});
  cs.push_back({"ex1", "ex1", v2(0, 0), {v2(0, 0)}, false, {}, {}});
  cs.push_back({"ex1", "ex1", v2(-1, 0), {}, false, {}, {}});
  cs.push_back({"ex1", "ex1", v2(-1, -1), {}, false, {}, {}});
  // GUS tensor: x -> (x1^2, x2^2).
  cs.push_back({"gus", "gus", v2(-1, -4), {v2(1, 2)}, false, {}, {}});
  cs.push_back({"gus", "gus", v2(-1, -1), {v2(1, 1)}, false, {}, {}});
  cs.push_back({"gus", "gus", v2(3, -4), {v2(0, 2)}, false, {}, {}});
  cs.push_back({"gus", "gus", v2(0, -4), {v2(0, 2)}, false, {}, {}});
  cs.push_back({"gus", "gus", v2(-4, 3), {v2(2, 0)}, false, {}, {}});
  cs.push_back({"gus", "gus", v2(5, 5), {v2(0, 0)}, false, {}, {}});
  cs.push_back({"gus", "gus", v2(0, 0), {v2(0, 0)}, false, {}, {}});
  // Tensor with F(x) = (x1^2 + x2^2)(1, 1) + a.
  cs.push_back({"monotone", "monotone", v2(-4, -1), {v2(2, 0)}, false, {}, {}});
  cs.push_back({"monotone", "monotone", v2(-4, 1), {v2(2, 0)}, false, {}, {}});
  cs.push_back({"monotone", "monotone", v2(-1, -4), {v2(0, 2)}, false, {}, {}});
  cs.push_back({"monotone", "monotone", v2(1, 2), {v2(0, 0)}, false, {}, {}});
  cs.push_back({"monotone", "monotone", v2(0, 0), {v2(0, 0)}, false, {}, {}});
  cs.push_back({"monotone", "monotone", v2(-1, -1), {}, true, {}, circle(1)});
  // Zero tensor.
  cs.push_back({"zero", "zero", v2(0, 0), {}, true, {v2(0, 1), v2(1, 0)}, {}});
  cs.push_back({"zero", "zero", v2(0, 1), {}, true, {v2(1, 0)}, [](const Vec& x) { return std::abs(x[1]); }});
  cs.push_back({"zero", "zero", v2(1, 0), {}, true, {v2(0, 1)}, [](const Vec& x) { return std::abs(x[0]); }});
  cs.push_back({"zero", "zero", v2(1, 1), {v2(0, 0)}, false, {}, {}});
  cs.push_back({"zero", "zero", v2(-1, 0), {}, false, {}, {}});
  cs.push_back({"zero", "zero", v2(0, -1), {}, false, {}, {}});
  return cs;
}

inline GoldenResult run_golden_case(const GoldenCase& c, const SolverConfig& cfg = {}, double tol = 1e-6) {
  GoldenResult r;
  r.c = c;
  const SolutionSet s = solve(builtin_example(c.tensor, c.a), cfg);
  const std::vector<Vec> got = s.point_list();
  r.n_points = got.size();
  const std::vector<Vec> rays = detail::unique_directions(s.rays, tol);
  r.expected = detail::fmt_set(c.points, c.posdim, c.rays);
  r.computed = detail::fmt_set(got, !s.posdim_suspect.empty(), rays);
  r.point_error = std::max(hausdorff_excess(got, c.points), hausdorff_excess(c.points, got));
  bool ok = got.size() == c.points.size() && r.point_error <= tol;
  ok = ok && (!s.posdim_suspect.empty()) == c.posdim;
  ok = ok && rays.size() == c.rays.size();
  for (const auto& d : c.rays) {
    bool found = false;
    for (const auto& e : rays) found = found || (d - e).norm() <= tol;
    ok = ok && found;
  }
  if (c.on_continuum)
    for (const auto& x : s.component_samples) ok = ok && c.on_continuum(x) <= tol;
  if (c.points.empty() && !c.posdim && c.rays.empty()) ok = ok && s.status == SolutionStatus::ExactEmpty;
  r.pass = ok;
  return r;
}

inline std::vector<GoldenResult> golden_suite(const SolverConfig& cfg = {}) {
  std::vector<GoldenResult> out;
  for (const auto& c : golden_cases()) out.push_back(run_golden_case(c, cfg));
  return out;
}

}  // namespace tcplab
