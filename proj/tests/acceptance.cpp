// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "tcplab/builtin.hpp"
#include "tcplab/face_solver.hpp"
#include "tcplab/golden.hpp"
#include "tcplab/lab.hpp"
#include "tcplab/oracle.hpp"
#include "tcplab/properties.hpp"

using namespace tcplab;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

Vec gaussian_vec(int n, std::uint64_t seed) {
  Rng rng(seed);
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = rng.normal();
  return v;
}

Vec v2(double x, double y) {
  Vec v(2);
  v << x, y;
  return v;
}

// Largest isolated-point count seen by criteria 1-5, audited by criterion 6.
std::size_t g_max_points = 0;
std::size_t g_solves = 0;

void note_points(std::size_t n) {
  g_max_points = std::max(g_max_points, n);
  ++g_solves;
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

int g_failures = 0;

void report(int id, const char* name, const std::function<Outcome()>& body) {
  const auto start = Clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  std::printf("%s criterion %d (%s): %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str(),
              seconds_since(start));
  std::fflush(stdout);
  if (!o.pass) ++g_failures;
}

Outcome golden() {
  const auto start = Clock::now();
  const auto results = golden_suite();
  const double secs = seconds_since(start);
  std::size_t passed = 0;
  std::string first_bad;
  for (const auto& r : results) {
    note_points(r.n_points);
    if (r.pass) {
      ++passed;
    } else if (first_bad.empty()) {
      first_bad = " first failure " + r.c.table + " a=" + detail::fmt_vec(r.c.a) + ": expected " + r.expected +
                  ", got " + r.computed;
    }
  }
  std::ostringstream d;
  d << passed << "/" << results.size() << " golden rows in " << secs << " s (limit 10 s)" << first_bad;
  return {passed == results.size() && secs < 10.0, d.str()};
}

Outcome oracle_equivalence() {
  const auto start = Clock::now();
  constexpr double kBox = 5.0, kStep = 0.01, kTol = 1e-3;
  int compared = 0, skipped = 0, bad = 0;
  std::size_t points = 0;
  double worst = 0.0;
  for (std::uint64_t k = 0; k < 50; ++k) {
    const TcpInstance inst(random_gaussian(3, 2, stream_seed(99, k)), gaussian_vec(2, stream_seed(100, k)));
    const SolutionSet s = solve(inst);
    note_points(s.points.size());
    if (!s.posdim_suspect.empty()) {
      ++skipped;
      continue;
    }
    const OracleResult o = brute_force_oracle(inst, kBox, kStep, oracle_grid_tolerance(inst, kBox, kStep));
    std::vector<Vec> inside;
    for (const auto& x : s.point_list())
      if (x.maxCoeff() <= kBox) inside.push_back(x);
    const std::vector<Vec> ref = o.solutions();
    points += ref.size();
    const double e = std::max(hausdorff_excess(inside, ref), hausdorff_excess(ref, inside));
    worst = std::max(worst, e);
    bad += !(e <= kTol);
    ++compared;
  }
  const double secs = seconds_since(start);
  std::ostringstream d;
  d << compared << " instances compared (" << points << " oracle points), " << skipped << " skipped (posdim), " << bad
    << " with excess > 1e-3, worst excess " << worst << ", " << secs << " s (limit 300 s)";
  return {bad == 0 && compared > 0 && secs < 300.0, d.str()};
}

Outcome r0_classification() {
  int wrong = 0, checked = 0;
  double worst_res = 0.0;
  auto expect = [&](const Tensor& t, bool r0) {
    const PropertyReport r = check_r0(t);
    ++checked;
    if (r0) {
      wrong += r.verdict != Verdict::HoldsNumerically;
      return;
    }
    if (r.verdict != Verdict::Fails || !r.certificate || !certificate_valid(r, t)) {
      ++wrong;
      return;
    }
    note_points(1);
    worst_res = std::max(worst_res, residual(TcpInstance(t, Vec::Zero(t.dim())), *r.certificate).max());
  };
  expect(example1_tensor(), true);
  expect(gus_tensor(), true);
  expect(Tensor(3, 2), false);
  for (std::uint32_t bits : {0u, 1u, 2u})
    for (std::uint64_t seed = 0; seed < 10; ++seed) expect(non_r0_witness(3, 2, FaceMask(bits, 2), seed), false);
  std::ostringstream d;
  d << checked - wrong << "/" << checked << " tensors classified correctly, worst certificate residual " << worst_res
    << " (limit 1e-6)";
  return {wrong == 0 && worst_res <= 1e-6, d.str()};
}

Outcome genericity() {
  const ExperimentReport cubic = genericity_sample(3, 2, 200);
  const ExperimentReport matrix = genericity_sample(2, 2, 200);
  const double fc = cubic.summary["fraction_r0"].get<double>();
  const double fm = matrix.summary["fraction_r0"].get<double>();
  std::ostringstream d;
  d << "fraction R0: m=3,n=2 " << fc << ", m=2,n=2 " << fm << " (need >= 0.99, 200 samples each)";
  return {fc >= 0.99 && fm >= 0.99, d.str()};
}

Outcome openness_boundedness() {
  const ExperimentReport open = r0_openness_probe(example1_tensor(), {0.01, 0.1}, 50);
  if (open.summary["calibrated_eps"].is_null()) return {false, "openness probe found no all-pass radius"};
  const double eps = open.summary["calibrated_eps"].get<double>();
  std::vector<double> norms;
  std::size_t unbounded = 0;
  for (std::uint64_t seed : {kDefaultSeed, kDefaultSeed + 1}) {
    LabConfig cfg;
    cfg.seed = seed;
    const ExperimentReport r = local_boundedness_probe(example1_tensor(), v2(1, 1), eps, 0.5, 100, cfg);
    for (const auto& row : r.rows) note_points(static_cast<std::size_t>(row.n_points));
    unbounded += r.summary["unbounded_suspect"].get<std::size_t>();
    const auto& m = r.summary["max_norm"];
    norms.push_back(m.is_number() ? m.get<double>() : std::numeric_limits<double>::infinity());
  }
  const bool finite = std::isfinite(norms[0]) && std::isfinite(norms[1]);
  const double spread = finite ? std::abs(norms[0] - norms[1]) / std::max(norms[0], norms[1]) : INFINITY;
  std::ostringstream d;
  d << "eps " << eps << ", unbounded-suspect " << unbounded << ", max norms " << norms[0] << " / " << norms[1]
    << ", relative spread " << spread << " (limit 0.1)";
  return {unbounded == 0 && finite && spread <= 0.1, d.str()};
}

Outcome chi() {
  const std::uint64_t c = chi_bound(3, 2);
  std::ostringstream d;
  d << "chi(3,2) = " << c << ", max isolated points over " << g_solves << " solves in criteria 1-5: " << g_max_points;
  return {c == 118098u && g_max_points <= c && g_solves > 0, d.str()};
}

Outcome hoelder() {
  const auto start = Clock::now();
  const ExperimentReport r = hoelder_fit(gus_tensor(), v2(-1, -1), {0.2, 0.1, 0.05, 0.02, 0.01}, 20);
  const double secs = seconds_since(start);
  const auto& s = r.summary;
  if (s["vacuous"].get<bool>() || !s["exponent"].is_number()) return {false, "no exponent fitted"};
  const double c = s["exponent"].get<double>();
  const double res = s["fit_residual"].get<double>();
  std::ostringstream d;
  d << "c = " << c << " (need [0.85, 1.15]), gamma = " << s["gamma"].get<double>() << ", fit residual " << res
    << " (limit 0.1), confidence " << s["confidence"].get<std::string>() << ", " << secs << " s (limit 60 s)";
  return {c >= 0.85 && c <= 1.15 && res < 0.1 && secs < 60.0, d.str()};
}

Outcome stability() {
  const ExperimentReport r = stability_inclusion_check(gus_tensor(), v2(1, 1), 0.05, 50);
  const auto& s = r.summary;
  if (s["vacuous"].get<bool>()) return {false, "precondition failed (vacuous)"};
  const std::size_t violations = s["violations"].get<std::size_t>();
  const std::size_t accepted = s["accepted"].get<std::size_t>();
  const bool inconclusive = s["inconclusive"].get<bool>();
  const bool exact = s["exact_stability"].get<bool>();
  // With every excess exactly zero the inclusion holds for gamma = 0 and any c.
  const bool finite_fit = exact ? s["gamma_envelope"].is_number()
                                : s["gamma_fit"].is_number() && s["exponent"].is_number();
  std::ostringstream d;
  d << accepted << " copositive samples, " << violations << " violations";
  if (exact)
    d << ", exact stability: gamma = " << s["gamma_envelope"].get<double>() << " with any c";
  else if (finite_fit)
    d << ", gamma = " << s["gamma_fit"].get<double>() << ", c = " << s["exponent"].get<double>();
  return {!inconclusive && accepted == 50 && violations == 0 && finite_fit, d.str()};
}

// One randomized trial of every invariant family; returns the failing family or "".
std::string invariant_trial(std::uint64_t seed, std::uint64_t k, const std::vector<Tensor>& witnesses,
                            const std::vector<SolutionSet>& witness_cones) {
  Rng rng(stream_seed(seed, k));
  const int m = 2 + static_cast<int>(k % 3);
  const int n = 2 + static_cast<int>((k / 3) % 2);
  const Tensor a = random_gaussian(m, n, stream_seed(seed ^ 0xa11ce, k));

  // Homogeneity of F and the form.
  Vec x(n);
  for (int i = 0; i < n; ++i) x[i] = rng.uniform(-1, 1);
  const double t = rng.uniform(0.1, 3.0);
  const Vec lhs = contract(a, t * x), rhs = std::pow(t, m - 1) * contract(a, x);
  if ((lhs - rhs).lpNorm<Eigen::Infinity>() > 1e-10 * std::max(1.0, rhs.lpNorm<Eigen::Infinity>())) return "homogeneity";
  const double f = form(a, x);
  if (std::abs(form(a, t * x) - std::pow(t, m) * f) > 1e-10 * std::max(1.0, std::pow(t, m) * std::abs(f)))
    return "homogeneity";

  // KKT equivalence on a constructed complementary pair.
  Vec y(n), lambda(n);
  for (int i = 0; i < n; ++i) {
    const bool free = rng.uniform() < 0.5;
    y[i] = free ? rng.uniform(0.1, 2.0) : 0.0;
    lambda[i] = free ? 0.0 : rng.uniform(0.0, 2.0);
  }
  const TcpInstance kkt(a, lambda - contract(a, y));
  if (kkt_residual(kkt, {y, lambda}) > 1e-12 || residual(kkt, y).max() > 10 * kDefaultTol) return "kkt";

  // Cone and scaling of the homogeneous set.
  const std::size_t w = k % witnesses.size();
  const double s = rng.uniform(0.2, 5.0);
  const SolutionSet scaled = homogeneous_solve(scale(s, witnesses[w]));
  const auto& base = witness_cones[w];
  if (scaled.rays.size() != base.rays.size() || scaled.rays.empty()) return "cone-scaling";
  for (std::size_t r = 0; r < base.rays.size(); ++r)
    if ((scaled.rays[r].direction - base.rays[r].direction).norm() > 1e-8) return "cone-scaling";
  const TcpInstance cone0(witnesses[w], Vec::Zero(witnesses[w].dim()));
  const double tc = rng.uniform(0.0, 10.0);
  for (const auto& r : base.rays)
    if (residual(cone0, tc * r.direction).max() > kDefaultTol) return "cone-scaling";

  // Solution scaling Sol(A, t^(m-1) a) = t Sol(A, a) and determinism, on m = 3, n = 2.
  const Tensor a3 = random_gaussian(3, 2, stream_seed(seed ^ 0x5ca1e, k));
  Vec off(2);
  off << rng.normal(), rng.normal();
  const double ts = rng.uniform(0.5, 2.0);
  const SolutionSet s1 = solve(TcpInstance(a3, off));
  const SolutionSet s2 = solve(TcpInstance(a3, ts * ts * off));
  if (s1.posdim_suspect.empty() && s2.posdim_suspect.empty()) {
    std::vector<Vec> moved;
    for (const auto& p : s1.point_list()) moved.push_back(ts * p);
    if (moved.size() != s2.points.size()) return "solution-scaling";
    if (std::max(hausdorff_excess(moved, s2.point_list()), hausdorff_excess(s2.point_list(), moved)) > 1e-6)
      return "solution-scaling";
  }
  const SolutionSet again = solve(TcpInstance(a3, off));
  if (again.points.size() != s1.points.size() || again.status != s1.status) return "determinism";
  for (std::size_t p = 0; p < s1.points.size(); ++p)
    if (again.points[p].x != s1.points[p].x) return "determinism";
  return "";
}

Outcome invariants() {
  constexpr std::uint64_t kTrials = 10000;
  std::vector<Tensor> witnesses;
  std::vector<SolutionSet> cones;
  for (std::uint32_t bits : {0u, 1u, 2u})
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      witnesses.push_back(non_r0_witness(3, 2, FaceMask(bits, 2), seed));
      cones.push_back(homogeneous_solve(witnesses.back()));
    }
  std::ostringstream d;
  bool ok = true;
  for (std::uint64_t seed : {std::uint64_t{1}, std::uint64_t{2}}) {
    std::vector<std::string> fail(kTrials);
    parallel_for(kTrials, [&](std::size_t k) { fail[k] = invariant_trial(seed, k, witnesses, cones); });
    std::size_t bad = 0;
    std::string first;
    for (std::size_t k = 0; k < kTrials; ++k)
      if (!fail[k].empty()) {
        if (bad++ == 0) first = fail[k] + " at trial " + std::to_string(k);
      }
    d << "seed " << seed << ": " << kTrials - bad << "/" << kTrials << " trials pass";
    if (bad) d << " (first " << first << ")";
    d << "; ";
    ok = ok && bad == 0;
  }
  d << "families homogeneity, kkt, cone-scaling, solution-scaling, determinism";
  return {ok, d.str()};
}

}  // namespace

int main() {
  report(1, "golden closed-form suite", golden);
  report(2, "oracle equivalence", oracle_equivalence);
  report(3, "R0 classification", r0_classification);
  report(4, "genericity", genericity);
  report(5, "openness and local boundedness", openness_boundedness);
  report(6, "chi bound", chi);
  report(7, "Hoelder exponent", hoelder);
  report(8, "stability inclusion", stability);
  report(9, "invariant suites", invariants);
  std::printf("%d criteria failed\n", g_failures);
  return g_failures == 0 ? 0 : 1;
}
