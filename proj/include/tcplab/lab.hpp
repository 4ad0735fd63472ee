#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "tcplab/errors.hpp"
#include "tcplab/face_solver.hpp"
#include "tcplab/oracle.hpp"
#include "tcplab/parallel.hpp"
#include "tcplab/properties.hpp"
#include "tcplab/rng.hpp"
#include "tcplab/tcp.hpp"
#include "tcplab/tensor.hpp"

namespace tcplab {

enum class ExperimentKind { LocalBoundedness, R0Openness, Genericity, Usc, Hoelder, StabilityInclusion };

inline const char* to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::LocalBoundedness: return "local-boundedness";
    case ExperimentKind::R0Openness: return "r0-openness";
    case ExperimentKind::Genericity: return "genericity";
    case ExperimentKind::Usc: return "usc";
    case ExperimentKind::Hoelder: return "hoelder";
    case ExperimentKind::StabilityInclusion: return "stability-inclusion";
  }
  return "?";
}

/// Fields that do not apply to an experiment are NaN.
struct ExperimentRow {
  std::size_t sample_id = 0;
  double pert_norm_tensor = 0.0;
  double pert_norm_vec = 0.0;
  int n_points = 0;
  double max_norm = 0.0;  // +inf when recession rays were found
  double excess = std::numeric_limits<double>::quiet_NaN();
  std::string flags;      // ';'-separated
};

struct ExperimentReport {
  ExperimentKind kind = ExperimentKind::LocalBoundedness;
  nlohmann::ordered_json params = nlohmann::ordered_json::object();
  std::vector<ExperimentRow> rows;
  nlohmann::ordered_json summary = nlohmann::ordered_json::object();
};

struct LabConfig {
  PropertyConfig check;                      // solver settings live in check.solver
  std::uint64_t seed = kDefaultSeed;         // sampling seed
  int usc_shells = 4;                        // radii r, r/2, r/4, ...
  double usc_witness_floor = 0.1;
  int rejection_factor = 20;
  double hoelder_min_decades = 1.5;
  int hoelder_min_radii = 4;

  const SolverConfig& solver() const { return check.solver; }
};

/// JSON value for a double: +-inf become the strings "inf"/"-inf", NaN null.
inline nlohmann::ordered_json json_number(double v) {
  if (std::isnan(v)) return nullptr;
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

namespace detail {

inline void add_flag(std::string& flags, const char* f) {
  if (!flags.empty()) flags += ';';
  flags += f;
}

/// Uniform direction times r * U^(1/dim): volume-uniform in the closed ball.
inline Vec ball_sample(Eigen::Index dim, double radius, Rng& rng) {
  Vec v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v[i] = rng.normal();
  const double len = v.norm();
  if (len == 0.0 || radius == 0.0) return Vec::Zero(dim);
  const double scale = radius * std::pow(rng.uniform(), 1.0 / static_cast<double>(dim));
  return v * (scale / len);
}

inline Vec sphere_sample(Eigen::Index dim, double radius, Rng& rng) {
  Vec v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v[i] = rng.normal();
  const double len = v.norm();
  if (len == 0.0) return Vec::Zero(dim);
  return v * (radius / len);
}

inline Tensor tensor_from(const Tensor& shape, const Vec& flat) {
  return Tensor(shape.order(), shape.dim(), std::vector<double>(flat.data(), flat.data() + flat.size()));
}

inline Vec flat_of(const Tensor& a) {
  const auto e = a.entries();
  return Eigen::Map<const Vec>(e.data(), static_cast<Eigen::Index>(e.size()));
}

/// Point cloud standing in for a solution set in excess computations.
struct SampledSet {
  std::vector<Vec> points;
  int n_points = 0;
  bool unbounded = false;  // recession rays found in Sol(A, a) itself
  bool suspect = false;    // status unbounded-suspect (A not R0)
  bool posdim = false;
  double max_norm = 0.0;
};

inline SampledSet sampled(const SolutionSet& s) {
  SampledSet out;
  out.points = s.all_found();
  out.n_points = static_cast<int>(s.points.size());
  out.unbounded = !s.rays.empty();
  out.suspect = s.status == SolutionStatus::UnboundedSuspect;
  out.posdim = !s.posdim_suspect.empty();
  out.max_norm = out.unbounded ? std::numeric_limits<double>::infinity() : s.max_norm();
  return out;
}

/// Reference set for excess: found points, plus oracle cluster points when
/// the solve flags a positive-dimensional piece.
inline std::vector<Vec> reference_points(const TcpInstance& inst, const SolutionSet& s) {
  std::vector<Vec> pts = s.all_found();
  if (s.posdim_suspect.empty()) return pts;
  const int n = inst.dim();
  double box = 1.0;
  for (const auto& p : pts) box = std::max(box, 1.5 * p.lpNorm<Eigen::Infinity>());
  const double per_axis = std::floor(std::pow(1e6 / n, 1.0 / n));
  const double step = box / std::max(2.0, per_axis - 1);
  const OracleResult o = brute_force_oracle(inst, box, step, oracle_grid_tolerance(inst, box, step));
  for (const auto& c : o.clusters)
    for (const auto& x : c.solutions) pts.push_back(x);
  return pts;
}

inline double excess_of(const SampledSet& perturbed, const std::vector<Vec>& reference, bool reference_unbounded) {
  if (perturbed.points.empty() && !perturbed.unbounded) return 0.0;
  if (perturbed.unbounded && !reference_unbounded) return std::numeric_limits<double>::infinity();
  return hausdorff_excess(perturbed.points, reference);
}

/// Least squares of log e = log gamma + c log t. Returns (gamma, c, rms of
/// log residuals); needs at least two distinct t.
struct LogFit {
  double gamma = std::numeric_limits<double>::quiet_NaN();
  double exponent = std::numeric_limits<double>::quiet_NaN();
  double residual = std::numeric_limits<double>::quiet_NaN();
  std::size_t used = 0;
  bool ok = false;
};

inline LogFit log_log_fit(const std::vector<std::pair<double, double>>& te) {
  std::vector<double> xs, ys;
  for (const auto& [t, e] : te)
    if (t > 0 && e > 0 && std::isfinite(t) && std::isfinite(e)) {
      xs.push_back(std::log(t));
      ys.push_back(std::log(e));
    }
  LogFit fit;
  fit.used = xs.size();
  if (xs.size() < 2) return fit;
  const double k = static_cast<double>(xs.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i] / k;
    my += ys[i] / k;
  }
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (sxx <= 0) return fit;
  fit.exponent = sxy / sxx;
  const double intercept = my - fit.exponent * mx;
  fit.gamma = std::exp(intercept);
  double ss = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - intercept - fit.exponent * xs[i];
    ss += r * r;
  }
  fit.residual = std::sqrt(ss / k);
  fit.ok = true;
  return fit;
}

inline nlohmann::ordered_json solver_params(const SolverConfig& s) {
  nlohmann::ordered_json j;
  j["tol"] = s.tol;
  j["dedup_radius"] = s.dedup_radius;
  j["newton_max_iter"] = s.newton_max_iter;
  j["grid_starts_per_axis"] = s.grid_starts_per_axis;
  j["start_box_radius"] = s.start_box_radius;
  j["random_starts"] = s.random_starts;
  j["solver_seed"] = s.seed;
  return j;
}

}  // namespace detail

/// Samples (B, b) in the closed balls ||B - A|| <= eps, ||b - a|| <= delta
/// and records the norms of Sol(B, b). eps = delta = 0 is a single solve.
inline ExperimentReport local_boundedness_probe(const Tensor& a, const Vec& offset, double eps, double delta,
                                                int samples, const LabConfig& cfg = {}) {
  if (!(eps >= 0) || !(delta >= 0)) throw ArgumentError("local_boundedness_probe: eps and delta must be >= 0");
  if (samples < 0) throw ArgumentError("local_boundedness_probe: samples must be >= 0");
  detail::require_dim(a, offset, "local_boundedness_probe");
  ExperimentReport rep;
  rep.kind = ExperimentKind::LocalBoundedness;
  const PropertyReport r0 = check_r0(a, cfg.check);
  const bool trivial = eps == 0 && delta == 0;
  const int count = trivial ? std::min(samples, 1) : samples;
  rep.params["eps"] = eps;
  rep.params["delta"] = delta;
  rep.params["samples"] = count;
  rep.params["seed"] = cfg.seed;
  rep.params["solver"] = detail::solver_params(cfg.solver());

  const Vec base = detail::flat_of(a);
  rep.rows.resize(static_cast<std::size_t>(count));
  parallel_for(rep.rows.size(), [&](std::size_t id) {
    Rng rng(stream_seed(cfg.seed, id));
    const Vec dt = detail::ball_sample(base.size(), eps, rng);
    const Vec dv = detail::ball_sample(offset.size(), delta, rng);
    const SolutionSet s = solve(TcpInstance(detail::tensor_from(a, base + dt), offset + dv), cfg.solver());
    const detail::SampledSet ss = detail::sampled(s);
    ExperimentRow& row = rep.rows[id];
    row.sample_id = id;
    row.pert_norm_tensor = dt.norm();
    row.pert_norm_vec = dv.norm();
    row.n_points = ss.n_points;
    row.max_norm = ss.max_norm;
    if (ss.suspect) detail::add_flag(row.flags, "unbounded-suspect");
    if (ss.unbounded) detail::add_flag(row.flags, "ray");
    if (ss.posdim) detail::add_flag(row.flags, "posdim");
    if (s.status == SolutionStatus::ExactEmpty) detail::add_flag(row.flags, "empty");
  });

  std::size_t unbounded = 0, empty = 0;
  for (const auto& r : rep.rows) {
    unbounded += r.flags.find("unbounded-suspect") != std::string::npos;
    empty += r.flags.find("empty") != std::string::npos;
  }
  rep.summary["vacuous"] = r0.verdict != Verdict::HoldsNumerically;
  rep.summary["r0_verdict"] = to_string(r0.verdict);
  rep.summary["samples"] = rep.rows.size();
  rep.summary["unbounded_suspect"] = unbounded;
  rep.summary["empty"] = empty;
  double max_norm = 0.0;
  for (const auto& r : rep.rows) max_norm = std::max(max_norm, r.max_norm);
  rep.summary["max_norm"] = json_number(max_norm);
  return rep;
}

/// Perturbs A by tensors of Frobenius norm exactly r and re-runs check_r0.
inline ExperimentReport r0_openness_probe(const Tensor& a, const std::vector<double>& radii, int samples_per_radius,
                                          const LabConfig& cfg = {}) {
  if (samples_per_radius < 0) throw ArgumentError("r0_openness_probe: samples must be >= 0");
  for (double r : radii)
    if (!(r >= 0) || !std::isfinite(r)) throw ArgumentError("r0_openness_probe: radii must be finite and >= 0");
  ExperimentReport rep;
  rep.kind = ExperimentKind::R0Openness;
  rep.params["radii"] = radii;
  rep.params["samples_per_radius"] = samples_per_radius;
  rep.params["seed"] = cfg.seed;
  rep.params["solver"] = detail::solver_params(cfg.solver());
  const PropertyReport base_r0 = check_r0(a, cfg.check);
  const bool vacuous = base_r0.verdict != Verdict::HoldsNumerically;
  rep.summary["vacuous"] = vacuous;
  if (vacuous) {
    rep.summary["largest_all_pass_radius"] = nullptr;
    rep.summary["calibrated_eps"] = nullptr;
    return rep;
  }

  const Vec base = detail::flat_of(a);
  const std::size_t per = static_cast<std::size_t>(samples_per_radius);
  rep.rows.resize(radii.size() * per);
  parallel_for(rep.rows.size(), [&](std::size_t id) {
    const double r = radii[id / per];
    Rng rng(stream_seed(cfg.seed, id));
    const Vec dt = detail::sphere_sample(base.size(), r, rng);
    const PropertyReport pr = check_r0(detail::tensor_from(a, base + dt), cfg.check);
    ExperimentRow& row = rep.rows[id];
    row.sample_id = id;
    row.pert_norm_tensor = r;
    row.pert_norm_vec = 0.0;
    row.n_points = pr.verdict == Verdict::Fails ? 1 : 0;  // certificate rays reported
    row.max_norm = std::numeric_limits<double>::quiet_NaN();
    if (pr.verdict != Verdict::HoldsNumerically) detail::add_flag(row.flags, "not-r0");
  });

  nlohmann::ordered_json per_radius = nlohmann::ordered_json::array();
  double best = -1.0;
  for (std::size_t k = 0; k < radii.size(); ++k) {
    std::size_t pass = 0;
    for (std::size_t s = 0; s < per; ++s) pass += rep.rows[k * per + s].flags.empty();
    const double frac = per == 0 ? std::numeric_limits<double>::quiet_NaN() : static_cast<double>(pass) / per;
    per_radius.push_back({{"radius", radii[k]}, {"fraction_r0", json_number(frac)}});
    if (per > 0 && pass == per) best = std::max(best, radii[k]);
  }
  rep.summary["per_radius"] = per_radius;
  rep.summary["largest_all_pass_radius"] = best >= 0 ? json_number(best) : nullptr;
  rep.summary["calibrated_eps"] = best >= 0 ? json_number(best / 2) : nullptr;
  return rep;
}

/// Wilson score interval at 95%.
inline std::pair<double, double> wilson_interval(std::size_t successes, std::size_t trials) {
  if (trials == 0) return {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
  const double z = 1.959963984540054;
  const double nn = static_cast<double>(trials);
  const double p = successes / nn;
  const double denom = 1 + z * z / nn;
  const double centre = (p + z * z / (2 * nn)) / denom;
  const double half = z * std::sqrt(p * (1 - p) / nn + z * z / (4 * nn * nn)) / denom;
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

/// Fraction of i.i.d. Gaussian tensors passing check_r0.
inline ExperimentReport genericity_sample(int m, int n, int samples, const LabConfig& cfg = {}) {
  if (samples < 0) throw ArgumentError("genericity_sample: samples must be >= 0");
  Tensor shape(m, n);  // validates m, n
  ExperimentReport rep;
  rep.kind = ExperimentKind::Genericity;
  rep.params["m"] = m;
  rep.params["n"] = n;
  rep.params["samples"] = samples;
  rep.params["seed"] = cfg.seed;
  rep.params["solver"] = detail::solver_params(cfg.solver());
  rep.rows.resize(static_cast<std::size_t>(samples));
  parallel_for(rep.rows.size(), [&](std::size_t id) {
    const Tensor t = random_gaussian(m, n, stream_seed(cfg.seed, id));
    const PropertyReport pr = check_r0(t, cfg.check);
    ExperimentRow& row = rep.rows[id];
    row.sample_id = id;
    row.pert_norm_tensor = frobenius(t);
    row.pert_norm_vec = 0.0;
    row.n_points = pr.verdict == Verdict::Fails ? 1 : 0;
    row.max_norm = std::numeric_limits<double>::quiet_NaN();
    if (pr.verdict != Verdict::HoldsNumerically) detail::add_flag(row.flags, "not-r0");
  });
  std::size_t pass = 0;
  for (const auto& r : rep.rows) pass += r.flags.empty();
  const auto [lo, hi] = wilson_interval(pass, rep.rows.size());
  rep.summary["samples"] = rep.rows.size();
  rep.summary["r0_count"] = pass;
  rep.summary["fraction_r0"] =
      rep.rows.empty() ? nullptr : json_number(static_cast<double>(pass) / static_cast<double>(rep.rows.size()));
  rep.summary["ci95_low"] = json_number(lo);
  rep.summary["ci95_high"] = json_number(hi);
  return rep;
}

/// Excess of Sol(B, b) over Sol(A, a) for (B, b) in joint balls of radius
/// r, r/2, r/4, ... (one shell per radius, `samples` each).
inline ExperimentReport usc_probe(const TcpInstance& inst, double radius, int samples, const LabConfig& cfg = {}) {
  if (!(radius >= 0) || !std::isfinite(radius)) throw ArgumentError("usc_probe: radius must be finite and >= 0");
  if (samples < 0) throw ArgumentError("usc_probe: samples must be >= 0");
  ExperimentReport rep;
  rep.kind = ExperimentKind::Usc;
  const int shells = radius == 0 ? 1 : std::max(1, cfg.usc_shells);
  rep.params["radius"] = radius;
  rep.params["shells"] = shells;
  rep.params["samples_per_shell"] = samples;
  rep.params["witness_floor"] = cfg.usc_witness_floor;
  rep.params["seed"] = cfg.seed;
  rep.params["solver"] = detail::solver_params(cfg.solver());

  const SolutionSet ref = solve(inst, cfg.solver());
  const detail::SampledSet ref_s = detail::sampled(ref);
  if (ref.status == SolutionStatus::ExactEmpty) {
    rep.summary["vacuous"] = true;
    rep.summary["reason"] = "Sol(A,a) is empty";
    return rep;
  }
  const std::vector<Vec> reference = detail::reference_points(inst, ref);

  const Tensor& a = inst.tensor();
  const Vec base = detail::flat_of(a);
  const Eigen::Index tdim = base.size();
  const Eigen::Index joint = tdim + inst.dim();
  const std::size_t per = static_cast<std::size_t>(samples);
  rep.rows.resize(static_cast<std::size_t>(shells) * per);
  parallel_for(rep.rows.size(), [&](std::size_t id) {
    const double r = radius / std::pow(2.0, static_cast<double>(id / per));
    Rng rng(stream_seed(cfg.seed, id));
    const Vec d = detail::ball_sample(joint, r, rng);
    const Vec dt = d.head(tdim);
    const Vec dv = d.tail(inst.dim());
    const SolutionSet s = solve(TcpInstance(detail::tensor_from(a, base + dt), inst.offset() + dv), cfg.solver());
    const detail::SampledSet ss = detail::sampled(s);
    ExperimentRow& row = rep.rows[id];
    row.sample_id = id;
    row.pert_norm_tensor = dt.norm();
    row.pert_norm_vec = dv.norm();
    row.n_points = ss.n_points;
    row.max_norm = ss.max_norm;
    row.excess = detail::excess_of(ss, reference, ref_s.unbounded);
    if (ss.suspect) detail::add_flag(row.flags, "unbounded-suspect");
    if (ss.unbounded) detail::add_flag(row.flags, "ray");
    if (ss.posdim) detail::add_flag(row.flags, "posdim");
  });

  nlohmann::ordered_json per_shell = nlohmann::ordered_json::array();
  std::vector<double> shell_max;
  for (int k = 0; k < shells; ++k) {
    double e = 0.0;
    for (std::size_t s = 0; s < per; ++s) e = std::max(e, rep.rows[static_cast<std::size_t>(k) * per + s].excess);
    shell_max.push_back(e);
    per_shell.push_back({{"radius", radius / std::pow(2.0, k)}, {"max_excess", json_number(e)}});
  }
  // Witness: the smallest shell keeps an excess above the floor that has not
  // shrunk below half the outermost shell's.
  const bool witness = per > 0 && shell_max.back() >= cfg.usc_witness_floor && shell_max.back() >= 0.5 * shell_max.front();
  if (witness) {
    for (std::size_t s = 0; s < per; ++s) {
      ExperimentRow& row = rep.rows[(static_cast<std::size_t>(shells) - 1) * per + s];
      if (row.excess >= cfg.usc_witness_floor) detail::add_flag(row.flags, "usc-witness");
    }
  }
  bool shrinking = true;
  for (std::size_t k = 1; k < shell_max.size(); ++k) shrinking = shrinking && shell_max[k] <= shell_max[k - 1];
  rep.summary["vacuous"] = false;
  rep.summary["reference_points"] = reference.size();
  rep.summary["reference_posdim"] = ref_s.posdim;
  rep.summary["per_shell"] = per_shell;
  rep.summary["excess_nonincreasing_as_radius_shrinks"] = shrinking;
  rep.summary["usc_violation_witness"] = witness;
  return rep;
}

/// Max excess e(r) of Sol(A, b) over Sol(A, a) on spheres ||b - a|| = r and
/// the least-squares fit log e = log gamma + c log r.
inline ExperimentReport hoelder_fit(const Tensor& a, const Vec& offset, const std::vector<double>& radii,
                                    int samples_per_radius, const LabConfig& cfg = {}) {
  if (radii.empty()) throw ArgumentError("hoelder_fit: radii must not be empty");
  for (double r : radii)
    if (!(r > 0) || !std::isfinite(r)) throw ArgumentError("hoelder_fit: radii must be finite and > 0");
  if (samples_per_radius < 1) throw ArgumentError("hoelder_fit: samples_per_radius must be >= 1");
  detail::require_dim(a, offset, "hoelder_fit");
  ExperimentReport rep;
  rep.kind = ExperimentKind::Hoelder;
  rep.params["radii"] = radii;
  rep.params["samples_per_radius"] = samples_per_radius;
  rep.params["seed"] = cfg.seed;
  rep.params["solver"] = detail::solver_params(cfg.solver());

  const SolutionSet cone = homogeneous_solve(a, cfg.solver());
  const SolutionSet ref = solve(TcpInstance(a, offset), cfg.solver(), cone);
  if (ref.points.empty() || !ref.posdim_suspect.empty() || !ref.rays.empty()) {
    rep.summary["vacuous"] = true;
    rep.summary["reason"] = ref.points.empty() ? "Sol(A,a) is empty" : "Sol(A,a) is not a finite point set";
    return rep;
  }
  const std::vector<Vec> reference = ref.point_list();

  const std::size_t per = static_cast<std::size_t>(samples_per_radius);
  rep.rows.resize(radii.size() * per);
  parallel_for(rep.rows.size(), [&](std::size_t id) {
    const double r = radii[id / per];
    Rng rng(stream_seed(cfg.seed, id));
    const Vec dv = detail::sphere_sample(offset.size(), r, rng);
    const SolutionSet s = solve(TcpInstance(a, offset + dv), cfg.solver(), cone);
    const detail::SampledSet ss = detail::sampled(s);
    ExperimentRow& row = rep.rows[id];
    row.sample_id = id;
    row.pert_norm_tensor = 0.0;
    row.pert_norm_vec = r;
    row.n_points = ss.n_points;
    row.max_norm = ss.max_norm;
    row.excess = detail::excess_of(ss, reference, false);
    if (ss.suspect) detail::add_flag(row.flags, "unbounded-suspect");
    if (ss.unbounded) detail::add_flag(row.flags, "ray");
    if (ss.posdim) detail::add_flag(row.flags, "posdim");
  });

  nlohmann::ordered_json per_radius = nlohmann::ordered_json::array();
  std::vector<std::pair<double, double>> points;
  bool all_zero = true;
  double rmin = std::numeric_limits<double>::infinity(), rmax = 0.0;
  std::size_t used_radii = 0;
  for (std::size_t k = 0; k < radii.size(); ++k) {
    double e = 0.0;
    for (std::size_t s = 0; s < per; ++s) e = std::max(e, rep.rows[k * per + s].excess);
    per_radius.push_back({{"radius", radii[k]}, {"max_excess", json_number(e)}});
    all_zero = all_zero && e == 0.0;
    if (e > 0 && std::isfinite(e)) {
      points.emplace_back(radii[k], e);
      rmin = std::min(rmin, radii[k]);
      rmax = std::max(rmax, radii[k]);
      ++used_radii;
    }
  }
  std::vector<double> distinct;
  for (const auto& [r, e] : points)
    if (std::find(distinct.begin(), distinct.end(), r) == distinct.end()) distinct.push_back(r);
  const detail::LogFit fit = detail::log_log_fit(points);
  const double decades = used_radii > 0 ? std::log10(rmax / rmin) : 0.0;
  const bool confident = static_cast<int>(distinct.size()) >= cfg.hoelder_min_radii && decades >= cfg.hoelder_min_decades;
  rep.summary["vacuous"] = false;
  rep.summary["per_radius"] = per_radius;
  rep.summary["exact_stability"] = all_zero;
  rep.summary["gamma"] = json_number(fit.gamma);
  rep.summary["exponent"] = json_number(fit.exponent);
  rep.summary["fit_residual"] = json_number(fit.residual);
  rep.summary["radii_used"] = distinct.size();
  rep.summary["decades"] = decades;
  rep.summary["confidence"] = all_zero ? "n/a" : (fit.ok && confident ? "ok" : "low");
  return rep;
}

/// Joint perturbations (B, b), ||B - A|| <= eps, ||b - a|| <= eps, with B
/// restricted to copositive tensors by rejection. Counts samples where
/// Sol(B, b) is empty or suspected unbounded, and fits excess against
/// t = ||B - A|| + ||b - a||; gamma is raised to the envelope max e / t^c so
/// that every sample satisfies e <= gamma t^c.
inline ExperimentReport stability_inclusion_check(const Tensor& a, const Vec& offset, double eps, int samples,
                                                  const LabConfig& cfg = {}) {
  if (!(eps >= 0) || !std::isfinite(eps)) throw ArgumentError("stability_inclusion_check: eps must be finite and >= 0");
  if (samples < 0) throw ArgumentError("stability_inclusion_check: samples must be >= 0");
  detail::require_dim(a, offset, "stability_inclusion_check");
  ExperimentReport rep;
  rep.kind = ExperimentKind::StabilityInclusion;
  rep.params["eps"] = eps;
  rep.params["samples"] = samples;
  rep.params["rejection_factor"] = cfg.rejection_factor;
  rep.params["seed"] = cfg.seed;
  rep.params["solver"] = detail::solver_params(cfg.solver());

  const SolutionSet cone = homogeneous_solve(a, cfg.solver());
  const std::vector<Vec> rays = ray_directions(cone);
  const bool member = int_dual_cone_member(rays, offset, cfg.solver().tol);
  rep.summary["dual_cone_rays"] = rays.size();
  rep.summary["dual_cone_member"] = member;
  rep.summary["dual_cone_test"] = "rays found by the homogeneous solve";
  if (!member) {
    rep.summary["vacuous"] = true;
    rep.summary["reason"] = "a is not in the interior of the dual of Sol(A,0)";
    return rep;
  }
  const TcpInstance inst(a, offset);
  const SolutionSet ref = solve(inst, cfg.solver(), cone);
  const detail::SampledSet ref_s = detail::sampled(ref);
  const std::vector<Vec> reference = detail::reference_points(inst, ref);

  const Vec base = detail::flat_of(a);
  const Eigen::Index tdim = base.size();
  const std::size_t want = static_cast<std::size_t>(samples);
  const std::size_t cap = want * static_cast<std::size_t>(std::max(1, cfg.rejection_factor));

  // Attempts are drawn in batches; attempt k always uses stream k, so the
  // accepted set does not depend on the batch size or thread count.
  std::vector<std::size_t> accepted;
  std::size_t attempts = 0;
  while (accepted.size() < want && attempts < cap) {
    const std::size_t batch = std::min(cap - attempts, std::max<std::size_t>(want - accepted.size(), 8));
    std::vector<char> ok(batch, 0);
    parallel_for(batch, [&](std::size_t j) {
      Rng rng(stream_seed(cfg.seed, attempts + j));
      const Vec dt = detail::ball_sample(tdim, eps, rng);
      ok[j] = check_copositive(detail::tensor_from(a, base + dt), cfg.check).verdict == Verdict::HoldsNumerically;
    });
    for (std::size_t j = 0; j < batch && accepted.size() < want; ++j)
      if (ok[j]) accepted.push_back(attempts + j);
    attempts += batch;
  }

  rep.rows.resize(accepted.size());
  parallel_for(accepted.size(), [&](std::size_t k) {
    const std::size_t id = accepted[k];
    Rng rng(stream_seed(cfg.seed, id));
    const Vec dt = detail::ball_sample(tdim, eps, rng);
    const Vec dv = detail::ball_sample(offset.size(), eps, rng);
    const SolutionSet s = solve(TcpInstance(detail::tensor_from(a, base + dt), offset + dv), cfg.solver());
    const detail::SampledSet ss = detail::sampled(s);
    ExperimentRow& row = rep.rows[k];
    row.sample_id = id;
    row.pert_norm_tensor = dt.norm();
    row.pert_norm_vec = dv.norm();
    row.n_points = ss.n_points;
    row.max_norm = ss.max_norm;
    row.excess = detail::excess_of(ss, reference, ref_s.unbounded);
    if (s.status == SolutionStatus::ExactEmpty) detail::add_flag(row.flags, "violation-empty");
    if (ss.unbounded || ss.suspect) detail::add_flag(row.flags, "violation-unbounded");
    if (ss.posdim) detail::add_flag(row.flags, "posdim");
  });

  std::size_t violations = 0;
  std::vector<std::pair<double, double>> te;
  bool all_zero = true;
  for (const auto& r : rep.rows) {
    violations += r.flags.find("violation") != std::string::npos;
    te.emplace_back(r.pert_norm_tensor + r.pert_norm_vec, r.excess);
    all_zero = all_zero && r.excess == 0.0;
  }
  detail::LogFit fit = detail::log_log_fit(te);
  double gamma_env = std::numeric_limits<double>::quiet_NaN();
  if (fit.ok) {
    gamma_env = 0.0;
    for (const auto& [t, e] : te)
      if (t > 0 && std::isfinite(e)) gamma_env = std::max(gamma_env, e / std::pow(t, fit.exponent));
  }
  const bool inconclusive = accepted.size() < want;
  rep.summary["vacuous"] = false;
  rep.summary["inconclusive"] = inconclusive;
  rep.summary["attempts"] = attempts;
  rep.summary["accepted"] = accepted.size();
  rep.summary["rejected"] = attempts - accepted.size();
  rep.summary["violations"] = violations;
  // With every excess zero the inclusion holds with gamma = 0 for any c.
  if (all_zero && !rep.rows.empty()) gamma_env = 0.0;
  rep.summary["exact_stability"] = all_zero && !rep.rows.empty();
  rep.summary["exponent"] = json_number(fit.exponent);
  rep.summary["gamma_fit"] = json_number(fit.gamma);
  rep.summary["gamma_envelope"] = json_number(gamma_env);
  rep.summary["fit_residual"] = json_number(fit.residual);
  return rep;
}

}  // namespace tcplab
