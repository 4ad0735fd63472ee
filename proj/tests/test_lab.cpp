#include <gtest/gtest.h>

#include <cstdlib>

#include "tcplab/builtin.hpp"
#include "tcplab/io.hpp"
#include "tcplab/lab.hpp"
#include "test_util.hpp"

using namespace tcplab;
using tcplab::testing::v2;

namespace {

LabConfig seeded(std::uint64_t seed) {
  LabConfig c;
  c.seed = seed;
  return c;
}

bool has_flag(const ExperimentRow& r, const std::string& f) {
  return (";" + r.flags + ";").find(";" + f + ";") != std::string::npos;
}

}  // namespace

TEST(Boundedness, Example1IsBounded) {
  const ExperimentReport r = local_boundedness_probe(example1_tensor(), v2(1, 1), 0.05, 0.5, 100);
  EXPECT_FALSE(r.summary["vacuous"].get<bool>());
  EXPECT_EQ(r.summary["unbounded_suspect"].get<std::size_t>(), 0u);
  ASSERT_EQ(r.rows.size(), 100u);
  for (const auto& row : r.rows) {
    EXPECT_LE(row.pert_norm_tensor, 0.05 + 1e-12);
    EXPECT_LE(row.pert_norm_vec, 0.5 + 1e-12);
    EXPECT_TRUE(std::isfinite(row.max_norm));
  }
  EXPECT_TRUE(std::isfinite(r.summary["max_norm"].get<double>()));
}

TEST(Boundedness, ZeroTensorIsVacuous) {
  const ExperimentReport r = local_boundedness_probe(Tensor(3, 2), v2(0, 1), 0.05, 0.5, 20);
  EXPECT_TRUE(r.summary["vacuous"].get<bool>());
  // With eps = 0 the tensor stays zero: each sample is either empty (some
  // b_i < 0) or carries the recession cone of the zero tensor.
  const ExperimentReport z = local_boundedness_probe(Tensor(3, 2), v2(0, 1), 0.0, 0.5, 20);
  const auto unbounded = z.summary["unbounded_suspect"].get<std::size_t>();
  EXPECT_GT(unbounded, 0u);
  EXPECT_EQ(unbounded + z.summary["empty"].get<std::size_t>(), 20u);
}

TEST(Boundedness, ZeroRadiiIsOneSolve) {
  const ExperimentReport r = local_boundedness_probe(example1_tensor(), v2(2, 1), 0, 0, 50);
  ASSERT_EQ(r.rows.size(), 1u);
  EXPECT_EQ(r.rows[0].n_points, 2);
  EXPECT_NEAR(r.rows[0].max_norm, 1.0, 1e-9);
  EXPECT_THROW(local_boundedness_probe(example1_tensor(), v2(2, 1), -1, 0, 5), ArgumentError);
}

TEST(Openness, Examples) {
  const ExperimentReport r = r0_openness_probe(example1_tensor(), {0.0, 0.01, 0.1}, 50);
  const auto& per = r.summary["per_radius"];
  ASSERT_EQ(per.size(), 3u);
  EXPECT_EQ(per[0]["fraction_r0"].get<double>(), 1.0);
  EXPECT_EQ(per[1]["fraction_r0"].get<double>(), 1.0);
  EXPECT_GE(r.summary["largest_all_pass_radius"].get<double>(), 0.01);

  const ExperimentReport w = r0_openness_probe(non_r0_witness(3, 2, FaceMask::from_indices({0}, 2), 1), {0.01}, 10);
  EXPECT_TRUE(w.summary["vacuous"].get<bool>());
}

TEST(Genericity, Fractions) {
  const ExperimentReport c = genericity_sample(3, 2, 200);
  EXPECT_GE(c.summary["fraction_r0"].get<double>(), 0.99);
  EXPECT_LE(c.summary["ci95_low"].get<double>(), c.summary["fraction_r0"].get<double>());
  const ExperimentReport m = genericity_sample(2, 2, 200);
  EXPECT_GE(m.summary["fraction_r0"].get<double>(), 0.99);
  const ExperimentReport e = genericity_sample(3, 2, 0);
  EXPECT_TRUE(e.summary["fraction_r0"].is_null());
  EXPECT_TRUE(e.rows.empty());
}

TEST(WilsonInterval, KnownValues) {
  // All successes: the lower bound collapses to n / (n + z^2).
  const double z = 1.959963984540054;
  const auto [lo, hi] = wilson_interval(200, 200);
  EXPECT_NEAR(lo, 200.0 / (200.0 + z * z), 1e-12);
  EXPECT_DOUBLE_EQ(hi, 1.0);
}

TEST(Usc, Example1ExcessShrinks) {
  const ExperimentReport r = usc_probe(TcpInstance(example1_tensor(), v2(2, 1)), 0.05, 30);
  EXPECT_FALSE(r.summary["usc_violation_witness"].get<bool>());
  const auto& shells = r.summary["per_shell"];
  ASSERT_EQ(shells.size(), 4u);
  // Monotone shells sanity: pooled max excess is nondecreasing in the radius.
  for (std::size_t k = 1; k < shells.size(); ++k)
    EXPECT_LE(shells[k]["max_excess"].get<double>(), shells[k - 1]["max_excess"].get<double>());
  EXPECT_LT(shells[3]["max_excess"].get<double>(), 0.01);
}

TEST(Usc, NonR0WitnessShowsBlowUp) {
  const Tensor w = non_r0_witness(3, 2, FaceMask::from_indices({0}, 2), 7);
  const ExperimentReport r = usc_probe(TcpInstance(w, v2(1, 1)), 0.05, 30);
  EXPECT_TRUE(r.summary["usc_violation_witness"].get<bool>());
  // Sol(A, 0) carries the ray (0, 1): a = 0 exhibits the unbounded set directly.
  const SolutionSet s = solve(TcpInstance(w, Vec::Zero(2)));
  EXPECT_FALSE(s.rays.empty());
  EXPECT_TRUE(std::isinf(detail::sampled(s).max_norm));
}

TEST(Usc, ZeroRadiusHasZeroExcess) {
  const ExperimentReport r = usc_probe(TcpInstance(example1_tensor(), v2(2, 1)), 0.0, 5);
  for (const auto& row : r.rows) EXPECT_EQ(row.excess, 0.0);
  EXPECT_TRUE(usc_probe(TcpInstance(Tensor(3, 2), v2(-1, 0)), 0.1, 5).summary["vacuous"].get<bool>());
}

TEST(Hoelder, GusTensorIsLipschitz) {
  const ExperimentReport r = hoelder_fit(gus_tensor(), v2(-1, -1), {0.2, 0.1, 0.05, 0.02, 0.01}, 20);
  EXPECT_FALSE(r.summary["vacuous"].get<bool>());
  EXPECT_NEAR(r.summary["exponent"].get<double>(), 1.0, 0.15);
  EXPECT_LT(r.summary["fit_residual"].get<double>(), 0.1);
}

TEST(Hoelder, ExactStabilityAndErrors) {
  const ExperimentReport z = hoelder_fit(Tensor(3, 2), v2(1, 1), {0.2, 0.1, 0.05, 0.02}, 10);
  EXPECT_TRUE(z.summary["exact_stability"].get<bool>());
  EXPECT_TRUE(z.summary["exponent"].is_null());
  EXPECT_THROW(hoelder_fit(gus_tensor(), v2(-1, -1), {}, 10), ArgumentError);
  EXPECT_THROW(hoelder_fit(gus_tensor(), v2(-1, -1), {0.1, -0.1}, 10), ArgumentError);
  EXPECT_TRUE(hoelder_fit(monotone_example_tensor(), v2(-1, -1), {0.1}, 5).summary["vacuous"].get<bool>());
}

TEST(LogLogFit, RecoversPowerLaw) {
  std::vector<std::pair<double, double>> pts;
  for (double r : {0.01, 0.03, 0.1, 0.3, 1.0}) pts.push_back({r, 2.5 * std::pow(r, 0.5)});
  const auto fit = detail::log_log_fit(pts);
  EXPECT_NEAR(fit.exponent, 0.5, 1e-12);
  EXPECT_NEAR(fit.gamma, 2.5, 1e-12);
  EXPECT_NEAR(fit.residual, 0.0, 1e-12);
}

TEST(Stability, Examples) {
  const ExperimentReport g = stability_inclusion_check(gus_tensor(), v2(1, 1), 0.05, 50);
  EXPECT_FALSE(g.summary["vacuous"].get<bool>());
  EXPECT_FALSE(g.summary["inconclusive"].get<bool>());
  EXPECT_EQ(g.summary["accepted"].get<std::size_t>(), 50u);
  EXPECT_EQ(g.summary["violations"].get<std::size_t>(), 0u);
  EXPECT_TRUE(std::isfinite(g.summary["gamma_envelope"].get<double>()));

  const ExperimentReport z = stability_inclusion_check(Tensor(3, 2), v2(1, 1), 0.05, 20);
  EXPECT_FALSE(z.summary["vacuous"].get<bool>());
  EXPECT_EQ(z.summary["violations"].get<std::size_t>(), 0u);
  for (const auto& row : z.rows) EXPECT_FALSE(has_flag(row, "violation-empty"));

  EXPECT_TRUE(stability_inclusion_check(Tensor(3, 2), v2(0, 1), 0.05, 20).summary["vacuous"].get<bool>());
}

TEST(Stability, RejectionBudgetIsInconclusive) {
  // Around Example 1 almost no perturbation is copositive.
  LabConfig cfg;
  cfg.rejection_factor = 2;
  const ExperimentReport r = stability_inclusion_check(example1_tensor(), v2(1, 1), 0.05, 10, cfg);
  EXPECT_TRUE(r.summary["inconclusive"].get<bool>());
  EXPECT_LE(r.summary["attempts"].get<std::size_t>(), 20u);
}

TEST(LabReproducibility, ByteIdenticalReports) {
  const auto run = [] {
    return dump_report(to_json(local_boundedness_probe(example1_tensor(), v2(1, 1), 0.05, 0.5, 30, seeded(5)))) +
           dump_report(to_json(usc_probe(TcpInstance(example1_tensor(), v2(2, 1)), 0.05, 10, seeded(5)))) +
           dump_report(to_json(stability_inclusion_check(gus_tensor(), v2(1, 1), 0.05, 10, seeded(5))));
  };
  ::setenv("TCP_LAB_THREADS", "4", 1);
  const std::string par = run();
  EXPECT_EQ(par, run());
  ::setenv("TCP_LAB_THREADS", "1", 1);
  const std::string ser = run();
  ::unsetenv("TCP_LAB_THREADS");
  EXPECT_EQ(par, ser);
  EXPECT_NE(par, dump_report(to_json(local_boundedness_probe(example1_tensor(), v2(1, 1), 0.05, 0.5, 30, seeded(6)))));
}

TEST(LabInvariants, WitnessesHaveUnboundedSolutionsAtZero) {
  for (std::uint32_t bits = 0; bits < 3; ++bits) {
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      const Tensor w = non_r0_witness(3, 2, FaceMask(bits, 2), seed);
      const SolutionSet s = solve(TcpInstance(w, Vec::Zero(2)));
      ASSERT_FALSE(s.rays.empty());
      ASSERT_EQ(s.status, SolutionStatus::UnboundedSuspect);
    }
  }
}

TEST(JsonNumber, Sentinels) {
  EXPECT_EQ(json_number(std::numeric_limits<double>::infinity()), "inf");
  EXPECT_EQ(json_number(-std::numeric_limits<double>::infinity()), "-inf");
  EXPECT_TRUE(json_number(std::nan("")).is_null());
  EXPECT_EQ(json_number(1.5).get<double>(), 1.5);
}
