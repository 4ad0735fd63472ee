#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <string>
#include <vector>

#include "tcplab/errors.hpp"
#include "tcplab/tcp.hpp"
#include "tcplab/tensor.hpp"

// Grid brute force for TCP(A, a). Shares no code with the face solver beyond
// evaluating A x^(m-1): merit, face detection and polishing are all separate,
// so agreement between the two is evidence rather than tautology.

namespace tcplab {

struct OracleCluster {
  Vec seed;                   // best grid point of the cluster
  std::size_t size = 0;       // grid points in the cluster
  std::vector<Vec> solutions; // polished, verified, deduplicated
};

struct OracleResult {
  std::vector<OracleCluster> clusters;
  double grid_tol = 0.0;
  double grid_step = 0.0;
  double box_radius = 0.0;
  std::size_t grid_points = 0;

  /// All polished solutions, deduplicated at 1e-6.
  std::vector<Vec> solutions() const {
    std::vector<Vec> out;
    for (const auto& c : clusters)
      for (const auto& x : c.solutions) {
        bool dup = false;
        for (const auto& y : out) dup = dup || (x - y).lpNorm<Eigen::Infinity>() < 1e-6;
        if (!dup) out.push_back(x);
      }
    return out;
  }
};

namespace detail {

/// Natural-map merit max_i |min(x_i, F_i(x))|; zero exactly on Sol(A, a).
inline double natural_merit(const TcpInstance& inst, const Vec& x) {
  const Vec f = inst.map(x);
  double worst = 0.0;
  for (int i = 0; i < x.size(); ++i) worst = std::max(worst, std::abs(std::min(x[i], f[i])));
  return worst;
}

/// Newton on {x_i = 0 (i in pinned), F_i(x) = 0 (otherwise)} in all n
/// coordinates, central-difference Jacobian.
inline bool oracle_polish(const TcpInstance& inst, std::uint32_t pinned, Vec x, double verify_tol, Vec& out) {
  const int n = inst.dim();
  auto system = [&](const Vec& z) {
    const Vec f = inst.map(z);
    Vec g(n);
    for (int i = 0; i < n; ++i) g[i] = ((pinned >> i) & 1u) ? z[i] : f[i];
    return g;
  };
  Vec g = system(x);
  for (int it = 0; it < 60; ++it) {
    const double r = g.lpNorm<Eigen::Infinity>();
    if (r < 1e-14) break;
    Mat jac(n, n);
    for (int k = 0; k < n; ++k) {
      const double h = 1e-6 * (1.0 + std::abs(x[k]));
      Vec xp = x, xm = x;
      xp[k] += h;
      xm[k] -= h;
      jac.col(k) = (system(xp) - system(xm)) / (2.0 * h);
    }
    const Vec step = jac.completeOrthogonalDecomposition().solve(-g);
    if (!step.allFinite()) return false;
    double t = 1.0;
    Vec x_new = x + step;
    Vec g_new = system(x_new);
    while (!(g_new.lpNorm<Eigen::Infinity>() < r) && t > 1e-6) {
      t *= 0.5;
      x_new = x + t * step;
      g_new = system(x_new);
    }
    if (!(g_new.lpNorm<Eigen::Infinity>() < r)) break;
    x = x_new;
    g = g_new;
    if (x.lpNorm<Eigen::Infinity>() > 1e6) return false;
  }
  for (int i = 0; i < n; ++i)
    if ((pinned >> i) & 1u) x[i] = 0.0;
  if (!residual(inst, x).is_solution(verify_tol)) return false;
  out = x;
  return true;
}

}  // namespace detail

/// Tolerance on the natural merit guaranteed to catch every solution in the
/// box: the merit is Lipschitz (infinity norms) with constant L <= max(1,
/// (m-1) max_i sum_{i2..im} |a_{i i2..im}| R^(m-2)), and every point is within
/// step/2 of a grid node. Returns L * step, twice that bound.
inline double oracle_grid_tolerance(const TcpInstance& inst, double box_radius, double grid_step) {
  const Tensor& a = inst.tensor();
  const std::size_t row = a.row_size();
  double worst_row = 0.0;
  for (int i = 0; i < a.dim(); ++i) {
    double s = 0.0;
    for (std::size_t k = 0; k < row; ++k) s += std::abs(a[static_cast<std::size_t>(i) * row + k]);
    worst_row = std::max(worst_row, s);
  }
  const double lip = std::max(1.0, (a.order() - 1) * worst_row * std::pow(box_radius, a.order() - 2));
  return lip * grid_step;
}

/// Every node of the grid step * Z^n inside [0, box_radius]^n whose natural
/// merit is <= tol, clustered by grid adjacency (including diagonals). Each
/// cluster's local minima are polished on the face their sign pattern
/// suggests; polished points are kept only if they solve TCP(A, a) to 1e-8.
inline OracleResult brute_force_oracle(const TcpInstance& inst, double box_radius, double grid_step, double tol) {
  if (!(grid_step > 0)) throw ArgumentError("brute_force_oracle: grid_step must be positive");
  if (!(box_radius >= 0)) throw ArgumentError("brute_force_oracle: box_radius must be nonnegative");
  const int n = inst.dim();
  const std::size_t per_axis = static_cast<std::size_t>(std::floor(box_radius / grid_step + 1e-9)) + 1;
  const double budget = n * std::pow(static_cast<double>(per_axis), n);
  if (budget > 1e8)
    throw ResourceError("brute_force_oracle: grid of " + std::to_string(per_axis) + "^" + std::to_string(n) +
                        " nodes exceeds the 1e8 budget");
  std::size_t total = 1;
  for (int i = 0; i < n; ++i) total *= per_axis;

  auto node = [&](std::size_t flat) {
    Vec x(n);
    for (int i = n - 1; i >= 0; --i) {
      x[i] = static_cast<double>(flat % per_axis) * grid_step;
      flat /= per_axis;
    }
    return x;
  };

  std::vector<double> merit(total);
  for (std::size_t f = 0; f < total; ++f) merit[f] = detail::natural_merit(inst, node(f));

  // Neighbour offsets in flat index space, with per-axis bounds checks.
  std::vector<std::vector<int>> offsets;
  {
    std::vector<int> d(static_cast<std::size_t>(n), -1);
    while (true) {
      if (std::any_of(d.begin(), d.end(), [](int v) { return v != 0; })) offsets.push_back(d);
      int i = n - 1;
      while (i >= 0 && d[static_cast<std::size_t>(i)] == 1) d[static_cast<std::size_t>(i--)] = -1;
      if (i < 0) break;
      ++d[static_cast<std::size_t>(i)];
    }
  }
  auto neighbours = [&](std::size_t flat, auto&& visit) {
    std::vector<std::size_t> digit(static_cast<std::size_t>(n));
    std::size_t rest = flat;
    for (int i = n - 1; i >= 0; --i) {
      digit[static_cast<std::size_t>(i)] = rest % per_axis;
      rest /= per_axis;
    }
    for (const auto& off : offsets) {
      std::size_t g = 0;
      bool inside = true;
      for (int i = 0; i < n && inside; ++i) {
        const long long v = static_cast<long long>(digit[static_cast<std::size_t>(i)]) + off[static_cast<std::size_t>(i)];
        inside = v >= 0 && v < static_cast<long long>(per_axis);
        g = g * per_axis + static_cast<std::size_t>(v);
      }
      if (inside) visit(g);
    }
  };

  OracleResult result;
  result.grid_tol = tol;
  result.grid_step = grid_step;
  result.box_radius = box_radius;
  result.grid_points = total;

  std::vector<int> label(total, -1);
  for (std::size_t start = 0; start < total; ++start) {
    if (label[start] >= 0 || !(merit[start] <= tol)) continue;
    const int id = static_cast<int>(result.clusters.size());
    std::vector<std::size_t> members;
    std::deque<std::size_t> queue{start};
    label[start] = id;
    while (!queue.empty()) {
      const std::size_t f = queue.front();
      queue.pop_front();
      members.push_back(f);
      neighbours(f, [&](std::size_t g) {
        if (label[g] < 0 && merit[g] <= tol) {
          label[g] = id;
          queue.push_back(g);
        }
      });
    }

    std::vector<std::size_t> minima;
    for (std::size_t f : members) {
      bool is_min = true;
      neighbours(f, [&](std::size_t g) { is_min = is_min && merit[f] <= merit[g]; });
      if (is_min) minima.push_back(f);
    }
    std::stable_sort(minima.begin(), minima.end(), [&](std::size_t a, std::size_t b) { return merit[a] < merit[b]; });
    // Flat plateaus (positive-dimensional pieces) make many minima; spread the
    // polish budget across them.
    constexpr std::size_t kMaxSeeds = 64;
    if (minima.size() > kMaxSeeds) {
      std::vector<std::size_t> spread;
      for (std::size_t s = 0; s < kMaxSeeds; ++s) spread.push_back(minima[s * minima.size() / kMaxSeeds]);
      minima = std::move(spread);
    }

    OracleCluster cluster;
    cluster.size = members.size();
    cluster.seed = node(minima.empty() ? members.front() : minima.front());
    for (std::size_t f : minima) {
      const Vec x = node(f);
      const Vec fx = inst.map(x);
      std::uint32_t pinned = 0;
      std::vector<int> ambiguous;
      for (int i = 0; i < n; ++i) {
        if (x[i] < fx[i]) pinned |= (1u << i);
        if (x[i] <= 2 * tol && std::abs(fx[i]) <= 2 * tol) ambiguous.push_back(i);
      }
      const std::size_t variants = std::size_t{1} << std::min<std::size_t>(ambiguous.size(), 8);
      for (std::size_t v = 0; v < variants; ++v) {
        std::uint32_t mask = pinned;
        for (std::size_t b = 0; b < ambiguous.size() && b < 8; ++b)
          if ((v >> b) & 1u) mask ^= (1u << ambiguous[b]);
        Vec sol;
        if (!detail::oracle_polish(inst, mask, x, 1e-8, sol)) continue;
        bool dup = false;
        for (const auto& y : cluster.solutions) dup = dup || (sol - y).lpNorm<Eigen::Infinity>() < 1e-6;
        if (!dup) cluster.solutions.push_back(sol);
      }
    }
    result.clusters.push_back(std::move(cluster));
  }
  return result;
}

}  // namespace tcplab
