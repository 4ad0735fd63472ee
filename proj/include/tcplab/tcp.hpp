#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "tcplab/errors.hpp"
#include "tcplab/face_mask.hpp"
#include "tcplab/tensor.hpp"

namespace tcplab {

/// Default classification tolerance shared by residual checks and solvers.
inline constexpr double kDefaultTol = 1e-8;

/// TCP(A, a): find x >= 0 with A x^(m-1) + a >= 0 and <x, A x^(m-1) + a> = 0.
class TcpInstance {
 public:
  TcpInstance(Tensor tensor, Vec offset) : tensor_(std::move(tensor)), offset_(std::move(offset)) {
    if (offset_.size() != tensor_.dim()) throw ArgumentError("TcpInstance: a has wrong length");
    if (!offset_.allFinite()) throw ArgumentError("TcpInstance: a has non-finite entries");
  }

  const Tensor& tensor() const { return tensor_; }
  const Vec& offset() const { return offset_; }
  int dim() const { return tensor_.dim(); }
  int order() const { return tensor_.order(); }

  /// F(x) = A x^(m-1) + a.
  Vec map(const Vec& x) const { return contract(tensor_, x) + offset_; }

 private:
  Tensor tensor_;
  Vec offset_;
};

struct Residual {
  double feas_x = 0.0;  // max(0, -min x_i)
  double feas_f = 0.0;  // max(0, -min F_i)
  double comp = 0.0;    // |<x, F(x)>|

  double max() const { return std::max({feas_x, feas_f, comp}); }
  bool is_solution(double tol) const { return feas_x <= tol && feas_f <= tol && comp <= tol; }
};

inline Residual residual(const TcpInstance& inst, const Vec& x) {
  detail::require_dim(inst.tensor(), x, "residual");
  const Vec f = inst.map(x);
  Residual r;
  r.feas_x = std::max(0.0, -x.minCoeff());
  r.feas_f = std::max(0.0, -f.minCoeff());
  r.comp = std::abs(x.dot(f));
  return r;
}

/// Primal point with its multiplier in the system F(x) - lambda = 0,
/// <lambda, x> = 0, lambda >= 0, x >= 0.
struct KktPoint {
  Vec x;
  Vec lambda;
};

inline double kkt_residual(const TcpInstance& inst, const KktPoint& p) {
  detail::require_dim(inst.tensor(), p.x, "kkt_residual");
  detail::require_dim(inst.tensor(), p.lambda, "kkt_residual");
  const double stationarity = (inst.map(p.x) - p.lambda).lpNorm<Eigen::Infinity>();
  const double comp = std::abs(p.lambda.dot(p.x));
  const double neg_x = std::max(0.0, -p.x.minCoeff());
  const double neg_lambda = std::max(0.0, -p.lambda.minCoeff());
  return std::max({stationarity, comp, neg_x, neg_lambda});
}

/// All 2^n index sets, ascending bitmask.
inline std::vector<FaceMask> enumerate_faces(int n) {
  if (n < 1 || n > FaceMask::kMaxDim) throw ArgumentError("enumerate_faces: n out of range");
  std::vector<FaceMask> out;
  out.reserve(std::size_t{1} << n);
  for (std::uint32_t bits = 0; bits < (std::uint32_t{1} << n); ++bits) out.emplace_back(bits, n);
  return out;
}

/// Pseudo-face containing x: alpha = {i : x_i <= tol}.
inline FaceMask face_of(const Vec& x, double tol = kDefaultTol) {
  std::uint32_t bits = 0;
  for (int i = 0; i < x.size(); ++i) {
    if (x[i] < -tol) throw ArgumentError("face_of: x has a component below -tol");
    if (x[i] <= tol) bits |= (1u << i);
  }
  return FaceMask(bits, static_cast<int>(x.size()));
}

/// Sparse polynomial in k variables: constant + sum_t coef_t * prod_v y_v^e_tv.
class Polynomial {
 public:
  struct Term {
    double coef;
    std::vector<int> exponents;
  };

  Polynomial() = default;
  Polynomial(int num_vars, double constant, std::vector<Term> terms)
      : num_vars_(num_vars), constant_(constant), terms_(std::move(terms)) {}

  int num_vars() const { return num_vars_; }
  double constant() const { return constant_; }
  const std::vector<Term>& terms() const { return terms_; }

  /// True when every coefficient, constant included, is below `eps` in magnitude.
  bool identically_zero(double eps = 1e-14) const {
    if (std::abs(constant_) >= eps) return false;
    return std::all_of(terms_.begin(), terms_.end(), [&](const Term& t) { return std::abs(t.coef) < eps; });
  }

  bool depends_on(int var) const {
    return std::any_of(terms_.begin(), terms_.end(),
                       [&](const Term& t) { return t.exponents[static_cast<std::size_t>(var)] > 0; });
  }

  double operator()(const Vec& y) const {
    double s = constant_;
    for (const auto& t : terms_) {
      double p = t.coef;
      for (int v = 0; v < num_vars_; ++v)
        for (int e = 0; e < t.exponents[static_cast<std::size_t>(v)]; ++e) p *= y[v];
      s += p;
    }
    return s;
  }

  Vec gradient(const Vec& y) const {
    Vec g = Vec::Zero(num_vars_);
    for (const auto& t : terms_) {
      for (int v = 0; v < num_vars_; ++v) {
        const int ev = t.exponents[static_cast<std::size_t>(v)];
        if (ev == 0) continue;
        double p = t.coef * ev;
        for (int w = 0; w < num_vars_; ++w) {
          const int ew = t.exponents[static_cast<std::size_t>(w)] - (w == v ? 1 : 0);
          for (int e = 0; e < ew; ++e) p *= y[w];
        }
        g[v] += p;
      }
    }
    return g;
  }

 private:
  int num_vars_ = 0;
  double constant_ = 0.0;
  std::vector<Term> terms_;
};

/// Reduction of TCP(A, a) to the pseudo-face K_alpha: x_i = 0 for i in alpha,
/// the |[n] \ alpha| free coordinates must solve F_i(x) = 0 (i free) and satisfy
/// x_i > 0 (i free), F_i(x) >= 0 (i in alpha).
class FaceSystem {
 public:
  FaceSystem(const TcpInstance& inst, const FaceMask& alpha)
      : alpha_(alpha), dim_(inst.dim()), free_(alpha.free_indices()), pinned_(alpha.members()) {
    if (alpha.dim() != inst.dim()) throw ArgumentError("FaceSystem: mask dimension mismatch");
    std::vector<int> slot(static_cast<std::size_t>(dim_), -1);
    for (std::size_t k = 0; k < free_.size(); ++k) slot[static_cast<std::size_t>(free_[k])] = static_cast<int>(k);
    const int k = static_cast<int>(free_.size());

    // Collect monomials per row; coefficients of equal monomials combine.
    std::vector<std::map<std::vector<int>, double>> rows(static_cast<std::size_t>(dim_));
    detail::for_each_nonzero(inst.tensor(), [&](int row, std::span<const int> tail, double v) {
      std::vector<int> exps(static_cast<std::size_t>(k), 0);
      for (int i : tail) {
        const int s = slot[static_cast<std::size_t>(i)];
        if (s < 0) return;  // touches a pinned coordinate
        ++exps[static_cast<std::size_t>(s)];
      }
      rows[static_cast<std::size_t>(row)][exps] += v;
    });
    auto make = [&](int row) {
      std::vector<Polynomial::Term> terms;
      for (auto& [exps, coef] : rows[static_cast<std::size_t>(row)])
        if (coef != 0.0) terms.push_back({coef, exps});
      return Polynomial(k, inst.offset()[row], std::move(terms));
    };
    for (int i : free_) equations_.push_back(make(i));
    for (int i : pinned_) side_.push_back(make(i));
  }

  const FaceMask& alpha() const { return alpha_; }
  int dim() const { return dim_; }
  int num_free() const { return static_cast<int>(free_.size()); }
  const std::vector<int>& free_indices() const { return free_; }
  const std::vector<int>& pinned_indices() const { return pinned_; }

  /// F_i restricted to the face, one per free index.
  const std::vector<Polynomial>& equations() const { return equations_; }
  /// F_i restricted to the face, one per pinned index (sign conditions).
  const std::vector<Polynomial>& side_conditions() const { return side_; }

  /// Some equation has all coefficients below 1e-14.
  bool underdetermined() const {
    return std::any_of(equations_.begin(), equations_.end(), [](const Polynomial& p) { return p.identically_zero(); });
  }

  Vec evaluate(const Vec& y) const {
    Vec g(num_free());
    for (int r = 0; r < num_free(); ++r) g[r] = equations_[static_cast<std::size_t>(r)](y);
    return g;
  }

  Mat jacobian(const Vec& y) const {
    Mat j(num_free(), num_free());
    for (int r = 0; r < num_free(); ++r) j.row(r) = equations_[static_cast<std::size_t>(r)].gradient(y).transpose();
    return j;
  }

  Vec side_values(const Vec& y) const {
    Vec s(static_cast<Eigen::Index>(side_.size()));
    for (std::size_t r = 0; r < side_.size(); ++r) s[static_cast<Eigen::Index>(r)] = side_[r](y);
    return s;
  }

  /// Free coordinates -> point of R^n with pinned coordinates zero.
  Vec embed(const Vec& y) const {
    Vec x = Vec::Zero(dim_);
    for (std::size_t k = 0; k < free_.size(); ++k) x[free_[k]] = y[static_cast<Eigen::Index>(k)];
    return x;
  }

  Vec restrict(const Vec& x) const {
    Vec y(num_free());
    for (std::size_t k = 0; k < free_.size(); ++k) y[static_cast<Eigen::Index>(k)] = x[free_[k]];
    return y;
  }

  /// x_i > tol on free coordinates and F_i >= -tol on pinned ones.
  bool satisfies_signs(const Vec& y, double tol) const {
    if (num_free() > 0 && y.minCoeff() <= tol) return false;
    const Vec s = side_values(y);
    return s.size() == 0 || s.minCoeff() >= -tol;
  }

 private:
  FaceMask alpha_;
  int dim_;
  std::vector<int> free_;
  std::vector<int> pinned_;
  std::vector<Polynomial> equations_;
  std::vector<Polynomial> side_;
};

inline FaceSystem face_system(const TcpInstance& inst, const FaceMask& alpha) { return FaceSystem(inst, alpha); }

}  // namespace tcplab
