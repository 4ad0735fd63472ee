#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tcplab/errors.hpp"
#include "tcplab/face_mask.hpp"
#include "tcplab/rng.hpp"

namespace tcplab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Dense real tensor of order m and dimension n. Entries are stored flat in
/// lexicographic order of the multi-index: (i_1, ..., i_m) lives at
/// sum_j i_j * n^(m-j) with 0-based i_j.
class Tensor {
 public:
  static constexpr std::size_t kMaxEntries = 10'000'000;

  Tensor() = default;

  /// Zero tensor.
  Tensor(int order, int dim) : order_(order), dim_(dim) {
    entries_.assign(checked_size(order, dim), 0.0);
  }

  Tensor(int order, int dim, std::vector<double> entries) : order_(order), dim_(dim) {
    const std::size_t expected = checked_size(order, dim);
    if (entries.size() != expected)
      throw ArgumentError("Tensor: expected " + std::to_string(expected) + " entries, got " +
                          std::to_string(entries.size()));
    for (double v : entries)
      if (!std::isfinite(v)) throw ArgumentError("Tensor: non-finite entry");
    entries_ = std::move(entries);
  }

  int order() const { return order_; }
  int dim() const { return dim_; }
  std::size_t size() const { return entries_.size(); }
  std::span<const double> entries() const { return entries_; }
  double operator[](std::size_t flat) const { return entries_[flat]; }

  /// 0-based multi-index -> flat offset.
  std::size_t flat_index(std::span<const int> index) const {
    if (static_cast<int>(index.size()) != order_) throw ArgumentError("Tensor: index length != order");
    std::size_t flat = 0;
    for (int i : index) {
      if (i < 0 || i >= dim_) throw ArgumentError("Tensor: index out of range");
      flat = flat * static_cast<std::size_t>(dim_) + static_cast<std::size_t>(i);
    }
    return flat;
  }

  std::vector<int> multi_index(std::size_t flat) const {
    if (flat >= entries_.size()) throw ArgumentError("Tensor: flat index out of range");
    std::vector<int> idx(static_cast<std::size_t>(order_));
    for (int j = order_ - 1; j >= 0; --j) {
      idx[static_cast<std::size_t>(j)] = static_cast<int>(flat % static_cast<std::size_t>(dim_));
      flat /= static_cast<std::size_t>(dim_);
    }
    return idx;
  }

  double at(std::span<const int> index) const { return entries_[flat_index(index)]; }
  double at(std::initializer_list<int> index) const {
    return at(std::span<const int>(index.begin(), index.size()));
  }

  void set(std::span<const int> index, double value) {
    if (!std::isfinite(value)) throw ArgumentError("Tensor: non-finite entry");
    entries_[flat_index(index)] = value;
  }
  void set(std::initializer_list<int> index, double value) {
    set(std::span<const int>(index.begin(), index.size()), value);
  }

  /// n^(m-1): number of entries sharing a leading index.
  std::size_t row_size() const { return entries_.size() / static_cast<std::size_t>(dim_); }

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  static std::size_t checked_size(int order, int dim) {
    if (order < 2) throw ArgumentError("Tensor: order must be >= 2");
    if (dim < 2) throw ArgumentError("Tensor: dimension must be >= 2");
    std::size_t total = 1;
    for (int j = 0; j < order; ++j) {
      total *= static_cast<std::size_t>(dim);
      if (total > kMaxEntries)
        throw ResourceError("Tensor: n^m exceeds the " + std::to_string(kMaxEntries) + " entry guard");
    }
    return total;
  }

  int order_ = 2;
  int dim_ = 2;
  std::vector<double> entries_ = std::vector<double>(4, 0.0);
};

namespace detail {

inline void require_dim(const Tensor& a, const Vec& x, const char* who) {
  if (x.size() != a.dim())
    throw ArgumentError(std::string(who) + ": vector length " + std::to_string(x.size()) +
                        " != tensor dimension " + std::to_string(a.dim()));
}

inline void require_same_shape(const Tensor& a, const Tensor& b, const char* who) {
  if (a.order() != b.order() || a.dim() != b.dim())
    throw ArgumentError(std::string(who) + ": tensor shapes differ");
}

/// Calls fn(row, tail_digits, value) for every nonzero entry; tail_digits holds
/// the trailing m-1 indices.
template <class Fn>
void for_each_nonzero(const Tensor& a, Fn&& fn) {
  const int m = a.order();
  const int n = a.dim();
  std::vector<int> digits(static_cast<std::size_t>(m), 0);
  const auto data = a.entries();
  for (std::size_t flat = 0; flat < data.size(); ++flat) {
    if (flat != 0) {
      for (int j = m - 1; j >= 0; --j) {
        if (++digits[static_cast<std::size_t>(j)] < n) break;
        digits[static_cast<std::size_t>(j)] = 0;
      }
    }
    if (data[flat] == 0.0) continue;
    fn(digits[0], std::span<const int>(digits).subspan(1), data[flat]);
  }
}

}  // namespace detail

/// A x^(m-1): i-th component sums a_{i i2..im} x_{i2} ... x_{im}.
inline Vec contract(const Tensor& a, const Vec& x) {
  detail::require_dim(a, x, "contract");
  Vec out = Vec::Zero(a.dim());
  detail::for_each_nonzero(a, [&](int row, std::span<const int> tail, double v) {
    double p = v;
    for (int i : tail) p *= x[i];
    out[row] += p;
  });
  return out;
}

/// A x^m = <x, A x^(m-1)>.
inline double form(const Tensor& a, const Vec& x) {
  detail::require_dim(a, x, "form");
  return x.dot(contract(a, x));
}

/// Jacobian of x -> A x^(m-1).
inline Mat contract_jacobian(const Tensor& a, const Vec& x) {
  detail::require_dim(a, x, "contract_jacobian");
  const int n = a.dim();
  Mat jac = Mat::Zero(n, n);
  const std::size_t tail_len = static_cast<std::size_t>(a.order() - 1);
  std::vector<double> prefix(tail_len + 1), suffix(tail_len + 1);
  detail::for_each_nonzero(a, [&](int row, std::span<const int> tail, double v) {
    prefix[0] = 1.0;
    for (std::size_t j = 0; j < tail_len; ++j) prefix[j + 1] = prefix[j] * x[tail[j]];
    suffix[tail_len] = 1.0;
    for (std::size_t j = tail_len; j-- > 0;) suffix[j] = suffix[j + 1] * x[tail[j]];
    for (std::size_t j = 0; j < tail_len; ++j) jac(row, tail[j]) += v * prefix[j] * suffix[j + 1];
  });
  return jac;
}

/// Gradient of x -> A x^m.
inline Vec form_gradient(const Tensor& a, const Vec& x) {
  return contract(a, x) + contract_jacobian(a, x).transpose() * x;
}

inline double frobenius(const Tensor& a) {
  double s = 0.0;
  for (double v : a.entries()) s += v * v;
  return std::sqrt(s);
}

/// Norm of the pair (A, a) in R^[m,n] x R^n.
inline double pair_norm(const Tensor& a, const Vec& v) {
  const double f = frobenius(a);
  return std::sqrt(f * f + v.squaredNorm());
}

inline Tensor operator+(const Tensor& a, const Tensor& b) {
  detail::require_same_shape(a, b, "add");
  std::vector<double> out(a.entries().begin(), a.entries().end());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] += b[k];
  return Tensor(a.order(), a.dim(), std::move(out));
}

inline Tensor operator-(const Tensor& a, const Tensor& b) {
  detail::require_same_shape(a, b, "subtract");
  std::vector<double> out(a.entries().begin(), a.entries().end());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] -= b[k];
  return Tensor(a.order(), a.dim(), std::move(out));
}

inline Tensor scale(double t, const Tensor& a) {
  std::vector<double> out(a.entries().begin(), a.entries().end());
  for (double& v : out) v *= t;
  return Tensor(a.order(), a.dim(), std::move(out));
}

inline Tensor add(const Tensor& a, const Tensor& b) { return a + b; }

/// Constant beta with ||A x^(m-1)|| <= beta ||A|| on the unit box:
/// Cauchy-Schwarz per component gives n^((m-1)/2).
inline double unit_box_beta(int order, int dim) {
  return std::pow(static_cast<double>(dim), 0.5 * static_cast<double>(order - 1));
}

/// I.i.d. standard normal entries.
inline Tensor random_gaussian(int order, int dim, std::uint64_t seed) {
  Tensor shape(order, dim);
  Rng rng(seed);
  std::vector<double> entries(shape.size());
  for (double& v : entries) v = rng.normal();
  return Tensor(order, dim, std::move(entries));
}

/// Random member of the subspace S_alpha: every entry whose multi-index
/// touches [n] \ alpha is zero, the |alpha|^m entries inside alpha are
/// Gaussian. Any such tensor vanishes on the closed face {x >= 0 : x_alpha = 0},
/// so it is never R0.
inline Tensor non_r0_witness(int order, int dim, const FaceMask& alpha, std::uint64_t seed) {
  if (alpha.dim() != dim) throw ArgumentError("non_r0_witness: mask dimension mismatch");
  if (alpha.is_full()) throw ArgumentError("non_r0_witness: alpha must be a proper subset of [n]");
  Tensor out(order, dim);
  Rng rng(seed);
  std::vector<double> entries(out.size(), 0.0);
  for (std::size_t flat = 0; flat < entries.size(); ++flat) {
    const auto idx = out.multi_index(flat);
    bool inside = true;
    for (int i : idx) inside = inside && alpha.contains(i);
    if (inside) entries[flat] = rng.normal();
  }
  return Tensor(order, dim, std::move(entries));
}

}  // namespace tcplab
