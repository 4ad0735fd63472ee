#pragma once

#include <bit>
#include <cstdint>
#include <string>
#include <vector>

#include "tcplab/errors.hpp"

namespace tcplab {

/// Index set alpha naming the pseudo-face K_alpha = {x >= 0 : x_i = 0 for
/// i in alpha, x_i > 0 otherwise}. Bit i set means coordinate i (0-based)
/// is pinned at zero.
class FaceMask {
 public:
  static constexpr int kMaxDim = 30;

  constexpr FaceMask() = default;
  constexpr FaceMask(std::uint32_t bits, int dim) : bits_(bits), dim_(dim) {
    if (dim < 1 || dim > kMaxDim) throw ArgumentError("FaceMask: dimension out of range");
    if (dim < 32 && (bits >> dim) != 0) throw ArgumentError("FaceMask: index outside [n]");
  }

  /// Build from 0-based member indices.
  static FaceMask from_indices(const std::vector<int>& zero_based, int dim) {
    std::uint32_t bits = 0;
    for (int i : zero_based) {
      if (i < 0 || i >= dim) throw ArgumentError("FaceMask: index outside [n]");
      bits |= (1u << i);
    }
    return FaceMask(bits, dim);
  }

  static FaceMask full(int dim) { return FaceMask((dim >= 32) ? ~0u : ((1u << dim) - 1u), dim); }

  constexpr std::uint32_t bits() const { return bits_; }
  constexpr int dim() const { return dim_; }
  constexpr bool contains(int i) const { return (bits_ >> i) & 1u; }
  bool is_full() const { return bits_ == full(dim_).bits(); }
  int size() const { return std::popcount(bits_); }
  int free_count() const { return dim_ - size(); }

  /// Indices pinned at zero (0-based, ascending).
  std::vector<int> members() const {
    std::vector<int> out;
    for (int i = 0; i < dim_; ++i)
      if (contains(i)) out.push_back(i);
    return out;
  }

  /// Indices left free (0-based, ascending).
  std::vector<int> free_indices() const {
    std::vector<int> out;
    for (int i = 0; i < dim_; ++i)
      if (!contains(i)) out.push_back(i);
    return out;
  }

  /// 1-based member list, e.g. "{1,3}".
  std::string to_string() const {
    std::string s = "{";
    bool first = true;
    for (int i : members()) {
      if (!first) s += ",";
      s += std::to_string(i + 1);
      first = false;
    }
    return s + "}";
  }

  friend constexpr bool operator==(const FaceMask&, const FaceMask&) = default;
  friend constexpr auto operator<=>(const FaceMask& a, const FaceMask& b) { return a.bits_ <=> b.bits_; }

 private:
  std::uint32_t bits_ = 0;
  int dim_ = 1;
};

}  // namespace tcplab
