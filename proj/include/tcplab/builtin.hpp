#pragma once

#include <string>

#include "tcplab/errors.hpp"
#include "tcplab/tcp.hpp"
#include "tcplab/tensor.hpp"

namespace tcplab {

/// a111 = a122 = a211 = a222 = -1: A x^2 = -(x1^2 + x2^2) (1, 1).
inline Tensor example1_tensor() {
  Tensor t(3, 2);
  t.set({0, 0, 0}, -1.0);
  t.set({0, 1, 1}, -1.0);
  t.set({1, 0, 0}, -1.0);
  t.set({1, 1, 1}, -1.0);
  return t;
}

/// a111 = a222 = 1: A x^2 = (x1^2, x2^2). Has the GUS property.
inline Tensor gus_tensor() {
  Tensor t(3, 2);
  t.set({0, 0, 0}, 1.0);
  t.set({1, 1, 1}, 1.0);
  return t;
}

/// a111 = a122 = a211 = a222 = 1: A x^2 = (x1^2 + x2^2) (1, 1).
inline Tensor monotone_example_tensor() { return scale(-1.0, example1_tensor()); }

/// Built-in tensors by name: ex1, gus, monotone (all m = 3, n = 2), zero (any m, n).
inline Tensor builtin_tensor(const std::string& name, int m = 3, int n = 2) {
  if (name == "ex1") return example1_tensor();
  if (name == "gus") return gus_tensor();
  if (name == "monotone") return monotone_example_tensor();
  if (name == "zero") return Tensor(m, n);
  throw ArgumentError("unknown built-in example '" + name + "' (expected ex1, gus, monotone, zero)");
}

inline TcpInstance builtin_example(const std::string& name, const Vec& a, int m = 3, int n = 2) {
  return TcpInstance(builtin_tensor(name, m, n), a);
}

}  // namespace tcplab
