#pragma once

// Dense Clifford-algebra oracle for rotors in low dimension. Independent of
// the O(d) reflection/rotation code paths.

#include <bit>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "rise/sphere.hpp"

namespace rise::testing {

// Multivectors of Cl(d,0), d ≤ 8, as 2^d blade coefficients indexed by bitmask.
struct Multivector {
  std::size_t d;
  std::vector<double> c;
  explicit Multivector(std::size_t dim) : d(dim), c(std::size_t{1} << dim, 0.0) {}
};

// Sign of e_A e_B after sorting into canonical order (orthonormal, e_i² = 1).
inline double reorder_sign(std::uint32_t a, std::uint32_t b) {
  int swaps = 0;
  for (a >>= 1; a != 0; a >>= 1) swaps += std::popcount(a & b);
  return (swaps & 1) ? -1.0 : 1.0;
}

inline Multivector gp(const Multivector& x, const Multivector& y) {
  Multivector out(x.d);
  for (std::uint32_t a = 0; a < x.c.size(); ++a) {
    if (x.c[a] == 0.0) continue;
    for (std::uint32_t b = 0; b < y.c.size(); ++b) {
      if (y.c[b] == 0.0) continue;
      out.c[a ^ b] += reorder_sign(a, b) * x.c[a] * y.c[b];
    }
  }
  return out;
}

inline Multivector reverse(const Multivector& x) {
  Multivector out = x;
  for (std::uint32_t a = 0; a < x.c.size(); ++a) {
    const int k = std::popcount(a);
    if ((k * (k - 1) / 2) & 1) out.c[a] = -out.c[a];
  }
  return out;
}

inline Multivector vector_mv(std::span<const double> v) {
  Multivector out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out.c[std::size_t{1} << i] = v[i];
  return out;
}

// r = (1 + e1 n) / √(2(1 + n1)) sends n to e1 under x ↦ r x r̃.
inline Multivector clifford_rotor(const UnitVector& n) {
  Multivector one(n.dim());
  one.c[0] = 1.0;
  Multivector r = gp(vector_mv(UnitVector::basis(n.dim(), 0).coords()), vector_mv(n.coords()));
  const double scale = 1.0 / std::sqrt(2.0 * (1.0 + n[0]));
  for (std::size_t a = 0; a < r.c.size(); ++a) r.c[a] = (r.c[a] + one.c[a]) * scale;
  return r;
}

inline Vec sandwich(const Multivector& r, std::span<const double> x) {
  const Multivector out = gp(gp(r, vector_mv(x)), reverse(r));
  Vec v(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) v[i] = out.c[std::size_t{1} << i];
  return v;
}

}  // namespace rise::testing
