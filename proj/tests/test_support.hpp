#pragma once

// Shared generators and dense-matrix oracles for the test suites. Everything
// here is independent of the O(d) implementation paths under test.

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "rise/rng.hpp"
#include "rise/sphere.hpp"

namespace rise::testing {

inline UnitVector random_unit(std::size_t d, Rng& rng) {
  Vec g(d);
  for (double& x : g) x = rng.normal();
  return normalize(g);
}

// Random unit vector with ⟨x, e1⟩ bounded away from ±1.
inline UnitVector random_unit_away_from_poles(std::size_t d, Rng& rng, double max_abs_e1 = 0.9) {
  for (;;) {
    UnitVector u = random_unit(d, rng);
    if (std::abs(u[0]) < max_abs_e1) return u;
  }
}

inline Eigen::VectorXd to_eigen(std::span<const double> x) {
  return Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
}

inline Vec to_vec(const Eigen::VectorXd& x) { return Vec(x.data(), x.data() + x.size()); }

// I − 2wwᵀ/‖w‖² with w = from − to.
inline Eigen::MatrixXd dense_householder(const Eigen::VectorXd& from, const Eigen::VectorXd& to) {
  const Eigen::VectorXd w = from - to;
  const Eigen::Index d = from.size();
  if (w.squaredNorm() == 0.0) return Eigen::MatrixXd::Identity(d, d);
  return Eigen::MatrixXd::Identity(d, d) - 2.0 * w * w.transpose() / w.squaredNorm();
}

// Rotation by the angle from a to b in their plane; identity on the complement.
inline Eigen::MatrixXd dense_plane_rotation(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const Eigen::Index d = a.size();
  const double c = a.dot(b);
  Eigen::VectorXd u = b - c * a;
  const double s = u.norm();
  Eigen::MatrixXd r = Eigen::MatrixXd::Identity(d, d);
  if (s == 0.0) return r;
  u /= s;
  r += s * (u * a.transpose() - a * u.transpose()) +
       (c - 1.0) * (a * a.transpose() + u * u.transpose());
  return r;
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline double max_abs_diff(const UnitVector& a, const UnitVector& b) {
  return max_abs_diff(a.coords(), b.coords());
}

}  // namespace rise::testing
