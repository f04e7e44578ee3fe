#include "rise/sphere.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>

#include "rise/error.hpp"

namespace rise {

namespace vec {

namespace {

// Four independent partial sums; fixed order, so results are reproducible.
template <class Term>
double sum4(std::size_t n, Term term) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += term(i);
    s1 += term(i + 1);
    s2 += term(i + 2);
    s3 += term(i + 3);
  }
  for (; i < n; ++i) s0 += term(i);
  return (s0 + s1) + (s2 + s3);
}

}  // namespace

double dot(std::span<const double> a, std::span<const double> b) {
  return sum4(a.size(), [&](std::size_t i) { return a[i] * b[i]; });
}

double norm(std::span<const double> a) {
  const double ss = sum4(a.size(), [&](std::size_t i) { return a[i] * a[i]; });
  if (ss > 1e-280 && ss < 1e280) return std::sqrt(ss);
  // Rescaled pass for extreme magnitudes.
  double scale = 0.0;
  for (double x : a) scale = std::max(scale, std::abs(x));
  if (scale == 0.0 || !std::isfinite(scale)) return scale;
  const double inv = 1.0 / scale;
  const double s = sum4(a.size(), [&](std::size_t i) {
    const double y = a[i] * inv;
    return y * y;
  });
  return scale * std::sqrt(s);
}

double distance(std::span<const double> a, std::span<const double> b) {
  return std::sqrt(sum4(a.size(), [&](std::size_t i) {
    const double d = a[i] - b[i];
    return d * d;
  }));
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

void scale(std::span<double> x, double alpha) {
  for (double& v : x) v *= alpha;
}

}  // namespace vec

void require_same_dim(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw Error(ErrorCode::DimensionMismatch, fmt::format("{}: {} vs {}", what, a, b));
  }
}

namespace {

void require_min_dim(std::size_t d) {
  if (d < 2) {
    throw Error(ErrorCode::DimensionTooSmall, fmt::format("dimension {} < 2", d));
  }
}

}  // namespace

UnitVector UnitVector::from_unit(Vec coords) {
  require_min_dim(coords.size());
  const double n = vec::norm(coords);
  if (!(std::abs(n - 1.0) <= kUnitTolerance)) {
    throw Error(ErrorCode::NotUnit, fmt::format("norm {} is not 1", n));
  }
  return UnitVector(std::move(coords));
}

UnitVector UnitVector::basis(std::size_t dim, std::size_t index) {
  require_min_dim(dim);
  if (index >= dim) {
    throw Error(ErrorCode::InvalidArgument,
                fmt::format("basis index {} out of range for d={}", index, dim));
  }
  Vec c(dim, 0.0);
  c[index] = 1.0;
  return UnitVector(std::move(c));
}

UnitVector UnitVector::operator-() const {
  Vec c = coords_;
  for (double& x : c) x = -x;
  return UnitVector(std::move(c));
}

UnitVector normalize(std::span<const double> raw, NormalizePolicy policy,
                     std::vector<Diagnostic>* diagnostics) {
  require_min_dim(raw.size());
  const double n = vec::norm(raw);
  if (!std::isfinite(n)) {
    throw Error(ErrorCode::InvalidArgument, "vector has non-finite entries");
  }
  if (n <= kZeroNormThreshold) {
    throw Error(ErrorCode::ZeroVector, fmt::format("norm {} too small to normalize", n));
  }
  if (policy == NormalizePolicy::warn && std::abs(n - 1.0) > 0.01 && diagnostics) {
    diagnostics->push_back({fmt::format("input norm {:.6g} deviates from 1 by more than 0.01", n)});
  }
  Vec c(raw.begin(), raw.end());
  if (std::abs(vec::dot(c, c) - 1.0) > kExactUnitSlack) {
    vec::scale(c, 1.0 / n);
  }
  return UnitVector(std::move(c));
}

TangentVector::TangentVector(UnitVector base, Vec vec)
    : base_(std::move(base)), vec_(std::move(vec)) {
  require_same_dim(base_.dim(), vec_.size(), "tangent vector");
  const double normal = vec::dot(vec_, base_.coords());
  const double bound = kUnitTolerance * std::max(1.0, vec::norm(vec_));
  if (!(std::abs(normal) <= bound)) {
    throw Error(ErrorCode::InvalidArgument,
                fmt::format("vector is not tangent: normal component {}", normal));
  }
}

TangentVector TangentVector::projected(UnitVector base, Vec vec) {
  require_same_dim(base.dim(), vec.size(), "tangent vector");
  vec::axpy(-vec::dot(vec, base.coords()), base.coords(), vec);
  return TangentVector(std::move(base), std::move(vec));
}

TangentVector TangentVector::zero(UnitVector base) {
  Vec z(base.dim(), 0.0);
  return TangentVector(std::move(base), std::move(z));
}

UnitVector exp_map(const TangentVector& xi) {
  const UnitVector& n = xi.base();
  const double theta = xi.norm();
  if (theta == 0.0) return n;
  Vec out(n.coords().begin(), n.coords().end());
  if (theta < kZeroNormThreshold) {
    vec::axpy(1.0, xi.vec(), out);
  } else {
    vec::scale(out, std::cos(theta));
    vec::axpy(std::sin(theta) / theta, xi.vec(), out);
  }
  return normalize(out);
}

double geodesic_distance(const UnitVector& a, const UnitVector& b) {
  require_same_dim(a.dim(), b.dim(), "geodesic_distance");
  double diff = 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) {
    const double d = a[i] - b[i];
    const double s = a[i] + b[i];
    diff += d * d;
    sum += s * s;
  }
  return 2.0 * std::atan2(std::sqrt(diff), std::sqrt(sum));
}

TangentVector log_map(const UnitVector& n, const UnitVector& v) {
  require_same_dim(n.dim(), v.dim(), "log_map");
  const double c = vec::dot(n.coords(), v.coords());
  if (c <= -1.0 + kAntipodalSlack) {
    throw Error(ErrorCode::AntipodalPair,
                fmt::format("log map undefined: <n,v> = {:.17g}", c));
  }
  const double theta = geodesic_distance(n, v);
  Vec dir(v.coords().begin(), v.coords().end());
  vec::axpy(-c, n.coords(), dir);
  const double s = vec::norm(dir);
  if (theta <= kSamePointAngle || s == 0.0) {
    return TangentVector::zero(n);
  }
  vec::scale(dir, theta / s);
  // Re-project: the residual normal component is O(eps·θ).
  vec::axpy(-vec::dot(dir, n.coords()), n.coords(), dir);
  return TangentVector(TangentVector::Unchecked{}, n, std::move(dir));
}

TangentVector parallel_transport(const TangentVector& xi, const UnitVector& to) {
  const UnitVector& from = xi.base();
  require_same_dim(from.dim(), to.dim(), "parallel_transport");
  const TangentVector u = log_map(from, to);
  const double theta = u.norm();
  if (theta == 0.0) return TangentVector::projected(to, xi.values());

  Vec out = xi.values();
  const double along = vec::dot(u.vec(), xi.vec()) / theta;
  // ξ + ⟨û,ξ⟩[(cos θ − 1) û − sin θ a]
  vec::axpy(along * (std::cos(theta) - 1.0) / theta, u.vec(), out);
  vec::axpy(-along * std::sin(theta), from.coords(), out);
  return TangentVector::projected(to, std::move(out));
}

}  // namespace rise
