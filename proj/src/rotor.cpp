#include "rise/rotor.hpp"

#include <cmath>
#include <fmt/format.h>

#include "rise/error.hpp"

namespace rise {

std::string_view to_string(RotorBackend backend) noexcept {
  switch (backend) {
    case RotorBackend::householder: return "householder";
    case RotorBackend::givens: return "givens";
    case RotorBackend::two_step: return "two_step";
  }
  return "householder";
}

RotorBackend parse_backend(std::string_view name) {
  if (name == "householder") return RotorBackend::householder;
  if (name == "givens") return RotorBackend::givens;
  if (name == "two_step" || name == "two-step") return RotorBackend::two_step;
  throw Error(ErrorCode::InvalidArgument, fmt::format("unknown rotor backend '{}'", name));
}

void Rotor::Reflection::apply(std::span<double> x) const {
  if (coef == 0.0) return;
  vec::axpy(-coef * vec::dot(w, x), w, x);
}

Rotor::Reflection Rotor::reflection_between(std::span<const double> from,
                                            std::span<const double> to) {
  Reflection r;
  r.w.assign(from.begin(), from.end());
  vec::axpy(-1.0, to, r.w);
  const double ww = vec::dot(r.w, r.w);
  r.coef = ww > kIdentityThreshold * kIdentityThreshold ? 2.0 / ww : 0.0;
  return r;
}

Rotor Rotor::build(const UnitVector& n, RotorBackend backend, CanonicalPole pole) {
  const std::size_t d = n.dim();
  if (pole.index >= d) {
    throw Error(ErrorCode::InvalidArgument,
                fmt::format("pole index {} out of range for d={}", pole.index, d));
  }
  Rotor r;
  r.backend_ = backend;
  r.dim_ = d;
  r.pole_ = pole.index;

  const UnitVector e = UnitVector::basis(d, pole.index);
  if (vec::distance(n.coords(), e.coords()) < kIdentityThreshold) {
    r.kind_ = Kind::identity;
    return r;
  }

  const double c = n[pole.index];
  if (backend == RotorBackend::two_step || c < kTwoStepThreshold) {
    // Auxiliary basis vector u ⟂ pole: smallest |n_k|, lowest index on ties.
    std::size_t aux = pole.index == 0 ? 1 : 0;
    for (std::size_t k = 0; k < d; ++k) {
      if (k == pole.index) continue;
      if (std::abs(n[k]) < std::abs(n[aux])) aux = k;
    }
    const UnitVector u = UnitVector::basis(d, aux);
    r.kind_ = Kind::two_step;
    r.first_ = reflection_between(n.coords(), u.coords());
    r.second_ = reflection_between(u.coords(), e.coords());
    return r;
  }

  if (backend == RotorBackend::householder) {
    r.kind_ = Kind::householder;
    r.first_ = reflection_between(n.coords(), e.coords());
    return r;
  }

  r.kind_ = Kind::givens;
  r.plane_.assign(n.coords().begin(), n.coords().end());
  r.plane_[pole.index] = 0.0;
  double s = vec::norm(r.plane_);
  vec::scale(r.plane_, 1.0 / s);
  const double h = std::hypot(c, s);
  r.cos_ = c / h;
  r.sin_ = s / h;
  return r;
}

void Rotor::givens(std::span<double> x, bool transpose) const {
  const double a = x[pole_];
  const double b = vec::dot(plane_, x);
  const double s = transpose ? -sin_ : sin_;
  // cos − 1 without cancellation near the pole.
  const double cm1 = -sin_ * sin_ / (1.0 + cos_);
  vec::axpy(cm1 * b - s * a, plane_, x);
  x[pole_] = cos_ * a + s * b;
}

void Rotor::apply_in_place(std::span<double> x) const {
  require_same_dim(dim_, x.size(), "rotor apply");
  switch (kind_) {
    case Kind::identity: return;
    case Kind::householder: first_.apply(x); return;
    case Kind::givens: givens(x, false); return;
    case Kind::two_step:
      first_.apply(x);
      second_.apply(x);
      return;
  }
}

void Rotor::apply_transpose_in_place(std::span<double> x) const {
  require_same_dim(dim_, x.size(), "rotor apply_transpose");
  switch (kind_) {
    case Kind::identity: return;
    case Kind::householder: first_.apply(x); return;
    case Kind::givens: givens(x, true); return;
    case Kind::two_step:
      second_.apply(x);
      first_.apply(x);
      return;
  }
}

Vec Rotor::apply(std::span<const double> x) const {
  Vec out(x.begin(), x.end());
  apply_in_place(out);
  return out;
}

Vec Rotor::apply_transpose(std::span<const double> x) const {
  Vec out(x.begin(), x.end());
  apply_transpose_in_place(out);
  return out;
}

}  // namespace rise
