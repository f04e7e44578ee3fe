#pragma once

// Orthogonal canonicalizers R(n) with R(n)·n = e_pole, applied in O(d)
// without ever forming a d×d matrix.

#include <cstddef>
#include <span>
#include <string_view>

#include "rise/sphere.hpp"

namespace rise {

enum class RotorBackend { householder, givens, two_step };

std::string_view to_string(RotorBackend backend) noexcept;
// Accepts "householder", "givens", "two_step" (also "two-step").
RotorBackend parse_backend(std::string_view name);

// Canonical reference direction; index 0 is e1.
struct CanonicalPole {
  std::size_t index = 0;
};

// ⟨n, e_pole⟩ below this makes householder/givens delegate to two_step.
inline constexpr double kTwoStepThreshold = -1.0 + 1e-6;
// ‖n − e_pole‖ below this yields the identity rotor.
inline constexpr double kIdentityThreshold = 1e-12;

class Rotor {
 public:
  // What actually runs; differs from backend() on identity or delegation.
  enum class Kind { identity, householder, givens, two_step };

  static Rotor build(const UnitVector& n, RotorBackend backend = RotorBackend::householder,
                     CanonicalPole pole = {});

  RotorBackend backend() const noexcept { return backend_; }
  Kind kind() const noexcept { return kind_; }
  std::size_t dim() const noexcept { return dim_; }
  std::size_t pole() const noexcept { return pole_; }

  Vec apply(std::span<const double> x) const;
  Vec apply_transpose(std::span<const double> x) const;
  void apply_in_place(std::span<double> x) const;
  void apply_transpose_in_place(std::span<double> x) const;

 private:
  // I − coef·w wᵀ with coef = 2/‖w‖² (0 for the identity).
  struct Reflection {
    Vec w;
    double coef = 0.0;
    void apply(std::span<double> x) const;
  };
  static Reflection reflection_between(std::span<const double> from, std::span<const double> to);

  void givens(std::span<double> x, bool transpose) const;

  RotorBackend backend_ = RotorBackend::householder;
  Kind kind_ = Kind::identity;
  std::size_t dim_ = 0;
  std::size_t pole_ = 0;
  Reflection first_;
  Reflection second_;
  // Givens: unit direction of n's component orthogonal to the pole.
  Vec plane_;
  double cos_ = 1.0;
  double sin_ = 0.0;
};

inline Rotor build_rotor(const UnitVector& n, RotorBackend backend = RotorBackend::householder) {
  return Rotor::build(n, backend);
}
inline Vec apply(const Rotor& r, std::span<const double> x) { return r.apply(x); }
inline Vec apply_transpose(const Rotor& r, std::span<const double> x) {
  return r.apply_transpose(x);
}

}  // namespace rise
