#pragma once

// Rotor-invariant shift estimation: canonicalize neutral/variant pairs into
// the tangent space at the pole, average them into a prototype, and replay
// the prototype at unseen base points.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rise/rotor.hpp"
#include "rise/sphere.hpp"

namespace rise {

class Pair {
 public:
  // Throws DimensionMismatch, or AntipodalPair when ⟨n, v⟩ ≤ −1 + 1e-9.
  Pair(UnitVector neutral, UnitVector variant, std::string id = {}, std::string language = {},
       std::string phenomenon = {});

  const UnitVector& neutral() const noexcept { return neutral_; }
  const UnitVector& variant() const noexcept { return variant_; }
  const std::string& id() const noexcept { return id_; }
  const std::string& language() const noexcept { return language_; }
  const std::string& phenomenon() const noexcept { return phenomenon_; }
  std::size_t dim() const noexcept { return neutral_.dim(); }

  friend bool operator==(const Pair&, const Pair&) = default;

 private:
  UnitVector neutral_;
  UnitVector variant_;
  std::string id_;
  std::string language_;
  std::string phenomenon_;
};

struct PrototypeMeta {
  std::string phenomenon;
  std::string language;
  std::string model_id;
  std::string created_at;
  // Set by cross-model porting: magnitude before and after the space map.
  std::optional<double> source_magnitude;
  std::optional<double> mapped_magnitude;

  friend bool operator==(const PrototypeMeta&, const PrototypeMeta&) = default;
};

class Prototype {
 public:
  // Invariants: ⟨vec, e1⟩ within 1e-9 of 0, pair_count ≥ 1, ‖vec‖ < π.
  Prototype(Vec vec, std::size_t pair_count, RotorBackend backend, PrototypeMeta meta = {});
  static Prototype zero(std::size_t dim, RotorBackend backend = RotorBackend::householder);

  std::span<const double> vec() const noexcept { return vec_; }
  const Vec& values() const noexcept { return vec_; }
  std::size_t dim() const noexcept { return vec_.size(); }
  std::size_t pair_count() const noexcept { return pair_count_; }
  RotorBackend backend() const noexcept { return backend_; }
  const PrototypeMeta& meta() const noexcept { return meta_; }
  PrototypeMeta& meta() noexcept { return meta_; }
  double magnitude() const { return vec::norm(vec_); }

  // Same direction, magnitude multiplied by `factor`.
  Prototype scaled(double factor) const;

  friend bool operator==(const Prototype&, const Prototype&) = default;

 private:
  Vec vec_;
  std::size_t pair_count_;
  RotorBackend backend_;
  PrototypeMeta meta_;
};

// ξ = R(n)·log_n(v), a tangent vector at e1.
Vec canonicalize_pair(const Pair& pair, RotorBackend backend = RotorBackend::householder);

struct LearnOptions {
  std::size_t workers = 1;
  PrototypeMeta meta;
};

// Arithmetic mean of canonicalized tangents. The reduction runs over fixed
// blocks of the input order, so the result is bit-identical for any worker
// count. meta.phenomenon/language default to those of the first pair.
Prototype learn_prototype(std::span<const Pair> pairs,
                          RotorBackend backend = RotorBackend::householder,
                          const LearnOptions& options = {});

// v* = exp_{n*}(R(n*)ᵀ p).
UnitVector predict(const UnitVector& n_star, const Prototype& p,
                   RotorBackend backend = RotorBackend::householder);

UnitVector apply_sequence(const UnitVector& n0, std::span<const Prototype> protos,
                          RotorBackend backend = RotorBackend::householder);

// Distance between A-then-B and B-then-A starting from n0.
double commutativity_gap(const UnitVector& n0, const Prototype& a, const Prototype& b,
                         RotorBackend backend = RotorBackend::householder);

}  // namespace rise
