#pragma once

// Geometry of the round unit sphere S^(d-1) in R^d.
//
// All routines are O(d) in time and memory and operate on contiguous
// double-precision storage.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace rise {

using Vec = std::vector<double>;

namespace vec {

double dot(std::span<const double> a, std::span<const double> b);
double norm(std::span<const double> a);
// Euclidean distance ‖a − b‖.
double distance(std::span<const double> a, std::span<const double> b);
// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);
void scale(std::span<double> x, double alpha);

}  // namespace vec

// Tolerances shared by the geometry layer.
inline constexpr double kUnitTolerance = 1e-9;
inline constexpr double kZeroNormThreshold = 1e-12;
// Angles below this are treated as "same point".
inline constexpr double kSamePointAngle = 1e-12;
// ⟨n, v⟩ at or below -1 + kAntipodalSlack is rejected.
inline constexpr double kAntipodalSlack = 1e-9;
// Vectors with |‖x‖² − 1| at or below this are already unit and kept verbatim.
inline constexpr double kExactUnitSlack = 1e-14;

enum class NormalizePolicy { strict, warn };

struct Diagnostic {
  std::string message;
};

class UnitVector {
 public:
  // Validates |‖coords‖ − 1| ≤ kUnitTolerance and d ≥ 2; throws NotUnit /
  // DimensionTooSmall.
  static UnitVector from_unit(Vec coords);
  // Standard basis vector e_(index+1).
  static UnitVector basis(std::size_t dim, std::size_t index = 0);

  std::size_t dim() const noexcept { return coords_.size(); }
  std::span<const double> coords() const noexcept { return coords_; }
  double operator[](std::size_t i) const { return coords_[i]; }
  const Vec& vec() const noexcept { return coords_; }

  UnitVector operator-() const;
  friend bool operator==(const UnitVector&, const UnitVector&) = default;

 private:
  explicit UnitVector(Vec coords) : coords_(std::move(coords)) {}
  friend UnitVector normalize(std::span<const double>, NormalizePolicy,
                              std::vector<Diagnostic>*);
  Vec coords_;
};

// raw / ‖raw‖. Under `warn`, appends a diagnostic when |‖raw‖ − 1| > 0.01.
UnitVector normalize(std::span<const double> raw,
                     NormalizePolicy policy = NormalizePolicy::strict,
                     std::vector<Diagnostic>* diagnostics = nullptr);

class TangentVector {
 public:
  // Throws InvalidArgument unless |⟨vec, base⟩| ≤ 1e-9 · max(1, ‖vec‖).
  TangentVector(UnitVector base, Vec vec);
  // Removes the normal component ⟨vec, base⟩ base before constructing.
  static TangentVector projected(UnitVector base, Vec vec);
  static TangentVector zero(UnitVector base);

  const UnitVector& base() const noexcept { return base_; }
  std::span<const double> vec() const noexcept { return vec_; }
  const Vec& values() const noexcept { return vec_; }
  std::size_t dim() const noexcept { return vec_.size(); }
  double norm() const { return vec::norm(vec_); }

 private:
  struct Unchecked {};
  TangentVector(Unchecked, UnitVector base, Vec vec)
      : base_(std::move(base)), vec_(std::move(vec)) {}
  friend TangentVector log_map(const UnitVector&, const UnitVector&);
  friend TangentVector parallel_transport(const TangentVector&, const UnitVector&);

  UnitVector base_;
  Vec vec_;
};

// exp_n(ξ) = cos‖ξ‖ n + sin‖ξ‖ ξ/‖ξ‖.
UnitVector exp_map(const TangentVector& xi);

// log_n(v); throws AntipodalPair when ⟨n, v⟩ ≤ −1 + kAntipodalSlack.
TangentVector log_map(const UnitVector& n, const UnitVector& v);

// Great-circle distance in [0, π].
double geodesic_distance(const UnitVector& a, const UnitVector& b);

// Transports ξ along the short geodesic from ξ.base() to `to`.
TangentVector parallel_transport(const TangentVector& xi, const UnitVector& to);

void require_same_dim(std::size_t a, std::size_t b, const char* what);

}  // namespace rise
