#include "rise/synth.hpp"

#include <cmath>
#include <fmt/format.h>
#include <numbers>

#include "rise/error.hpp"

namespace rise {

namespace {

// Gaussian tangent direction at e1 (first coordinate zero), unnormalized.
Vec gaussian_tangent_at_pole(std::size_t dim, Rng& rng) {
  Vec g(dim, 0.0);
  for (std::size_t k = 1; k < dim; ++k) g[k] = rng.normal();
  return g;
}

void validate(const SynthSpec& spec) {
  if (spec.dim < 2) throw Error(ErrorCode::DimensionTooSmall, "synth dim must be >= 2");
  if (spec.n_pairs < 1) throw Error(ErrorCode::InvalidArgument, "synth n_pairs must be >= 1");
  if (!(spec.planted_magnitude >= 0.0 && spec.planted_magnitude < std::numbers::pi / 2)) {
    throw Error(ErrorCode::InvalidArgument,
                fmt::format("planted magnitude {} outside [0, pi/2)", spec.planted_magnitude));
  }
  if (!(spec.noise_sigma >= 0.0)) throw Error(ErrorCode::InvalidArgument, "noise sigma < 0");
  if (spec.cap) {
    require_same_dim(spec.cap->center.dim(), spec.dim, "synth cap center");
    if (!(spec.cap->radius >= 0.0 && spec.cap->radius < std::numbers::pi)) {
      throw Error(ErrorCode::InvalidArgument, "cap radius outside [0, pi)");
    }
  }
}

UnitVector sample_cap(const SphereCap& cap, Rng& rng) {
  const std::size_t d = cap.center.dim();
  Vec g(d);
  for (double& x : g) x = rng.normal();
  TangentVector dir = TangentVector::projected(cap.center, std::move(g));
  const double len = dir.norm();
  const double angle = cap.radius * rng.uniform();
  if (len == 0.0 || angle == 0.0) return cap.center;
  Vec scaled = dir.values();
  vec::scale(scaled, angle / len);
  return exp_map(TangentVector::projected(cap.center, std::move(scaled)));
}

}  // namespace

UnitVector sample_uniform_sphere(std::size_t dim, Rng& rng) {
  Vec g(dim);
  for (;;) {
    for (double& x : g) x = rng.normal();
    if (vec::norm(g) > 1e-6) return normalize(g);
  }
}

Prototype random_prototype(std::size_t dim, double magnitude, Rng& rng, RotorBackend backend) {
  if (!(magnitude > 0.0 && magnitude < std::numbers::pi)) {
    throw Error(ErrorCode::InvalidArgument,
                fmt::format("random prototype magnitude {} outside (0, pi)", magnitude));
  }
  if (dim < 2) throw Error(ErrorCode::DimensionTooSmall, "random prototype dim must be >= 2");
  Vec g;
  double len = 0.0;
  do {
    g = gaussian_tangent_at_pole(dim, rng);
    len = vec::norm(g);
  } while (len < 1e-6);
  vec::scale(g, magnitude / len);
  PrototypeMeta meta;
  meta.phenomenon = "random";
  return Prototype(std::move(g), 1, backend, std::move(meta));
}

Prototype random_prototype(std::size_t dim, double magnitude, std::uint64_t seed,
                           RotorBackend backend) {
  Rng rng(seed);
  return random_prototype(dim, magnitude, rng, backend);
}

SynthDataset generate(const SynthSpec& spec) {
  validate(spec);
  const std::size_t d = spec.dim;

  Vec p(d, 0.0);
  if (spec.planted_magnitude > 0.0) {
    Rng rng(spec.seed, 0);
    p = random_prototype(d, spec.planted_magnitude, rng, spec.backend).values();
  }
  PrototypeMeta meta{spec.phenomenon, spec.language, "synthetic", {}, {}, {}};
  Prototype p_true(p, spec.n_pairs, spec.backend, meta);

  const double noise_scale =
      spec.noise_sigma / std::sqrt(static_cast<double>(d - 1));
  // Keep targets strictly inside the injectivity radius.
  const double max_shift = std::numbers::pi - 0.01;

  std::vector<Pair> pairs;
  pairs.reserve(spec.n_pairs);
  for (std::size_t i = 0; i < spec.n_pairs; ++i) {
    Rng rng(spec.seed, i + 1);
    const UnitVector n = spec.cap ? sample_cap(*spec.cap, rng) : sample_uniform_sphere(d, rng);
    Vec shift;
    do {
      shift = p;
      if (noise_scale > 0.0) vec::axpy(noise_scale, gaussian_tangent_at_pole(d, rng), shift);
    } while (vec::norm(shift) >= max_shift);
    const Rotor r = Rotor::build(n, spec.backend);
    const UnitVector v = exp_map(TangentVector::projected(n, r.apply_transpose(shift)));
    pairs.emplace_back(n, v, fmt::format("{}-{:06}", spec.language, i), spec.language,
                       spec.phenomenon);
  }
  return {std::move(pairs), std::move(p_true)};
}

}  // namespace rise
