#pragma once

// Synthetic pair datasets with a planted prototype.
//
// Generative model, per pair i:
//   n_i ~ base distribution
//   ε_i = σ · g_i / √(d − 1),  g_i standard Gaussian in T_e1   (E‖ε_i‖² = σ²)
//   v_i = exp_{n_i}(R(n_i)ᵀ (p_true + ε_i))
// Stream 0 of the seed draws p_true; stream i + 1 draws pair i.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rise/core.hpp"
#include "rise/rng.hpp"

namespace rise {

struct SphereCap {
  UnitVector center;
  double radius;  // geodesic radius, radians
};

struct SynthSpec {
  std::size_t dim = 64;
  std::size_t n_pairs = 100;
  double planted_magnitude = 0.3;
  double noise_sigma = 0.0;
  // Uniform on the sphere when unset.
  std::optional<SphereCap> cap;
  std::uint64_t seed = 0;
  RotorBackend backend = RotorBackend::householder;
  std::string language = "synth";
  std::string phenomenon = "planted";
};

struct SynthDataset {
  std::vector<Pair> pairs;
  Prototype p_true;
};

SynthDataset generate(const SynthSpec& spec);

// Uniform direction in T_e1 with ‖vec‖ = magnitude.
Prototype random_prototype(std::size_t dim, double magnitude, std::uint64_t seed,
                           RotorBackend backend = RotorBackend::householder);

// Same, drawing from an existing stream.
Prototype random_prototype(std::size_t dim, double magnitude, Rng& rng,
                           RotorBackend backend = RotorBackend::householder);

UnitVector sample_uniform_sphere(std::size_t dim, Rng& rng);

}  // namespace rise
