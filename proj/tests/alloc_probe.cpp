// Checks that the geometry core never allocates Θ(d²) memory: every operation
// runs at a large d while global operator new records the biggest single
// allocation and the total bytes requested.

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <new>

#include "rise/core.hpp"
#include "rise/rng.hpp"
#include "rise/synth.hpp"

namespace {

std::atomic<std::size_t> g_largest{0};
std::atomic<std::size_t> g_total{0};

void record(std::size_t n) {
  g_total += n;
  std::size_t cur = g_largest.load();
  while (n > cur && !g_largest.compare_exchange_weak(cur, n)) {
  }
}

}  // namespace

void* operator new(std::size_t n) {
  record(n);
  if (void* p = std::malloc(n == 0 ? 1 : n)) return p;
  throw std::bad_alloc();
}
void* operator new[](std::size_t n) { return operator new(n); }
void operator delete(void* p) noexcept { std::free(p); }
void operator delete[](void* p) noexcept { std::free(p); }
void operator delete(void* p, std::size_t) noexcept { std::free(p); }
void operator delete[](void* p, std::size_t) noexcept { std::free(p); }

int main() {
  using namespace rise;
  constexpr std::size_t d = 4096;
  // Linear budget: a handful of d-vectors. d² doubles would be 32768× larger.
  constexpr std::size_t kLargestBudget = 4 * d * sizeof(double);
  constexpr std::size_t kTotalBudget = 256 * d * sizeof(double);

  Rng rng(1);
  const UnitVector n = sample_uniform_sphere(d, rng);
  const UnitVector v = sample_uniform_sphere(d, rng);
  const Prototype a = random_prototype(d, 0.3, rng);
  const Prototype b = random_prototype(d, 0.2, rng);
  const Pair pair(n, v);
  const std::vector<Pair> pairs(8, pair);
  const TangentVector xi = log_map(n, v);

  struct Probe {
    const char* name;
    std::function<void()> run;
  };
  const Probe probes[] = {
      {"normalize", [&] { (void)normalize(v.coords()); }},
      {"exp_map", [&] { (void)exp_map(xi); }},
      {"log_map", [&] { (void)log_map(n, v); }},
      {"geodesic_distance", [&] { (void)geodesic_distance(n, v); }},
      {"parallel_transport", [&] { (void)parallel_transport(xi, v); }},
      {"rotor householder", [&] { (void)Rotor::build(n, RotorBackend::householder).apply(v.coords()); }},
      {"rotor givens", [&] { (void)Rotor::build(n, RotorBackend::givens).apply(v.coords()); }},
      {"rotor two_step", [&] { (void)Rotor::build(n, RotorBackend::two_step).apply(v.coords()); }},
      {"canonicalize_pair", [&] { (void)canonicalize_pair(pair); }},
      {"learn_prototype", [&] { (void)learn_prototype(pairs); }},
      {"predict", [&] { (void)predict(n, a); }},
      {"commutativity_gap", [&] { (void)commutativity_gap(n, a, b); }},
  };

  int failures = 0;
  for (const Probe& p : probes) {
    g_largest = 0;
    g_total = 0;
    p.run();
    const std::size_t largest = g_largest, total = g_total;
    const bool ok = largest <= kLargestBudget && total <= kTotalBudget;
    std::printf("%s %-20s largest=%zu B total=%zu B (d=%zu)\n", ok ? "PASS" : "FAIL", p.name,
                largest, total, d);
    if (!ok) ++failures;
  }
  return failures == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
