#pragma once

// Scoring and experiment harness.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "rise/core.hpp"

namespace rise {

struct ScoreReport {
  double mean_score = 0.0;
  double std = 0.0;  // sample standard deviation (0 when n_test == 1)
  std::size_t n_test = 0;
  std::string phenomenon;
  std::string train_lang;
  std::string test_lang;
  std::string model_id;

  friend bool operator==(const ScoreReport&, const ScoreReport&) = default;
};

// Mean/std of cos(predicted_i, target_i); both sides are re-normalized.
ScoreReport rotor_alignment_score(std::span<const UnitVector> predicted,
                                  std::span<const UnitVector> targets);

// Predicts every test pair's variant from its neutral with `p` and scores it.
ScoreReport score_prototype(std::span<const Pair> test, const Prototype& p,
                            RotorBackend backend = RotorBackend::householder,
                            std::size_t workers = 1);

struct Split {
  std::vector<Pair> train;
  std::vector<Pair> test;
};

// Seeded Fisher–Yates shuffle; round(fraction·n) pairs go to train. Throws
// DegenerateSplit unless 0 < fraction < 1 and both sides are non-empty.
Split split(std::span<const Pair> pairs, double train_fraction, std::uint64_t seed);

// Square (L×L) for transfer_matrix; score_matrix may produce fewer rows.
struct TransferMatrix {
  std::vector<std::string> train_languages;
  std::vector<std::string> test_languages;
  // Row-major: cells[row * cols() + col].
  std::vector<ScoreReport> cells;
  std::string phenomenon;
  std::string model_id;

  std::size_t rows() const noexcept { return train_languages.size(); }
  std::size_t cols() const noexcept { return test_languages.size(); }
  const ScoreReport& at(std::size_t train, std::size_t test) const {
    return cells.at(train * cols() + test);
  }
  friend bool operator==(const TransferMatrix&, const TransferMatrix&) = default;
};

struct TransferOptions {
  std::string phenomenon;  // empty: use every pair
  RotorBackend backend = RotorBackend::householder;
  double train_fraction = 0.8;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  std::string model_id;
};

// Languages are ordered by the map's key order. Every language is split with
// the same seed; the prototype of row i is learned on language i's train
// split and scored on every language's test split.
TransferMatrix transfer_matrix(const std::map<std::string, std::vector<Pair>>& datasets,
                               const TransferOptions& options);

// Rows are the given prototypes (keyed by source language), columns the
// held-out splits of `datasets`. Used for cross-model evaluation.
TransferMatrix score_matrix(const std::map<std::string, Prototype>& prototypes,
                            const std::map<std::string, std::vector<Pair>>& datasets,
                            const TransferOptions& options);

struct BaselineReport {
  std::string phenomenon;
  double rise_score = 0.0;
  double random_mean = 0.0;
  double random_sem = 0.0;
  std::size_t trials = 0;
  // rise_score / random_mean, NaN when random_mean <= 0.
  double advantage_ratio = 0.0;
};

struct RandomBaseline {
  double mean = 0.0;
  double sem = 0.0;  // sample std / √trials
  std::size_t trials = 0;
  std::vector<double> trial_scores;
};

using PrototypeSource = std::function<Prototype(std::size_t trial)>;

// Each trial scores a fresh random prototype of magnitude θ drawn from
// substream `trial` of `seed`.
RandomBaseline random_baseline(std::span<const Pair> test, double magnitude, std::size_t trials,
                               RotorBackend backend, std::uint64_t seed, std::size_t workers = 1);

// Same protocol with caller-supplied per-trial prototypes.
RandomBaseline random_baseline(std::span<const Pair> test, std::size_t trials,
                               RotorBackend backend, const PrototypeSource& source,
                               std::size_t workers = 1);

BaselineReport make_baseline_report(std::string phenomenon, double rise_score,
                                    const RandomBaseline& baseline);

// Least-squares slope of log(y) against log(x).
double loglog_slope(std::span<const double> x, std::span<const double> y);

struct ComplexityRow {
  std::size_t dim;
  double ns_per_op;
};

struct ComplexityReport {
  std::vector<ComplexityRow> rows;
  double slope = 0.0;
};

// Median wall time of one canonicalize + log + exp cycle per dimension, with
// one warm-up measurement discarded. dims must be ascending with ≥ 4 entries.
ComplexityReport complexity_probe(std::span<const std::size_t> dims, std::size_t reps,
                                  RotorBackend backend = RotorBackend::householder);

struct CommutativityScaling {
  std::vector<double> scales;
  std::vector<double> gaps;
  double slope = 0.0;  // NaN when any gap is zero
};

// Gap between A∘B and B∘A with both prototypes scaled by each s; needs ≥ 3 scales.
CommutativityScaling commutativity_scaling(const UnitVector& n0, const Prototype& a,
                                           const Prototype& b, std::span<const double> scales,
                                           RotorBackend backend = RotorBackend::householder);

// `train_lang,test_lang,mean,std,n`
void write_transfer_csv(const TransferMatrix& m, std::ostream& out);
// `phenomenon,rise_score,random_mean,random_sem,trials,advantage_ratio`
void write_baseline_csv(std::span<const BaselineReport> reports, std::ostream& out);
// Deterministic heatmap; 0.0 renders white, 1.0 renders #08306b.
void write_heatmap_svg(const TransferMatrix& m, std::ostream& out);

}  // namespace rise
