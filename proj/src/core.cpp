#include "rise/core.hpp"

#include <cmath>
#include <fmt/format.h>
#include <numbers>

#include "rise/error.hpp"
#include "rise/parallel.hpp"

namespace rise {

namespace {

// Fixed reduction block; independent of worker count.
constexpr std::size_t kReduceBlock = 64;

}  // namespace

Pair::Pair(UnitVector neutral, UnitVector variant, std::string id, std::string language,
           std::string phenomenon)
    : neutral_(std::move(neutral)),
      variant_(std::move(variant)),
      id_(std::move(id)),
      language_(std::move(language)),
      phenomenon_(std::move(phenomenon)) {
  require_same_dim(neutral_.dim(), variant_.dim(), "pair");
  const double c = vec::dot(neutral_.coords(), variant_.coords());
  if (c <= -1.0 + kAntipodalSlack) {
    throw Error(ErrorCode::AntipodalPair, fmt::format("pair '{}' is antipodal", id_));
  }
}

Prototype::Prototype(Vec vec, std::size_t pair_count, RotorBackend backend, PrototypeMeta meta)
    : vec_(std::move(vec)), pair_count_(pair_count), backend_(backend), meta_(std::move(meta)) {
  if (vec_.size() < 2) {
    throw Error(ErrorCode::DimensionTooSmall, fmt::format("prototype dimension {}", vec_.size()));
  }
  if (pair_count_ < 1) {
    throw Error(ErrorCode::InvalidArgument, "prototype pair_count must be >= 1");
  }
  for (double x : vec_) {
    if (!std::isfinite(x)) throw Error(ErrorCode::CorruptVector, "non-finite prototype entry");
  }
  if (!(std::abs(vec_[0]) <= kUnitTolerance)) {
    throw Error(ErrorCode::InvalidArgument,
                fmt::format("prototype is not tangent at e1: <p,e1> = {}", vec_[0]));
  }
  if (!(vec::norm(vec_) < std::numbers::pi)) {
    throw Error(ErrorCode::InvalidArgument, "prototype magnitude must be < pi");
  }
}

Prototype Prototype::zero(std::size_t dim, RotorBackend backend) {
  return Prototype(Vec(dim, 0.0), 1, backend);
}

Prototype Prototype::scaled(double factor) const {
  Prototype out = *this;
  vec::scale(out.vec_, factor);
  if (!(out.magnitude() < std::numbers::pi)) {
    throw Error(ErrorCode::InvalidArgument, "scaled prototype magnitude must be < pi");
  }
  return out;
}

Vec canonicalize_pair(const Pair& pair, RotorBackend backend) {
  const TangentVector log = log_map(pair.neutral(), pair.variant());
  const Rotor r = Rotor::build(pair.neutral(), backend);
  return r.apply(log.vec());
}

Prototype learn_prototype(std::span<const Pair> pairs, RotorBackend backend,
                          const LearnOptions& options) {
  if (pairs.empty()) throw Error(ErrorCode::EmptyPairSet, "no pairs to learn from");
  const std::size_t d = pairs.front().dim();
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (pairs[i].dim() != d) {
      throw Error(ErrorCode::MixedDimensions,
                  fmt::format("pair {} has dim {}, expected {}", i, pairs[i].dim(), d));
    }
    if (pairs[i].phenomenon() != pairs.front().phenomenon()) {
      throw Error(ErrorCode::InvalidArgument,
                  fmt::format("pair {} has phenomenon '{}', expected '{}'", i,
                              pairs[i].phenomenon(), pairs.front().phenomenon()));
    }
  }

  const std::size_t blocks = (pairs.size() + kReduceBlock - 1) / kReduceBlock;
  std::vector<Vec> partial(blocks);
  parallel_for(blocks, options.workers, [&](std::size_t b) {
    Vec acc(d, 0.0);
    const std::size_t hi = std::min(pairs.size(), (b + 1) * kReduceBlock);
    for (std::size_t i = b * kReduceBlock; i < hi; ++i) {
      vec::axpy(1.0, canonicalize_pair(pairs[i], backend), acc);
    }
    partial[b] = std::move(acc);
  });

  Vec mean(d, 0.0);
  for (const Vec& p : partial) vec::axpy(1.0, p, mean);
  vec::scale(mean, 1.0 / static_cast<double>(pairs.size()));
  mean[0] = 0.0;

  PrototypeMeta meta = options.meta;
  if (meta.phenomenon.empty()) meta.phenomenon = pairs.front().phenomenon();
  if (meta.language.empty()) meta.language = pairs.front().language();
  return Prototype(std::move(mean), pairs.size(), backend, std::move(meta));
}

UnitVector predict(const UnitVector& n_star, const Prototype& p, RotorBackend backend) {
  if (p.backend() != backend) {
    throw Error(ErrorCode::BackendMismatch,
                fmt::format("prototype learned with {}, predicting with {}", to_string(p.backend()),
                            to_string(backend)));
  }
  require_same_dim(n_star.dim(), p.dim(), "predict");
  const Rotor r = Rotor::build(n_star, backend);
  return exp_map(TangentVector::projected(n_star, r.apply_transpose(p.vec())));
}

UnitVector apply_sequence(const UnitVector& n0, std::span<const Prototype> protos,
                          RotorBackend backend) {
  UnitVector n = n0;
  for (const Prototype& p : protos) n = predict(n, p, backend);
  return n;
}

double commutativity_gap(const UnitVector& n0, const Prototype& a, const Prototype& b,
                         RotorBackend backend) {
  const Prototype ab[] = {a, b};
  const Prototype ba[] = {b, a};
  return geodesic_distance(apply_sequence(n0, ab, backend), apply_sequence(n0, ba, backend));
}

}  // namespace rise
