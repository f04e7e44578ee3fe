#include "rise/cross_model.hpp"

#include <fmt/format.h>

#include "rise/error.hpp"

namespace rise {

namespace {

Eigen::MatrixXd stack_columns(std::span<const UnitVector> vs) {
  const auto d = static_cast<Eigen::Index>(vs.front().dim());
  Eigen::MatrixXd m(d, static_cast<Eigen::Index>(vs.size()));
  for (std::size_t i = 0; i < vs.size(); ++i) {
    require_same_dim(vs.front().dim(), vs[i].dim(), "anchor");
    m.col(static_cast<Eigen::Index>(i)) = Eigen::Map<const Eigen::VectorXd>(
        vs[i].coords().data(), d);
  }
  return m;
}

// Leading `rank` left singular vectors (uncentered PCA basis).
Eigen::MatrixXd principal_basis(const Eigen::MatrixXd& x, Eigen::Index rank) {
  Eigen::BDCSVD<Eigen::MatrixXd> svd(x, Eigen::ComputeThinU);
  if (svd.matrixU().cols() < rank) {
    throw Error(ErrorCode::RankDeficient,
                fmt::format("pca rank {} exceeds available rank {}", rank, svd.matrixU().cols()));
  }
  return svd.matrixU().leftCols(rank);
}

}  // namespace

Vec SpaceMap::apply(std::span<const double> x) const {
  require_same_dim(d_src(), x.size(), "space map input");
  const Eigen::VectorXd y =
      matrix * Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
  return Vec(y.data(), y.data() + y.size());
}

SpaceMap fit_map(std::span<const UnitVector> anchors_src, std::span<const UnitVector> anchors_tgt,
                 const FitOptions& options) {
  if (anchors_src.size() != anchors_tgt.size()) {
    throw Error(ErrorCode::InvalidArgument,
                fmt::format("anchor counts differ: {} vs {}", anchors_src.size(),
                            anchors_tgt.size()));
  }
  if (anchors_src.empty()) throw Error(ErrorCode::RankDeficient, "no anchors");
  if (!(options.ridge >= 0.0)) throw Error(ErrorCode::InvalidArgument, "ridge must be >= 0");
  if (anchors_src.size() < 2 && options.ridge == 0.0) {
    throw Error(ErrorCode::RankDeficient, "at least two anchors are required without ridge");
  }

  const Eigen::MatrixXd x = stack_columns(anchors_src);
  const Eigen::MatrixXd y = stack_columns(anchors_tgt);
  const Eigen::Index d_src = x.rows();
  const Eigen::Index d_tgt = y.rows();

  Eigen::MatrixXd us, ut;
  Eigen::MatrixXd xr = x;
  Eigen::MatrixXd yr = y;
  if (options.pca_rank) {
    const auto r = static_cast<Eigen::Index>(*options.pca_rank);
    if (r < 1 || r > d_src || r > d_tgt) {
      throw Error(ErrorCode::InvalidArgument,
                  fmt::format("pca rank {} outside [1, min(d_src, d_tgt)]", r));
    }
    us = principal_basis(x, r);
    ut = principal_basis(y, r);
    xr = us.transpose() * x;
    yr = ut.transpose() * y;
  }

  // Solve A·xr ≈ yr as the stacked least-squares system xrᵀ Aᵀ = yrᵀ.
  const Eigen::Index n = xr.cols();
  const Eigen::Index rs = xr.rows();
  Eigen::MatrixXd lhs = xr.transpose();
  Eigen::MatrixXd rhs = yr.transpose();
  if (options.ridge > 0.0) {
    lhs.conservativeResize(n + rs, rs);
    lhs.bottomRows(rs) = std::sqrt(options.ridge) * Eigen::MatrixXd::Identity(rs, rs);
    rhs.conservativeResize(n + rs, rhs.cols());
    rhs.bottomRows(rs).setZero();
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(lhs);
  qr.setThreshold(1e-10);
  if (qr.rank() < rs) {
    throw Error(ErrorCode::RankDeficient,
                fmt::format("anchors span rank {} of {} source dimensions", qr.rank(), rs));
  }
  const Eigen::MatrixXd a = qr.solve(rhs).transpose();

  SpaceMap map;
  map.matrix = options.pca_rank ? Eigen::MatrixXd(ut * a * us.transpose()) : a;
  if (!map.matrix.allFinite()) throw Error(ErrorCode::RankDeficient, "non-finite space map");
  map.source_model_id = options.source_model_id;
  map.target_model_id = options.target_model_id;
  map.n_anchors = anchors_src.size();
  map.pca_rank = options.pca_rank;
  map.ridge = options.ridge;
  return map;
}

Prototype port_prototype(const Prototype& p, const SpaceMap& map, PortMode mode) {
  require_same_dim(p.dim(), map.d_src(), "port_prototype");
  const UnitVector e1 = UnitVector::basis(p.dim());
  const UnitVector pole = normalize(map.apply(e1.coords()));

  TangentVector mapped = TangentVector::zero(pole);
  if (mode == PortMode::tangent) {
    mapped = TangentVector::projected(pole, map.apply(p.vec()));
  } else {
    const UnitVector point = exp_map(TangentVector(e1, p.values()));
    mapped = log_map(pole, normalize(map.apply(point.coords())));
  }
  Vec canon = Rotor::build(pole, p.backend()).apply(mapped.vec());
  canon[0] = 0.0;

  PrototypeMeta meta = p.meta();
  meta.model_id = map.target_model_id;
  meta.source_magnitude = p.magnitude();
  meta.mapped_magnitude = vec::norm(canon);
  return Prototype(std::move(canon), p.pair_count(), p.backend(), std::move(meta));
}

TransferMatrix cross_model_eval(const std::map<std::string, Prototype>& src_protos,
                                const SpaceMap& map,
                                const std::map<std::string, std::vector<Pair>>& tgt_datasets,
                                const TransferOptions& options, PortMode mode) {
  std::map<std::string, Prototype> ported;
  for (const auto& [lang, p] : src_protos) ported.emplace(lang, port_prototype(p, map, mode));
  return score_matrix(ported, tgt_datasets, options);
}

}  // namespace rise
