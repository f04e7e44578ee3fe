#pragma once

// Porting prototypes between embedding spaces through a linear map fitted on
// paired anchor embeddings (ridge least squares, optionally in uncentered PCA
// coordinates on each side). The map is dense; this module is exempt from
// the O(d) memory contract of the geometry core.

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <span>
#include <string>

#include "rise/core.hpp"
#include "rise/eval.hpp"

namespace rise {

struct SpaceMap {
  Eigen::MatrixXd matrix;  // d_tgt × d_src
  std::string source_model_id;
  std::string target_model_id;
  std::size_t n_anchors = 0;
  std::optional<std::size_t> pca_rank;
  double ridge = 0.0;

  std::size_t d_src() const noexcept { return static_cast<std::size_t>(matrix.cols()); }
  std::size_t d_tgt() const noexcept { return static_cast<std::size_t>(matrix.rows()); }
  Vec apply(std::span<const double> x) const;

  friend bool operator==(const SpaceMap& a, const SpaceMap& b) {
    return a.matrix.rows() == b.matrix.rows() && a.matrix.cols() == b.matrix.cols() &&
           a.matrix == b.matrix && a.source_model_id == b.source_model_id &&
           a.target_model_id == b.target_model_id && a.n_anchors == b.n_anchors &&
           a.pca_rank == b.pca_rank && a.ridge == b.ridge;
  }
};

struct FitOptions {
  std::optional<std::size_t> pca_rank;
  double ridge = 0.0;
  std::string source_model_id;
  std::string target_model_id;
};

// Minimizes Σ‖W x_i − y_i‖² + ridge·‖W‖²_F. Throws RankDeficient when ridge
// is 0 and the (reduced) source anchors do not span their space.
SpaceMap fit_map(std::span<const UnitVector> anchors_src, std::span<const UnitVector> anchors_tgt,
                 const FitOptions& options = {});

enum class PortMode {
  tangent,  // map p as a vector, project onto T_{W e1}
  ambient,  // map the point exp_{e1}(p), take log at the mapped pole
};

// Result lives at the target space's e1, re-canonicalized with the
// prototype's own backend. Throws ZeroVector if W·e1 degenerates.
Prototype port_prototype(const Prototype& p, const SpaceMap& map,
                         PortMode mode = PortMode::tangent);

// Ports every source prototype and scores it against the held-out split of
// each target-space dataset.
TransferMatrix cross_model_eval(const std::map<std::string, Prototype>& src_protos,
                                const SpaceMap& map,
                                const std::map<std::string, std::vector<Pair>>& tgt_datasets,
                                const TransferOptions& options, PortMode mode = PortMode::tangent);

}  // namespace rise
