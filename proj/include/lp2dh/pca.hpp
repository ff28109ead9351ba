#pragma once

#include <Eigen/Dense>

namespace lp2dh {

struct PcaBasis {
  Eigen::VectorXd mean;
  Eigen::MatrixXd components;  // retained_dim x F, orthonormal rows
  Eigen::VectorXd explained_variance_ratio;
  bool degenerate = false;  // all-identical training features

  int retained_dim() const { return static_cast<int>(components.rows()); }
};

// Mean-centered eigendecomposition of the sample covariance (via SVD).
// retained_dim is the smallest count reaching the energy fraction, or
// fixed_dim when positive; both are capped at sample count - 1.
PcaBasis fit_pca(const Eigen::MatrixXd& features /* samples x F */,
                 double energy = 0.99, int fixed_dim = 0);

Eigen::VectorXd pca_project(const PcaBasis& basis, const Eigen::VectorXd& x);

}  // namespace lp2dh
