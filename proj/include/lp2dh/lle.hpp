#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace lp2dh {

// K nearest neighbours per sample, self excluded. Column n lists sample n's
// neighbours sorted by (distance, index) ascending.
struct NeighborSet {
  Eigen::MatrixXi indices;    // K x N
  Eigen::MatrixXd distances;  // K x N, Euclidean
};

// Exact Euclidean K-NN over the columns of X, ties broken by smaller index.
NeighborSet knn(const Eigen::MatrixXd& X, int K);

// Constrained least-squares reconstruction weights of x from the K columns
// of Xn, normalized to sum to 1. Singular Gram matrices are conditioned,
// never raised.
Eigen::VectorXd reconstruction_weights(const Eigen::VectorXd& x,
                                       const Eigen::MatrixXd& Xn);

// Sparse N x N affinity with sample n's reconstruction weights in column n,
// so that (B * A).col(n) = sum_k a_nk * b_k.
Eigen::SparseMatrix<double> build_affinity(const Eigen::MatrixXd& weights,
                                           const NeighborSet& neighbors,
                                           Eigen::Index n_samples);

// knn + per-sample weight solves + assembly in one call.
Eigen::SparseMatrix<double> lle_affinity(const Eigen::MatrixXd& X, int K);

}  // namespace lp2dh
