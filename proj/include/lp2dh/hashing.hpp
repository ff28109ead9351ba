#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace lp2dh {

struct HashConfig {
  int M = 16;             // code length, M <= D
  double lambda1 = 10.0;  // quantization loss weight
  double lambda2 = 1.0;   // bit-balance (entropy) loss weight
  double lambda3 = 1e3;   // variance loss weight
  double theta_rel = 1e-4;  // gradient-norm stop, relative to initial
  int max_outer = 100;      // code/projection alternations
  int inner_steps = 10;     // descent steps per alternation
  int K = 10;               // LLE neighbour count
  uint64_t seed = 42;
};

struct TrainStats {
  double final_loss = 0.0;
  int outer_iterations = 0;
  int accepted_steps = 0;
  double grad_norm = 0.0;
  double initial_grad_norm = 0.0;
  double max_orth_residual = 0.0;  // over all accepted steps
  int monotonicity_violations = 0;
  bool rank_deficient_init = false;
  bool converged = false;
  std::string stop_reason;
  std::vector<double> phase_objectives;  // W-phase objective at each phase end
};

// Learned hashing projection with orthonormal columns, one per scale.
struct HashingModel {
  Eigen::MatrixXd W;  // D x M, W^T W = I
  int scale = 0;      // neighbourhood side P
  HashConfig config;
  TrainStats stats;
};

// Binary code matrix, entries exactly 0 or 1, one code per column.
using BinaryCodes = Eigen::Matrix<uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

// b_mn = 1 iff w_m . x_n >= 0 (the threshold maps 0 to 1).
BinaryCodes encode(const Eigen::MatrixXd& W, const Eigen::MatrixXd& X);

struct LossTerms {
  double L1 = 0.0;  // quantization
  double L2 = 0.0;  // bit balance
  double L3 = 0.0;  // negative bit variance
  double L4 = 0.0;  // locality preservation
  double total = 0.0;
};

// Elementwise evaluation of the four losses and their weighted sum.
LossTerms loss_elementwise(const Eigen::MatrixXd& X, const BinaryCodes& B,
                           const Eigen::MatrixXd& W,
                           const Eigen::SparseMatrix<double>& A,
                           const HashConfig& cfg);

// Matrix-form evaluation of the same objective (independent route, used to
// cross-check the elementwise one).
LossTerms loss_matrix(const Eigen::MatrixXd& X, const BinaryCodes& B,
                      const Eigen::MatrixXd& W,
                      const Eigen::SparseMatrix<double>& A,
                      const HashConfig& cfg);

// Constant quadratic-form matrix of the projection objective:
// Q = X(I-A)(I-A)^T X^T + l1 XX^T + l2 X 1 1^T X^T - l3 (X-Mbar)(X-Mbar)^T.
// Exactly symmetric by construction.
Eigen::MatrixXd compute_Q(const Eigen::MatrixXd& X,
                          const Eigen::SparseMatrix<double>& A,
                          const HashConfig& cfg);

// Euclidean gradient of L(W) = tr(W^T Q W) - 2 l1 tr(B X^T W)
//                            - l2 N tr(1_M^T W^T X 1_N).
Eigen::MatrixXd euclidean_gradient(const Eigen::MatrixXd& Q,
                                   const Eigen::MatrixXd& W,
                                   const BinaryCodes& B,
                                   const Eigen::MatrixXd& X,
                                   const HashConfig& cfg);

// The objective above with B-dependent terms precomputed
// (XBt = X B^T, x1 = X 1_N).
double wphase_objective(const Eigen::MatrixXd& Q, const Eigen::MatrixXd& W,
                        const Eigen::MatrixXd& XBt, const Eigen::VectorXd& x1,
                        Eigen::Index N, const HashConfig& cfg);

// Projection of a Euclidean gradient onto the tangent space at W.
Eigen::MatrixXd riemannian_gradient(const Eigen::MatrixXd& W,
                                    const Eigen::MatrixXd& G);

// Cayley retraction W(tau) = (I + tau/2 S)^{-1} (I - tau/2 S) W with
// S = G W^T - W G^T, evaluated through the Sherman-Morrison-Woodbury
// identity (a 2M x 2M solve). Returns nullopt when the step is too large
// (singular system or orthogonality loss), so the line search can backtrack.
std::optional<Eigen::MatrixXd> cayley_step(const Eigen::MatrixXd& W,
                                           const Eigen::MatrixXd& G,
                                           double tau);

// Alternating optimization of the hashing projection on the Stiefel
// manifold: code updates interleaved with Armijo-backtracked curvilinear
// descent, W initialized from the top-M eigenvectors of XX^T.
HashingModel train_hashing(const Eigen::MatrixXd& X,
                           const Eigen::SparseMatrix<double>& A,
                           const HashConfig& cfg, int scale = 0);

}  // namespace lp2dh
