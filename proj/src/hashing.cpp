#include "lp2dh/hashing.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lp2dh {

namespace {

Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& M) {
  return 0.5 * (M + M.transpose());
}

// Canonical eigenvector signs: the entry of largest magnitude is positive.
void canonicalize_signs(Eigen::MatrixXd& W) {
  for (Eigen::Index c = 0; c < W.cols(); ++c) {
    Eigen::Index imax = 0;
    W.col(c).cwiseAbs().maxCoeff(&imax);
    if (W(imax, c) < 0.0) W.col(c) = -W.col(c);
  }
}

double orth_residual(const Eigen::MatrixXd& W) {
  const Eigen::Index M = W.cols();
  return (W.transpose() * W - Eigen::MatrixXd::Identity(M, M)).norm();
}

}  // namespace

BinaryCodes encode(const Eigen::MatrixXd& W, const Eigen::MatrixXd& X) {
  if (W.rows() != X.rows()) {
    throw std::invalid_argument("encode: projection/PDV dimension mismatch");
  }
  const Eigen::MatrixXd proj = W.transpose() * X;
  BinaryCodes B(proj.rows(), proj.cols());
  for (Eigen::Index n = 0; n < proj.cols(); ++n) {
    for (Eigen::Index m = 0; m < proj.rows(); ++m) {
      B(m, n) = proj(m, n) >= 0.0 ? 1 : 0;
    }
  }
  return B;
}

LossTerms loss_elementwise(const Eigen::MatrixXd& X, const BinaryCodes& B,
                           const Eigen::MatrixXd& W,
                           const Eigen::SparseMatrix<double>& A,
                           const HashConfig& cfg) {
  const Eigen::Index M = B.rows();
  const Eigen::Index N = B.cols();
  LossTerms out;

  // L1: per-entry quantization residual
  for (Eigen::Index n = 0; n < N; ++n) {
    for (Eigen::Index m = 0; m < M; ++m) {
      const double r = static_cast<double>(B(m, n)) - W.col(m).dot(X.col(n));
      out.L1 += r * r;
    }
  }

  // L2: squared deviation of each bit's sum from N/2
  for (Eigen::Index m = 0; m < M; ++m) {
    double s = 0.0;
    for (Eigen::Index n = 0; n < N; ++n) {
      s += static_cast<double>(B(m, n)) - 0.5;
    }
    out.L2 += s * s;
  }

  // L3: negative bit-wise scatter around the bit means
  Eigen::VectorXd mu = Eigen::VectorXd::Zero(M);
  for (Eigen::Index n = 0; n < N; ++n) {
    for (Eigen::Index m = 0; m < M; ++m) mu[m] += B(m, n);
  }
  mu /= static_cast<double>(N);
  for (Eigen::Index n = 0; n < N; ++n) {
    for (Eigen::Index m = 0; m < M; ++m) {
      const double d = static_cast<double>(B(m, n)) - mu[m];
      out.L3 -= d * d;
    }
  }

  // L4: reconstruction residual of each code from its neighbours' codes
  Eigen::VectorXd recon(M);
  for (Eigen::Index n = 0; n < N; ++n) {
    recon.setZero();
    for (Eigen::SparseMatrix<double>::InnerIterator it(A, n); it; ++it) {
      const double w = it.value();
      const Eigen::Index k = it.row();
      for (Eigen::Index m = 0; m < M; ++m) {
        recon[m] += w * static_cast<double>(B(m, k));
      }
    }
    for (Eigen::Index m = 0; m < M; ++m) {
      const double d = static_cast<double>(B(m, n)) - recon[m];
      out.L4 += d * d;
    }
  }

  out.total = cfg.lambda1 * out.L1 + cfg.lambda2 * out.L2 +
              cfg.lambda3 * out.L3 + out.L4;
  return out;
}

LossTerms loss_matrix(const Eigen::MatrixXd& X, const BinaryCodes& B,
                      const Eigen::MatrixXd& W,
                      const Eigen::SparseMatrix<double>& A,
                      const HashConfig& cfg) {
  const Eigen::Index N = B.cols();
  const Eigen::MatrixXd Bd = B.cast<double>();
  LossTerms out;
  out.L1 = (Bd - W.transpose() * X).squaredNorm();
  out.L2 = ((Bd.array() - 0.5).matrix() * Eigen::VectorXd::Ones(N)).squaredNorm();
  const Eigen::VectorXd u = Bd.rowwise().mean();
  out.L3 = -(Bd.colwise() - u).squaredNorm();
  out.L4 = (Bd - Bd * A).squaredNorm();
  out.total = cfg.lambda1 * out.L1 + cfg.lambda2 * out.L2 +
              cfg.lambda3 * out.L3 + out.L4;
  return out;
}

Eigen::MatrixXd compute_Q(const Eigen::MatrixXd& X,
                          const Eigen::SparseMatrix<double>& A,
                          const HashConfig& cfg) {
  const Eigen::Index N = X.cols();
  if (A.rows() != N || A.cols() != N) {
    throw std::invalid_argument("compute_Q: affinity size mismatch");
  }
  const Eigen::MatrixXd E = X - X * A;  // X (I - A)
  const Eigen::VectorXd x1 = X.rowwise().sum();
  const Eigen::VectorXd mean = x1 / static_cast<double>(N);
  const Eigen::MatrixXd Xc = X.colwise() - mean;  // X - Mbar
  Eigen::MatrixXd Q = E * E.transpose();
  Q += cfg.lambda1 * (X * X.transpose());
  Q += cfg.lambda2 * (x1 * x1.transpose());
  Q -= cfg.lambda3 * (Xc * Xc.transpose());
  return symmetrize(Q);
}

Eigen::MatrixXd euclidean_gradient(const Eigen::MatrixXd& Q,
                                   const Eigen::MatrixXd& W,
                                   const BinaryCodes& B,
                                   const Eigen::MatrixXd& X,
                                   const HashConfig& cfg) {
  const Eigen::Index N = X.cols();
  const Eigen::MatrixXd XBt = X * B.cast<double>().transpose();
  const Eigen::VectorXd x1 = X.rowwise().sum();
  Eigen::MatrixXd G = 2.0 * (Q * W);
  G -= 2.0 * cfg.lambda1 * XBt;
  G -= (cfg.lambda2 * static_cast<double>(N)) *
       (x1 * Eigen::RowVectorXd::Ones(W.cols()));
  return G;
}

double wphase_objective(const Eigen::MatrixXd& Q, const Eigen::MatrixXd& W,
                        const Eigen::MatrixXd& XBt, const Eigen::VectorXd& x1,
                        Eigen::Index N, const HashConfig& cfg) {
  double obj = (W.cwiseProduct(Q * W)).sum();
  obj -= 2.0 * cfg.lambda1 * W.cwiseProduct(XBt).sum();
  obj -= cfg.lambda2 * static_cast<double>(N) * (W.transpose() * x1).sum();
  return obj;
}

Eigen::MatrixXd riemannian_gradient(const Eigen::MatrixXd& W,
                                    const Eigen::MatrixXd& G) {
  return G - W * symmetrize(W.transpose() * G);
}

std::optional<Eigen::MatrixXd> cayley_step(const Eigen::MatrixXd& W,
                                           const Eigen::MatrixXd& G,
                                           double tau) {
  const Eigen::Index M = W.cols();
  if (tau == 0.0) return W;
  // S = G W^T - W G^T = U V^T with U = [G W], V = [W -G]
  Eigen::MatrixXd U(W.rows(), 2 * M);
  U.leftCols(M) = G;
  U.rightCols(M) = W;
  Eigen::MatrixXd V(W.rows(), 2 * M);
  V.leftCols(M) = W;
  V.rightCols(M) = -G;

  Eigen::MatrixXd sys = Eigen::MatrixXd::Identity(2 * M, 2 * M);
  sys.noalias() += (0.5 * tau) * (V.transpose() * U);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(sys);
  if (!lu.isInvertible()) return std::nullopt;
  const Eigen::MatrixXd Y = lu.solve(V.transpose() * W);
  Eigen::MatrixXd Wnext = W - tau * (U * Y);
  if (!Wnext.allFinite() || orth_residual(Wnext) >= 1e-8) return std::nullopt;
  return Wnext;
}

HashingModel train_hashing(const Eigen::MatrixXd& X,
                           const Eigen::SparseMatrix<double>& A,
                           const HashConfig& cfg, int scale) {
  const Eigen::Index D = X.rows();
  const Eigen::Index N = X.cols();
  const int M = cfg.M;
  if (M < 1 || M > D) {
    throw std::invalid_argument("train_hashing: need 1 <= M <= D");
  }
  if (N <= cfg.K) {
    throw std::invalid_argument("train_hashing: need more samples than K");
  }

  HashingModel model;
  model.scale = scale;
  model.config = cfg;
  TrainStats& st = model.stats;

  // init: top-M eigenvectors of XX^T; a rank-deficient spectrum still yields
  // an orthonormal completion from the full eigenbasis
  const Eigen::MatrixXd XXt = symmetrize(X * X.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(XXt);
  if (eig.info() != Eigen::Success) {
    throw std::runtime_error("train_hashing: eigendecomposition failed");
  }
  Eigen::MatrixXd W(D, M);
  for (int m = 0; m < M; ++m) {
    W.col(m) = eig.eigenvectors().col(D - 1 - m);  // descending eigenvalues
  }
  canonicalize_signs(W);
  const double eig_max = std::max(std::abs(eig.eigenvalues()[D - 1]), 1.0);
  st.rank_deficient_init =
      eig.eigenvalues()[D - M] <= 1e-12 * eig_max;

  const Eigen::MatrixXd Q = compute_Q(X, A, cfg);  // independent of B
  const Eigen::VectorXd x1 = X.rowwise().sum();

  const double armijo_c = 1e-4;
  const double tau_min = 1e-10;
  const double tau_max = 1e2;

  BinaryCodes B;
  Eigen::MatrixXd XBt;
  double initial_gnorm = -1.0;
  bool converged = false;

  for (int outer = 0; outer < cfg.max_outer; ++outer) {
    BinaryCodes Bnew = encode(W, X);
    const bool b_changed = (outer == 0) || (Bnew != B);
    if (b_changed) {
      B = std::move(Bnew);
      XBt = X * B.cast<double>().transpose();
    }
    st.outer_iterations = outer + 1;

    double obj = wphase_objective(Q, W, XBt, x1, N, cfg);
    int accepted_this_phase = 0;
    bool have_prev = false;
    Eigen::MatrixXd prev_W, prev_G;
    double tau_next = 0.0;

    for (int inner = 0; inner < cfg.inner_steps; ++inner) {
      Eigen::MatrixXd G = 2.0 * (Q * W);
      G.noalias() -= (2.0 * cfg.lambda1) * XBt;
      G.noalias() -= (cfg.lambda2 * static_cast<double>(N)) *
                     (x1 * Eigen::RowVectorXd::Ones(M));

      const double gnorm = riemannian_gradient(W, G).norm();
      if (initial_gnorm < 0.0) {
        initial_gnorm = gnorm;
        st.initial_grad_norm = gnorm;
      }
      st.grad_norm = gnorm;
      if (gnorm <= cfg.theta_rel * initial_gnorm) {
        converged = true;
        break;
      }

      // descent slope along the Cayley curve: f'(0) = -0.5 ||S||_F^2
      const Eigen::MatrixXd GtW = G.transpose() * W;
      const double s_norm2 =
          2.0 * G.squaredNorm() - 2.0 * (GtW * GtW).trace();
      if (s_norm2 <= 0.0) break;
      const double slope = -0.5 * s_norm2;

      // Barzilai-Borwein trial step, Armijo backtracking
      double tau;
      if (have_prev) {
        const Eigen::MatrixXd s_mat = W - prev_W;
        const Eigen::MatrixXd y_mat = G - prev_G;
        const double sy = s_mat.cwiseProduct(y_mat).sum();
        tau = sy != 0.0 ? std::abs(s_mat.squaredNorm() / sy) : tau_next;
      } else {
        tau = 1.0 / (std::sqrt(s_norm2) + 1.0);
      }
      tau = std::clamp(tau, tau_min, tau_max);

      bool accepted = false;
      Eigen::MatrixXd Wnext;
      double obj_next = 0.0;
      for (int bt = 0; bt < 60 && tau >= tau_min; ++bt) {
        const auto trial = cayley_step(W, G, tau);
        if (trial) {
          obj_next = wphase_objective(Q, *trial, XBt, x1, N, cfg);
          if (obj_next <= obj + armijo_c * tau * slope) {
            Wnext = *trial;
            accepted = true;
            break;
          }
        }
        tau *= 0.5;
      }
      if (!accepted) break;  // line search stalled; next code update may help

      if (obj_next > obj) ++st.monotonicity_violations;
      prev_W = W;
      prev_G = G;
      have_prev = true;
      tau_next = tau;
      W = Wnext;
      obj = obj_next;
      ++accepted_this_phase;
      ++st.accepted_steps;
      st.max_orth_residual = std::max(st.max_orth_residual, orth_residual(W));
    }

    st.phase_objectives.push_back(obj);
    if (converged) {
      st.stop_reason = "gradient_converged";
      break;
    }
    if (outer > 0 && !b_changed && accepted_this_phase == 0) {
      st.stop_reason = "fixed_point";
      break;
    }
  }
  if (st.stop_reason.empty()) st.stop_reason = "max_outer";
  st.converged = converged;

  B = encode(W, X);
  st.final_loss = loss_elementwise(X, B, W, A, cfg).total;
  model.W = std::move(W);
  return model;
}

}  // namespace lp2dh
