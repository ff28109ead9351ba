#include "lp2dh/lle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace lp2dh {

NeighborSet knn(const Eigen::MatrixXd& X, int K) {
  const Eigen::Index N = X.cols();
  if (K < 1) throw std::invalid_argument("knn: K must be >= 1");
  if (K >= N) {
    throw std::invalid_argument("knn: K (" + std::to_string(K) +
                                ") must be smaller than sample count (" +
                                std::to_string(N) + ")");
  }
  NeighborSet out;
  out.indices.resize(K, N);
  out.distances.resize(K, N);

  const Eigen::VectorXd sq_norms = X.colwise().squaredNorm();
  const Eigen::Index block = 256;
  std::vector<std::pair<double, Eigen::Index>> cand(static_cast<size_t>(N));
  for (Eigen::Index q0 = 0; q0 < N; q0 += block) {
    const Eigen::Index nb = std::min(block, N - q0);
    // squared distances via the Gram trick, one GEMM per query block
    const Eigen::MatrixXd dots =
        X.middleCols(q0, nb).transpose() * X;  // nb x N
    for (Eigen::Index qi = 0; qi < nb; ++qi) {
      const Eigen::Index q = q0 + qi;
      size_t m = 0;
      for (Eigen::Index j = 0; j < N; ++j) {
        if (j == q) continue;
        const double d2 =
            std::max(0.0, sq_norms[q] + sq_norms[j] - 2.0 * dots(qi, j));
        cand[m++] = {d2, j};
      }
      auto cmp = [](const std::pair<double, Eigen::Index>& a,
                    const std::pair<double, Eigen::Index>& b) {
        return a.first != b.first ? a.first < b.first : a.second < b.second;
      };
      std::nth_element(cand.begin(), cand.begin() + (K - 1),
                       cand.begin() + static_cast<long>(m), cmp);
      std::sort(cand.begin(), cand.begin() + K, cmp);
      for (int k = 0; k < K; ++k) {
        out.indices(k, q) = static_cast<int>(cand[static_cast<size_t>(k)].second);
        out.distances(k, q) = std::sqrt(cand[static_cast<size_t>(k)].first);
      }
    }
  }
  return out;
}

Eigen::VectorXd reconstruction_weights(const Eigen::VectorXd& x,
                                       const Eigen::MatrixXd& Xn) {
  const Eigen::Index K = Xn.cols();
  if (Xn.rows() != x.size()) {
    throw std::invalid_argument("reconstruction_weights: dimension mismatch");
  }
  // G = (x 1^T - Xn)^T (x 1^T - Xn)
  Eigen::MatrixXd C = (-Xn).colwise() + x;  // D x K, columns x - x_k
  Eigen::MatrixXd G = C.transpose() * C;
  const double trace = G.trace();
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(K);
  if (!(trace > 0.0)) {
    // all neighbours coincide with x; any weights are optimal
    return ones / static_cast<double>(K);
  }

  // Conditioning ladder: a vanishing ridge keeps exact affine reconstruction
  // exact; the heavier ridge only engages when the light solve degenerates
  // (K > D, duplicated neighbours).
  auto solve_with_ridge = [&](double eps) -> Eigen::VectorXd {
    Eigen::MatrixXd Gr = G;
    Gr.diagonal().array() += eps * trace / static_cast<double>(K);
    return Gr.ldlt().solve(ones);
  };
  Eigen::VectorXd w = solve_with_ridge(1e-12);
  double s = w.sum();
  const bool unusable = !w.allFinite() || std::abs(s) < 1e-12 ||
                        (w / s).cwiseAbs().maxCoeff() > 1e6;
  if (unusable) {
    w = solve_with_ridge(1e-3);
    s = w.sum();
    if (!w.allFinite() || s == 0.0) return ones / static_cast<double>(K);
  }
  return w / s;
}

Eigen::SparseMatrix<double> build_affinity(const Eigen::MatrixXd& weights,
                                           const NeighborSet& neighbors,
                                           Eigen::Index n_samples) {
  const Eigen::Index K = neighbors.indices.rows();
  const Eigen::Index N = neighbors.indices.cols();
  if (weights.rows() != K || weights.cols() != N) {
    throw std::invalid_argument("build_affinity: weights/neighbors mismatch");
  }
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<size_t>(K) * static_cast<size_t>(N));
  for (Eigen::Index n = 0; n < N; ++n) {
    for (Eigen::Index k = 0; k < K; ++k) {
      trips.emplace_back(neighbors.indices(k, n), n, weights(k, n));
    }
  }
  Eigen::SparseMatrix<double> A(n_samples, n_samples);
  A.setFromTriplets(trips.begin(), trips.end());
  A.makeCompressed();
  return A;
}

Eigen::SparseMatrix<double> lle_affinity(const Eigen::MatrixXd& X, int K) {
  const NeighborSet nbrs = knn(X, K);
  const Eigen::Index N = X.cols();
  Eigen::MatrixXd weights(K, N);
  Eigen::MatrixXd Xn(X.rows(), K);
  for (Eigen::Index n = 0; n < N; ++n) {
    for (int k = 0; k < K; ++k) Xn.col(k) = X.col(nbrs.indices(k, n));
    weights.col(n) = reconstruction_weights(X.col(n), Xn);
  }
  return build_affinity(weights, nbrs, N);
}

}  // namespace lp2dh
