#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>

#include "lp2dh/hashing.hpp"
#include "lp2dh/lle.hpp"
#include "lp2dh/rng.hpp"

using namespace lp2dh;

namespace {

Eigen::MatrixXd random_matrix(Eigen::Index r, Eigen::Index c, Rng& rng) {
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index j = 0; j < c; ++j) {
    for (Eigen::Index i = 0; i < r; ++i) m(i, j) = rng.normal();
  }
  return m;
}

double column_sum(const Eigen::SparseMatrix<double>& A, Eigen::Index n) {
  double s = 0.0;
  for (Eigen::SparseMatrix<double>::InnerIterator it(A, n); it; ++it) {
    s += it.value();
  }
  return s;
}

}  // namespace

TEST_CASE("two samples are each other's neighbour") {
  Eigen::MatrixXd X(2, 2);
  X << 0, 1, 0, 0;
  const NeighborSet nb = knn(X, 1);
  CHECK(nb.indices(0, 0) == 1);
  CHECK(nb.indices(0, 1) == 0);
  CHECK(nb.distances(0, 0) == doctest::Approx(1.0));
}

TEST_CASE("collinear points pick the nearest") {
  Eigen::MatrixXd X(1, 3);
  X << 0, 1, 3;
  const NeighborSet nb = knn(X, 1);
  CHECK(nb.indices(0, 0) == 1);
  CHECK(nb.indices(0, 1) == 0);
  CHECK(nb.indices(0, 2) == 1);
}

TEST_CASE("ties resolve to the smaller index") {
  Eigen::MatrixXd X(2, 4);
  // duplicated points at indices 1 and 2, both at distance 1 from sample 0
  X << 0, 1, 1, 5, 0, 0, 0, 0;
  const NeighborSet nb = knn(X, 2);
  CHECK(nb.indices(0, 0) == 1);
  CHECK(nb.indices(1, 0) == 2);
  CHECK(nb.distances(0, 0) == nb.distances(1, 0));
}

TEST_CASE("knn rejects K >= N") {
  Eigen::MatrixXd X(2, 3);
  X.setRandom();
  CHECK_THROWS_AS(knn(X, 3), std::invalid_argument);
  CHECK_THROWS_AS(knn(X, 0), std::invalid_argument);
}

TEST_CASE("knn neighbours are sorted and exclude self") {
  Rng rng(5);
  const Eigen::MatrixXd X = random_matrix(4, 40, rng);
  const NeighborSet nb = knn(X, 5);
  for (Eigen::Index n = 0; n < X.cols(); ++n) {
    for (int k = 0; k < 5; ++k) {
      CHECK(nb.indices(k, n) != n);
      const double direct = (X.col(nb.indices(k, n)) - X.col(n)).norm();
      CHECK(nb.distances(k, n) == doctest::Approx(direct).epsilon(1e-9));
      if (k > 0) CHECK(nb.distances(k, n) >= nb.distances(k - 1, n));
    }
  }
}

TEST_CASE("K=1 weight is exactly 1") {
  Eigen::VectorXd x(3);
  x << 1, 2, 3;
  Eigen::MatrixXd Xn(3, 1);
  Xn << 0, 0, 1;
  const Eigen::VectorXd w = reconstruction_weights(x, Xn);
  CHECK(w.size() == 1);
  CHECK(w[0] == 1.0);
}

TEST_CASE("symmetric neighbours split the weight evenly") {
  Eigen::VectorXd x(2);
  x << 0, 0;
  Eigen::MatrixXd Xn(2, 2);
  Xn << 1, -1, 0, 0;
  const Eigen::VectorXd w = reconstruction_weights(x, Xn);
  // hand-solved 2x2 constrained system gives (0.5, 0.5)
  CHECK(w[0] == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(w[1] == doctest::Approx(0.5).epsilon(1e-10));
}

TEST_CASE("midpoint reconstructs with zero residual") {
  Eigen::VectorXd x(2);
  x << 0.5, 0;
  Eigen::MatrixXd Xn(2, 2);
  Xn << 0, 1, 0, 0;
  const Eigen::VectorXd w = reconstruction_weights(x, Xn);

  // brute-force oracle: scan the constraint line for the least residual
  double best_a = 0.0, best_r = 1e300;
  for (int i = 0; i <= 20000; ++i) {
    const double a = -1.0 + 3.0 * i / 20000.0;
    const double r = (x - a * Xn.col(0) - (1.0 - a) * Xn.col(1)).squaredNorm();
    if (r < best_r) {
      best_r = r;
      best_a = a;
    }
  }
  CHECK(w[0] == doctest::Approx(best_a).epsilon(1e-3));
  CHECK(w[0] == doctest::Approx(0.5).epsilon(1e-9));
  CHECK((x - Xn * w).norm() < 1e-8);
}

TEST_CASE("duplicate neighbours stay bounded and sum to 1") {
  Eigen::VectorXd x(2);
  x << 1, 1;
  Eigen::MatrixXd Xn(2, 3);
  Xn << 2, 2, 0, 1, 1, 0;  // first two columns identical
  const Eigen::VectorXd w = reconstruction_weights(x, Xn);
  CHECK(w.sum() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(w.cwiseAbs().maxCoeff() < 1e3);
  // all-identical neighbours equal to x itself
  Eigen::MatrixXd Xd = x.replicate(1, 4);
  const Eigen::VectorXd u = reconstruction_weights(x, Xd);
  for (int k = 0; k < 4; ++k) CHECK(u[k] == doctest::Approx(0.25));
}

TEST_CASE("planted affine-hull points reconstruct exactly") {
  Rng rng(17);
  for (int rep = 0; rep < 20; ++rep) {
    const int D = 6, K = 4;
    const Eigen::MatrixXd Xn = random_matrix(D, K, rng);
    Eigen::VectorXd w(K);
    for (int k = 0; k < K; ++k) w[k] = rng.normal();
    w.array() -= (w.sum() - 1.0) / K;
    const Eigen::VectorXd x = Xn * w;
    const Eigen::VectorXd sol = reconstruction_weights(x, Xn);
    CHECK(sol.sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK((x - Xn * sol).norm() < 1e-8);
  }
}

TEST_CASE("affinity for N=2, K=1 swaps the samples") {
  Eigen::MatrixXd X(2, 2);
  X << 0, 1, 0, 0;
  const Eigen::SparseMatrix<double> A = lle_affinity(X, 1);
  const Eigen::MatrixXd Ad = Eigen::MatrixXd(A);
  Eigen::MatrixXd expect(2, 2);
  expect << 0, 1, 1, 0;
  CHECK(Ad == expect);
}

TEST_CASE("affinity columns sum to 1 and diagonal is zero") {
  Rng rng(23);
  const Eigen::MatrixXd X = random_matrix(5, 50, rng);
  const Eigen::SparseMatrix<double> A = lle_affinity(X, 6);
  for (Eigen::Index n = 0; n < 50; ++n) {
    CHECK(column_sum(A, n) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(Eigen::MatrixXd(A)(n, n) == 0.0);
    int nnz = 0;
    for (Eigen::SparseMatrix<double>::InnerIterator it(A, n); it; ++it) ++nnz;
    CHECK(nnz == 6);
  }
}

TEST_CASE("matrix locality loss matches the elementwise sum") {
  Rng rng(31);
  const Eigen::MatrixXd X = random_matrix(3, 6, rng);
  const Eigen::SparseMatrix<double> A = lle_affinity(X, 2);
  BinaryCodes B(4, 6);
  for (Eigen::Index n = 0; n < 6; ++n) {
    for (Eigen::Index m = 0; m < 4; ++m) {
      B(m, n) = rng.uniform01() < 0.5 ? 0 : 1;
    }
  }
  const Eigen::MatrixXd Bd = B.cast<double>();
  const double matrix_form = (Bd - Bd * A).squaredNorm();

  double elementwise = 0.0;
  const Eigen::MatrixXd Ad = Eigen::MatrixXd(A);
  for (Eigen::Index n = 0; n < 6; ++n) {
    Eigen::VectorXd recon = Eigen::VectorXd::Zero(4);
    for (Eigen::Index k = 0; k < 6; ++k) recon += Ad(k, n) * Bd.col(k);
    elementwise += (Bd.col(n) - recon).squaredNorm();
  }
  CHECK(std::abs(matrix_form - elementwise) < 1e-12);
}

TEST_CASE("locality loss is invariant to consistent permutation") {
  Rng rng(37);
  const int N = 12, D = 4, M = 3, K = 3;
  const Eigen::MatrixXd X = random_matrix(D, N, rng);
  const Eigen::SparseMatrix<double> A = lle_affinity(X, K);
  BinaryCodes B(M, N);
  for (Eigen::Index n = 0; n < N; ++n) {
    for (Eigen::Index m = 0; m < M; ++m) {
      B(m, n) = rng.uniform01() < 0.5 ? 0 : 1;
    }
  }
  HashConfig cfg;
  cfg.M = M;
  const Eigen::MatrixXd W = Eigen::MatrixXd::Identity(D, M);
  const double L4 = loss_elementwise(X, B, W, A, cfg).L4;

  // permute samples and the affinity rows/columns consistently
  std::vector<int> perm(N);
  for (int i = 0; i < N; ++i) perm[i] = (i * 5 + 3) % N;
  Eigen::MatrixXd Xp(D, N);
  BinaryCodes Bp(M, N);
  const Eigen::MatrixXd Ad = Eigen::MatrixXd(A);
  Eigen::MatrixXd Apd(N, N);
  for (int i = 0; i < N; ++i) {
    Xp.col(perm[i]) = X.col(i);
    Bp.col(perm[i]) = B.col(i);
    for (int j = 0; j < N; ++j) Apd(perm[i], perm[j]) = Ad(i, j);
  }
  const Eigen::SparseMatrix<double> Ap = Apd.sparseView();
  const double L4p = loss_elementwise(Xp, Bp, W, Ap, cfg).L4;
  CHECK(L4 == doctest::Approx(L4p).epsilon(1e-12));
}
