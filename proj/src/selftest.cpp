#include "lp2dh/selftest.hpp"

#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "lp2dh/codebook.hpp"
#include "lp2dh/hashing.hpp"
#include "lp2dh/lle.hpp"
#include "lp2dh/pdv.hpp"
#include "lp2dh/rng.hpp"
#include "lp2dh/volume_io.hpp"

namespace lp2dh {

namespace {

Eigen::MatrixXd random_matrix(Eigen::Index r, Eigen::Index c, Rng& rng) {
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index j = 0; j < c; ++j) {
    for (Eigen::Index i = 0; i < r; ++i) m(i, j) = rng.normal();
  }
  return m;
}

Eigen::MatrixXd random_orthonormal(Eigen::Index r, Eigen::Index c, Rng& rng) {
  const Eigen::MatrixXd m = random_matrix(r, c, rng);
  return Eigen::HouseholderQR<Eigen::MatrixXd>(m).householderQ() *
         Eigen::MatrixXd::Identity(r, c);
}

BinaryCodes random_codes(Eigen::Index m, Eigen::Index n, Rng& rng) {
  BinaryCodes B(m, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < m; ++i) {
      B(i, j) = rng.uniform01() < 0.5 ? 0 : 1;
    }
  }
  return B;
}

}  // namespace

int run_selftest(std::ostream& out, bool perturb_gradient) {
  struct Check {
    std::string name;
    std::function<bool()> run;
  };
  std::vector<Check> checks;

  checks.push_back({"pdv-count-formula", [] {
    Rng rng(11);
    for (int rep = 0; rep < 5; ++rep) {
      VolumeDims dims{8 + static_cast<int>(rng.bounded(5)),
                      8 + static_cast<int>(rng.bounded(5)),
                      8 + static_cast<int>(rng.bounded(5))};
      const VideoVolume vol = synthesize_texture(
          {TextureKind::noise, 0, 0, 0, 0}, dims, 100 + rep);
      const auto X = extract_pdvs(vol, 3);
      const int64_t expect = static_cast<int64_t>(dims.t - 2) * (dims.h - 2) *
                             (dims.w - 2);
      if (X.count() != expect || X.dim() != 26) return false;
    }
    return true;
  }});

  checks.push_back({"encode-threshold-at-zero", [] {
    Eigen::MatrixXd W(2, 1);
    W << 1, 0;
    Eigen::MatrixXd X(2, 3);
    X << 0, 3, -1, 0, -5, 9;
    const BinaryCodes B = encode(W, X);
    return B(0, 0) == 1 && B(0, 1) == 1 && B(0, 2) == 0;
  }});

  checks.push_back({"lle-column-sums", [] {
    Rng rng(21);
    const Eigen::MatrixXd X = random_matrix(6, 60, rng);
    const auto A = lle_affinity(X, 4);
    for (Eigen::Index n = 0; n < A.cols(); ++n) {
      double s = 0.0;
      for (Eigen::SparseMatrix<double>::InnerIterator it(A, n); it; ++it) {
        s += it.value();
      }
      if (std::abs(s - 1.0) > 1e-10) return false;
    }
    return true;
  }});

  checks.push_back({"lle-affine-reconstruction", [] {
    Rng rng(31);
    for (int rep = 0; rep < 10; ++rep) {
      const int D = 5, K = 3;
      const Eigen::MatrixXd Xn = random_matrix(D, K, rng);
      Eigen::VectorXd w(K);
      for (int k = 0; k < K; ++k) w[k] = rng.normal();
      w.array() -= (w.sum() - 1.0) / K;  // affine weights
      const Eigen::VectorXd x = Xn * w;
      const Eigen::VectorXd sol = reconstruction_weights(x, Xn);
      if ((x - Xn * sol).norm() > 1e-8) return false;
    }
    return true;
  }});

  checks.push_back({"loss-form-equivalence", [] {
    Rng rng(41);
    for (int rep = 0; rep < 10; ++rep) {
      const int D = 5 + static_cast<int>(rng.bounded(6));
      const int N = 30 + static_cast<int>(rng.bounded(40));
      const int M = 2 + static_cast<int>(rng.bounded(4));
      const Eigen::MatrixXd X = random_matrix(D, N, rng);
      const Eigen::MatrixXd W = random_orthonormal(D, M, rng);
      const BinaryCodes B = random_codes(M, N, rng);
      const auto A = lle_affinity(X, 3);
      HashConfig cfg;
      cfg.M = M;
      const LossTerms e = loss_elementwise(X, B, W, A, cfg);
      const LossTerms m = loss_matrix(X, B, W, A, cfg);
      const double rel = std::abs(e.total - m.total) /
                         std::max(1.0, std::abs(m.total));
      if (rel > 1e-10) return false;
    }
    return true;
  }});

  checks.push_back({"gradient-finite-difference", [perturb_gradient] {
    Rng rng(51);
    const int D = 6, M = 3, N = 40, K = 3;
    for (int rep = 0; rep < 5; ++rep) {
      const Eigen::MatrixXd X = random_matrix(D, N, rng);
      const auto A = lle_affinity(X, K);
      HashConfig cfg;
      cfg.M = M;
      const Eigen::MatrixXd W = random_orthonormal(D, M, rng);
      const BinaryCodes B = encode(W, X);
      const Eigen::MatrixXd Q = compute_Q(X, A, cfg);
      Eigen::MatrixXd G = euclidean_gradient(Q, W, B, X, cfg);
      if (perturb_gradient) G(0, 0) += 1e-3 * std::max(1.0, G.norm());

      const Eigen::MatrixXd XBt = X * B.cast<double>().transpose();
      const Eigen::VectorXd x1 = X.rowwise().sum();
      const double h = 1e-6;
      Eigen::MatrixXd fd(D, M);
      for (int i = 0; i < D; ++i) {
        for (int j = 0; j < M; ++j) {
          Eigen::MatrixXd Wp = W, Wm = W;
          Wp(i, j) += h;
          Wm(i, j) -= h;
          fd(i, j) = (wphase_objective(Q, Wp, XBt, x1, N, cfg) -
                      wphase_objective(Q, Wm, XBt, x1, N, cfg)) /
                     (2.0 * h);
        }
      }
      if ((fd - G).norm() / std::max(1.0, fd.norm()) > 1e-5) return false;
    }
    return true;
  }});

  checks.push_back({"cayley-orthogonality", [] {
    Rng rng(61);
    const int D = 20, M = 5;
    Eigen::MatrixXd W = random_orthonormal(D, M, rng);
    for (int step = 0; step < 25; ++step) {
      const Eigen::MatrixXd G = random_matrix(D, M, rng);
      const auto Wn = cayley_step(W, G, 0.05);
      if (!Wn) return false;
      W = *Wn;
      const double res =
          (W.transpose() * W - Eigen::MatrixXd::Identity(M, M)).norm();
      if (res > 1e-10) return false;
    }
    return true;
  }});

  checks.push_back({"smw-vs-direct-inverse", [] {
    Rng rng(71);
    const int D = 10, M = 3;
    for (int rep = 0; rep < 10; ++rep) {
      const Eigen::MatrixXd W = random_orthonormal(D, M, rng);
      const Eigen::MatrixXd G = random_matrix(D, M, rng);
      const double tau = 0.01 + 0.2 * rng.uniform01();
      const auto fast = cayley_step(W, G, tau);
      if (!fast) return false;
      const Eigen::MatrixXd S = G * W.transpose() - W * G.transpose();
      const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(D, D);
      const Eigen::MatrixXd direct =
          (I + 0.5 * tau * S).lu().solve((I - 0.5 * tau * S) * W);
      if ((*fast - direct).norm() > 1e-9) return false;
    }
    return true;
  }});

  checks.push_back({"kmeans-inertia-monotone", [] {
    Rng rng(81);
    const BinaryCodes codes = random_codes(8, 400, rng);
    const Codebook cb = fit_codebook(codes, 10, 17);
    for (size_t i = 1; i < cb.stats.inertia_trace.size(); ++i) {
      if (cb.stats.inertia_trace[i] >
          cb.stats.inertia_trace[i - 1] + 1e-9) {
        return false;
      }
    }
    return !cb.stats.inertia_trace.empty();
  }});

  int failures = 0;
  out << "LP2DH self-test\n";
  for (const auto& check : checks) {
    bool ok = false;
    try {
      ok = check.run();
    } catch (const std::exception&) {
      ok = false;
    }
    char line[96];
    std::snprintf(line, sizeof(line), "  %-28s %s", check.name.c_str(),
                  ok ? "PASS" : "FAIL");
    out << line << "\n";
    if (!ok) ++failures;
  }
  out << (failures == 0 ? "all checks passed"
                        : std::to_string(failures) + " check(s) failed")
      << "\n";
  return failures;
}

}  // namespace lp2dh
