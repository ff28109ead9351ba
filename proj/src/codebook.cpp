#include "lp2dh/codebook.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>

#include "lp2dh/rng.hpp"

namespace lp2dh {

namespace {

// Distinct codes with multiplicities, in deterministic (lexicographic) order.
struct DistinctCodes {
  Eigen::MatrixXd points;  // U x M, rows
  Eigen::VectorXd weights;
};

DistinctCodes collapse(const BinaryCodes& codes) {
  const Eigen::Index M = codes.rows();
  const Eigen::Index N = codes.cols();
  std::map<std::string, int64_t> counts;
  std::string key(static_cast<size_t>(M), '\0');
  for (Eigen::Index n = 0; n < N; ++n) {
    for (Eigen::Index m = 0; m < M; ++m) {
      key[static_cast<size_t>(m)] = static_cast<char>(codes(m, n));
    }
    ++counts[key];
  }
  DistinctCodes out;
  out.points.resize(static_cast<Eigen::Index>(counts.size()), M);
  out.weights.resize(static_cast<Eigen::Index>(counts.size()));
  Eigen::Index u = 0;
  for (const auto& [k, c] : counts) {
    for (Eigen::Index m = 0; m < M; ++m) {
      out.points(u, m) = static_cast<double>(k[static_cast<size_t>(m)]);
    }
    out.weights[u] = static_cast<double>(c);
    ++u;
  }
  return out;
}

// argmin_{c} ||p_u - cent_c||^2 for every row of pts, ties to smaller c.
void assign_rows(const Eigen::MatrixXd& pts, const Eigen::MatrixXd& cents,
                 Eigen::VectorXi& labels, Eigen::VectorXd& best_d2) {
  const Eigen::Index U = pts.rows();
  const Eigen::Index C = cents.rows();
  const Eigen::VectorXd pn = pts.rowwise().squaredNorm();
  const Eigen::VectorXd cn = cents.rowwise().squaredNorm();
  const Eigen::Index block = 4096;
  for (Eigen::Index u0 = 0; u0 < U; u0 += block) {
    const Eigen::Index nb = std::min(block, U - u0);
    const Eigen::MatrixXd dots =
        pts.middleRows(u0, nb) * cents.transpose();  // nb x C
    for (Eigen::Index i = 0; i < nb; ++i) {
      int best = 0;
      double bd = pn[u0 + i] + cn[0] - 2.0 * dots(i, 0);
      for (Eigen::Index c = 1; c < C; ++c) {
        const double d = pn[u0 + i] + cn[c] - 2.0 * dots(i, c);
        if (d < bd) {
          bd = d;
          best = static_cast<int>(c);
        }
      }
      labels[u0 + i] = best;
      best_d2[u0 + i] = std::max(0.0, bd);
    }
  }
}

Eigen::MatrixXd kmeanspp_init(const Eigen::MatrixXd& pts,
                              const Eigen::VectorXd& w, int C, Rng& rng) {
  const Eigen::Index U = pts.rows();
  Eigen::MatrixXd cents(C, pts.cols());
  // first seed: uniform over the multiset = weighted over distinct points
  std::vector<double> prefix(static_cast<size_t>(U));
  double total = 0.0;
  for (Eigen::Index u = 0; u < U; ++u) {
    total += w[u];
    prefix[static_cast<size_t>(u)] = total;
  }
  auto draw = [&](const std::vector<double>& pre, double tot) {
    const double r = rng.uniform01() * tot;
    const auto it = std::upper_bound(pre.begin(), pre.end(), r);
    return static_cast<Eigen::Index>(
        std::min<std::ptrdiff_t>(it - pre.begin(),
                                 static_cast<std::ptrdiff_t>(pre.size()) - 1));
  };
  cents.row(0) = pts.row(draw(prefix, total));

  Eigen::VectorXd d2 =
      (pts.rowwise() - cents.row(0)).rowwise().squaredNorm();
  for (int c = 1; c < C; ++c) {
    total = 0.0;
    for (Eigen::Index u = 0; u < U; ++u) {
      total += w[u] * d2[u];
      prefix[static_cast<size_t>(u)] = total;
    }
    Eigen::Index pick;
    if (total > 0.0) {
      pick = draw(prefix, total);
    } else {
      // all remaining mass sits on chosen centroids; any distinct point works
      pick = static_cast<Eigen::Index>(c % U);
    }
    cents.row(c) = pts.row(pick);
    d2 = d2.cwiseMin(
        (pts.rowwise() - cents.row(c)).rowwise().squaredNorm());
  }
  return cents;
}

}  // namespace

Codebook fit_codebook(const BinaryCodes& codes, int C, uint64_t seed,
                      int scale) {
  if (C < 1) throw std::invalid_argument("fit_codebook: C must be >= 1");
  if (codes.cols() < C) {
    throw std::invalid_argument(
        "fit_codebook: pooled code count (" + std::to_string(codes.cols()) +
        ") must be >= C (" + std::to_string(C) + ")");
  }
  DistinctCodes dc = collapse(codes);
  const Eigen::Index U = dc.points.rows();

  Codebook cb;
  cb.scale = scale;
  cb.stats.requested_C = C;
  const int Ceff = static_cast<int>(std::min<Eigen::Index>(C, U));
  cb.stats.effective_C = Ceff;

  Rng rng(seed);
  Eigen::MatrixXd cents = kmeanspp_init(dc.points, dc.weights, Ceff, rng);

  Eigen::VectorXi labels(U);
  Eigen::VectorXd d2(U);
  const int max_iter = 100;
  const double move_tol = 1e-6;
  int iter = 0;
  for (; iter < max_iter; ++iter) {
    assign_rows(dc.points, cents, labels, d2);
    cb.stats.inertia_trace.push_back(dc.weights.dot(d2));

    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(Ceff, dc.points.cols());
    Eigen::VectorXd mass = Eigen::VectorXd::Zero(Ceff);
    for (Eigen::Index u = 0; u < U; ++u) {
      sums.row(labels[u]) += dc.weights[u] * dc.points.row(u);
      mass[labels[u]] += dc.weights[u];
    }
    // reseed empty clusters from the worst-fit points, farthest first
    Eigen::VectorXd d2_pool = d2;
    for (int c = 0; c < Ceff; ++c) {
      if (mass[c] > 0.0) continue;
      Eigen::Index far = 0;
      d2_pool.maxCoeff(&far);
      sums.row(c) = dc.points.row(far);
      mass[c] = 1.0;
      d2_pool[far] = -1.0;  // do not hand the same point to two clusters
    }
    Eigen::MatrixXd next(Ceff, dc.points.cols());
    for (int c = 0; c < Ceff; ++c) next.row(c) = sums.row(c) / mass[c];

    const double movement =
        (next - cents).rowwise().norm().maxCoeff();
    cents = std::move(next);
    if (movement < move_tol) {
      ++iter;
      break;
    }
  }
  assign_rows(dc.points, cents, labels, d2);
  cb.stats.inertia = dc.weights.dot(d2);
  cb.stats.iterations = iter;
  cb.centroids = std::move(cents);
  return cb;
}

int assign(const Codebook& codebook, const Eigen::VectorXd& code) {
  if (code.size() != codebook.centroids.cols()) {
    throw std::invalid_argument("assign: code length mismatch");
  }
  int best = 0;
  double bd = (codebook.centroids.row(0).transpose() - code).squaredNorm();
  for (Eigen::Index c = 1; c < codebook.centroids.rows(); ++c) {
    const double d = (codebook.centroids.row(c).transpose() - code).squaredNorm();
    if (d < bd) {
      bd = d;
      best = static_cast<int>(c);
    }
  }
  return best;
}

Eigen::VectorXi assign_all(const Codebook& codebook, const BinaryCodes& codes) {
  const Eigen::MatrixXd pts = codes.cast<double>().transpose();  // N x M
  Eigen::VectorXi labels(pts.rows());
  Eigen::VectorXd d2(pts.rows());
  assign_rows(pts, codebook.centroids, labels, d2);
  return labels;
}

Eigen::VectorXd video_histogram(const Codebook& codebook,
                                const BinaryCodes& codes) {
  if (codes.cols() == 0) {
    throw std::invalid_argument("video_histogram: empty code set");
  }
  const Eigen::VectorXi labels = assign_all(codebook, codes);
  Eigen::VectorXd hist = Eigen::VectorXd::Zero(codebook.size());
  for (Eigen::Index i = 0; i < labels.size(); ++i) hist[labels[i]] += 1.0;
  return hist / hist.sum();
}

}  // namespace lp2dh
