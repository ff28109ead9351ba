#include "lp2dh/pca.hpp"

#include <stdexcept>

namespace lp2dh {

PcaBasis fit_pca(const Eigen::MatrixXd& features, double energy,
                 int fixed_dim) {
  const Eigen::Index n = features.rows();
  const Eigen::Index F = features.cols();
  if (n < 2) throw std::invalid_argument("fit_pca: need >= 2 training features");
  if (fixed_dim <= 0 && (energy <= 0.0 || energy > 1.0)) {
    throw std::invalid_argument("fit_pca: energy must lie in (0, 1]");
  }

  PcaBasis basis;
  basis.mean = features.colwise().mean();
  const Eigen::MatrixXd centered = features.rowwise() - basis.mean.transpose();

  Eigen::BDCSVD<Eigen::MatrixXd> svd(centered,
                                     Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd sv = svd.singularValues();
  const double total_var = sv.squaredNorm();
  const Eigen::Index max_dim = std::min<Eigen::Index>(n - 1, F);

  Eigen::Index retained;
  if (total_var <= 0.0) {
    basis.degenerate = true;
    retained = 1;
  } else if (fixed_dim > 0) {
    retained = std::min<Eigen::Index>(fixed_dim, max_dim);
  } else {
    const double rank_tol = 1e-12 * sv[0] * sv[0];
    double cum = 0.0;
    retained = 0;
    for (Eigen::Index i = 0; i < max_dim; ++i) {
      if (retained > 0 && sv[i] * sv[i] <= rank_tol) break;
      cum += sv[i] * sv[i];
      ++retained;
      if (cum >= energy * total_var) break;
    }
    retained = std::max<Eigen::Index>(retained, 1);
  }

  basis.components.resize(retained, F);
  basis.explained_variance_ratio.resize(retained);
  for (Eigen::Index i = 0; i < retained; ++i) {
    Eigen::VectorXd comp = svd.matrixV().col(i);
    // canonical sign: largest-magnitude loading positive
    Eigen::Index imax = 0;
    comp.cwiseAbs().maxCoeff(&imax);
    if (comp[imax] < 0.0) comp = -comp;
    basis.components.row(i) = comp.transpose();
    basis.explained_variance_ratio[i] =
        total_var > 0.0 ? sv[i] * sv[i] / total_var : 0.0;
  }
  return basis;
}

Eigen::VectorXd pca_project(const PcaBasis& basis, const Eigen::VectorXd& x) {
  if (x.size() != basis.mean.size()) {
    throw std::invalid_argument("pca_project: feature length mismatch");
  }
  return basis.components * (x - basis.mean);
}

}  // namespace lp2dh
