#include "lp2dh/classify.hpp"

#include <algorithm>
#include <stdexcept>

namespace lp2dh {

double cosine_distance(const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
  if (u.size() != v.size()) {
    throw std::invalid_argument("cosine_distance: length mismatch");
  }
  const double nu = u.norm();
  const double nv = v.norm();
  if (nu == 0.0 || nv == 0.0) {
    throw std::invalid_argument("cosine_distance: zero vector");
  }
  return std::clamp(1.0 - u.dot(v) / (nu * nv), 0.0, 2.0);
}

std::string nn_classify(const LabeledFeatureSet& train,
                        const Eigen::VectorXd& query) {
  if (train.size() == 0) {
    throw std::invalid_argument("nn_classify: empty training set");
  }
  Eigen::Index best = 0;
  double best_d = cosine_distance(train.features.row(0).transpose(), query);
  for (Eigen::Index i = 1; i < train.size(); ++i) {
    const double d = cosine_distance(train.features.row(i).transpose(), query);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return train.labels[static_cast<size_t>(best)];
}

}  // namespace lp2dh
