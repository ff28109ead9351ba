#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace lp2dh {

// 1 - cos(u, v), in [0, 2]. Zero vectors are rejected.
double cosine_distance(const Eigen::VectorXd& u, const Eigen::VectorXd& v);

struct LabeledFeatureSet {
  Eigen::MatrixXd features;  // one row per sample
  std::vector<std::string> labels;
  std::vector<std::string> video_ids;

  Eigen::Index size() const { return features.rows(); }
};

// Label of the minimum-cosine-distance training row, ties to the smaller
// training index.
std::string nn_classify(const LabeledFeatureSet& train,
                        const Eigen::VectorXd& query);

}  // namespace lp2dh
