#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "lp2dh/hashing.hpp"

namespace lp2dh {

struct KmeansStats {
  double inertia = 0.0;
  int iterations = 0;
  int requested_C = 0;
  int effective_C = 0;  // reduced when fewer distinct codes than C
  std::vector<double> inertia_trace;  // per Lloyd iteration, non-increasing
};

// k-means dictionary over binary codes; centroids are real-valued in [0,1]^M.
struct Codebook {
  Eigen::MatrixXd centroids;  // C x M, one centroid per row
  int scale = 0;
  KmeansStats stats;

  int size() const { return static_cast<int>(centroids.rows()); }
};

// Seeded k-means++ then Lloyd iterations (movement < 1e-6 or 100 rounds),
// Euclidean distance, empty clusters reseeded to the point farthest from its
// centroid. Duplicate codes are collapsed to weighted points internally,
// which leaves the optimization exactly equivalent.
Codebook fit_codebook(const BinaryCodes& codes, int C, uint64_t seed,
                      int scale = 0);

// Nearest centroid by Euclidean distance, ties to the smaller index.
int assign(const Codebook& codebook, const Eigen::VectorXd& code);
Eigen::VectorXi assign_all(const Codebook& codebook, const BinaryCodes& codes);

// L1-normalized histogram of codeword assignments for one video.
Eigen::VectorXd video_histogram(const Codebook& codebook,
                                const BinaryCodes& codes);

}  // namespace lp2dh
