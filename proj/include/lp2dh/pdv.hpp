#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "lp2dh/volume.hpp"

namespace lp2dh {

// Column-stacked pixel-difference vectors. Column n holds the differences
// I_p - I_c over the P^3 - 1 neighbour offsets of one center voxel, in the
// canonical raster order (sorted by dt, then dy, then dx).
struct PdvMatrix {
  int scale = 0;            // neighbourhood side P
  Eigen::MatrixXd columns;  // D x N, D = P^3 - 1

  int dim() const { return static_cast<int>(columns.rows()); }
  Eigen::Index count() const { return columns.cols(); }
};

struct Stride {
  int t = 1;
  int y = 1;
  int x = 1;
};

// Canonical neighbour offsets (dt, dy, dx) in [-r, r]^3 \ {0}, raster order.
std::vector<std::array<int, 3>> neighbor_offsets(int P);

// Enumerates all centers whose full P x P x P neighbourhood fits inside the
// volume (no padding), subsampled by stride. When max_samples is given and
// fewer centers than it survive the stride, all are kept; otherwise a seeded
// uniform subset of that size is kept. Column order is deterministic.
PdvMatrix extract_pdvs(const VideoVolume& volume, int P, Stride stride = {},
                       std::optional<int64_t> max_samples = std::nullopt,
                       uint64_t seed = 0);

}  // namespace lp2dh
