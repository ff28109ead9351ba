#include "lp2dh/pdv.hpp"

#include <stdexcept>

#include "lp2dh/rng.hpp"

namespace lp2dh {

std::vector<std::array<int, 3>> neighbor_offsets(int P) {
  if (P < 3 || P % 2 == 0) {
    throw std::invalid_argument("neighbourhood side P must be odd and >= 3");
  }
  const int r = (P - 1) / 2;
  std::vector<std::array<int, 3>> offsets;
  offsets.reserve(static_cast<size_t>(P) * P * P - 1);
  for (int dt = -r; dt <= r; ++dt) {
    for (int dy = -r; dy <= r; ++dy) {
      for (int dx = -r; dx <= r; ++dx) {
        if (dt == 0 && dy == 0 && dx == 0) continue;
        offsets.push_back({dt, dy, dx});
      }
    }
  }
  return offsets;
}

PdvMatrix extract_pdvs(const VideoVolume& volume, int P, Stride stride,
                       std::optional<int64_t> max_samples, uint64_t seed) {
  const auto offsets = neighbor_offsets(P);
  if (!volume.fits_scale(P)) {
    throw std::runtime_error(
        "volume " + std::to_string(volume.frames) + "x" +
        std::to_string(volume.rows) + "x" + std::to_string(volume.cols) +
        " is smaller than neighbourhood side " + std::to_string(P));
  }
  if (stride.t < 1 || stride.y < 1 || stride.x < 1) {
    throw std::invalid_argument("stride components must be positive");
  }
  const int r = (P - 1) / 2;
  const int64_t nt = (volume.frames - P) / stride.t + 1;
  const int64_t ny = (volume.rows - P) / stride.y + 1;
  const int64_t nx = (volume.cols - P) / stride.x + 1;
  const int64_t total = nt * ny * nx;

  std::vector<int64_t> kept;
  if (max_samples && *max_samples < total) {
    Rng rng(seed);
    kept = rng.sample_indices(total, *max_samples);
  } else {
    kept.resize(static_cast<size_t>(total));
    for (int64_t i = 0; i < total; ++i) kept[static_cast<size_t>(i)] = i;
  }

  const int D = static_cast<int>(offsets.size());
  PdvMatrix out;
  out.scale = P;
  out.columns.resize(D, static_cast<Eigen::Index>(kept.size()));
  for (size_t c = 0; c < kept.size(); ++c) {
    const int64_t idx = kept[c];
    const int t = r + static_cast<int>(idx / (ny * nx)) * stride.t;
    const int y = r + static_cast<int>((idx / nx) % ny) * stride.y;
    const int x = r + static_cast<int>(idx % nx) * stride.x;
    const double center = volume.at(t, y, x);
    double* col = out.columns.col(static_cast<Eigen::Index>(c)).data();
    for (int d = 0; d < D; ++d) {
      const auto& o = offsets[static_cast<size_t>(d)];
      col[d] = volume.at(t + o[0], y + o[1], x + o[2]) - center;
    }
  }
  return out;
}

}  // namespace lp2dh
