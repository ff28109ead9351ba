#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace lp2dh {

// Grayscale video volume. Intensities are stored as doubles in [0, 255] even
// though file inputs are 8-bit, so pixel differences downstream are exact
// small integers.
struct VideoVolume {
  int frames = 0;
  int rows = 0;
  int cols = 0;
  std::vector<double> data;  // indexed (t, y, x), row-major frames
  std::string label;

  double& at(int t, int y, int x) {
    return data[(static_cast<size_t>(t) * rows + y) * cols + x];
  }
  double at(int t, int y, int x) const {
    return data[(static_cast<size_t>(t) * rows + y) * cols + x];
  }
  size_t voxels() const { return data.size(); }
  bool fits_scale(int P) const {
    return frames >= P && rows >= P && cols >= P;
  }
};

}  // namespace lp2dh
