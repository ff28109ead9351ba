#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "lp2dh/volume.hpp"

namespace lp2dh {

// Loads a directory of frame images (binary PGM P5 maxval 255, or 8-bit
// grayscale PNG). Filenames are sorted lexicographically to fix temporal
// order. Color or mixed-dimension inputs are rejected with the offending
// filename in the error message.
VideoVolume load_frame_dir(const std::filesystem::path& dir,
                           const std::string& label = "");

// LPVOL raw container: ASCII header "LPVOL <T> <H> <W>\n" followed by
// T*H*W unsigned 8-bit intensities in (t, y, x) row-major order.
VideoVolume load_raw_volume(const std::filesystem::path& file);
void save_raw_volume(const VideoVolume& vol, const std::filesystem::path& file);

enum class TextureKind { grating, noise, pulsing };

struct TextureSpec {
  TextureKind kind = TextureKind::grating;
  double orientation = 0.0;    // radians
  double spatial_freq = 0.0;   // cycles per pixel
  double temporal_freq = 0.0;  // cycles per frame
  double noise_sigma = 0.0;    // additive Gaussian noise, intensity units
};

struct VolumeDims {
  int t = 0;
  int h = 0;
  int w = 0;
};

// Deterministic synthetic dynamic textures for data-free testing.
VideoVolume synthesize_texture(const TextureSpec& spec, VolumeDims dims,
                               uint64_t seed);

// Single grayscale image, as read by the frame loaders.
struct GrayImage {
  int rows = 0;
  int cols = 0;
  std::vector<uint8_t> pixels;
};

GrayImage load_pgm(const std::filesystem::path& file);
GrayImage load_png_gray(const std::filesystem::path& file);

}  // namespace lp2dh
