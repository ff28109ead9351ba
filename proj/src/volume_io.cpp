#include "lp2dh/volume_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "lp2dh/rng.hpp"

namespace lp2dh {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void fail(const std::string& msg) {
  throw std::runtime_error(msg);
}

std::string lower_ext(const fs::path& p) {
  std::string e = p.extension().string();
  std::transform(e.begin(), e.end(), e.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return e;
}

// Reads the next PGM header token, skipping whitespace and '#' comments.
std::string pgm_token(std::istream& in) {
  std::string tok;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
      continue;
    }
    if (!std::isspace(c)) {
      tok.push_back(static_cast<char>(c));
      break;
    }
  }
  while ((c = in.get()) != EOF && !std::isspace(c)) {
    tok.push_back(static_cast<char>(c));
  }
  return tok;
}

struct PngReadCloser {
  png_structp png = nullptr;
  png_infop info = nullptr;
  FILE* fp = nullptr;
  ~PngReadCloser() {
    if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
    if (fp) std::fclose(fp);
  }
};

}  // namespace

GrayImage load_pgm(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) fail("cannot open frame: " + file.string());
  const std::string magic = pgm_token(in);
  if (magic == "P6" || magic == "P3") {
    fail("color input not supported: " + file.string());
  }
  if (magic != "P5") {
    fail("unsupported PGM format (need binary P5): " + file.string());
  }
  const std::string ws = pgm_token(in);
  const std::string hs = pgm_token(in);
  const std::string ms = pgm_token(in);
  int w = 0, h = 0, maxval = 0;
  try {
    w = std::stoi(ws);
    h = std::stoi(hs);
    maxval = std::stoi(ms);
  } catch (const std::exception&) {
    fail("malformed PGM header: " + file.string());
  }
  if (w <= 0 || h <= 0) fail("malformed PGM header: " + file.string());
  if (maxval != 255) {
    fail("unsupported pixel depth (maxval " + std::to_string(maxval) +
         ", need 255): " + file.string());
  }
  GrayImage img;
  img.rows = h;
  img.cols = w;
  img.pixels.resize(static_cast<size_t>(w) * h);
  in.read(reinterpret_cast<char*>(img.pixels.data()),
          static_cast<std::streamsize>(img.pixels.size()));
  if (in.gcount() != static_cast<std::streamsize>(img.pixels.size())) {
    fail("truncated PGM payload: " + file.string());
  }
  return img;
}

GrayImage load_png_gray(const fs::path& file) {
  PngReadCloser ctx;
  ctx.fp = std::fopen(file.string().c_str(), "rb");
  if (!ctx.fp) fail("cannot open frame: " + file.string());
  unsigned char sig[8];
  if (std::fread(sig, 1, 8, ctx.fp) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
    fail("not a PNG file: " + file.string());
  }
  ctx.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr,
                                   nullptr);
  if (!ctx.png) fail("libpng init failed: " + file.string());
  ctx.info = png_create_info_struct(ctx.png);
  if (!ctx.info) fail("libpng init failed: " + file.string());
  if (setjmp(png_jmpbuf(ctx.png))) {
    fail("PNG decode error: " + file.string());
  }
  png_init_io(ctx.png, ctx.fp);
  png_set_sig_bytes(ctx.png, 8);
  png_read_info(ctx.png, ctx.info);

  const png_uint_32 w = png_get_image_width(ctx.png, ctx.info);
  const png_uint_32 h = png_get_image_height(ctx.png, ctx.info);
  const int color = png_get_color_type(ctx.png, ctx.info);
  const int depth = png_get_bit_depth(ctx.png, ctx.info);
  if (color != PNG_COLOR_TYPE_GRAY) {
    fail("color input not supported: " + file.string());
  }
  if (depth != 8) {
    fail("unsupported pixel depth (" + std::to_string(depth) +
         "-bit, need 8): " + file.string());
  }
  GrayImage img;
  img.rows = static_cast<int>(h);
  img.cols = static_cast<int>(w);
  img.pixels.resize(static_cast<size_t>(w) * h);
  std::vector<png_bytep> row_ptrs(h);
  for (png_uint_32 y = 0; y < h; ++y) {
    row_ptrs[y] = img.pixels.data() + static_cast<size_t>(y) * w;
  }
  png_read_image(ctx.png, row_ptrs.data());
  png_read_end(ctx.png, nullptr);
  return img;
}

VideoVolume load_frame_dir(const fs::path& dir, const std::string& label) {
  if (!fs::is_directory(dir)) {
    fail("missing frame directory: " + dir.string());
  }
  std::vector<fs::path> frames;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string ext = lower_ext(entry.path());
    if (ext == ".pgm" || ext == ".png") frames.push_back(entry.path());
  }
  if (frames.empty()) {
    fail("no PGM/PNG frames in directory: " + dir.string());
  }
  // explicit sort: temporal order never depends on directory enumeration
  std::sort(frames.begin(), frames.end(),
            [](const fs::path& a, const fs::path& b) {
              return a.filename().string() < b.filename().string();
            });

  VideoVolume vol;
  vol.label = label;
  vol.frames = static_cast<int>(frames.size());
  for (size_t t = 0; t < frames.size(); ++t) {
    const GrayImage img = lower_ext(frames[t]) == ".pgm"
                              ? load_pgm(frames[t])
                              : load_png_gray(frames[t]);
    if (t == 0) {
      vol.rows = img.rows;
      vol.cols = img.cols;
      vol.data.resize(frames.size() * static_cast<size_t>(img.rows) *
                      img.cols);
    } else if (img.rows != vol.rows || img.cols != vol.cols) {
      fail("frame dimension mismatch (" + std::to_string(img.cols) + "x" +
           std::to_string(img.rows) + " vs " + std::to_string(vol.cols) + "x" +
           std::to_string(vol.rows) + "): " + frames[t].string());
    }
    double* dst = vol.data.data() +
                  t * static_cast<size_t>(vol.rows) * vol.cols;
    for (size_t i = 0; i < img.pixels.size(); ++i) {
      dst[i] = static_cast<double>(img.pixels[i]);
    }
  }
  return vol;
}

VideoVolume load_raw_volume(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) fail("cannot open volume: " + file.string());
  std::string header;
  if (!std::getline(in, header)) fail("malformed LPVOL header: " + file.string());
  int t = 0, h = 0, w = 0;
  char extra = 0;
  if (std::sscanf(header.c_str(), "LPVOL %d %d %d %c", &t, &h, &w, &extra) != 3 ||
      t <= 0 || h <= 0 || w <= 0) {
    fail("malformed LPVOL header: " + file.string());
  }
  VideoVolume vol;
  vol.frames = t;
  vol.rows = h;
  vol.cols = w;
  const size_t n = static_cast<size_t>(t) * h * w;
  std::vector<uint8_t> raw(n);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(n));
  if (in.gcount() != static_cast<std::streamsize>(n)) {
    fail("truncated LPVOL payload: " + file.string());
  }
  vol.data.resize(n);
  for (size_t i = 0; i < n; ++i) vol.data[i] = static_cast<double>(raw[i]);
  return vol;
}

void save_raw_volume(const VideoVolume& vol, const fs::path& file) {
  std::ofstream out(file, std::ios::binary);
  if (!out) fail("cannot write volume: " + file.string());
  out << "LPVOL " << vol.frames << " " << vol.rows << " " << vol.cols << "\n";
  std::vector<uint8_t> raw(vol.data.size());
  for (size_t i = 0; i < vol.data.size(); ++i) {
    const double v = std::clamp(vol.data[i], 0.0, 255.0);
    raw[i] = static_cast<uint8_t>(std::lround(v));
  }
  out.write(reinterpret_cast<const char*>(raw.data()),
            static_cast<std::streamsize>(raw.size()));
  if (!out) fail("write failed: " + file.string());
}

VideoVolume synthesize_texture(const TextureSpec& spec, VolumeDims dims,
                               uint64_t seed) {
  if (dims.t < 8 || dims.h < 8 || dims.w < 8) {
    fail("synthesize_texture: dims must each be >= 8");
  }
  if (spec.noise_sigma < 0.0) {
    fail("synthesize_texture: noise_sigma must be >= 0");
  }
  VideoVolume vol;
  vol.frames = dims.t;
  vol.rows = dims.h;
  vol.cols = dims.w;
  vol.data.resize(static_cast<size_t>(dims.t) * dims.h * dims.w);
  Rng rng(seed);
  const double two_pi = 2.0 * std::numbers::pi;
  const double ct = std::cos(spec.orientation);
  const double st = std::sin(spec.orientation);
  size_t i = 0;
  for (int t = 0; t < dims.t; ++t) {
    const double pulse = 127.5 + 100.0 * std::sin(two_pi * spec.temporal_freq * t);
    for (int y = 0; y < dims.h; ++y) {
      for (int x = 0; x < dims.w; ++x, ++i) {
        double v = 0.0;
        switch (spec.kind) {
          case TextureKind::grating:
            v = 127.5 + 100.0 * std::sin(two_pi * (spec.spatial_freq *
                                                       (x * ct + y * st) +
                                                   spec.temporal_freq * t));
            if (spec.noise_sigma > 0.0) v += spec.noise_sigma * rng.normal();
            break;
          case TextureKind::noise:
            v = 255.0 * rng.uniform01();
            break;
          case TextureKind::pulsing:
            v = pulse;
            if (spec.noise_sigma > 0.0) v += spec.noise_sigma * rng.normal();
            break;
        }
        vol.data[i] = std::clamp(v, 0.0, 255.0);
      }
    }
  }
  return vol;
}

}  // namespace lp2dh
