#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "lp2dh/hashing.hpp"

namespace lp2dh {

// Every default reproduces the reference hyperparameter setting: scales
// {3, 5} with 16/40-bit codes, C = 3000 codewords, K = 10 LLE neighbours,
// loss weights 10 / 1 / 1000.
struct PipelineConfig {
  std::vector<int> scales{3, 5};
  std::vector<int> bits{16, 40};  // per-scale code length M
  int C = 3000;
  int K = 10;
  double lambda1 = 10.0;
  double lambda2 = 1.0;
  double lambda3 = 1e3;
  double theta_rel = 1e-4;
  int max_outer = 100;
  int inner_steps = 10;
  int64_t max_train_pdvs = 100000;   // pooled across training videos
  int64_t max_kmeans_codes = 100000; // pooled dense codes kept for k-means
  double pca_energy = 0.99;          // 0 disables PCA
  int pca_dim = 0;                   // > 0 overrides pca_energy
  uint64_t seed = 42;
  int threads = 1;  // CLI-level, not a config-file key

  bool pca_enabled() const { return pca_dim > 0 || pca_energy > 0.0; }
  HashConfig hash_config(size_t scale_index) const;
  void validate() const;  // throws std::invalid_argument on bad settings
};

// Flat "key = value" files, '#' comments, unknown keys rejected. Errors are
// reported with the file name and line number.
PipelineConfig parse_config_file(const std::filesystem::path& path);
PipelineConfig parse_config_text(const std::string& text,
                                 const std::string& source_name);

// Canonical dump; parse_config_text(config_to_text(c)) == c.
std::string config_to_text(const PipelineConfig& cfg);

}  // namespace lp2dh
