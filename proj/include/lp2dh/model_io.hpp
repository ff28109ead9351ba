#pragma once

#include <filesystem>
#include <vector>

#include "lp2dh/classify.hpp"
#include "lp2dh/codebook.hpp"
#include "lp2dh/config.hpp"
#include "lp2dh/hashing.hpp"
#include "lp2dh/pca.hpp"

namespace lp2dh {

// Everything needed to featurize and classify new videos: per-scale hashing
// projections and codebooks, the PCA basis, and the training features the
// nearest-neighbour classifier compares against.
struct PipelineModel {
  PipelineConfig config;
  std::vector<HashingModel> hash_models;  // aligned with config.scales
  std::vector<Codebook> codebooks;
  PcaBasis pca;
  bool pca_applied = false;
  LabeledFeatureSet train_features;
  uint32_t format_version = 1;
};

// Model container: magic "LP2DH\0", u32 LE version, then named sections.
// Matrix sections carry rank + dims (u32 each) + row-major f64 LE payload;
// string sections ("str/...") carry their UTF-8 byte length as the single
// dim. Writing is canonical, so save -> load -> save is byte-identical.
void save_model(const PipelineModel& model, const std::filesystem::path& path);
PipelineModel load_model(const std::filesystem::path& path);

}  // namespace lp2dh
