#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "lp2dh/model_io.hpp"
#include "lp2dh/pdv.hpp"
#include "lp2dh/volume_io.hpp"

namespace lp2dh {

// Multi-scale feature of one video: per-scale codeword histograms
// concatenated in ascending-P order, optionally PCA-compressed.
struct FeatureVector {
  Eigen::VectorXd values;           // final feature (post-PCA when applied)
  Eigen::VectorXd pre_pca;          // concatenated histogram segments
  std::vector<int> segment_bounds;  // histogram segment start offsets + end
  bool pca_applied = false;
};

struct DatasetVideo {
  std::string id;
  std::string label;
  std::function<VideoVolume()> load;  // pure; reloads/regenerates on demand
};

struct Dataset {
  std::vector<DatasetVideo> videos;

  std::vector<std::string> classes() const;  // sorted unique labels
  std::map<std::string, std::vector<size_t>> by_class() const;
};

// Scans a corpus laid out as <class>/<video>/ frame directories or
// <class>/<video>.lpvol files.
Dataset scan_corpus(const std::filesystem::path& data_root);

// Relabels videos through an "old_class,new_class" CSV mapping.
void apply_class_map(Dataset& dataset, const std::filesystem::path& csv);

// Trains the full pipeline on the given videos: pooled subsampled PDVs ->
// LLE affinity -> hashing per scale -> dense codes -> codebooks ->
// histograms -> PCA -> stored training features.
PipelineModel train_pipeline(const Dataset& train, const PipelineConfig& cfg,
                             std::ostream* stage_log = nullptr);

// stderr when LP2DH_LOG is "info"/"debug" (or "2"/"3"), else nullptr
std::ostream* env_stage_log();

// Dense extraction + encoding + histogram per scale, concatenation, PCA.
FeatureVector featurize(const PipelineModel& model, const VideoVolume& volume);

// Synthetic corpora for data-free runs.
struct SynthClass {
  std::string name;
  TextureSpec spec;
};

// grating at 0 and pi/2, pulsing, and uniform noise
std::vector<SynthClass> default_synth_classes(double sigma);

Dataset synthetic_dataset(const std::vector<SynthClass>& classes,
                          int videos_per_class, VolumeDims dims, uint64_t seed);

void write_synthetic_corpus(const std::filesystem::path& dir,
                            const std::vector<SynthClass>& classes,
                            int videos_per_class, VolumeDims dims,
                            uint64_t seed);

}  // namespace lp2dh
