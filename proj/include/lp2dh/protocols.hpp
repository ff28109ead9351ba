#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lp2dh/pipeline.hpp"

namespace lp2dh {

struct EvalReport {
  double accuracy = 0.0;           // trace(confusion) / total
  std::vector<double> per_trial;   // per fold / trial accuracies
  Eigen::MatrixXi confusion;       // row = true class, col = predicted
  std::vector<std::string> classes;
  std::string protocol;
  uint64_t seed = 0;

  double mean_trial_accuracy() const;
  double stddev_trial_accuracy() const;
};

// k-fold cross validation; within each class, videos are assigned to folds
// round-robin by sorted video id unless an explicit video->fold grouping is
// given. The full pipeline is retrained on each fold's training split.
EvalReport protocol_kfold(const Dataset& dataset, int k,
                          const PipelineConfig& cfg,
                          const std::map<std::string, int>* grouping = nullptr);

// Stratified random train/test splits, retrained per trial.
EvalReport protocol_random_split(const Dataset& dataset, double train_fraction,
                                 int trials, const PipelineConfig& cfg,
                                 uint64_t seed);

// One video per class held out per fold; folds = smallest class size.
EvalReport protocol_leave_one_out(const Dataset& dataset,
                                  const PipelineConfig& cfg, uint64_t seed);

// Writes accuracy.csv, confusion.csv and report.txt into out_dir.
void write_report(const EvalReport& report, const std::filesystem::path& out_dir);

}  // namespace lp2dh
