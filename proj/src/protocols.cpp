#include "lp2dh/protocols.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>
#include <stdexcept>

#include "lp2dh/classify.hpp"
#include "lp2dh/rng.hpp"

namespace lp2dh {

namespace fs = std::filesystem;

namespace {

struct ClassIndex {
  std::vector<std::string> names;
  std::map<std::string, int> lookup;

  explicit ClassIndex(const Dataset& ds) {
    names = ds.classes();
    for (size_t i = 0; i < names.size(); ++i) {
      lookup[names[i]] = static_cast<int>(i);
    }
  }
};

// class -> video indices, each list sorted by video id
std::map<std::string, std::vector<size_t>> sorted_by_class(const Dataset& ds) {
  auto groups = ds.by_class();
  for (auto& [cls, idx] : groups) {
    std::sort(idx.begin(), idx.end(), [&](size_t a, size_t b) {
      return ds.videos[a].id < ds.videos[b].id;
    });
  }
  return groups;
}

double run_fold(const Dataset& ds, const std::vector<size_t>& train_idx,
                const std::vector<size_t>& test_idx, const PipelineConfig& cfg,
                const ClassIndex& classes, Eigen::MatrixXi& confusion) {
  // protocol hygiene: train and test must never share a video
  std::set<size_t> train_set(train_idx.begin(), train_idx.end());
  for (size_t t : test_idx) {
    if (train_set.count(t)) {
      throw std::logic_error("protocol bug: video in both train and test");
    }
  }

  Dataset train;
  train.videos.reserve(train_idx.size());
  for (size_t i : train_idx) train.videos.push_back(ds.videos[i]);
  const PipelineModel model = train_pipeline(train, cfg, env_stage_log());

  int correct = 0;
  std::vector<std::string> predictions(test_idx.size());
  for (size_t i = 0; i < test_idx.size(); ++i) {
    const VideoVolume vol = ds.videos[test_idx[i]].load();
    const FeatureVector fv = featurize(model, vol);
    predictions[i] = nn_classify(model.train_features, fv.values);
  }
  for (size_t i = 0; i < test_idx.size(); ++i) {
    const std::string& truth = ds.videos[test_idx[i]].label;
    confusion(classes.lookup.at(truth), classes.lookup.at(predictions[i])) += 1;
    if (predictions[i] == truth) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(test_idx.size());
}

EvalReport finish_report(EvalReport report) {
  const int total = report.confusion.sum();
  report.accuracy =
      total > 0 ? static_cast<double>(report.confusion.trace()) / total : 0.0;
  return report;
}

}  // namespace

double EvalReport::mean_trial_accuracy() const {
  if (per_trial.empty()) return 0.0;
  return std::accumulate(per_trial.begin(), per_trial.end(), 0.0) /
         static_cast<double>(per_trial.size());
}

double EvalReport::stddev_trial_accuracy() const {
  if (per_trial.size() < 2) return 0.0;
  const double mean = mean_trial_accuracy();
  double ss = 0.0;
  for (double a : per_trial) ss += (a - mean) * (a - mean);
  return std::sqrt(ss / static_cast<double>(per_trial.size() - 1));
}

EvalReport protocol_kfold(const Dataset& dataset, int k,
                          const PipelineConfig& cfg,
                          const std::map<std::string, int>* grouping) {
  if (k < 2) throw std::invalid_argument("kfold: k must be >= 2");
  const ClassIndex classes(dataset);
  const auto groups = sorted_by_class(dataset);
  for (const auto& [cls, idx] : groups) {
    if (idx.size() < static_cast<size_t>(k)) {
      throw std::runtime_error("kfold: class '" + cls + "' has only " +
                               std::to_string(idx.size()) + " videos, need >= " +
                               std::to_string(k));
    }
  }

  std::vector<std::vector<size_t>> folds(static_cast<size_t>(k));
  for (const auto& [cls, idx] : groups) {
    for (size_t j = 0; j < idx.size(); ++j) {
      int fold;
      if (grouping) {
        const auto it = grouping->find(dataset.videos[idx[j]].id);
        if (it == grouping->end()) {
          throw std::runtime_error("kfold grouping: no fold for video " +
                                   dataset.videos[idx[j]].id);
        }
        fold = it->second;
        if (fold < 0 || fold >= k) {
          throw std::runtime_error("kfold grouping: fold out of range for " +
                                   dataset.videos[idx[j]].id);
        }
      } else {
        fold = static_cast<int>(j % static_cast<size_t>(k));
      }
      folds[static_cast<size_t>(fold)].push_back(idx[j]);
    }
  }

  EvalReport report;
  report.protocol = "kfold:" + std::to_string(k);
  report.seed = cfg.seed;
  report.classes = classes.names;
  report.confusion = Eigen::MatrixXi::Zero(
      static_cast<Eigen::Index>(classes.names.size()),
      static_cast<Eigen::Index>(classes.names.size()));
  for (int f = 0; f < k; ++f) {
    std::vector<size_t> train_idx;
    for (int g = 0; g < k; ++g) {
      if (g == f) continue;
      train_idx.insert(train_idx.end(), folds[static_cast<size_t>(g)].begin(),
                       folds[static_cast<size_t>(g)].end());
    }
    std::sort(train_idx.begin(), train_idx.end());
    report.per_trial.push_back(run_fold(dataset, train_idx,
                                        folds[static_cast<size_t>(f)], cfg,
                                        classes, report.confusion));
  }
  return finish_report(std::move(report));
}

EvalReport protocol_random_split(const Dataset& dataset, double train_fraction,
                                 int trials, const PipelineConfig& cfg,
                                 uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("split: trials must be >= 1");
  if (train_fraction <= 0.0 || train_fraction >= 1.0) {
    throw std::invalid_argument("split: train fraction must lie in (0, 1)");
  }
  const ClassIndex classes(dataset);
  const auto groups = sorted_by_class(dataset);
  for (const auto& [cls, idx] : groups) {
    if (idx.size() < 2) {
      throw std::runtime_error("split: class '" + cls + "' has fewer than 2 videos");
    }
  }

  EvalReport report;
  char pbuf[64];
  std::snprintf(pbuf, sizeof(pbuf), "split:%g,%d", train_fraction, trials);
  report.protocol = pbuf;
  report.seed = seed;
  report.classes = classes.names;
  report.confusion = Eigen::MatrixXi::Zero(
      static_cast<Eigen::Index>(classes.names.size()),
      static_cast<Eigen::Index>(classes.names.size()));

  // deterministic name hash (std::hash varies across implementations)
  auto fnv1a = [](const std::string& s) {
    uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ULL;
    }
    return h;
  };

  for (int trial = 0; trial < trials; ++trial) {
    std::vector<size_t> train_idx, test_idx;
    for (const auto& [cls, idx] : groups) {
      std::vector<size_t> order = idx;
      Rng rng(mix_seed(seed, 0x5b117000 + static_cast<uint64_t>(trial) * 1009 +
                                 fnv1a(cls) % 997));
      rng.shuffle(order);
      size_t n_train = static_cast<size_t>(
          std::llround(train_fraction * static_cast<double>(order.size())));
      n_train = std::clamp<size_t>(n_train, 1, order.size() - 1);
      for (size_t j = 0; j < order.size(); ++j) {
        (j < n_train ? train_idx : test_idx).push_back(order[j]);
      }
    }
    std::sort(train_idx.begin(), train_idx.end());
    std::sort(test_idx.begin(), test_idx.end());
    report.per_trial.push_back(
        run_fold(dataset, train_idx, test_idx, cfg, classes, report.confusion));
  }
  return finish_report(std::move(report));
}

EvalReport protocol_leave_one_out(const Dataset& dataset,
                                  const PipelineConfig& cfg, uint64_t seed) {
  const ClassIndex classes(dataset);
  const auto groups = sorted_by_class(dataset);
  size_t folds = SIZE_MAX;
  for (const auto& [cls, idx] : groups) {
    if (idx.size() < 2) {
      throw std::runtime_error("leave-one-out: class '" + cls +
                               "' has fewer than 2 videos");
    }
    folds = std::min(folds, idx.size());
  }

  EvalReport report;
  report.protocol = "loo";
  report.seed = seed;
  report.classes = classes.names;
  report.confusion = Eigen::MatrixXi::Zero(
      static_cast<Eigen::Index>(classes.names.size()),
      static_cast<Eigen::Index>(classes.names.size()));

  for (size_t f = 0; f < folds; ++f) {
    std::vector<size_t> train_idx, test_idx;
    for (const auto& [cls, idx] : groups) {
      for (size_t j = 0; j < idx.size(); ++j) {
        (j == f ? test_idx : train_idx).push_back(idx[j]);
      }
    }
    std::sort(train_idx.begin(), train_idx.end());
    std::sort(test_idx.begin(), test_idx.end());
    report.per_trial.push_back(
        run_fold(dataset, train_idx, test_idx, cfg, classes, report.confusion));
  }
  return finish_report(std::move(report));
}

void write_report(const EvalReport& report, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  char buf[64];

  {
    std::ofstream out(out_dir / "accuracy.csv", std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + (out_dir / "accuracy.csv").string());
    out << "trial,accuracy\n";
    for (size_t i = 0; i < report.per_trial.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%zu,%.6f\n", i + 1, report.per_trial[i]);
      out << buf;
    }
    std::snprintf(buf, sizeof(buf), "mean,%.6f\n", report.mean_trial_accuracy());
    out << buf;
    std::snprintf(buf, sizeof(buf), "stddev,%.6f\n", report.stddev_trial_accuracy());
    out << buf;
  }

  {
    std::ofstream out(out_dir / "confusion.csv", std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + (out_dir / "confusion.csv").string());
    out << "true_class";
    for (const auto& c : report.classes) out << "," << c;
    out << "\n";
    for (Eigen::Index r = 0; r < report.confusion.rows(); ++r) {
      out << report.classes[static_cast<size_t>(r)];
      for (Eigen::Index c = 0; c < report.confusion.cols(); ++c) {
        out << "," << report.confusion(r, c);
      }
      out << "\n";
    }
  }

  {
    std::ofstream out(out_dir / "report.txt", std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + (out_dir / "report.txt").string());
    out << "LP2DH evaluation report\n";
    out << "protocol: " << report.protocol << "\n";
    out << "seed: " << report.seed << "\n";
    out << "classes (" << report.classes.size() << "):";
    for (const auto& c : report.classes) out << " " << c;
    out << "\n";
    out << "videos evaluated: " << report.confusion.sum() << "\n";
    out << "folds/trials: " << report.per_trial.size() << "\n";
    out << "per-trial accuracy:";
    for (double a : report.per_trial) {
      std::snprintf(buf, sizeof(buf), " %.6f", a);
      out << buf;
    }
    out << "\n";
    std::snprintf(buf, sizeof(buf), "%.6f", report.mean_trial_accuracy());
    out << "mean accuracy: " << buf << "\n";
    std::snprintf(buf, sizeof(buf), "%.6f", report.stddev_trial_accuracy());
    out << "stddev: " << buf << "\n";
    std::snprintf(buf, sizeof(buf), "%.6f", report.accuracy);
    out << "overall accuracy (trace/total): " << buf << "\n";
  }
}

}  // namespace lp2dh
