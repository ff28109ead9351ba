#include "lp2dh/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <numbers>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "lp2dh/lle.hpp"
#include "lp2dh/rng.hpp"

namespace lp2dh {

namespace fs = std::filesystem;

namespace {

// deterministic parallel map over [0, n): results land in indexed slots
void parallel_for(size_t n, int threads, const std::function<void(size_t)>& fn) {
  if (threads <= 1 || n <= 1) {
    for (size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<size_t> next{0};
  auto worker = [&] {
    while (true) {
      const size_t i = next.fetch_add(1);
      if (i >= n) break;
      fn(i);
    }
  };
  std::vector<std::thread> pool;
  const int count = std::min<int>(threads, static_cast<int>(n));
  pool.reserve(static_cast<size_t>(count));
  for (int t = 0; t < count; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
}

class StageTimer {
 public:
  explicit StageTimer(std::ostream* log) : log_(log) {}
  void done(const std::string& stage) {
    const auto now = std::chrono::steady_clock::now();
    if (log_) {
      const double s =
          std::chrono::duration<double>(now - last_).count();
      char buf[160];
      std::snprintf(buf, sizeof(buf), "[stage] %-28s %8.2f s", stage.c_str(), s);
      (*log_) << buf << "\n" << std::flush;
    }
    last_ = now;
  }

 private:
  std::ostream* log_;
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

// per-video quota that pools to roughly `cap` samples across `count` videos
std::vector<int64_t> split_quota(int64_t cap, size_t count) {
  std::vector<int64_t> q(count, std::max<int64_t>(1, cap / static_cast<int64_t>(count)));
  int64_t rem = cap - q[0] * static_cast<int64_t>(count);
  for (size_t i = 0; i < count && rem > 0; ++i, --rem) ++q[i];
  return q;
}

BinaryCodes subsample_codes(const BinaryCodes& codes, int64_t quota,
                            uint64_t seed) {
  if (quota <= 0 || codes.cols() <= quota) return codes;
  Rng rng(seed);
  const auto keep = rng.sample_indices(codes.cols(), quota);
  BinaryCodes out(codes.rows(), static_cast<Eigen::Index>(keep.size()));
  for (size_t i = 0; i < keep.size(); ++i) {
    out.col(static_cast<Eigen::Index>(i)) = codes.col(keep[i]);
  }
  return out;
}

}  // namespace

std::ostream* env_stage_log() {
  const char* env = std::getenv("LP2DH_LOG");
  if (!env) return nullptr;
  const std::string v(env);
  return (v == "info" || v == "debug" || v == "2" || v == "3") ? &std::cerr
                                                               : nullptr;
}

std::vector<std::string> Dataset::classes() const {
  std::set<std::string> s;
  for (const auto& v : videos) s.insert(v.label);
  return {s.begin(), s.end()};
}

std::map<std::string, std::vector<size_t>> Dataset::by_class() const {
  std::map<std::string, std::vector<size_t>> m;
  for (size_t i = 0; i < videos.size(); ++i) m[videos[i].label].push_back(i);
  return m;
}

Dataset scan_corpus(const fs::path& data_root) {
  if (!fs::is_directory(data_root)) {
    throw std::runtime_error("data root is not a directory: " + data_root.string());
  }
  std::vector<fs::path> class_dirs;
  for (const auto& e : fs::directory_iterator(data_root)) {
    if (e.is_directory()) class_dirs.push_back(e.path());
  }
  std::sort(class_dirs.begin(), class_dirs.end());
  if (class_dirs.empty()) {
    throw std::runtime_error("no class directories under " + data_root.string());
  }
  Dataset ds;
  for (const auto& cdir : class_dirs) {
    const std::string cname = cdir.filename().string();
    std::vector<fs::path> entries;
    for (const auto& e : fs::directory_iterator(cdir)) {
      if (e.is_directory() ||
          (e.is_regular_file() && e.path().extension() == ".lpvol")) {
        entries.push_back(e.path());
      }
    }
    std::sort(entries.begin(), entries.end());
    if (entries.empty()) {
      throw std::runtime_error("empty class directory: " + cdir.string());
    }
    for (const auto& p : entries) {
      DatasetVideo v;
      v.label = cname;
      v.id = cname + "/" + p.stem().string();
      if (fs::is_directory(p)) {
        v.load = [p, cname] { return load_frame_dir(p, cname); };
      } else {
        v.load = [p, cname] {
          VideoVolume vol = load_raw_volume(p);
          vol.label = cname;
          return vol;
        };
      }
      ds.videos.push_back(std::move(v));
    }
  }
  return ds;
}

void apply_class_map(Dataset& dataset, const fs::path& csv) {
  std::ifstream in(csv);
  if (!in) throw std::runtime_error("cannot open class map: " + csv.string());
  std::map<std::string, std::string> remap;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw std::runtime_error(csv.string() + ":" + std::to_string(lineno) +
                               ": expected 'old_class,new_class'");
    }
    remap[line.substr(0, comma)] = line.substr(comma + 1);
  }
  for (auto& v : dataset.videos) {
    const auto it = remap.find(v.label);
    if (it != remap.end()) v.label = it->second;
  }
}

PipelineModel train_pipeline(const Dataset& train, const PipelineConfig& cfg,
                             std::ostream* stage_log) {
  cfg.validate();
  const size_t V = train.videos.size();
  if (V == 0) throw std::runtime_error("train_pipeline: no training videos");

  PipelineModel model;
  model.config = cfg;
  StageTimer timer(stage_log);

  const size_t S = cfg.scales.size();

  // hashing stage: pooled subsampled PDVs -> affinity -> projection
  for (size_t si = 0; si < S; ++si) {
    const int P = cfg.scales[si];
    std::vector<Eigen::MatrixXd> parts(V);
    const auto quota = split_quota(cfg.max_train_pdvs, V);
    parallel_for(V, cfg.threads, [&](size_t vi) {
      const VideoVolume vol = train.videos[vi].load();
      parts[vi] = extract_pdvs(vol, P, Stride{}, quota[vi],
                               mix_seed(cfg.seed, 0x9d70000 + si * 1000003 + vi))
                      .columns;
    });
    Eigen::Index total = 0;
    for (const auto& p : parts) total += p.cols();
    Eigen::MatrixXd X(parts[0].rows(), total);
    Eigen::Index at = 0;
    for (auto& p : parts) {
      X.middleCols(at, p.cols()) = p;
      at += p.cols();
      p.resize(0, 0);
    }
    timer.done("pdv extraction P=" + std::to_string(P));

    const Eigen::SparseMatrix<double> A = lle_affinity(X, cfg.K);
    timer.done("lle affinity P=" + std::to_string(P));

    model.hash_models.push_back(
        train_hashing(X, A, cfg.hash_config(si), P));
    timer.done("hashing P=" + std::to_string(P));
  }

  // code stage: dense codes per video, pooled subsample for k-means.
  // Codes are kept in memory when they fit a modest budget, otherwise the
  // histogram pass recomputes them.
  int64_t code_bytes = 0;
  std::vector<std::vector<BinaryCodes>> cached(S);
  {
    std::vector<int64_t> probe_dims(S);
    const VideoVolume probe = train.videos[0].load();
    for (size_t si = 0; si < S; ++si) {
      const int P = cfg.scales[si];
      const int64_t centers = static_cast<int64_t>(probe.frames - P + 1) *
                              (probe.rows - P + 1) * (probe.cols - P + 1);
      code_bytes += centers * cfg.bits[si] * static_cast<int64_t>(V);
    }
  }
  const bool keep_codes = code_bytes <= (int64_t{1} << 30);

  std::vector<std::vector<BinaryCodes>> pool_parts(S,
                                                   std::vector<BinaryCodes>(V));
  if (keep_codes) {
    for (size_t si = 0; si < S; ++si) cached[si].resize(V);
  }
  const auto kmeans_quota =
      cfg.max_kmeans_codes > 0
          ? split_quota(cfg.max_kmeans_codes, V)
          : std::vector<int64_t>(V, 0);

  auto encode_video = [&](size_t vi, const VideoVolume& vol, size_t si) {
    const PdvMatrix X = extract_pdvs(vol, cfg.scales[si]);
    return encode(model.hash_models[si].W, X.columns);
  };

  parallel_for(V, cfg.threads, [&](size_t vi) {
    const VideoVolume vol = train.videos[vi].load();
    for (size_t si = 0; si < S; ++si) {
      BinaryCodes codes = encode_video(vi, vol, si);
      pool_parts[si][vi] = subsample_codes(
          codes, kmeans_quota[vi],
          mix_seed(cfg.seed, 0xc0de0000 + si * 1000003 + vi));
      if (keep_codes) cached[si][vi] = std::move(codes);
    }
  });
  timer.done("dense encoding");

  for (size_t si = 0; si < S; ++si) {
    Eigen::Index total = 0;
    for (const auto& p : pool_parts[si]) total += p.cols();
    BinaryCodes pool(cfg.bits[si], total);
    Eigen::Index at = 0;
    for (auto& p : pool_parts[si]) {
      pool.middleCols(at, p.cols()) = p;
      at += p.cols();
      p.resize(0, 0);
    }
    model.codebooks.push_back(fit_codebook(
        pool, cfg.C, mix_seed(cfg.seed, 0xcb000000 + si), cfg.scales[si]));
    timer.done("codebook P=" + std::to_string(cfg.scales[si]));
  }

  // histogram stage
  Eigen::Index feat_dim = 0;
  for (const auto& cb : model.codebooks) feat_dim += cb.size();
  Eigen::MatrixXd features(V, feat_dim);
  parallel_for(V, cfg.threads, [&](size_t vi) {
    Eigen::Index at = 0;
    if (keep_codes) {
      for (size_t si = 0; si < S; ++si) {
        features.row(vi).segment(at, model.codebooks[si].size()) =
            video_histogram(model.codebooks[si], cached[si][vi]).transpose();
        at += model.codebooks[si].size();
      }
    } else {
      const VideoVolume vol = train.videos[vi].load();
      for (size_t si = 0; si < S; ++si) {
        features.row(vi).segment(at, model.codebooks[si].size()) =
            video_histogram(model.codebooks[si], encode_video(vi, vol, si))
                .transpose();
        at += model.codebooks[si].size();
      }
    }
  });
  cached.clear();
  timer.done("histograms");

  // compression + stored training features
  model.pca_applied = cfg.pca_enabled() && V >= 2;
  if (model.pca_applied) {
    model.pca = fit_pca(features, cfg.pca_energy, cfg.pca_dim);
    Eigen::MatrixXd projected(V, model.pca.retained_dim());
    for (Eigen::Index r = 0; r < features.rows(); ++r) {
      projected.row(r) =
          pca_project(model.pca, features.row(r).transpose()).transpose();
    }
    model.train_features.features = std::move(projected);
  } else {
    model.train_features.features = std::move(features);
  }
  for (const auto& v : train.videos) {
    model.train_features.labels.push_back(v.label);
    model.train_features.video_ids.push_back(v.id);
  }
  timer.done("pca + features");
  return model;
}

FeatureVector featurize(const PipelineModel& model, const VideoVolume& volume) {
  const size_t S = model.config.scales.size();
  if (model.hash_models.size() != S || model.codebooks.size() != S) {
    throw std::runtime_error("featurize: model scale sets disagree");
  }
  FeatureVector fv;
  Eigen::Index feat_dim = 0;
  for (const auto& cb : model.codebooks) feat_dim += cb.size();
  fv.pre_pca.resize(feat_dim);
  fv.segment_bounds.push_back(0);
  Eigen::Index at = 0;
  for (size_t si = 0; si < S; ++si) {
    const int P = model.config.scales[si];
    const PdvMatrix X = extract_pdvs(volume, P);
    const BinaryCodes codes = encode(model.hash_models[si].W, X.columns);
    fv.pre_pca.segment(at, model.codebooks[si].size()) =
        video_histogram(model.codebooks[si], codes);
    at += model.codebooks[si].size();
    fv.segment_bounds.push_back(static_cast<int>(at));
  }
  fv.pca_applied = model.pca_applied;
  fv.values = model.pca_applied ? pca_project(model.pca, fv.pre_pca) : fv.pre_pca;
  return fv;
}

std::vector<SynthClass> default_synth_classes(double sigma) {
  std::vector<SynthClass> out(4);
  out[0].name = "grating000";
  out[0].spec = {TextureKind::grating, 0.0, 0.15, 0.10, sigma};
  out[1].name = "grating090";
  out[1].spec = {TextureKind::grating, std::numbers::pi / 2, 0.15, 0.10, sigma};
  out[2].name = "pulsing";
  out[2].spec = {TextureKind::pulsing, 0.0, 0.0, 0.08, sigma};
  out[3].name = "noise";
  out[3].spec = {TextureKind::noise, 0.0, 0.0, 0.0, 0.0};
  return out;
}

Dataset synthetic_dataset(const std::vector<SynthClass>& classes,
                          int videos_per_class, VolumeDims dims,
                          uint64_t seed) {
  Dataset ds;
  for (size_t ci = 0; ci < classes.size(); ++ci) {
    for (int vi = 0; vi < videos_per_class; ++vi) {
      DatasetVideo v;
      v.label = classes[ci].name;
      char idbuf[16];
      std::snprintf(idbuf, sizeof(idbuf), "v%03d", vi);
      v.id = classes[ci].name + "/" + idbuf;
      const TextureSpec spec = classes[ci].spec;
      const uint64_t vseed =
          mix_seed(seed, ci * 1000003 + static_cast<uint64_t>(vi));
      const std::string label = classes[ci].name;
      v.load = [spec, dims, vseed, label] {
        VideoVolume vol = synthesize_texture(spec, dims, vseed);
        vol.label = label;
        return vol;
      };
      ds.videos.push_back(std::move(v));
    }
  }
  return ds;
}

void write_synthetic_corpus(const fs::path& dir,
                            const std::vector<SynthClass>& classes,
                            int videos_per_class, VolumeDims dims,
                            uint64_t seed) {
  const Dataset ds = synthetic_dataset(classes, videos_per_class, dims, seed);
  for (const auto& v : ds.videos) {
    const fs::path out = dir / (v.id + ".lpvol");
    fs::create_directories(out.parent_path());
    save_raw_volume(v.load(), out);
  }
}

}  // namespace lp2dh
