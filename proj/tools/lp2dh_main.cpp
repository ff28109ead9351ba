#include <CLI11.hpp>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <set>

#include "lp2dh/model_io.hpp"
#include "lp2dh/pipeline.hpp"
#include "lp2dh/protocols.hpp"
#include "lp2dh/selftest.hpp"

namespace {

using namespace lp2dh;

PipelineConfig load_config(const std::string& config_path, uint64_t seed,
                           bool seed_given, int threads) {
  PipelineConfig cfg;
  if (!config_path.empty()) cfg = parse_config_file(config_path);
  if (seed_given) cfg.seed = seed;
  cfg.threads = threads;
  cfg.validate();
  return cfg;
}

int cmd_train(const std::string& data_root, const std::string& config_path,
              const std::string& out_model, uint64_t seed, bool seed_given,
              int threads) {
  const PipelineConfig cfg = load_config(config_path, seed, seed_given, threads);
  Dataset ds = scan_corpus(data_root);
  if (ds.classes().size() < 2) {
    throw std::runtime_error("training corpus needs >= 2 classes, found " +
                             std::to_string(ds.classes().size()));
  }
  std::cout << "training on " << ds.videos.size() << " videos / "
            << ds.classes().size() << " classes\n";
  const PipelineModel model = train_pipeline(ds, cfg, &std::cout);
  for (size_t i = 0; i < model.hash_models.size(); ++i) {
    const auto& st = model.hash_models[i].stats;
    std::printf(
        "scale %d: loss %.6g, %d outer iters, %d steps, grad %.3e (init %.3e), %s\n",
        model.config.scales[i], st.final_loss, st.outer_iterations,
        st.accepted_steps, st.grad_norm, st.initial_grad_norm,
        st.stop_reason.c_str());
    const auto& ks = model.codebooks[i].stats;
    std::printf("scale %d: codebook C=%d (effective %d), inertia %.6g, %d iters\n",
                model.config.scales[i], ks.requested_C, ks.effective_C,
                ks.inertia, ks.iterations);
  }
  if (model.pca_applied) {
    std::printf("pca: retained %d dims\n", model.pca.retained_dim());
  }
  save_model(model, out_model);
  std::cout << "model written to " << out_model << "\n";
  return 0;
}

int cmd_featurize(const std::string& model_path, const std::string& video_path,
                  const std::string& out_path, bool pre_pca) {
  const PipelineModel model = load_model(model_path);
  namespace fs = std::filesystem;
  const VideoVolume vol = fs::is_directory(video_path)
                              ? load_frame_dir(video_path)
                              : load_raw_volume(video_path);
  const FeatureVector fv = featurize(model, vol);
  const Eigen::VectorXd& values = pre_pca ? fv.pre_pca : fv.values;
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + out_path);
  char buf[40];
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", values[i]);
    out << (i ? "," : "") << buf;
  }
  out << "\n";
  return 0;
}

int cmd_eval(const std::string& data_root, const std::string& protocol,
             const std::string& config_path, const std::string& out_dir,
             const std::string& class_map, uint64_t seed, bool seed_given,
             int threads) {
  const PipelineConfig cfg = load_config(config_path, seed, seed_given, threads);
  Dataset ds = scan_corpus(data_root);
  if (!class_map.empty()) apply_class_map(ds, class_map);

  EvalReport report;
  if (protocol == "loo") {
    report = protocol_leave_one_out(ds, cfg, cfg.seed);
  } else if (protocol.rfind("kfold:", 0) == 0) {
    report = protocol_kfold(ds, std::stoi(protocol.substr(6)), cfg);
  } else if (protocol.rfind("split:", 0) == 0) {
    const std::string rest = protocol.substr(6);
    const auto comma = rest.find(',');
    if (comma == std::string::npos) {
      throw std::runtime_error("--protocol split needs 'split:<fraction>,<trials>'");
    }
    report = protocol_random_split(ds, std::stod(rest.substr(0, comma)),
                                   std::stoi(rest.substr(comma + 1)), cfg,
                                   cfg.seed);
  } else {
    throw std::runtime_error("unknown protocol '" + protocol +
                             "' (use loo | kfold:<k> | split:<fraction>,<trials>)");
  }
  write_report(report, out_dir);
  std::printf("%s: mean accuracy %.4f over %zu folds/trials (overall %.4f)\n",
              report.protocol.c_str(), report.mean_trial_accuracy(),
              report.per_trial.size(), report.accuracy);
  std::cout << "reports written to " << out_dir << "\n";
  return 0;
}

int cmd_info(const std::string& model_path) {
  const PipelineModel model = load_model(model_path);
  std::cout << "LP2DH model v" << model.format_version << "\n";
  std::cout << "config:\n" << config_to_text(model.config);
  for (size_t i = 0; i < model.hash_models.size(); ++i) {
    const auto& hm = model.hash_models[i];
    std::printf("scale %d: W %lldx%lld, codebook %dx%lld\n", hm.scale,
                static_cast<long long>(hm.W.rows()),
                static_cast<long long>(hm.W.cols()),
                model.codebooks[i].size(),
                static_cast<long long>(model.codebooks[i].centroids.cols()));
  }
  if (model.pca_applied) {
    std::printf("pca: %d components over %lld dims\n", model.pca.retained_dim(),
                static_cast<long long>(model.pca.mean.size()));
  } else {
    std::cout << "pca: disabled\n";
  }
  std::printf("training features: %lld x %lld (%zu classes)\n",
              static_cast<long long>(model.train_features.features.rows()),
              static_cast<long long>(model.train_features.features.cols()),
              [&] {
                std::set<std::string> s(model.train_features.labels.begin(),
                                        model.train_features.labels.end());
                return s.size();
              }());
  return 0;
}

int cmd_synth(const std::string& out_dir, int videos, int frames, int rows,
              int cols, double sigma, uint64_t seed) {
  write_synthetic_corpus(out_dir, default_synth_classes(sigma), videos,
                         VolumeDims{frames, rows, cols}, seed);
  std::cout << "wrote " << 4 * videos << " videos to " << out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LP2DH dynamic-texture recognition pipeline"};
  app.require_subcommand(1);

  std::string data_root, config_path, out_path, model_path, video_path;
  std::string protocol = "loo", class_map;
  uint64_t seed = 42;
  int threads = 1;
  bool pre_pca = false;
  int videos = 20, frames = 40, rows = 40, cols = 40;
  double sigma = 10.0;

  auto* train = app.add_subcommand("train", "train the full pipeline on a corpus");
  train->add_option("--data", data_root, "corpus root (<class>/<video>)")->required();
  train->add_option("--out", out_path, "output model file")->required();
  train->add_option("--config", config_path, "key = value config file");
  auto* train_seed = train->add_option("--seed", seed, "seed override");
  train->add_option("--threads", threads, "worker threads");

  auto* feat = app.add_subcommand("featurize", "write one video's feature row");
  feat->add_option("--model", model_path, "trained model file")->required();
  feat->add_option("--video", video_path, "frame directory or .lpvol file")->required();
  feat->add_option("--out", out_path, "output CSV")->required();
  feat->add_flag("--pre-pca", pre_pca, "emit the concatenated histograms instead");

  auto* eval = app.add_subcommand("eval", "run an evaluation protocol");
  eval->add_option("--data", data_root, "corpus root")->required();
  eval->add_option("--protocol", protocol, "loo | kfold:<k> | split:<fraction>,<trials>");
  eval->add_option("--out", out_path, "report directory")->required();
  eval->add_option("--config", config_path, "key = value config file");
  eval->add_option("--class-map", class_map, "old_class,new_class CSV relabeling");
  auto* eval_seed = eval->add_option("--seed", seed, "seed override");
  eval->add_option("--threads", threads, "worker threads");

  auto* selftest = app.add_subcommand("selftest", "run the fast invariant battery");

  auto* info = app.add_subcommand("info", "describe a model file");
  info->add_option("--model", model_path, "model file")->required();

  auto* synth = app.add_subcommand("synth", "write a synthetic corpus");
  synth->add_option("--out", out_path, "corpus directory")->required();
  synth->add_option("--videos", videos, "videos per class");
  synth->add_option("--frames", frames, "frames per video");
  synth->add_option("--rows", rows, "frame rows");
  synth->add_option("--cols", cols, "frame cols");
  synth->add_option("--sigma", sigma, "noise level");
  synth->add_option("--seed", seed, "corpus seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed()) {
      return cmd_train(data_root, config_path, out_path, seed,
                       !train_seed->empty(), threads);
    }
    if (feat->parsed()) {
      return cmd_featurize(model_path, video_path, out_path, pre_pca);
    }
    if (eval->parsed()) {
      return cmd_eval(data_root, protocol, config_path, out_path, class_map,
                      seed, !eval_seed->empty(), threads);
    }
    if (selftest->parsed()) {
      const bool perturb = std::getenv("LP2DH_SELFTEST_PERTURB") != nullptr;
      return lp2dh::run_selftest(std::cout, perturb) == 0 ? 0 : 1;
    }
    if (info->parsed()) return cmd_info(model_path);
    if (synth->parsed()) {
      return cmd_synth(out_path, videos, frames, rows, cols, sigma, seed);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
