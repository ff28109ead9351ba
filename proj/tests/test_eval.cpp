#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <unistd.h>

#include <algorithm>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "lp2dh/classify.hpp"
#include "lp2dh/protocols.hpp"

using namespace lp2dh;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("lp2dh_eval_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

PipelineConfig tiny_config() {
  PipelineConfig cfg;
  cfg.scales = {3};
  cfg.bits = {6};
  cfg.C = 12;
  cfg.K = 4;
  cfg.max_outer = 12;
  cfg.inner_steps = 5;
  cfg.max_train_pdvs = 1500;
  cfg.max_kmeans_codes = 2000;
  cfg.pca_energy = 0.99;
  cfg.seed = 42;
  return cfg;
}

Dataset two_class_set(int per_class, VolumeDims dims, double sigma) {
  std::vector<SynthClass> classes(2);
  classes[0] = {"horiz", {TextureKind::grating, 0.0, 0.2, 0.1, sigma}};
  classes[1] = {"vert",
                {TextureKind::grating, std::numbers::pi / 2, 0.2, 0.1, sigma}};
  return synthetic_dataset(classes, per_class, dims, 7);
}

}  // namespace

TEST_CASE("cosine distance basics") {
  Eigen::VectorXd u(3), v(3);
  u << 1, 2, 3;
  CHECK(cosine_distance(u, u) == doctest::Approx(0.0));
  v << -1, 2, -1;  // orthogonal to u
  CHECK(cosine_distance(u, v) == doctest::Approx(1.0));
  CHECK(cosine_distance(u, (-u).eval()) == doctest::Approx(2.0));
  v.setZero();
  CHECK_THROWS_AS(cosine_distance(u, v), std::invalid_argument);
  Eigen::VectorXd w(2);
  w << 1, 1;
  CHECK_THROWS_AS(cosine_distance(u, w), std::invalid_argument);
}

TEST_CASE("nn classification follows cosine distance") {
  LabeledFeatureSet train;
  train.features.resize(3, 2);
  train.features << 1, 0, 0, 1, 1, 1;
  train.labels = {"a", "b", "c"};
  train.video_ids = {"a/0", "b/0", "c/0"};

  Eigen::VectorXd q(2);
  q << 1, 0.1;
  CHECK(nn_classify(train, q) == "a");
  // query equal to a training feature
  q << 1, 1;
  CHECK(nn_classify(train, q) == "c");
  // positive scaling never changes the answer
  CHECK(nn_classify(train, (1000.0 * q).eval()) == "c");
  q << 0.1, 1;
  CHECK(nn_classify(train, q) == "b");

  LabeledFeatureSet empty;
  empty.features.resize(0, 2);
  CHECK_THROWS_AS(nn_classify(empty, q), std::invalid_argument);
}

TEST_CASE("single training sample always wins") {
  LabeledFeatureSet train;
  train.features.resize(1, 3);
  train.features << 1, 2, 3;
  train.labels = {"only"};
  train.video_ids = {"only/0"};
  Eigen::VectorXd q(3);
  q << -5, 0.2, 9;
  CHECK(nn_classify(train, q) == "only");
}

TEST_CASE("nn ties resolve to the smaller training index") {
  LabeledFeatureSet train;
  train.features.resize(2, 2);
  train.features << 2, 0, 1, 0;  // same direction, same cosine distance
  train.labels = {"first", "second"};
  train.video_ids = {"x/0", "x/1"};
  Eigen::VectorXd q(2);
  q << 1, 0;
  CHECK(nn_classify(train, q) == "first");
}

TEST_CASE("leave-one-out structure on a minimal set") {
  const Dataset ds = two_class_set(2, VolumeDims{10, 10, 10}, 4.0);
  PipelineConfig cfg = tiny_config();
  cfg.C = 6;
  const EvalReport report = protocol_leave_one_out(ds, cfg, 5);
  CHECK(report.per_trial.size() == 2);     // folds = min class size
  CHECK(report.confusion.sum() == 4);      // 2 folds x 2 test videos
  CHECK(report.protocol == "loo");
  // row sums equal the per-class test totals
  for (int r = 0; r < 2; ++r) CHECK(report.confusion.row(r).sum() == 2);
  CHECK(report.accuracy ==
        doctest::Approx(static_cast<double>(report.confusion.trace()) /
                        report.confusion.sum()));
}

TEST_CASE("perfectly separable classes reach accuracy 1.0") {
  const Dataset ds = two_class_set(4, VolumeDims{12, 12, 12}, 0.0);
  PipelineConfig cfg = tiny_config();
  cfg.C = 8;
  const EvalReport report = protocol_kfold(ds, 4, cfg);
  CHECK(report.per_trial.size() == 4);
  CHECK(report.accuracy == doctest::Approx(1.0));
  for (double a : report.per_trial) CHECK(a == doctest::Approx(1.0));
}

TEST_CASE("kfold rejects too-small classes and bad groupings") {
  const Dataset ds = two_class_set(3, VolumeDims{10, 10, 10}, 2.0);
  PipelineConfig cfg = tiny_config();
  CHECK_THROWS_WITH_AS(protocol_kfold(ds, 4, cfg), doctest::Contains("horiz"),
                       std::runtime_error);
  const std::map<std::string, int> bad = {{"horiz/v000", 9}};
  CHECK_THROWS_AS(protocol_kfold(ds, 2, cfg, &bad), std::runtime_error);
}

TEST_CASE("explicit kfold grouping is honored") {
  const Dataset ds = two_class_set(2, VolumeDims{10, 10, 10}, 2.0);
  PipelineConfig cfg = tiny_config();
  cfg.C = 6;
  std::map<std::string, int> grouping;
  for (const auto& v : ds.videos) {
    grouping[v.id] = v.id.back() == '0' ? 0 : 1;
  }
  const EvalReport report = protocol_kfold(ds, 2, cfg, &grouping);
  CHECK(report.per_trial.size() == 2);
  CHECK(report.confusion.sum() == 4);
}

TEST_CASE("random split is stratified, seeded, and reproducible") {
  const Dataset ds = two_class_set(6, VolumeDims{10, 10, 10}, 3.0);
  PipelineConfig cfg = tiny_config();
  cfg.C = 6;
  const EvalReport a = protocol_random_split(ds, 0.5, 3, cfg, 7);
  const EvalReport b = protocol_random_split(ds, 0.5, 3, cfg, 7);
  CHECK(a.per_trial.size() == 3);
  CHECK(a.per_trial == b.per_trial);
  CHECK(a.confusion == b.confusion);
  // each trial tests half of each class: 3 videos x 2 classes x 3 trials
  CHECK(a.confusion.sum() == 18);

  const EvalReport c = protocol_random_split(ds, 0.5, 1, cfg, 8);
  CHECK(c.per_trial.size() == 1);
}

TEST_CASE("protocols reject singleton classes") {
  Dataset ds = two_class_set(2, VolumeDims{10, 10, 10}, 1.0);
  ds.videos.pop_back();  // class "vert" keeps one video
  PipelineConfig cfg = tiny_config();
  CHECK_THROWS_WITH_AS(protocol_leave_one_out(ds, cfg, 1),
                       doctest::Contains("vert"), std::runtime_error);
  CHECK_THROWS_WITH_AS(protocol_random_split(ds, 0.5, 2, cfg, 1),
                       doctest::Contains("vert"), std::runtime_error);
}

TEST_CASE("report files are written, parseable, and faithful") {
  EvalReport report;
  report.protocol = "split:0.5,3";
  report.seed = 9;
  report.classes = {"fire", "sea", "smoke"};
  report.per_trial = {0.875, 1.0, 0.9375};
  report.confusion.resize(3, 3);
  report.confusion << 14, 1, 1, 0, 16, 0, 2, 0, 14;
  report.accuracy = static_cast<double>(report.confusion.trace()) /
                    report.confusion.sum();

  TempDir tmp;
  write_report(report, tmp.path);

  // accuracy.csv round-trips per-trial values at 6 fractional digits
  std::ifstream acc(tmp.path / "accuracy.csv");
  std::string line;
  std::getline(acc, line);
  CHECK(line == "trial,accuracy");
  for (size_t i = 0; i < report.per_trial.size(); ++i) {
    REQUIRE(std::getline(acc, line));
    const auto comma = line.find(',');
    CHECK(std::stoull(line.substr(0, comma)) == i + 1);
    const double parsed = std::stod(line.substr(comma + 1));
    CHECK(std::abs(parsed - report.per_trial[i]) <= 5e-7);
  }
  REQUIRE(std::getline(acc, line));
  CHECK(line.rfind("mean,", 0) == 0);
  CHECK(std::abs(std::stod(line.substr(5)) - report.mean_trial_accuracy()) <=
        5e-7);
  REQUIRE(std::getline(acc, line));
  CHECK(line.rfind("stddev,", 0) == 0);

  // confusion.csv has a header row/column and the right cell count
  std::ifstream conf(tmp.path / "confusion.csv");
  std::getline(conf, line);
  CHECK(line == "true_class,fire,sea,smoke");
  int rows = 0;
  while (std::getline(conf, line)) {
    ++rows;
    CHECK(std::count(line.begin(), line.end(), ',') == 3);
  }
  CHECK(rows == 3);

  CHECK(fs::exists(tmp.path / "report.txt"));
}

TEST_CASE("diagonal confusion for a perfect report") {
  EvalReport report;
  report.protocol = "loo";
  report.classes = {"a", "b"};
  report.per_trial = {1.0, 1.0};
  report.confusion.resize(2, 2);
  report.confusion << 5, 0, 0, 5;
  report.accuracy = 1.0;
  TempDir tmp;
  write_report(report, tmp.path);
  std::ifstream conf(tmp.path / "confusion.csv");
  std::string line;
  std::getline(conf, line);
  std::getline(conf, line);
  CHECK(line == "a,5,0");
  std::getline(conf, line);
  CHECK(line == "b,0,5");
}

TEST_CASE("9-class confusion output shape") {
  EvalReport report;
  report.protocol = "split:0.5,20";
  for (int i = 0; i < 9; ++i) {
    report.classes.push_back("c" + std::to_string(i));
  }
  report.confusion = Eigen::MatrixXi::Identity(9, 9) * 4;
  report.per_trial = {1.0};
  report.accuracy = 1.0;
  TempDir tmp;
  write_report(report, tmp.path);
  std::ifstream conf(tmp.path / "confusion.csv");
  std::string line;
  std::getline(conf, line);
  CHECK(std::count(line.begin(), line.end(), ',') == 9);
  int rows = 0;
  int cells = 0;
  while (std::getline(conf, line)) {
    ++rows;
    cells += static_cast<int>(std::count(line.begin(), line.end(), ','));
  }
  CHECK(rows == 9);
  CHECK(cells == 81);
}
