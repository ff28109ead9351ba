#include "lp2dh/model_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace lp2dh {

namespace {

constexpr char kMagic[6] = {'L', 'P', '2', 'D', 'H', '\0'};

void put_u32(std::ostream& out, uint32_t v) {
  const unsigned char b[4] = {
      static_cast<unsigned char>(v & 0xff),
      static_cast<unsigned char>((v >> 8) & 0xff),
      static_cast<unsigned char>((v >> 16) & 0xff),
      static_cast<unsigned char>((v >> 24) & 0xff)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw std::runtime_error("model file: truncated u32");
  return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
         (static_cast<uint32_t>(b[2]) << 16) |
         (static_cast<uint32_t>(b[3]) << 24);
}

void put_f64(std::ostream& out, double v) {
  uint64_t u;
  std::memcpy(&u, &v, 8);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((u >> (8 * i)) & 0xff);
  out.write(reinterpret_cast<const char*>(b), 8);
}

double get_f64(std::istream& in) {
  unsigned char b[8];
  in.read(reinterpret_cast<char*>(b), 8);
  if (!in) throw std::runtime_error("model file: truncated f64");
  uint64_t u = 0;
  for (int i = 0; i < 8; ++i) u |= static_cast<uint64_t>(b[i]) << (8 * i);
  double v;
  std::memcpy(&v, &u, 8);
  return v;
}

bool is_string_section(const std::string& name) {
  return name.rfind("str/", 0) == 0;
}

void write_matrix_section(std::ostream& out, const std::string& name,
                          const Eigen::MatrixXd& m) {
  put_u32(out, static_cast<uint32_t>(name.size()));
  out.write(name.data(), static_cast<std::streamsize>(name.size()));
  put_u32(out, 2);
  put_u32(out, static_cast<uint32_t>(m.rows()));
  put_u32(out, static_cast<uint32_t>(m.cols()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) put_f64(out, m(r, c));
  }
}

void write_string_section(std::ostream& out, const std::string& name,
                          const std::string& payload) {
  put_u32(out, static_cast<uint32_t>(name.size()));
  out.write(name.data(), static_cast<std::streamsize>(name.size()));
  put_u32(out, 1);
  put_u32(out, static_cast<uint32_t>(payload.size()));
  out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
}

struct Sections {
  std::map<std::string, Eigen::MatrixXd> matrices;
  std::map<std::string, std::string> strings;

  const Eigen::MatrixXd& mat(const std::string& name) const {
    const auto it = matrices.find(name);
    if (it == matrices.end()) {
      throw std::runtime_error("model file: missing section " + name);
    }
    return it->second;
  }
  const std::string& str(const std::string& name) const {
    const auto it = strings.find(name);
    if (it == strings.end()) {
      throw std::runtime_error("model file: missing section " + name);
    }
    return it->second;
  }
};

Sections read_sections(std::istream& in) {
  Sections s;
  while (true) {
    int peek = in.peek();
    if (peek == EOF) break;
    const uint32_t name_len = get_u32(in);
    if (name_len == 0 || name_len > 4096) {
      throw std::runtime_error("model file: bad section name length");
    }
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    if (!in) throw std::runtime_error("model file: truncated section name");
    const uint32_t rank = get_u32(in);
    std::vector<uint32_t> dims(rank);
    for (uint32_t i = 0; i < rank; ++i) dims[i] = get_u32(in);
    if (is_string_section(name)) {
      if (rank != 1) throw std::runtime_error("model file: bad string section " + name);
      std::string payload(dims[0], '\0');
      in.read(payload.data(), dims[0]);
      if (!in) throw std::runtime_error("model file: truncated section " + name);
      s.strings[name] = std::move(payload);
    } else {
      if (rank != 2) throw std::runtime_error("model file: bad matrix section " + name);
      Eigen::MatrixXd m(dims[0], dims[1]);
      for (uint32_t r = 0; r < dims[0]; ++r) {
        for (uint32_t c = 0; c < dims[1]; ++c) m(r, c) = get_f64(in);
      }
      s.matrices[name] = std::move(m);
    }
  }
  return s;
}

std::vector<std::string> split_lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string line;
  while (std::getline(in, line)) out.push_back(line);
  return out;
}

std::string join_lines(const std::vector<std::string>& v) {
  std::string s;
  for (const auto& x : v) {
    s += x;
    s += '\n';
  }
  return s;
}

}  // namespace

void save_model(const PipelineModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write model file: " + path.string());
  out.write(kMagic, sizeof(kMagic));
  put_u32(out, model.format_version);

  write_string_section(out, "str/config", config_to_text(model.config));

  for (size_t i = 0; i < model.config.scales.size(); ++i) {
    const std::string tag = "scale" + std::to_string(model.config.scales[i]);
    const HashingModel& hm = model.hash_models.at(i);
    write_matrix_section(out, "mat/" + tag + "/W", hm.W);
    Eigen::MatrixXd hstats(1, 5);
    hstats << hm.stats.final_loss, static_cast<double>(hm.stats.outer_iterations),
        hm.stats.grad_norm, hm.stats.initial_grad_norm,
        hm.stats.rank_deficient_init ? 1.0 : 0.0;
    write_matrix_section(out, "mat/" + tag + "/train_stats", hstats);

    const Codebook& cb = model.codebooks.at(i);
    write_matrix_section(out, "mat/" + tag + "/centroids", cb.centroids);
    Eigen::MatrixXd kstats(1, 3);
    kstats << cb.stats.inertia, static_cast<double>(cb.stats.iterations),
        static_cast<double>(cb.stats.effective_C);
    write_matrix_section(out, "mat/" + tag + "/kmeans_stats", kstats);
  }

  Eigen::MatrixXd flags(1, 1);
  flags << (model.pca_applied ? 1.0 : 0.0);
  write_matrix_section(out, "mat/pca/applied", flags);
  if (model.pca_applied) {
    write_matrix_section(out, "mat/pca/mean", model.pca.mean.transpose());
    write_matrix_section(out, "mat/pca/components", model.pca.components);
    write_matrix_section(out, "mat/pca/evr",
                         model.pca.explained_variance_ratio.transpose());
  }

  write_matrix_section(out, "mat/train/features", model.train_features.features);
  write_string_section(out, "str/train/labels",
                       join_lines(model.train_features.labels));
  write_string_section(out, "str/train/video_ids",
                       join_lines(model.train_features.video_ids));
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

PipelineModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open model file: " + path.string());
  char magic[6];
  in.read(magic, 6);
  if (!in || std::memcmp(magic, kMagic, 6) != 0) {
    throw std::runtime_error("not an LP2DH model file: " + path.string());
  }
  PipelineModel model;
  model.format_version = get_u32(in);
  if (model.format_version != 1) {
    throw std::runtime_error("unsupported model format version " +
                             std::to_string(model.format_version));
  }
  const Sections s = read_sections(in);
  model.config = parse_config_text(s.str("str/config"), path.string() + ":config");

  for (size_t i = 0; i < model.config.scales.size(); ++i) {
    const std::string tag = "scale" + std::to_string(model.config.scales[i]);
    HashingModel hm;
    hm.W = s.mat("mat/" + tag + "/W");
    hm.scale = model.config.scales[i];
    hm.config = model.config.hash_config(i);
    const Eigen::MatrixXd& hs = s.mat("mat/" + tag + "/train_stats");
    hm.stats.final_loss = hs(0, 0);
    hm.stats.outer_iterations = static_cast<int>(hs(0, 1));
    hm.stats.grad_norm = hs(0, 2);
    hm.stats.initial_grad_norm = hs(0, 3);
    hm.stats.rank_deficient_init = hs(0, 4) != 0.0;
    model.hash_models.push_back(std::move(hm));

    Codebook cb;
    cb.centroids = s.mat("mat/" + tag + "/centroids");
    cb.scale = model.config.scales[i];
    const Eigen::MatrixXd& ks = s.mat("mat/" + tag + "/kmeans_stats");
    cb.stats.inertia = ks(0, 0);
    cb.stats.iterations = static_cast<int>(ks(0, 1));
    cb.stats.effective_C = static_cast<int>(ks(0, 2));
    cb.stats.requested_C = model.config.C;
    model.codebooks.push_back(std::move(cb));
  }

  model.pca_applied = s.mat("mat/pca/applied")(0, 0) != 0.0;
  if (model.pca_applied) {
    model.pca.mean = s.mat("mat/pca/mean").row(0).transpose();
    model.pca.components = s.mat("mat/pca/components");
    model.pca.explained_variance_ratio = s.mat("mat/pca/evr").row(0).transpose();
  }

  model.train_features.features = s.mat("mat/train/features");
  model.train_features.labels = split_lines(s.str("str/train/labels"));
  model.train_features.video_ids = split_lines(s.str("str/train/video_ids"));
  if (model.train_features.labels.size() !=
          static_cast<size_t>(model.train_features.features.rows()) ||
      model.train_features.video_ids.size() !=
          model.train_features.labels.size()) {
    throw std::runtime_error("model file: inconsistent training feature set");
  }
  return model;
}

}  // namespace lp2dh
