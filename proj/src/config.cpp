#include "lp2dh/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace lp2dh {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void parse_fail(const std::string& src, int line,
                             const std::string& msg) {
  throw std::runtime_error(src + ":" + std::to_string(line) + ": " + msg);
}

std::vector<int> parse_int_list(const std::string& v) {
  std::vector<int> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    out.push_back(std::stoi(trim(item)));
  }
  return out;
}

}  // namespace

HashConfig PipelineConfig::hash_config(size_t scale_index) const {
  HashConfig h;
  h.M = bits.at(scale_index);
  h.lambda1 = lambda1;
  h.lambda2 = lambda2;
  h.lambda3 = lambda3;
  h.theta_rel = theta_rel;
  h.max_outer = max_outer;
  h.inner_steps = inner_steps;
  h.K = K;
  h.seed = seed;
  return h;
}

void PipelineConfig::validate() const {
  auto bad = [](const std::string& msg) {
    throw std::invalid_argument("config: " + msg);
  };
  if (scales.empty()) bad("scales must not be empty");
  for (int P : scales) {
    if (P < 3 || P % 2 == 0) bad("scales must be odd integers >= 3");
  }
  if (bits.size() != scales.size()) {
    bad("M must list one code length per scale");
  }
  for (size_t i = 0; i < scales.size(); ++i) {
    const int D = scales[i] * scales[i] * scales[i] - 1;
    if (bits[i] < 1 || bits[i] > D) {
      bad("M for scale " + std::to_string(scales[i]) +
          " must lie in [1, " + std::to_string(D) + "]");
    }
  }
  if (C < 1) bad("C must be >= 1");
  if (K < 1) bad("K must be >= 1");
  if (lambda1 < 0 || lambda2 < 0 || lambda3 < 0) bad("lambdas must be >= 0");
  if (theta_rel <= 0) bad("theta_rel must be > 0");
  if (max_outer < 1) bad("max_outer must be >= 1");
  if (inner_steps < 1) bad("inner_steps must be >= 1");
  if (max_train_pdvs < 1) bad("max_train_pdvs must be >= 1");
  if (max_kmeans_codes < 0) bad("max_kmeans_codes must be >= 0");
  if (pca_energy < 0 || pca_energy > 1) bad("pca_energy must lie in [0, 1]");
  if (pca_dim < 0) bad("pca_dim must be >= 0");
}

PipelineConfig parse_config_text(const std::string& text,
                                 const std::string& src) {
  PipelineConfig cfg;
  bool bits_given = false;
  bool scales_given = false;
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const auto hash = raw.find('#');
    std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      parse_fail(src, lineno, "expected 'key = value': " + line);
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key.empty() || val.empty()) {
      parse_fail(src, lineno, "expected 'key = value': " + line);
    }
    try {
      if (key == "scales") {
        cfg.scales = parse_int_list(val);
        scales_given = true;
      } else if (key == "M") {
        cfg.bits = parse_int_list(val);
        bits_given = true;
      } else if (key == "C") {
        cfg.C = std::stoi(val);
      } else if (key == "K") {
        cfg.K = std::stoi(val);
      } else if (key == "lambda1") {
        cfg.lambda1 = std::stod(val);
      } else if (key == "lambda2") {
        cfg.lambda2 = std::stod(val);
      } else if (key == "lambda3") {
        cfg.lambda3 = std::stod(val);
      } else if (key == "theta_rel") {
        cfg.theta_rel = std::stod(val);
      } else if (key == "max_outer") {
        cfg.max_outer = std::stoi(val);
      } else if (key == "inner_steps") {
        cfg.inner_steps = std::stoi(val);
      } else if (key == "max_train_pdvs") {
        cfg.max_train_pdvs = std::stoll(val);
      } else if (key == "max_kmeans_codes") {
        cfg.max_kmeans_codes = std::stoll(val);
      } else if (key == "pca_energy") {
        cfg.pca_energy = std::stod(val);
      } else if (key == "pca_dim") {
        cfg.pca_dim = std::stoi(val);
      } else if (key == "seed") {
        cfg.seed = std::stoull(val);
      } else {
        parse_fail(src, lineno, "unknown key '" + key + "'");
      }
    } catch (const std::invalid_argument&) {
      parse_fail(src, lineno, "invalid value for '" + key + "': " + val);
    } catch (const std::out_of_range&) {
      parse_fail(src, lineno, "value out of range for '" + key + "': " + val);
    }
  }
  if (scales_given && !bits_given) {
    // default code lengths for the standard scales; others must be explicit
    cfg.bits.clear();
    for (int P : cfg.scales) {
      if (P == 3) {
        cfg.bits.push_back(16);
      } else if (P == 5) {
        cfg.bits.push_back(40);
      } else {
        throw std::runtime_error(src + ": no default M for scale " +
                                 std::to_string(P) + "; set M explicitly");
      }
    }
  }
  cfg.validate();
  return cfg;
}

PipelineConfig parse_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open config file: " + path.string());
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path.string());
}

std::string config_to_text(const PipelineConfig& cfg) {
  std::ostringstream out;
  auto list = [](const std::vector<int>& v) {
    std::string s;
    for (size_t i = 0; i < v.size(); ++i) {
      if (i) s += ",";
      s += std::to_string(v[i]);
    }
    return s;
  };
  out << "scales = " << list(cfg.scales) << "\n";
  out << "M = " << list(cfg.bits) << "\n";
  out << "C = " << cfg.C << "\n";
  out << "K = " << cfg.K << "\n";
  out.precision(17);
  out << "lambda1 = " << cfg.lambda1 << "\n";
  out << "lambda2 = " << cfg.lambda2 << "\n";
  out << "lambda3 = " << cfg.lambda3 << "\n";
  out << "theta_rel = " << cfg.theta_rel << "\n";
  out << "max_outer = " << cfg.max_outer << "\n";
  out << "inner_steps = " << cfg.inner_steps << "\n";
  out << "max_train_pdvs = " << cfg.max_train_pdvs << "\n";
  out << "max_kmeans_codes = " << cfg.max_kmeans_codes << "\n";
  out << "pca_energy = " << cfg.pca_energy << "\n";
  out << "pca_dim = " << cfg.pca_dim << "\n";
  out << "seed = " << cfg.seed << "\n";
  return out.str();
}

}  // namespace lp2dh
