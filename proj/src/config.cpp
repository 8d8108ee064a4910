#include "fairsar/config.hpp"

#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>

namespace fairsar {

namespace {

std::string trim(const std::string& s) {
  const std::size_t a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return "";
  const std::size_t b = s.find_last_not_of(" \t");
  return s.substr(a, b - a + 1);
}

long to_long(const std::string& v, const std::string& key) {
  std::size_t used = 0;
  long x;
  try {
    x = std::stol(v, &used);
  } catch (const std::exception&) {
    throw schema_error("config: bad integer for " + key + ": '" + v + "'");
  }
  if (used != v.size()) throw schema_error("config: bad integer for " + key + ": '" + v + "'");
  return x;
}

double to_double(const std::string& v, const std::string& key) {
  std::size_t used = 0;
  double x;
  try {
    x = std::stod(v, &used);
  } catch (const std::exception&) {
    throw schema_error("config: bad number for " + key + ": '" + v + "'");
  }
  if (used != v.size()) throw schema_error("config: bad number for " + key + ": '" + v + "'");
  return x;
}

bool to_bool(const std::string& v, const std::string& key) {
  if (v == "true") return true;
  if (v == "false") return false;
  throw schema_error("config: bad boolean for " + key + ": '" + v + "' (use true/false)");
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

Config parse_config_text(const std::string& text, const std::string& origin) {
  Config cfg;
  using Setter = std::function<void(const std::string&, const std::string&)>;
  std::map<std::string, std::map<std::string, Setter>> sections;

  auto& st = sections["stream"];
  st["kind"] = [&](const std::string& v, const std::string&) { cfg.stream.kind = v; };
  st["path"] = [&](const std::string& v, const std::string&) { cfg.stream.path = v; };
  st["preset"] = [&](const std::string& v, const std::string&) { cfg.stream.preset = v; };
  st["rounds"] = [&](const std::string& v, const std::string& k) { cfg.stream.rounds = to_long(v, k); };
  st["dim"] = [&](const std::string& v, const std::string& k) { cfg.stream.dim = to_long(v, k); };
  st["points_per_task"] = [&](const std::string& v, const std::string& k) {
    cfg.stream.points_per_task = to_long(v, k);
  };
  st["group1_prob"] = [&](const std::string& v, const std::string& k) {
    cfg.stream.group1_prob = to_double(v, k);
  };
  st["group_bias"] = [&](const std::string& v, const std::string& k) {
    cfg.stream.group_bias = to_double(v, k);
  };
  st["group_shift"] = [&](const std::string& v, const std::string& k) {
    cfg.stream.group_shift = to_double(v, k);
  };
  st["label_bias"] = [&](const std::string& v, const std::string& k) {
    cfg.stream.label_bias = to_double(v, k);
  };
  st["seed"] = [&](const std::string& v, const std::string& k) {
    cfg.stream.seed = static_cast<std::uint64_t>(to_long(v, k));
  };

  auto& al = sections["algo"];
  al["name"] = [&](const std::string& v, const std::string&) { cfg.algo.name = v; };
  al["base"] = [&](const std::string& v, const std::string& k) {
    cfg.algo.base = static_cast<int>(to_long(v, k));
  };
  al["constraints"] = [&](const std::string& v, const std::string& k) {
    cfg.algo.constraints = static_cast<int>(to_long(v, k));
  };
  al["constraint_mode"] = [&](const std::string& v, const std::string&) {
    cfg.algo.constraint_mode = v;
  };
  al["epsilon"] = [&](const std::string& v, const std::string& k) { cfg.algo.epsilon = to_double(v, k); };
  al["eta1"] = [&](const std::string& v, const std::string& k) { cfg.algo.eta1 = to_double(v, k); };
  al["eta2"] = [&](const std::string& v, const std::string& k) { cfg.algo.eta2 = to_double(v, k); };
  al["delta"] = [&](const std::string& v, const std::string& k) { cfg.algo.delta = to_double(v, k); };
  al["n_meta"] = [&](const std::string& v, const std::string& k) {
    cfg.algo.n_meta = static_cast<int>(to_long(v, k));
  };
  al["n_inner"] = [&](const std::string& v, const std::string& k) {
    cfg.algo.n_inner = static_cast<int>(to_long(v, k));
  };
  al["support_frac"] = [&](const std::string& v, const std::string& k) {
    cfg.algo.support_frac = to_double(v, k);
  };
  al["strongly_convex"] = [&](const std::string& v, const std::string& k) {
    cfg.algo.strongly_convex = to_bool(v, k);
  };
  al["l2_mu"] = [&](const std::string& v, const std::string& k) { cfg.algo.l2_mu = to_double(v, k); };
  al["ablation"] = [&](const std::string& v, const std::string&) { cfg.algo.ablation = v; };
  al["seed"] = [&](const std::string& v, const std::string& k) {
    cfg.algo.seed = static_cast<std::uint64_t>(to_long(v, k));
  };
  al["compare_with"] = [&](const std::string& v, const std::string&) { cfg.algo.compare_with = v; };
  al["compare_ablations"] = [&](const std::string& v, const std::string&) {
    cfg.algo.compare_ablations = v;
  };

  auto& ev = sections["eval"];
  ev["tau"] = [&](const std::string& v, const std::string&) { cfg.eval.tau = v; };
  ev["window"] = [&](const std::string& v, const std::string& k) { cfg.eval.window = to_long(v, k); };
  ev["comparator_tol"] = [&](const std::string& v, const std::string& k) {
    cfg.eval.comparator_tol = to_double(v, k);
  };
  ev["comparator_max_iters"] = [&](const std::string& v, const std::string& k) {
    cfg.eval.comparator_max_iters = to_long(v, k);
  };

  auto& ou = sections["out"];
  ou["dir"] = [&](const std::string& v, const std::string&) { cfg.out.dir = v; };

  std::istringstream in(text);
  std::string line, section;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string s = trim(line);
    if (s.empty() || s[0] == '#') continue;
    if (s.front() == '[' && s.back() == ']') {
      section = trim(s.substr(1, s.size() - 2));
      if (!sections.count(section))
        throw schema_error(origin + ":" + std::to_string(line_no) + ": unknown section [" +
                           section + "]");
      continue;
    }
    const std::size_t eq = s.find('=');
    if (eq == std::string::npos)
      throw schema_error(origin + ":" + std::to_string(line_no) + ": expected key = value");
    if (section.empty())
      throw schema_error(origin + ":" + std::to_string(line_no) + ": key outside any section");
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    auto& table = sections[section];
    auto it = table.find(key);
    if (it == table.end())
      throw schema_error(origin + ":" + std::to_string(line_no) + ": unknown key " + section +
                         "." + key);
    it->second(value, section + "." + key);
  }
  return cfg;
}

Config parse_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw schema_error("config: cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_config_text(ss.str(), path);
}

std::string serialize_config(const Config& c) {
  std::ostringstream o;
  o << "[stream]\n";
  o << "kind = " << c.stream.kind << "\n";
  o << "path = " << c.stream.path << "\n";
  o << "preset = " << c.stream.preset << "\n";
  o << "rounds = " << c.stream.rounds << "\n";
  o << "dim = " << c.stream.dim << "\n";
  o << "points_per_task = " << c.stream.points_per_task << "\n";
  o << "group1_prob = " << fmt(c.stream.group1_prob) << "\n";
  o << "group_bias = " << fmt(c.stream.group_bias) << "\n";
  o << "group_shift = " << fmt(c.stream.group_shift) << "\n";
  o << "label_bias = " << fmt(c.stream.label_bias) << "\n";
  o << "seed = " << c.stream.seed << "\n";
  o << "\n[algo]\n";
  o << "name = " << c.algo.name << "\n";
  o << "base = " << c.algo.base << "\n";
  o << "constraints = " << c.algo.constraints << "\n";
  o << "constraint_mode = " << c.algo.constraint_mode << "\n";
  o << "epsilon = " << fmt(c.algo.epsilon) << "\n";
  o << "eta1 = " << fmt(c.algo.eta1) << "\n";
  o << "eta2 = " << fmt(c.algo.eta2) << "\n";
  o << "delta = " << fmt(c.algo.delta) << "\n";
  o << "n_meta = " << c.algo.n_meta << "\n";
  o << "n_inner = " << c.algo.n_inner << "\n";
  o << "support_frac = " << fmt(c.algo.support_frac) << "\n";
  o << "strongly_convex = " << (c.algo.strongly_convex ? "true" : "false") << "\n";
  o << "l2_mu = " << fmt(c.algo.l2_mu) << "\n";
  o << "ablation = " << c.algo.ablation << "\n";
  o << "seed = " << c.algo.seed << "\n";
  o << "compare_with = " << c.algo.compare_with << "\n";
  o << "compare_ablations = " << c.algo.compare_ablations << "\n";
  o << "\n[eval]\n";
  o << "tau = " << c.eval.tau << "\n";
  o << "window = " << c.eval.window << "\n";
  o << "comparator_tol = " << fmt(c.eval.comparator_tol) << "\n";
  o << "comparator_max_iters = " << c.eval.comparator_max_iters << "\n";
  o << "\n[out]\n";
  o << "dir = " << c.out.dir << "\n";
  return o.str();
}

EnvironmentSpec build_environment(const StreamConfig& s) {
  if (s.kind != "synthetic")
    throw std::invalid_argument("build_environment: stream kind must be synthetic");
  EnvironmentSpec spec;
  spec.d = s.dim;
  spec.n_per_task = s.points_per_task;
  spec.seed = s.seed;

  // ground truth drawn from a stream distinct from the data stream
  std::mt19937_64 wrng(s.seed ^ 0x9E3779B97F4A7C15ULL);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector w(s.dim + 1);
  for (Eigen::Index i = 0; i < s.dim; ++i) w(i) = normal(wrng);
  w(s.dim) = s.label_bias;

  DomainSpec base_dom{w, 1, s.group_bias, s.group1_prob, s.group_shift};

  auto seg = [&](long len, int flip, double scale) {
    DomainSpec d = base_dom;
    d.flip_sign = flip;
    d.group_bias = s.group_bias * scale;
    d.group_shift = s.group_shift * scale;
    spec.segments.emplace_back(len, d);
  };

  const long T = s.rounds;
  if (s.preset == "stationary") {
    seg(T, 1, 1.0);
  } else if (s.preset == "movielens-like") {
    const long a = T / 3, b = T / 3;
    seg(a, 1, 1.0);
    seg(b, -1, 1.0);
    seg(T - a - b, 1, 1.0);
  } else if (s.preset == "flip-half") {
    const long a = T / 2;
    seg(a, 1, 1.0);
    seg(T - a, -1, 1.0);
  } else if (s.preset == "stop-frisk-hilo") {
    // fairness level high to low: group signal strengthens over segments
    const long a = T / 3, b = T / 3;
    seg(a, 1, 0.5);
    seg(b, 1, 1.0);
    seg(T - a - b, 1, 1.5);
  } else if (s.preset == "stop-frisk-lohi") {
    const long a = T / 3, b = T / 3;
    seg(a, 1, 1.5);
    seg(b, 1, 1.0);
    seg(T - a - b, 1, 0.5);
  } else {
    throw schema_error("config: unknown stream.preset '" + s.preset + "'");
  }
  spec.validate();
  return spec;
}

}  // namespace fairsar
