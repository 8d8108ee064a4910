#include "fairsar/runner.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <json.hpp>

#include "fairsar/baselines.hpp"
#include "fairsar/environment.hpp"
#include "fairsar/evaluation.hpp"
#include "fairsar/learner.hpp"

namespace fairsar {

namespace {

using nlohmann::json;

int env_threads() {
  const char* v = std::getenv("FAIRSAR_THREADS");
  if (!v || !*v) return 1;
  const int n = std::atoi(v);
  return n >= 1 ? n : 1;
}

std::string num9(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

// summary.json carries numbers rounded to 9 significant digits
double round9(double v) {
  if (!std::isfinite(v)) return v;
  return std::atof(num9(v).c_str());
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    std::size_t pos = s.find(',', start);
    if (pos == std::string::npos) pos = s.size();
    std::string item = s.substr(start, pos - start);
    const std::size_t a = item.find_first_not_of(" \t");
    if (a != std::string::npos) {
      const std::size_t b = item.find_last_not_of(" \t");
      out.push_back(item.substr(a, b - a + 1));
    }
    start = pos + 1;
  }
  return out;
}

Hyperparams hyper_from(const Config& cfg, long horizon) {
  Hyperparams hp;
  hp.horizon = horizon;
  hp.base = cfg.algo.base;
  hp.m = cfg.algo.constraints;
  hp.eta1 = cfg.algo.eta1;
  hp.eta2 = cfg.algo.eta2;
  hp.delta = cfg.algo.delta;
  hp.epsilon = cfg.algo.epsilon;
  hp.n_meta = cfg.algo.n_meta;
  hp.n_inner = cfg.algo.n_inner;
  if (cfg.algo.constraint_mode == "ddp")
    hp.constraint_mode = ConstraintMode::ddp;
  else if (cfg.algo.constraint_mode == "deo")
    hp.constraint_mode = ConstraintMode::deo;
  else
    throw schema_error("config: algo.constraint_mode must be ddp or deo");
  hp.seed = cfg.algo.seed;
  return hp;
}

LearnerOptions options_from(const Config& cfg, const std::string& ablation) {
  LearnerOptions opt;
  opt.support_frac = cfg.algo.support_frac;
  opt.loss.l2 = cfg.algo.strongly_convex;
  opt.loss.mu = cfg.algo.l2_mu;
  opt.threads = env_threads();
  if (ablation == "no_weights")
    opt.uniform_weights = true;
  else if (ablation == "no_base")
    opt.skip_base = true;
  else if (ablation != "none")
    throw schema_error("config: unknown ablation '" + ablation + "'");
  return opt;
}

}  // namespace

std::vector<TaskBatch> make_stream(const Config& cfg) {
  std::vector<TaskBatch> tasks;
  if (cfg.stream.kind == "synthetic") {
    tasks = generate(build_environment(cfg.stream));
  } else if (cfg.stream.kind == "csv") {
    if (cfg.stream.path.empty()) throw schema_error("config: stream.path required for kind=csv");
    std::vector<std::string> warnings;
    tasks = load_csv(cfg.stream.path, &warnings);
    for (const std::string& w : warnings) std::cerr << "warning: " << w << "\n";
  } else {
    throw schema_error("config: stream.kind must be synthetic or csv");
  }
  if (tasks.size() < 2) throw schema_error("stream: need at least 2 tasks");
  return tasks;
}

std::vector<RoundRecord> run_algorithm(const Config& cfg, const std::string& algo_name,
                                       const std::string& ablation,
                                       const std::vector<TaskBatch>& tasks) {
  const long T = static_cast<long>(tasks.size());
  const Hyperparams hp = hyper_from(cfg, T);
  const LearnerOptions opt = options_from(cfg, ablation);
  const Eigen::Index dim = tasks.front().dim();

  std::vector<RoundRecord> records;
  records.reserve(tasks.size());

  auto timed = [&](auto&& fn) {
    for (const TaskBatch& task : tasks) {
      const auto t0 = std::chrono::steady_clock::now();
      RoundRecord rec;
      try {
        rec = fn(task);
      } catch (const fairsar::error&) {
        throw;
      } catch (const std::exception& e) {
        throw error("round " + std::to_string(task.round) + ", step: " + e.what());
      }
      rec.time_ms =
          std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
              .count();
      records.push_back(std::move(rec));
    }
  };

  if (algo_name == "fairsaoml") {
    LearnerState st = init(hp, dim, opt);
    timed([&](const TaskBatch& t) { return step(st, t); });
  } else if (algo_name == "masked") {
    LearnerState st = init_masked(hp, dim, opt);
    timed([&](const TaskBatch& t) { return masked_meta_step(st, t); });
  } else if (algo_name == "staticpd") {
    SingleState st = init_single(hp, dim, opt);
    timed([&](const TaskBatch& t) { return static_primal_dual_step(st, t); });
  } else if (algo_name == "ogd") {
    SingleState st = init_single(hp, dim, opt);
    timed([&](const TaskBatch& t) { return ogd_step(st, t); });
  } else {
    throw schema_error("config: unknown algo.name '" + algo_name + "'");
  }
  return records;
}

void write_rounds_csv(const std::string& path, const std::vector<RoundRecord>& records) {
  if (records.empty()) throw std::invalid_argument("write_rounds_csv: no records");
  const Eigen::Index m = records.front().g.size();
  const Eigen::Index K = records.front().weights.size();
  std::ofstream f(path, std::ios::binary);
  if (!f) throw error("cannot open " + path);
  f << "round,loss,accuracy,dp,eo,grad_evals";
  for (Eigen::Index i = 1; i <= m; ++i) f << ",g_" << i;
  for (Eigen::Index i = 1; i <= m; ++i) f << ",lambda_" << i;
  for (Eigen::Index k = 0; k < K; ++k) f << ",p_" << k;
  f << "\n";
  for (const RoundRecord& r : records) {
    f << r.round << ',' << num9(r.loss) << ',' << num9(r.accuracy) << ',' << num9(r.dp) << ','
      << num9(r.eo) << ',' << r.grad_evals;
    for (Eigen::Index i = 0; i < m; ++i) f << ',' << num9(r.g(i));
    for (Eigen::Index i = 0; i < m; ++i) f << ',' << num9(r.lambda(i));
    for (Eigen::Index k = 0; k < K; ++k) f << ',' << num9(r.weights(k));
    f << "\n";
  }
  if (!f) throw error("write failed: " + path);
}

namespace {

json summarize(const Config& cfg, const std::vector<RoundRecord>& records,
               const std::vector<TaskBatch>& tasks) {
  json out;
  out["algorithm"] = cfg.algo.name;
  out["ablation"] = cfg.algo.ablation;
  out["rounds"] = records.size();

  double mean_ms = 0.0;
  int warnings = 0;
  for (const RoundRecord& r : records) {
    mean_ms += r.time_ms;
    warnings += r.warnings;
  }
  mean_ms /= static_cast<double>(records.size());
  out["wall_clock_per_round_ms"] = round9(mean_ms);
  out["warnings"] = warnings;

  const std::vector<ConstraintSpec> specs(
      static_cast<std::size_t>(cfg.algo.constraints),
      ConstraintSpec{cfg.algo.constraint_mode == "deo" ? ConstraintMode::deo
                                                       : ConstraintMode::ddp,
                     cfg.algo.epsilon});
  ComparatorOptions copts;
  copts.tolerance = cfg.eval.comparator_tol;
  copts.max_iters = cfg.eval.comparator_max_iters;
  copts.ball_radius = DomainBounds::from_epsilon(cfg.algo.epsilon).S;
  copts.loss.l2 = cfg.algo.strongly_convex;
  copts.loss.mu = cfg.algo.l2_mu;

  try {
    const ComparatorResult comp =
        offline_comparator({tasks.data(), tasks.size()}, specs, copts);
    double learner = 0.0, reference = 0.0;
    std::vector<double> cum_regret;
    cum_regret.reserve(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
      learner += records[i].loss;
      reference += loss(comp.theta, validation_slice(tasks[i]), copts.loss);
      cum_regret.push_back(learner - reference);
    }
    out["static_regret"] = round9(learner - reference);
    out["regret_slope"] = round9(slope_fit(cum_regret));
  } catch (const comparator_nonconvergence& e) {
    out["static_regret"] = nullptr;
    out["comparator_error"] = e.what();
  }

  // cumulative clipped violation per constraint
  json slopes = json::array();
  for (Eigen::Index i = 0; i < records.front().g.size(); ++i) {
    std::vector<double> cum;
    double acc = 0.0;
    for (const RoundRecord& r : records) {
      acc += std::max(0.0, r.g(i));
      cum.push_back(acc);
    }
    slopes.push_back(round9(slope_fit(cum)));
  }
  out["violation_slope"] = slopes;

  json sar = json::object(), fairsar_j = json::object();
  for (const std::string& ts : split_list(cfg.eval.tau)) {
    const long tau = std::stol(ts);
    try {
      const FairSarResult fs = fairsar_estimate(records, tasks, tau, specs, copts);
      sar[ts] = round9(fs.loss);
      json viol = json::array();
      for (Eigen::Index i = 0; i < fs.violations.size(); ++i)
        viol.push_back(round9(fs.violations(i)));
      fairsar_j[ts] = {{"loss", round9(fs.loss)}, {"violations", viol}};
    } catch (const comparator_nonconvergence& e) {
      sar[ts] = nullptr;
      fairsar_j[ts] = {{"error", e.what()}};
    }
  }
  out["sar"] = sar;
  out["fairsar"] = fairsar_j;

  const EightyRuleResult er = eighty_rule(records, cfg.eval.window);
  out["eighty_rule"] = {{"dp", round9(er.dp)},
                        {"eo", round9(er.eo)},
                        {"pass", er.pass},
                        {"window", cfg.eval.window}};
  return out;
}

}  // namespace

int run_command(const Config& cfg) {
  const std::vector<TaskBatch> tasks = make_stream(cfg);
  const std::vector<RoundRecord> records =
      run_algorithm(cfg, cfg.algo.name, cfg.algo.ablation, tasks);

  std::filesystem::create_directories(cfg.out.dir);
  write_rounds_csv(cfg.out.dir + "/rounds.csv", records);

  const json summary = summarize(cfg, records, tasks);
  {
    std::ofstream f(cfg.out.dir + "/summary.json", std::ios::binary);
    if (!f) throw error("cannot open " + cfg.out.dir + "/summary.json");
    f << summary.dump(2) << "\n";
  }
  {
    std::ofstream f(cfg.out.dir + "/effective.cfg", std::ios::binary);
    if (!f) throw error("cannot open " + cfg.out.dir + "/effective.cfg");
    f << serialize_config(cfg);
  }
  std::cout << cfg.algo.name << ": " << records.size() << " rounds -> " << cfg.out.dir
            << "/rounds.csv\n";
  return 0;
}

int gen_command(const Config& cfg) {
  if (cfg.stream.kind != "synthetic")
    throw schema_error("gen: stream.kind must be synthetic");
  const std::vector<TaskBatch> tasks = generate(build_environment(cfg.stream));
  std::filesystem::create_directories(cfg.out.dir);
  const std::string path = cfg.out.dir + "/stream.csv";
  write_csv(path, tasks);
  std::cout << "wrote " << tasks.size() << " tasks -> " << path << "\n";
  return 0;
}

int compare_command(const Config& cfg) {
  const std::vector<TaskBatch> tasks = make_stream(cfg);

  std::vector<std::pair<std::string, std::string>> runs;  // (algo, ablation)
  runs.emplace_back("fairsaoml", "none");
  for (const std::string& a : split_list(cfg.algo.compare_with)) runs.emplace_back(a, "none");
  for (const std::string& ab : split_list(cfg.algo.compare_ablations))
    runs.emplace_back("fairsaoml", ab);

  std::filesystem::create_directories(cfg.out.dir);
  const std::string path = cfg.out.dir + "/compare.csv";
  std::ofstream f(path, std::ios::binary);
  if (!f) throw error("cannot open " + path);

  bool wrote_header = false;
  for (const auto& [algo, ablation] : runs) {
    const std::vector<RoundRecord> records = run_algorithm(cfg, algo, ablation, tasks);
    const std::string label = ablation == "none" ? algo : algo + "_" + ablation;
    if (!wrote_header) {
      const Eigen::Index m = records.front().g.size();
      const Eigen::Index K = records.front().weights.size();
      f << "algorithm,round,loss,accuracy,dp,eo,grad_evals";
      for (Eigen::Index i = 1; i <= m; ++i) f << ",g_" << i;
      for (Eigen::Index i = 1; i <= m; ++i) f << ",lambda_" << i;
      for (Eigen::Index k = 0; k < K; ++k) f << ",p_" << k;
      f << "\n";
      wrote_header = true;
    }
    for (const RoundRecord& r : records) {
      f << label << ',' << r.round << ',' << num9(r.loss) << ',' << num9(r.accuracy) << ','
        << num9(r.dp) << ',' << num9(r.eo) << ',' << r.grad_evals;
      for (Eigen::Index i = 0; i < r.g.size(); ++i) f << ',' << num9(r.g(i));
      for (Eigen::Index i = 0; i < r.lambda.size(); ++i) f << ',' << num9(r.lambda(i));
      for (Eigen::Index k = 0; k < r.weights.size(); ++k) f << ',' << num9(r.weights(k));
      f << "\n";
    }
    std::cout << label << ": done\n";
  }
  if (!f) throw error("write failed: " + path);
  return 0;
}

}  // namespace fairsar
