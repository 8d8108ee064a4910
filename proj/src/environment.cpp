#include "fairsar/environment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include <zlib.h>

#include "fairsar/model.hpp"

namespace fairsar {

long EnvironmentSpec::horizon() const {
  long total = 0;
  for (const auto& [len, dom] : segments) total += len;
  return total;
}

void EnvironmentSpec::validate() const {
  if (segments.empty()) throw std::invalid_argument("EnvironmentSpec: no segments");
  if (d < 1) throw std::invalid_argument("EnvironmentSpec: d must be >= 1");
  if (n_per_task < 8) throw std::invalid_argument("EnvironmentSpec: n_per_task must be >= 8");
  for (const auto& [len, dom] : segments) {
    if (len < 1) throw std::invalid_argument("EnvironmentSpec: segment length must be >= 1");
    if (dom.true_weights.size() != d + 1)
      throw std::invalid_argument("EnvironmentSpec: true_weights must have dimension d+1");
    if (!dom.true_weights.allFinite() || !std::isfinite(dom.group_bias) ||
        !std::isfinite(dom.group_shift))
      throw std::invalid_argument("EnvironmentSpec: non-finite domain parameters");
    if (dom.flip_sign != 1 && dom.flip_sign != -1)
      throw std::invalid_argument("EnvironmentSpec: flip_sign must be +1 or -1");
    if (dom.group1_prob <= 0.0 || dom.group1_prob >= 1.0)
      throw std::invalid_argument("EnvironmentSpec: group1_prob must lie in (0,1)");
  }
}

std::vector<TaskBatch> generate(const EnvironmentSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<TaskBatch> tasks;
  tasks.reserve(static_cast<std::size_t>(spec.horizon()));
  long round = 0;
  for (const auto& [len, dom] : spec.segments) {
    for (long r = 0; r < len; ++r) {
      ++round;
      std::vector<DataPoint> pts;
      pts.reserve(static_cast<std::size_t>(spec.n_per_task));
      for (long j = 0; j < spec.n_per_task; ++j) {
        const int s = unit(rng) < dom.group1_prob ? 1 : 0;
        Vector e(spec.d);
        for (Eigen::Index i = 0; i < spec.d; ++i) e(i) = normal(rng);
        if (s == 1 && dom.group_shift != 0.0) e.array() += dom.group_shift;
        e *= static_cast<double>(dom.flip_sign);
        const double sc = dom.true_weights.head(spec.d).dot(e) + dom.true_weights(spec.d) +
                          (s == 1 ? dom.group_bias : 0.0);
        const int y = unit(rng) < sigmoid(sc) ? 1 : -1;
        pts.emplace_back(std::move(e), y, s);
      }
      // 40/40/20 split, drawn once per task
      std::vector<int> order(pts.size());
      std::iota(order.begin(), order.end(), 0);
      std::shuffle(order.begin(), order.end(), rng);
      const std::size_t ns = static_cast<std::size_t>(
          std::lround(0.4 * static_cast<double>(spec.n_per_task)));
      const std::size_t nq = ns;
      std::vector<int> sup(order.begin(), order.begin() + static_cast<long>(ns));
      std::vector<int> qry(order.begin() + static_cast<long>(ns),
                           order.begin() + static_cast<long>(ns + nq));
      std::vector<int> val(order.begin() + static_cast<long>(ns + nq), order.end());
      tasks.emplace_back(round, std::move(pts), std::move(sup), std::move(qry), std::move(val));
    }
  }
  return tasks;
}

namespace {

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::string read_whole_file(const std::string& path) {
  if (ends_with(path, ".gz")) {
    gzFile f = gzopen(path.c_str(), "rb");
    if (!f) throw schema_error("cannot open " + path);
    std::string out;
    char buf[1 << 16];
    int n;
    while ((n = gzread(f, buf, sizeof(buf))) > 0) out.append(buf, static_cast<std::size_t>(n));
    const bool bad = n < 0;
    gzclose(f);
    if (bad) throw schema_error("gzip read error in " + path);
    return out;
  }
  std::ifstream f(path, std::ios::binary);
  if (!f) throw schema_error("cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

long parse_long(const std::string& s, long row) {
  std::size_t used = 0;
  long v = 0;
  try {
    v = std::stol(s, &used);
  } catch (const std::exception&) {
    throw schema_error("row " + std::to_string(row) + ": bad integer '" + s + "'");
  }
  if (used != s.size())
    throw schema_error("row " + std::to_string(row) + ": bad integer '" + s + "'");
  return v;
}

double parse_double(const std::string& s, long row) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw schema_error("row " + std::to_string(row) + ": bad number '" + s + "'");
  }
  if (used != s.size() || !std::isfinite(v))
    throw schema_error("row " + std::to_string(row) + ": bad number '" + s + "'");
  return v;
}

}  // namespace

std::vector<TaskBatch> load_csv(const std::string& path, std::vector<std::string>* warnings) {
  const std::string content = read_whole_file(path);
  std::istringstream in(content);
  std::string line;
  if (!std::getline(in, line)) throw schema_error(path + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  const std::vector<std::string> header = split_line(line);
  if (header.size() < 5 || header[0] != "task_id" || header[1] != "split" ||
      header[2] != "label" || header[3] != "protected")
    throw schema_error(path + ": header must start with task_id,split,label,protected,f1,...");
  const Eigen::Index d = static_cast<Eigen::Index>(header.size()) - 4;
  for (Eigen::Index i = 0; i < d; ++i)
    if (header[static_cast<std::size_t>(4 + i)] != "f" + std::to_string(i + 1))
      throw schema_error(path + ": feature columns must be named f1..fd");

  struct Row {
    DataPoint point;
    int split;  // 0 support, 1 query, 2 validation
  };
  std::map<long, std::vector<Row>> by_task;
  long row_no = 1;
  while (std::getline(in, line)) {
    ++row_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> cells = split_line(line);
    if (cells.size() != header.size())
      throw schema_error("row " + std::to_string(row_no) + ": expected " +
                         std::to_string(header.size()) + " columns, got " +
                         std::to_string(cells.size()));
    const long task_id = parse_long(cells[0], row_no);
    int split;
    if (cells[1] == "support")
      split = 0;
    else if (cells[1] == "query")
      split = 1;
    else if (cells[1] == "validation")
      split = 2;
    else
      throw schema_error("row " + std::to_string(row_no) + ": bad split '" + cells[1] + "'");
    const long label = parse_long(cells[2], row_no);
    if (label != -1 && label != 1)
      throw schema_error("row " + std::to_string(row_no) + ": label must be -1 or 1");
    const long prot = parse_long(cells[3], row_no);
    if (prot != 0 && prot != 1)
      throw schema_error("row " + std::to_string(row_no) + ": protected must be 0 or 1");
    Vector f(d);
    for (Eigen::Index i = 0; i < d; ++i)
      f(i) = parse_double(cells[static_cast<std::size_t>(4 + i)], row_no);
    by_task[task_id].push_back(
        Row{DataPoint(std::move(f), static_cast<int>(label), static_cast<int>(prot)), split});
  }
  if (by_task.empty()) throw empty_task(path + ": no data rows");

  std::vector<TaskBatch> tasks;
  long round = 0;
  for (auto& [task_id, rows] : by_task) {
    ++round;
    if (task_id != round && warnings)
      warnings->push_back("task_id " + std::to_string(task_id) + " renumbered to round " +
                          std::to_string(round));
    std::vector<DataPoint> pts;
    std::vector<int> sup, qry, val;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      (rows[i].split == 0 ? sup : rows[i].split == 1 ? qry : val)
          .push_back(static_cast<int>(i));
      pts.push_back(std::move(rows[i].point));
    }
    if (sup.empty() || qry.empty() || val.empty())
      throw schema_error("task " + std::to_string(task_id) +
                         ": every split (support/query/validation) needs at least one row");
    try {
      tasks.emplace_back(round, std::move(pts), std::move(sup), std::move(qry), std::move(val));
    } catch (const std::invalid_argument& e) {
      throw schema_error("task " + std::to_string(task_id) + ": " + e.what());
    }
  }
  return tasks;
}

void write_csv(const std::string& path, const std::vector<TaskBatch>& tasks) {
  if (tasks.empty()) throw std::invalid_argument("write_csv: no tasks");
  const Eigen::Index d = tasks.front().dim();
  std::string out;
  out += "task_id,split,label,protected";
  for (Eigen::Index i = 0; i < d; ++i) out += ",f" + std::to_string(i + 1);
  out += '\n';
  char buf[64];
  for (const TaskBatch& t : tasks) {
    auto emit = [&](const std::vector<int>& idx, const char* split) {
      for (int i : idx) {
        const DataPoint& p = t.points[static_cast<std::size_t>(i)];
        out += std::to_string(t.round);
        out += ',';
        out += split;
        out += ',';
        out += std::to_string(p.label);
        out += ',';
        out += std::to_string(p.protected_group);
        for (Eigen::Index j = 0; j < d; ++j) {
          std::snprintf(buf, sizeof(buf), ",%.9g", p.features(j));
          out += buf;
        }
        out += '\n';
      }
    };
    emit(t.support_idx, "support");
    emit(t.query_idx, "query");
    emit(t.validation_idx, "validation");
  }
  if (ends_with(path, ".gz")) {
    gzFile f = gzopen(path.c_str(), "wb");
    if (!f) throw error("write_csv: cannot open " + path);
    const int n = gzwrite(f, out.data(), static_cast<unsigned>(out.size()));
    gzclose(f);
    if (n != static_cast<int>(out.size())) throw error("write_csv: gzip write failed");
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw error("write_csv: cannot open " + path);
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw error("write_csv: write failed");
}

}  // namespace fairsar
