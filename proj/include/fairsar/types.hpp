#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "fairsar/errors.hpp"

namespace fairsar {

using Vector = Eigen::VectorXd;

enum class ConstraintMode { ddp, deo };

/// One labeled example. Features exclude the protected attribute; the
/// protected group is carried separately.
struct DataPoint {
  Vector features;      // dimension d, all finite
  int label;            // {-1,+1}
  int protected_group;  // {0,1}

  DataPoint(Vector f, int y, int s)
      : features(std::move(f)), label(y), protected_group(s) {
    if (features.size() == 0 || !features.allFinite())
      throw std::invalid_argument("DataPoint: features must be nonempty and finite");
    if (label != -1 && label != 1)
      throw std::invalid_argument("DataPoint: label must be -1 or +1");
    if (protected_group != 0 && protected_group != 1)
      throw std::invalid_argument("DataPoint: protected group must be 0 or 1");
  }
};

/// One round's task: a point set plus disjoint support/query/validation
/// index sets. All three splits must be nonempty.
struct TaskBatch {
  long round;
  std::vector<DataPoint> points;
  std::vector<int> support_idx;
  std::vector<int> query_idx;
  std::vector<int> validation_idx;

  TaskBatch(long round_, std::vector<DataPoint> pts, std::vector<int> support,
            std::vector<int> query, std::vector<int> validation);

  Eigen::Index dim() const { return points.front().features.size(); }
};

/// View over a subset of a task's points, selected by an index vector that
/// must outlive the view.
struct SliceView {
  const std::vector<DataPoint>* points = nullptr;
  const std::vector<int>* idx = nullptr;

  std::size_t size() const { return idx->size(); }
  bool empty() const { return idx->empty(); }
  const DataPoint& operator[](std::size_t i) const {
    return (*points)[static_cast<std::size_t>((*idx)[i])];
  }
};

inline SliceView support_slice(const TaskBatch& t) { return {&t.points, &t.support_idx}; }
inline SliceView query_slice(const TaskBatch& t) { return {&t.points, &t.query_idx}; }
inline SliceView validation_slice(const TaskBatch& t) { return {&t.points, &t.validation_idx}; }

inline std::vector<int> all_indices(const TaskBatch& t) {
  std::vector<int> idx(t.points.size());
  std::iota(idx.begin(), idx.end(), 0);
  return idx;
}

/// Primal vector theta (dimension d+1, last entry is the bias) and
/// nonnegative dual vector lambda (dimension m).
struct ParamPair {
  Vector theta;
  Vector lambda;
};

/// Run-level hyperparameters. validate() throws on out-of-range values.
struct Hyperparams {
  long horizon = 0;          // T
  int base = 2;              // b >= 2, AGC level base
  int m = 1;                 // number of fairness constraints
  double eta1 = 0.1;         // meta primal step size
  double eta2 = 0.1;         // meta dual step size
  double delta = 50.0;       // augmentation constant
  double epsilon = 0.05;     // fairness relaxation
  int n_meta = 1;            // meta iterations per round
  int n_inner = 1;           // interval-level gradient steps
  ConstraintMode constraint_mode = ConstraintMode::ddp;
  std::uint64_t seed = 0;

  void validate() const {
    if (horizon < 2) throw std::invalid_argument("Hyperparams: horizon must be >= 2");
    if (base < 2) throw std::invalid_argument("Hyperparams: base must be >= 2");
    if (m < 0) throw std::invalid_argument("Hyperparams: m must be >= 0");
    // eta = 0 freezes the corresponding update; negative steps are invalid.
    if (eta1 < 0 || eta2 < 0 || !std::isfinite(eta1) || !std::isfinite(eta2))
      throw std::invalid_argument("Hyperparams: step sizes must be finite and >= 0");
    if (delta <= 0) throw std::invalid_argument("Hyperparams: delta must be > 0");
    if (epsilon < 0 || !std::isfinite(epsilon))
      throw std::invalid_argument("Hyperparams: epsilon must be finite and >= 0");
    if (n_meta < 1) throw std::invalid_argument("Hyperparams: n_meta must be >= 1");
    if (n_inner < 1) throw std::invalid_argument("Hyperparams: n_inner must be >= 1");
  }
};

/// Relaxed-domain radius S and the running (sub)gradient bound G.
/// G only ever grows over a run.
struct DomainBounds {
  double S = 0.0;
  double G = 0.0;

  static DomainBounds from_epsilon(double epsilon) {
    return {std::sqrt(1.0 + 2.0 * epsilon) - 1.0, 0.0};
  }
};

inline DomainBounds update_gradient_bound(const DomainBounds& bounds, const TaskBatch& batch) {
  double g = std::max(bounds.G, std::sqrt(static_cast<double>(batch.dim())) + bounds.S);
  for (const DataPoint& p : batch.points) g = std::max(g, p.features.norm());
  return {bounds.S, g};
}

/// Per-round metrics emitted by every algorithm (identical schema so runs
/// are directly comparable). time_ms is measurement-only and never
/// serialized into rounds.csv.
struct RoundRecord {
  long round = 0;
  double loss = 0.0;      // validation loss of the parameter used this round
  double accuracy = 0.0;  // sign agreement on the validation slice
  double dp = 0.0;        // oriented demographic parity ratio (NaN if undefined)
  double eo = 0.0;        // oriented equalized odds ratio at y=+1 (NaN if undefined)
  long grad_evals = 0;    // interval-level gradient evaluations this round
  Vector g;               // per-constraint values on the validation slice
  Vector lambda;          // meta dual variables after the round
  Vector weights;         // expert weight snapshot (uniform for expert-free baselines)
  double time_ms = 0.0;
  int warnings = 0;
};

inline TaskBatch::TaskBatch(long round_, std::vector<DataPoint> pts,
                            std::vector<int> support, std::vector<int> query,
                            std::vector<int> validation)
    : round(round_),
      points(std::move(pts)),
      support_idx(std::move(support)),
      query_idx(std::move(query)),
      validation_idx(std::move(validation)) {
  if (round < 1) throw std::invalid_argument("TaskBatch: round must be >= 1");
  if (points.empty()) throw std::invalid_argument("TaskBatch: no points");
  const Eigen::Index d = points.front().features.size();
  for (const DataPoint& p : points)
    if (p.features.size() != d)
      throw std::invalid_argument("TaskBatch: inconsistent feature dimensions");
  const long n = static_cast<long>(points.size());
  std::vector<signed char> seen(points.size(), 0);
  auto check = [&](const std::vector<int>& idx, const char* name) {
    if (idx.empty())
      throw std::invalid_argument(std::string("TaskBatch: empty ") + name + " split");
    for (int i : idx) {
      if (i < 0 || i >= n)
        throw std::invalid_argument(std::string("TaskBatch: out-of-range index in ") + name);
      if (seen[static_cast<std::size_t>(i)]++)
        throw std::invalid_argument(std::string("TaskBatch: splits overlap at index ") +
                                    std::to_string(i));
    }
  };
  check(support_idx, "support");
  check(query_idx, "query");
  check(validation_idx, "validation");
}

}  // namespace fairsar
