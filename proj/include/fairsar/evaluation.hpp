#pragma once

#include <span>
#include <vector>

#include "fairsar/fairness.hpp"
#include "fairsar/model.hpp"
#include "fairsar/types.hpp"

namespace fairsar {

struct ComparatorOptions {
  double tolerance = 1e-3;  // feasibility slack for each constraint (inf = unconstrained)
  long max_iters = 100000;  // total primal iteration budget
  double stall_tol = 1e-6;  // first-order stationarity on the update norm
  double ball_radius = 1.0; // radius of the relaxed domain the iterates live in
  LossSpec loss;
  Vector warm_theta;        // optional warm start (empty = from zero)
};

struct ComparatorResult {
  Vector theta;
  Vector lambda;      // final duals, frozen at exit
  bool converged = false;
  long iterations = 0;
  double final_step = 0.0;
};

/// Best fixed parameter in hindsight for a window of tasks: minimizes the
/// summed per-task validation loss subject to g_i(theta) <= tolerance on the
/// window's pooled points. Solved by an augmented-Lagrangian primal-dual
/// loop (projected gradient inner solves, multiplier ascent outer); throws
/// comparator_nonconvergence with the best iterate if the budget runs out.
ComparatorResult offline_comparator(std::span<const TaskBatch> window,
                                    const std::vector<ConstraintSpec>& specs,
                                    const ComparatorOptions& opts);

/// Cumulative learner loss minus the loss of the full-horizon comparator.
double static_regret(const std::vector<RoundRecord>& records,
                     const std::vector<TaskBatch>& tasks,
                     const std::vector<ConstraintSpec>& specs, const ComparatorOptions& opts);

/// Maximum windowed regret against each window's own comparator, windows of
/// length tau enumerated exhaustively.
double sar_estimate(const std::vector<RoundRecord>& records, const std::vector<TaskBatch>& tasks,
                    long tau, const std::vector<ConstraintSpec>& specs,
                    const ComparatorOptions& opts);

struct FairSarResult {
  double loss = 0.0;   // max windowed loss regret
  Vector violations;   // per constraint: max windowed sum of recorded g values
};

FairSarResult fairsar_estimate(const std::vector<RoundRecord>& records,
                               const std::vector<TaskBatch>& tasks, long tau,
                               const std::vector<ConstraintSpec>& specs,
                               const ComparatorOptions& opts);

/// Least-squares slope of log(values[t]) against log(t) over the second half
/// of the series; values is a cumulative sequence indexed from t = 1.
/// Nonpositive entries are clamped to 1e-12 before the log.
double slope_fit(const std::vector<double>& cumulative_values);

struct EightyRuleResult {
  double dp = 0.0;
  double eo = 0.0;
  bool pass = false;
};

/// Mean oriented DP/EO over the last `window` rounds (NaN rounds skipped);
/// passes when both averages reach 0.8.
EightyRuleResult eighty_rule(const std::vector<RoundRecord>& records, long window);

}  // namespace fairsar
