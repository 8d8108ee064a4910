#pragma once

#include <random>
#include <utility>
#include <vector>

#include "fairsar/experts.hpp"
#include "fairsar/fairness.hpp"
#include "fairsar/intervals.hpp"
#include "fairsar/model.hpp"
#include "fairsar/types.hpp"

namespace fairsar {

struct LearnerOptions {
  double support_frac = 0.4;  // per-expert sample size as a fraction of the task
  bool use_constraints = true;  // false: constraints are reported but never enter updates
  bool uniform_weights = false;  // ablation: p = 1/K every round
  bool skip_base = false;        // ablation: no interval-level adaptation
  LossSpec loss;
  int threads = 1;  // worker cap for per-expert adaptation
};

struct LearnerState {
  ParamPair meta;
  std::vector<ExpertState> pool;
  CoveringSet cov;
  DomainBounds bounds;
  Hyperparams hyper;
  LearnerOptions options;
  std::vector<ConstraintSpec> specs;
  long round = 0;
  std::mt19937_64 rng;
};

/// Fresh learner: theta_0 = 0 (center of the relaxed ball), lambda_0 drawn
/// uniformly from [0, 0.1]^m, one expert per interval level with R = C = 0
/// and uniform weights.
LearnerState init(const Hyperparams& hyper, Eigen::Index dim, const LearnerOptions& options = {});

/// Interval-level Lagrangian F = f(theta, slice) + sum_i lambda_i g_i(theta, slice).
/// A degenerate group estimate makes that constraint contribute 0 and bumps
/// *warnings instead of failing the round.
double interval_lagrangian(const ParamPair& params, const SliceView& slice,
                           const std::vector<ConstraintSpec>& specs, const LossSpec& loss_spec,
                           int* warnings = nullptr);

/// n_inner alternating primal-dual steps on the interval-level Lagrangian at
/// the expert's frozen step size. The primal iterate is not ball-projected
/// here; projection happens only at the meta level.
ExpertState base_adapt(const ExpertState& expert, const SliceView& support,
                       const std::vector<ConstraintSpec>& specs, int n_inner,
                       const LossSpec& loss_spec, bool use_constraints = true,
                       int* warnings = nullptr);

struct MetaGradients {
  Vector theta;
  Vector lambda;
};

/// Weighted meta gradients over the pool. Active experts (last activated at
/// round t) contribute loss and constraint terms to the primal gradient;
/// sleeping experts contribute only to the dual gradient, which carries the
/// augmented decay term -delta*(eta1+eta2)*lambda_{t,I} per expert.
MetaGradients meta_gradients(const std::vector<ExpertState>& pool, const TaskBatch& task,
                             const std::vector<std::vector<int>>& query_idx,
                             const std::vector<ConstraintSpec>& specs, const Hyperparams& hyper,
                             const LossSpec& loss_spec, long t, bool use_constraints = true,
                             int* warnings = nullptr);

/// Validation-slice metrics for the parameter in force this round. dp/eo are
/// NaN when the corresponding ratio is undefined on the slice.
RoundRecord evaluate_round(const TaskBatch& task, const Eigen::Ref<const Vector>& theta,
                           const std::vector<ConstraintSpec>& specs, const LossSpec& loss_spec);

/// One full round: record validation performance of the previous meta
/// parameters, re-activate experts, recompute weights, run n_meta
/// meta-iterations of interval-level adaptation plus a projected meta
/// update, and fold the meta-vs-expert gaps into R and C.
RoundRecord step(LearnerState& state, const TaskBatch& task);

/// Uniform sample without replacement; returns the pool itself (and draws
/// nothing) when count covers it.
std::vector<int> sample_without_replacement(const std::vector<int>& pool, std::size_t count,
                                            std::mt19937_64& rng);

}  // namespace fairsar
