#pragma once

#include "fairsar/learner.hpp"

namespace fairsar {

/// State for the expert-free reference algorithms: one global primal-dual
/// (or plain primal) learner updated once per round on the whole task.
struct SingleState {
  Vector theta;   // d+1
  Vector lambda;  // m, stays zero for plain OGD
  DomainBounds bounds;
  Hyperparams hyper;
  LearnerOptions options;
  std::vector<ConstraintSpec> specs;
  long round = 0;
};

SingleState init_single(const Hyperparams& hyper, Eigen::Index dim,
                        const LearnerOptions& options = {});

/// Meta-learner with the protected signal masked out of training: identical
/// control flow to the fair learner but constraints never enter updates and
/// the duals stay at zero. Constraint values are still measured for the
/// record.
LearnerState init_masked(const Hyperparams& hyper, Eigen::Index dim,
                         const LearnerOptions& options = {});
RoundRecord masked_meta_step(LearnerState& state, const TaskBatch& task);

/// Static primal-dual learner with square-clipped constraints: the primal
/// gradient carries lambda_i * grad([g_i]_+^2) and the dual step follows the
/// augmented meta update form with a single expert of weight 1.
RoundRecord static_primal_dual_step(SingleState& state, const TaskBatch& task);

/// Projected online gradient descent on the loss alone.
RoundRecord ogd_step(SingleState& state, const TaskBatch& task);

}  // namespace fairsar
