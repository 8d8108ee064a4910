#include "fairsar/baselines.hpp"

#include <cmath>

namespace fairsar {

namespace {

void check_round(long have, long expect) {
  if (have != expect)
    throw round_order_violation("baseline step: expected round " + std::to_string(expect) +
                                ", got " + std::to_string(have));
}

// Weight columns are part of the shared record schema; expert-free
// algorithms report the uniform placeholder.
void fill_trailer(RoundRecord& rec, const SingleState& st, int levels) {
  rec.lambda = st.lambda;
  rec.weights = Vector::Constant(levels, 1.0 / static_cast<double>(levels));
  rec.grad_evals = 0;
}

}  // namespace

SingleState init_single(const Hyperparams& hyper, Eigen::Index dim,
                        const LearnerOptions& options) {
  hyper.validate();
  if (dim < 1) throw std::invalid_argument("init_single: feature dimension must be >= 1");
  SingleState st;
  st.theta = Vector::Zero(dim + 1);
  st.lambda = Vector::Zero(hyper.m);
  st.bounds = DomainBounds::from_epsilon(hyper.epsilon);
  st.hyper = hyper;
  st.options = options;
  st.specs.assign(static_cast<std::size_t>(hyper.m),
                  ConstraintSpec{hyper.constraint_mode, hyper.epsilon});
  return st;
}

LearnerState init_masked(const Hyperparams& hyper, Eigen::Index dim,
                         const LearnerOptions& options) {
  LearnerOptions opt = options;
  opt.use_constraints = false;
  return init(hyper, dim, opt);
}

RoundRecord masked_meta_step(LearnerState& state, const TaskBatch& task) {
  if (state.options.use_constraints)
    throw std::invalid_argument("masked_meta_step: state must be built with init_masked");
  return step(state, task);
}

RoundRecord static_primal_dual_step(SingleState& state, const TaskBatch& task) {
  check_round(task.round, state.round + 1);
  const Hyperparams& hp = state.hyper;
  RoundRecord rec = evaluate_round(task, state.theta, state.specs, state.options.loss);

  const std::vector<int> whole = all_indices(task);
  const SliceView full{&task.points, &whole};

  Vector grad = loss_gradient(state.theta, full, state.options.loss);
  for (std::size_t i = 0; i < state.specs.size(); ++i) {
    try {
      const double gi = constraint_value(state.theta, full, state.specs[i]);
      if (gi > 0.0) {
        // d/dtheta [g]_+^2 = 2 [g]_+ grad g
        grad += state.lambda(static_cast<Eigen::Index>(i)) * 2.0 * gi *
                constraint_subgradient(state.theta, full, state.specs[i]);
      }
    } catch (const infeasible_group_estimate&) {
      ++rec.warnings;
    }
  }
  state.theta = project_ball(state.theta - hp.eta1 * grad, state.bounds.S);

  const double decay = hp.delta * (hp.eta1 + hp.eta2);
  Vector dual_grad = Vector::Zero(state.lambda.size());
  for (std::size_t i = 0; i < state.specs.size(); ++i) {
    double gi = 0.0;
    try {
      gi = constraint_value(state.theta, full, state.specs[i]);
    } catch (const infeasible_group_estimate&) {
      ++rec.warnings;
    }
    dual_grad(static_cast<Eigen::Index>(i)) = gi - decay * state.lambda(static_cast<Eigen::Index>(i));
  }
  state.lambda = project_nonneg(state.lambda + hp.eta2 * dual_grad);

  fill_trailer(rec, state, level_count(hp.horizon, hp.base));
  state.round = task.round;
  return rec;
}

RoundRecord ogd_step(SingleState& state, const TaskBatch& task) {
  check_round(task.round, state.round + 1);
  RoundRecord rec = evaluate_round(task, state.theta, state.specs, state.options.loss);
  const std::vector<int> whole = all_indices(task);
  const SliceView full{&task.points, &whole};
  state.theta = project_ball(
      state.theta - state.hyper.eta1 * loss_gradient(state.theta, full, state.options.loss),
      state.bounds.S);
  fill_trailer(rec, state, level_count(state.hyper.horizon, state.hyper.base));
  state.round = task.round;
  return rec;
}

}  // namespace fairsar
