#include "fairsar/learner.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>

namespace fairsar {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct ConstraintEval {
  Vector values;                 // m, degenerate slices contribute 0
  std::vector<Vector> subgrads;  // m, empty when gradients not requested
};

ConstraintEval eval_constraints(const Eigen::Ref<const Vector>& theta, const SliceView& slice,
                                const std::vector<ConstraintSpec>& specs, bool need_grads,
                                int* warnings) {
  ConstraintEval out;
  out.values = Vector::Zero(static_cast<Eigen::Index>(specs.size()));
  if (need_grads) out.subgrads.resize(specs.size());
  for (std::size_t i = 0; i < specs.size(); ++i) {
    try {
      out.values(static_cast<Eigen::Index>(i)) = constraint_value(theta, slice, specs[i]);
      if (need_grads) out.subgrads[i] = constraint_subgradient(theta, slice, specs[i]);
    } catch (const infeasible_group_estimate&) {
      out.values(static_cast<Eigen::Index>(i)) = 0.0;
      if (need_grads) out.subgrads[i] = Vector::Zero(theta.size());
      if (warnings) ++*warnings;
    }
  }
  return out;
}

}  // namespace

std::vector<int> sample_without_replacement(const std::vector<int>& pool, std::size_t count,
                                            std::mt19937_64& rng) {
  if (count >= pool.size()) return pool;
  std::vector<int> tmp = pool;
  for (std::size_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, tmp.size() - 1);
    std::swap(tmp[i], tmp[pick(rng)]);
  }
  tmp.resize(count);
  return tmp;
}

LearnerState init(const Hyperparams& hyper, Eigen::Index dim, const LearnerOptions& options) {
  hyper.validate();
  if (dim < 1) throw std::invalid_argument("init: feature dimension must be >= 1");
  LearnerState st{ParamPair{Vector::Zero(dim + 1), Vector::Zero(hyper.m)},
                  {},
                  CoveringSet(hyper.horizon, hyper.base),
                  DomainBounds::from_epsilon(hyper.epsilon),
                  hyper,
                  options,
                  std::vector<ConstraintSpec>(
                      static_cast<std::size_t>(hyper.m),
                      ConstraintSpec{hyper.constraint_mode, hyper.epsilon}),
                  0,
                  std::mt19937_64(hyper.seed)};
  if (st.cov.levels < 1)
    throw degenerate_horizon("init: horizon shorter than the interval base leaves no levels");
  if (options.use_constraints && hyper.m > 0) {
    std::uniform_real_distribution<double> small(0.0, 0.1);
    for (Eigen::Index i = 0; i < hyper.m; ++i) st.meta.lambda(i) = small(st.rng);
  }
  const int levels = st.cov.levels;
  st.pool.reserve(static_cast<std::size_t>(levels));
  for (int k = 0; k < levels; ++k) {
    ExpertState e;
    e.level = k;
    e.interval = interval_at(1, k, st.cov);
    e.params = st.meta;
    e.p = 1.0 / static_cast<double>(levels);
    st.pool.push_back(std::move(e));
  }
  return st;
}

double interval_lagrangian(const ParamPair& params, const SliceView& slice,
                           const std::vector<ConstraintSpec>& specs, const LossSpec& loss_spec,
                           int* warnings) {
  double v = loss(params.theta, slice, loss_spec);
  const ConstraintEval ce = eval_constraints(params.theta, slice, specs, false, warnings);
  for (Eigen::Index i = 0; i < ce.values.size(); ++i) v += params.lambda(i) * ce.values(i);
  return v;
}

ExpertState base_adapt(const ExpertState& expert, const SliceView& support,
                       const std::vector<ConstraintSpec>& specs, int n_inner,
                       const LossSpec& loss_spec, bool use_constraints, int* warnings) {
  ExpertState out = expert;
  const double eta = out.step_size;
  const std::vector<ConstraintSpec> none;
  const std::vector<ConstraintSpec>& active_specs = use_constraints ? specs : none;
  for (int it = 0; it < n_inner; ++it) {
    Vector grad = loss_gradient(out.params.theta, support, loss_spec);
    if (!active_specs.empty()) {
      const ConstraintEval ce =
          eval_constraints(out.params.theta, support, active_specs, true, warnings);
      for (std::size_t i = 0; i < active_specs.size(); ++i)
        grad += out.params.lambda(static_cast<Eigen::Index>(i)) * ce.subgrads[i];
    }
    out.params.theta -= eta * grad;
    if (!active_specs.empty()) {
      // dual step uses the freshly updated primal iterate
      const ConstraintEval ce =
          eval_constraints(out.params.theta, support, active_specs, false, warnings);
      out.params.lambda = project_nonneg(out.params.lambda + eta * ce.values);
    }
  }
  return out;
}

MetaGradients meta_gradients(const std::vector<ExpertState>& pool, const TaskBatch& task,
                             const std::vector<std::vector<int>>& query_idx,
                             const std::vector<ConstraintSpec>& specs, const Hyperparams& hyper,
                             const LossSpec& loss_spec, long t, bool use_constraints,
                             int* warnings) {
  if (query_idx.size() != pool.size())
    throw std::invalid_argument("meta_gradients: one query slice per expert required");
  const Eigen::Index dim = task.dim() + 1;
  const Eigen::Index m = static_cast<Eigen::Index>(specs.size());
  MetaGradients out{Vector::Zero(dim), Vector::Zero(m)};
  const double decay = hyper.delta * (hyper.eta1 + hyper.eta2);
  for (std::size_t k = 0; k < pool.size(); ++k) {
    const ExpertState& e = pool[k];
    const SliceView q{&task.points, &query_idx[k]};
    if (e.active_at(t)) {
      Vector grad = loss_gradient(e.params.theta, q, loss_spec);
      if (use_constraints && m > 0) {
        const ConstraintEval ce = eval_constraints(e.params.theta, q, specs, true, warnings);
        for (Eigen::Index i = 0; i < m; ++i) grad += e.params.lambda(i) * ce.subgrads[i];
      }
      out.theta += e.p * grad;
    }
    if (use_constraints && m > 0) {
      const ConstraintEval ce = eval_constraints(e.params.theta, q, specs, false, warnings);
      out.lambda += e.p * (ce.values - decay * e.params.lambda);
    }
  }
  return out;
}

RoundRecord evaluate_round(const TaskBatch& task, const Eigen::Ref<const Vector>& theta,
                           const std::vector<ConstraintSpec>& specs, const LossSpec& loss_spec) {
  RoundRecord rec;
  rec.round = task.round;
  const SliceView val = validation_slice(task);
  rec.loss = loss(theta, val, loss_spec);
  std::vector<int> preds, labels, groups;
  preds.reserve(val.size());
  long correct = 0;
  for (std::size_t i = 0; i < val.size(); ++i) {
    const DataPoint& p = val[i];
    const int yhat = score(theta, p) > 0.0 ? 1 : -1;
    preds.push_back(yhat);
    labels.push_back(p.label);
    groups.push_back(p.protected_group);
    if (yhat == p.label) ++correct;
  }
  rec.accuracy = static_cast<double>(correct) / static_cast<double>(val.size());
  try {
    rec.dp = dp_ratio(preds, groups);
  } catch (const undefined_ratio&) {
    rec.dp = kNaN;
  }
  try {
    rec.eo = eo_ratio(preds, labels, groups, 1);
  } catch (const undefined_ratio&) {
    rec.eo = kNaN;
  }
  rec.g = eval_constraints(theta, val, specs, false, &rec.warnings).values;
  return rec;
}

RoundRecord step(LearnerState& state, const TaskBatch& task) {
  if (task.round != state.round + 1)
    throw round_order_violation("step: expected round " + std::to_string(state.round + 1) +
                                ", got " + std::to_string(task.round));
  const long t = task.round;
  const Hyperparams& hp = state.hyper;
  const LearnerOptions& opt = state.options;

  // step 4: record performance of the incoming meta parameters
  RoundRecord rec = evaluate_round(task, state.meta.theta, state.specs, opt.loss);

  // G must reflect this task before step sizes are frozen
  state.bounds = update_gradient_bound(state.bounds, task);

  // steps 5-11: target intervals and expert re-activation
  const std::vector<IntervalId> targets = target_set(t, state.cov);
  activate(state.pool, targets, state.meta, state.bounds, t);

  // steps 12-14: expert weights for this round
  if (opt.uniform_weights) {
    const double u = 1.0 / static_cast<double>(state.pool.size());
    for (ExpertState& e : state.pool) e.p = u;
  } else {
    normalize_weights(state.pool);
  }

  const std::size_t n_points = task.points.size();
  const std::size_t sample_sz = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::lround(opt.support_frac * static_cast<double>(n_points))));
  const std::size_t levels = state.pool.size();

  std::vector<std::vector<int>> support_samples(levels), query_samples(levels);
  long grad_evals = 0;

  // steps 15-24: bi-level adaptation, meta iterate evolves across iterations
  for (int n = 0; n < hp.n_meta; ++n) {
    for (std::size_t k = 0; k < levels; ++k)
      if (state.pool[k].active_at(t))
        support_samples[k] = sample_without_replacement(task.support_idx, sample_sz, state.rng);
    for (std::size_t k = 0; k < levels; ++k)
      query_samples[k] = sample_without_replacement(task.query_idx, sample_sz, state.rng);

    if (!opt.skip_base) {
      std::vector<std::size_t> active;
      for (std::size_t k = 0; k < levels; ++k)
        if (state.pool[k].active_at(t)) active.push_back(k);
      if (opt.threads > 1 && active.size() > 1) {
        // per-expert adaptation is pure; merge in level order keeps runs
        // bit-identical for any worker count
        for (std::size_t base = 0; base < active.size();
             base += static_cast<std::size_t>(opt.threads)) {
          const std::size_t stop =
              std::min(active.size(), base + static_cast<std::size_t>(opt.threads));
          std::vector<std::future<std::pair<ExpertState, int>>> wave;
          for (std::size_t a = base; a < stop; ++a) {
            const std::size_t k = active[a];
            wave.push_back(std::async(std::launch::async, [&, k] {
              int w = 0;
              ExpertState e = base_adapt(state.pool[k], {&task.points, &support_samples[k]},
                                         state.specs, hp.n_inner, opt.loss, opt.use_constraints,
                                         &w);
              return std::make_pair(std::move(e), w);
            }));
          }
          for (std::size_t a = base; a < stop; ++a) {
            auto [e, w] = wave[a - base].get();
            state.pool[active[a]] = std::move(e);
            rec.warnings += w;
          }
        }
      } else {
        for (std::size_t k : active) {
          state.pool[k] = base_adapt(state.pool[k], {&task.points, &support_samples[k]},
                                     state.specs, hp.n_inner, opt.loss, opt.use_constraints,
                                     &rec.warnings);
        }
      }
      grad_evals += static_cast<long>(hp.n_inner) * static_cast<long>(active.size());
    }

    const MetaGradients mg =
        meta_gradients(state.pool, task, query_samples, state.specs, hp, opt.loss, t,
                       opt.use_constraints, &rec.warnings);
    state.meta.theta = project_ball(state.meta.theta - hp.eta1 * mg.theta, state.bounds.S);
    if (opt.use_constraints && hp.m > 0)
      state.meta.lambda = project_nonneg(state.meta.lambda + hp.eta2 * mg.lambda);
  }

  // steps 25-28: weight statistics from the meta-vs-expert Lagrangian gap.
  // Active experts are scored on their last support sample, sleeping ones on
  // the round's shared support split.
  const std::vector<ConstraintSpec> no_specs;
  const std::vector<ConstraintSpec>& rc_specs = opt.use_constraints ? state.specs : no_specs;
  std::vector<double> meta_vals(levels), expert_vals(levels);
  for (std::size_t k = 0; k < levels; ++k) {
    const std::vector<int>& idx =
        state.pool[k].active_at(t) && !support_samples[k].empty() ? support_samples[k]
                                                                  : task.support_idx;
    const SliceView s{&task.points, &idx};
    meta_vals[k] = interval_lagrangian(state.meta, s, rc_specs, opt.loss, &rec.warnings);
    expert_vals[k] =
        interval_lagrangian(state.pool[k].params, s, rc_specs, opt.loss, &rec.warnings);
  }
  update_rc(state.pool, meta_vals, expert_vals);

  rec.lambda = state.meta.lambda;
  rec.weights = Vector::Zero(static_cast<Eigen::Index>(levels));
  for (std::size_t k = 0; k < levels; ++k)
    rec.weights(static_cast<Eigen::Index>(k)) = state.pool[k].p;
  rec.grad_evals = grad_evals;
  state.round = t;
  return rec;
}

}  // namespace fairsar
