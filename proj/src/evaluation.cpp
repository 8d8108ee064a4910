#include "fairsar/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

namespace fairsar {

namespace {

// Stacked window data in matrix form so the comparator's inner loop is a
// handful of matrix-vector products.
struct WindowProblem {
  Eigen::MatrixXd X;   // validation rows, bias column appended
  Vector y;            // labels
  Vector w;            // per-row weight 1/n_t so the objective sums task means
  double l2 = 0.0;     // total quadratic coefficient (tasks * mu) when enabled
  std::vector<Vector> constraint_dirs;  // pooled constraint is |a.theta| - eps
  std::vector<double> epsilons;
  double lipschitz = 1.0;
};

WindowProblem assemble(std::span<const TaskBatch> window,
                       const std::vector<ConstraintSpec>& specs, const ComparatorOptions& opts) {
  if (window.empty()) throw std::invalid_argument("offline_comparator: empty window");
  const Eigen::Index d = window.front().dim();
  long rows = 0;
  for (const TaskBatch& t : window) rows += static_cast<long>(t.validation_idx.size());

  WindowProblem p;
  p.X.resize(rows, d + 1);
  p.y.resize(rows);
  p.w.resize(rows);
  long r = 0;
  for (const TaskBatch& t : window) {
    const double inv = 1.0 / static_cast<double>(t.validation_idx.size());
    for (int i : t.validation_idx) {
      const DataPoint& pt = t.points[static_cast<std::size_t>(i)];
      p.X.row(r).head(d) = pt.features.transpose();
      p.X(r, d) = 1.0;
      p.y(r) = static_cast<double>(pt.label);
      p.w(r) = inv;
      ++r;
    }
  }
  if (opts.loss.l2) p.l2 = static_cast<double>(window.size()) * opts.loss.mu;

  if (std::isfinite(opts.tolerance)) {
    // Pooled over every point in the window; the constraint is linear in
    // theta so only its direction vector is needed.
    std::vector<const DataPoint*> pool;
    for (const TaskBatch& t : window)
      for (const DataPoint& pt : t.points) pool.push_back(&pt);
    for (const ConstraintSpec& spec : specs) {
      long hits = 0;
      for (const DataPoint* pt : pool) {
        if (spec.mode == ConstraintMode::ddp)
          hits += pt->protected_group;
        else
          hits += (pt->label == 1 && pt->protected_group == 1) ? 1 : 0;
      }
      const double p1 = static_cast<double>(hits) / static_cast<double>(pool.size());
      if (p1 <= 0.0 || p1 >= 1.0) continue;  // degenerate pooled estimate: constraint inert
      const double coef = 1.0 / (p1 * (1.0 - p1));
      Vector a = Vector::Zero(d + 1);
      for (const DataPoint* pt : pool) {
        const double wi = coef * (static_cast<double>(pt->protected_group) - p1);
        a.head(d) += wi * pt->features;
        a(d) += wi;
      }
      a /= static_cast<double>(pool.size());
      p.constraint_dirs.push_back(std::move(a));
      p.epsilons.push_back(spec.epsilon);
    }
  }

  // logistic curvature bound: sum_i w_i ||x_i||^2 / 4, plus the l2 term
  double lip = p.l2;
  for (long i = 0; i < rows; ++i) lip += 0.25 * p.w(i) * p.X.row(i).squaredNorm();
  p.lipschitz = std::max(lip, 1e-12);
  return p;
}

double objective_value(const WindowProblem& p, const Vector& theta) {
  const Vector margins = (p.X * theta).cwiseProduct(p.y);
  double v = 0.0;
  for (Eigen::Index i = 0; i < margins.size(); ++i) v += p.w(i) * softplus(-margins(i));
  return v + 0.5 * p.l2 * theta.squaredNorm();
}

Vector objective_gradient(const WindowProblem& p, const Vector& theta) {
  const Vector z = p.X * theta;
  Vector coeff(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i)
    coeff(i) = -p.w(i) * p.y(i) * sigmoid(-p.y(i) * z(i));
  return p.X.transpose() * coeff + p.l2 * theta;
}

}  // namespace

ComparatorResult offline_comparator(std::span<const TaskBatch> window,
                                    const std::vector<ConstraintSpec>& specs,
                                    const ComparatorOptions& opts) {
  const WindowProblem prob = assemble(window, specs, opts);
  const Eigen::Index dim = prob.X.cols();
  const std::size_t nc = prob.constraint_dirs.size();

  Vector theta = opts.warm_theta.size() == dim ? opts.warm_theta : Vector::Zero(dim);
  theta = project_ball(theta, opts.ball_radius);
  // Two multipliers per constraint (the two sides of |a.theta| <= eps + tol).
  Vector lam = Vector::Zero(static_cast<Eigen::Index>(2 * nc));
  const double rho = 10.0;  // multiplier ascent rate

  long iters = 0;
  double step_norm = std::numeric_limits<double>::infinity();
  // the augmented term contributes rho * a a^T of curvature per constraint
  double al_curvature = 0.0;
  for (const Vector& a : prob.constraint_dirs) al_curvature += rho * a.squaredNorm();
  const double alpha = 1.0 / (prob.lipschitz + al_curvature);

  auto side_violation = [&](const Vector& th, std::size_t c, int side) {
    const double a = prob.constraint_dirs[c].dot(th);
    const double bound = prob.epsilons[c] + opts.tolerance;
    return (side == 0 ? a : -a) - bound;
  };

  bool converged = false;
  while (iters < opts.max_iters) {
    // inner: projected gradient on the augmented Lagrangian at fixed lam
    double inner_step = std::numeric_limits<double>::infinity();
    while (iters < opts.max_iters) {
      Vector grad = objective_gradient(prob, theta);
      for (std::size_t c = 0; c < nc; ++c) {
        for (int side = 0; side < 2; ++side) {
          const double mult =
              std::max(0.0, lam(static_cast<Eigen::Index>(2 * c + side)) +
                                rho * side_violation(theta, c, side));
          if (mult > 0.0)
            grad += (side == 0 ? 1.0 : -1.0) * mult * prob.constraint_dirs[c];
        }
      }
      const Vector next = project_ball(theta - alpha * grad, opts.ball_radius);
      inner_step = (next - theta).norm();
      theta = next;
      ++iters;
      if (inner_step < opts.stall_tol) break;
    }
    step_norm = inner_step;

    if (nc == 0) {
      converged = inner_step < opts.stall_tol;
      break;
    }
    double dual_step = 0.0;
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < nc; ++c) {
      for (int side = 0; side < 2; ++side) {
        const Eigen::Index j = static_cast<Eigen::Index>(2 * c + side);
        const double v = side_violation(theta, c, side);
        worst = std::max(worst, v);
        const double nl = std::max(0.0, lam(j) + rho * v);
        dual_step = std::max(dual_step, std::abs(nl - lam(j)));
        lam(j) = nl;
      }
    }
    if (inner_step < opts.stall_tol && worst <= 1e-9 && dual_step < opts.stall_tol) {
      converged = true;
      break;
    }
  }

  ComparatorResult res{std::move(theta), std::move(lam), converged, iters, step_norm};
  if (!converged)
    throw comparator_nonconvergence(
        "offline_comparator: stalled after " + std::to_string(iters) +
            " iterations (last update " + std::to_string(step_norm) + ")",
        res.theta, iters, step_norm);
  return res;
}

namespace {

double window_comparator_loss(std::span<const TaskBatch> window,
                              const std::vector<ConstraintSpec>& specs,
                              const ComparatorOptions& opts) {
  const ComparatorResult res = offline_comparator(window, specs, opts);
  double total = 0.0;
  for (const TaskBatch& t : window) total += loss(res.theta, validation_slice(t), opts.loss);
  return total;
}

}  // namespace

double static_regret(const std::vector<RoundRecord>& records, const std::vector<TaskBatch>& tasks,
                     const std::vector<ConstraintSpec>& specs, const ComparatorOptions& opts) {
  if (records.size() != tasks.size() || records.empty())
    throw std::invalid_argument("static_regret: records and tasks must align");
  double learner = 0.0;
  for (const RoundRecord& r : records) learner += r.loss;
  return learner - window_comparator_loss({tasks.data(), tasks.size()}, specs, opts);
}

double sar_estimate(const std::vector<RoundRecord>& records, const std::vector<TaskBatch>& tasks,
                    long tau, const std::vector<ConstraintSpec>& specs,
                    const ComparatorOptions& opts) {
  const long T = static_cast<long>(tasks.size());
  if (records.size() != tasks.size() || T == 0)
    throw std::invalid_argument("sar_estimate: records and tasks must align");
  if (tau < 1 || tau > T) throw std::invalid_argument("sar_estimate: tau out of range");
  double best = -std::numeric_limits<double>::infinity();
  ComparatorOptions o = opts;
  for (long s = 0; s + tau <= T; ++s) {
    double learner = 0.0;
    for (long t = s; t < s + tau; ++t) learner += records[static_cast<std::size_t>(t)].loss;
    const std::span<const TaskBatch> window{tasks.data() + s, static_cast<std::size_t>(tau)};
    const ComparatorResult res = offline_comparator(window, specs, o);
    double comp = 0.0;
    for (const TaskBatch& t : window) comp += loss(res.theta, validation_slice(t), o.loss);
    best = std::max(best, learner - comp);
    o.warm_theta = res.theta;  // adjacent windows share most of their data
  }
  return best;
}

FairSarResult fairsar_estimate(const std::vector<RoundRecord>& records,
                               const std::vector<TaskBatch>& tasks, long tau,
                               const std::vector<ConstraintSpec>& specs,
                               const ComparatorOptions& opts) {
  FairSarResult out;
  out.loss = sar_estimate(records, tasks, tau, specs, opts);
  const long T = static_cast<long>(tasks.size());
  const Eigen::Index m = records.front().g.size();
  out.violations = Vector::Constant(m, -std::numeric_limits<double>::infinity());
  for (long s = 0; s + tau <= T; ++s) {
    Vector sum = Vector::Zero(m);
    for (long t = s; t < s + tau; ++t) sum += records[static_cast<std::size_t>(t)].g;
    out.violations = out.violations.cwiseMax(sum);
  }
  return out;
}

double slope_fit(const std::vector<double>& cumulative_values) {
  const long n = static_cast<long>(cumulative_values.size());
  if (n < 4) throw std::invalid_argument("slope_fit: need at least 4 points");
  const long first = (n + 1) / 2;  // 1-based start of the second half
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  long cnt = 0;
  for (long t = first; t <= n; ++t) {
    const double x = std::log(static_cast<double>(t));
    const double y =
        std::log(std::max(cumulative_values[static_cast<std::size_t>(t - 1)], 1e-12));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++cnt;
  }
  const double denom = static_cast<double>(cnt) * sxx - sx * sx;
  if (denom == 0.0) throw std::invalid_argument("slope_fit: degenerate abscissa");
  return (static_cast<double>(cnt) * sxy - sx * sy) / denom;
}

EightyRuleResult eighty_rule(const std::vector<RoundRecord>& records, long window) {
  if (records.empty() || window < 1)
    throw std::invalid_argument("eighty_rule: need records and window >= 1");
  const long n = static_cast<long>(records.size());
  const long first = std::max<long>(0, n - window);
  double dp_sum = 0, eo_sum = 0;
  long dp_cnt = 0, eo_cnt = 0;
  for (long i = first; i < n; ++i) {
    const RoundRecord& r = records[static_cast<std::size_t>(i)];
    if (!std::isnan(r.dp)) {
      dp_sum += r.dp;
      ++dp_cnt;
    }
    if (!std::isnan(r.eo)) {
      eo_sum += r.eo;
      ++eo_cnt;
    }
  }
  EightyRuleResult out;
  out.dp = dp_cnt ? dp_sum / static_cast<double>(dp_cnt)
                  : std::numeric_limits<double>::quiet_NaN();
  out.eo = eo_cnt ? eo_sum / static_cast<double>(eo_cnt)
                  : std::numeric_limits<double>::quiet_NaN();
  out.pass = out.dp >= 0.8 && out.eo >= 0.8;
  return out;
}

}  // namespace fairsar
