#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "fairsar/model.hpp"
#include "fairsar/types.hpp"

namespace fairsar {

/// One fairness constraint: |E[(s - p1)/(p1(1-p1)) * h(theta,e)]| - epsilon.
/// mode selects how the group estimate p1 is formed.
struct ConstraintSpec {
  ConstraintMode mode = ConstraintMode::ddp;
  double epsilon = 0.05;
};

/// Empirical group estimate over a slice: fraction with s=1 (ddp) or with
/// y=1 and s=1 (deo). Values of exactly 0 or 1 make the constraint's
/// normalizer vanish and are rejected.
inline double group_estimate(const SliceView& slice, ConstraintMode mode) {
  if (slice.empty()) throw std::invalid_argument("group_estimate: empty slice");
  long hits = 0;
  for (std::size_t i = 0; i < slice.size(); ++i) {
    const DataPoint& p = slice[i];
    if (mode == ConstraintMode::ddp)
      hits += p.protected_group;
    else
      hits += (p.label == 1 && p.protected_group == 1) ? 1 : 0;
  }
  const double p1 = static_cast<double>(hits) / static_cast<double>(slice.size());
  if (p1 <= 0.0 || p1 >= 1.0)
    throw infeasible_group_estimate("group_estimate: degenerate group proportion");
  return p1;
}

namespace detail {
// Signed inner mean of the covariance relaxation, before |.| and -epsilon.
inline double constraint_inner(const Eigen::Ref<const Vector>& theta, const SliceView& slice,
                               const ConstraintSpec& spec) {
  const double p1 = group_estimate(slice, spec.mode);
  const double coef = 1.0 / (p1 * (1.0 - p1));
  double acc = 0.0;
  for (std::size_t i = 0; i < slice.size(); ++i) {
    const DataPoint& p = slice[i];
    acc += coef * (static_cast<double>(p.protected_group) - p1) * score(theta, p);
  }
  return acc / static_cast<double>(slice.size());
}
}  // namespace detail

inline double constraint_value(const Eigen::Ref<const Vector>& theta, const SliceView& slice,
                               const ConstraintSpec& spec) {
  return std::abs(detail::constraint_inner(theta, slice, spec)) - spec.epsilon;
}

/// Subgradient of constraint_value: sign(u) * grad(u), with the zero vector
/// chosen at u = 0.
inline Vector constraint_subgradient(const Eigen::Ref<const Vector>& theta,
                                     const SliceView& slice, const ConstraintSpec& spec) {
  const double u = detail::constraint_inner(theta, slice, spec);
  const Eigen::Index d = slice[0].features.size();
  Vector grad = Vector::Zero(d + 1);
  if (u == 0.0) return grad;
  const double p1 = group_estimate(slice, spec.mode);
  const double coef = 1.0 / (p1 * (1.0 - p1));
  const double sgn = u > 0.0 ? 1.0 : -1.0;
  for (std::size_t i = 0; i < slice.size(); ++i) {
    const DataPoint& p = slice[i];
    const double w = coef * (static_cast<double>(p.protected_group) - p1);
    grad.head(d) += w * p.features;
    grad(d) += w;
  }
  grad *= sgn / static_cast<double>(slice.size());
  return grad;
}

namespace detail {
// Oriented ratio min(r, 1/r) so 1 is always "most fair". Throws when either
// group's positive-prediction rate is undefined or zero.
inline double oriented_rate_ratio(double pos0, long n0, double pos1, long n1) {
  if (n0 == 0 || n1 == 0)
    throw undefined_ratio("rate ratio: a protected group is absent");
  const double r0 = pos0 / static_cast<double>(n0);
  const double r1 = pos1 / static_cast<double>(n1);
  if (r0 == 0.0 || r1 == 0.0)
    throw undefined_ratio("rate ratio: a group has no positive predictions");
  const double r = r0 / r1;
  return std::min(r, 1.0 / r);
}
}  // namespace detail

/// Demographic parity ratio P(yhat=1|s=0) / P(yhat=1|s=1), oriented into [0,1].
inline double dp_ratio(const std::vector<int>& predictions, const std::vector<int>& protected_groups) {
  if (predictions.size() != protected_groups.size() || predictions.empty())
    throw std::invalid_argument("dp_ratio: size mismatch");
  double pos[2] = {0, 0};
  long n[2] = {0, 0};
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const int s = protected_groups[i];
    ++n[s];
    if (predictions[i] == 1) pos[s] += 1.0;
  }
  return detail::oriented_rate_ratio(pos[0], n[0], pos[1], n[1]);
}

/// Equalized-odds style ratio conditioned on Y = y, oriented into [0,1].
inline double eo_ratio(const std::vector<int>& predictions, const std::vector<int>& labels,
                       const std::vector<int>& protected_groups, int y) {
  if (predictions.size() != labels.size() || predictions.size() != protected_groups.size() ||
      predictions.empty())
    throw std::invalid_argument("eo_ratio: size mismatch");
  if (y != -1 && y != 1) throw std::invalid_argument("eo_ratio: y must be -1 or +1");
  double pos[2] = {0, 0};
  long n[2] = {0, 0};
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    if (labels[i] != y) continue;
    const int s = protected_groups[i];
    ++n[s];
    if (predictions[i] == 1) pos[s] += 1.0;
  }
  return detail::oriented_rate_ratio(pos[0], n[0], pos[1], n[1]);
}

}  // namespace fairsar
