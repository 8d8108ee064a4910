#pragma once

#include <cmath>

#include <Eigen/Core>

#include "fairsar/types.hpp"

namespace fairsar {

/// Optional strongly-convex regularization added to the logistic loss.
struct LossSpec {
  bool l2 = false;
  double mu = 1e-3;
};

template <class Scalar>
inline Scalar softplus(Scalar x) {
  // log(1+exp(x)) in its overflow-safe branch form
  return x > Scalar(0) ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

template <class Scalar>
inline Scalar sigmoid(Scalar x) {
  if (x >= Scalar(0)) return Scalar(1) / (Scalar(1) + std::exp(-x));
  const Scalar e = std::exp(x);
  return e / (Scalar(1) + e);
}

/// Linear score h(theta, e) = <theta_1..d, e> + theta_{d+1}.
inline double score(const Eigen::Ref<const Vector>& theta, const DataPoint& p) {
  const Eigen::Index d = p.features.size();
  if (theta.size() != d + 1)
    throw dimension_mismatch("score: theta must have dimension d+1");
  return theta.head(d).dot(p.features) + theta(d);
}

/// Mean logistic loss over a slice: softplus(-y*h), plus mu/2 ||theta||^2
/// in strongly-convex mode.
inline double loss(const Eigen::Ref<const Vector>& theta, const SliceView& slice,
                   const LossSpec& spec = {}) {
  if (slice.empty()) throw std::invalid_argument("loss: empty slice");
  double acc = 0.0;
  for (std::size_t i = 0; i < slice.size(); ++i) {
    const DataPoint& p = slice[i];
    acc += softplus(-static_cast<double>(p.label) * score(theta, p));
  }
  double v = acc / static_cast<double>(slice.size());
  if (spec.l2) v += 0.5 * spec.mu * theta.squaredNorm();
  return v;
}

/// Exact mean gradient of loss().
inline Vector loss_gradient(const Eigen::Ref<const Vector>& theta, const SliceView& slice,
                            const LossSpec& spec = {}) {
  if (slice.empty()) throw std::invalid_argument("loss_gradient: empty slice");
  const Eigen::Index d = slice[0].features.size();
  if (theta.size() != d + 1)
    throw dimension_mismatch("loss_gradient: theta must have dimension d+1");
  Vector grad = Vector::Zero(d + 1);
  for (std::size_t i = 0; i < slice.size(); ++i) {
    const DataPoint& p = slice[i];
    const double y = static_cast<double>(p.label);
    const double w = -y * sigmoid(-y * score(theta, p));
    grad.head(d) += w * p.features;
    grad(d) += w;
  }
  grad /= static_cast<double>(slice.size());
  if (spec.l2) grad += spec.mu * theta;
  return grad;
}

/// Euclidean projection onto the ball of the given radius. Idempotent.
template <class Derived>
inline Vector project_ball(const Eigen::MatrixBase<Derived>& v, double radius) {
  const double n = v.norm();
  if (n <= radius) return v;
  if (n == 0.0) return Vector::Zero(v.size());
  return v * (radius / n);
}

/// Elementwise projection onto the nonnegative orthant.
template <class Derived>
inline Vector project_nonneg(const Eigen::MatrixBase<Derived>& v) {
  return v.cwiseMax(0.0);
}

}  // namespace fairsar
