#pragma once

#include <cmath>
#include <vector>

#include "fairsar/intervals.hpp"
#include "fairsar/model.hpp"
#include "fairsar/types.hpp"

namespace fairsar {

/// One slot in the expert pool. The pool holds exactly one expert per
/// interval level for the whole run; activation replaces the interval and
/// resets the params but R and C are inherited across replacements.
struct ExpertState {
  int level = 0;
  IntervalId interval;
  ParamPair params;
  double R = 0.0;         // cumulative regret statistic (may be negative)
  double C = 0.0;         // cumulative absolute statistic, >= 0
  double p = 0.0;         // normalized weight
  long last_active = 0;   // round of most recent activation
  double step_size = 0.0; // eta frozen at activation

  bool active_at(long t) const { return last_active == t; }
};

/// Potential Phi(R,C) = exp(max(0,R)^2 / 3C), with Phi := 1 whenever C <= 0
/// (continuous limit consistent with Phi(0,0) = 1).
template <class Scalar>
inline Scalar potential(Scalar r, Scalar c) {
  if (c <= Scalar(0)) return Scalar(1);
  const Scalar rp = r > Scalar(0) ? r : Scalar(0);
  return std::exp(rp * rp / (Scalar(3) * c));
}

/// Unnormalized weight w(R,C) = (Phi(R+1,C+1) - Phi(R-1,C-1)) / 2, clamped
/// at 0 so normalization stays a probability simplex.
template <class Scalar>
inline Scalar raw_weight(Scalar r, Scalar c) {
  const Scalar w =
      (potential(r + Scalar(1), c + Scalar(1)) - potential(r - Scalar(1), c - Scalar(1))) /
      Scalar(2);
  return w > Scalar(0) ? w : Scalar(0);
}

/// Assign p_I = w(R_I,C_I) / sum_J w(R_J,C_J); uniform fallback when every
/// raw weight is zero.
inline void normalize_weights(std::vector<ExpertState>& pool) {
  if (pool.empty()) throw std::invalid_argument("normalize_weights: empty pool");
  double sum = 0.0;
  for (ExpertState& e : pool) {
    e.p = raw_weight(e.R, e.C);
    sum += e.p;
  }
  if (sum <= 0.0) {
    const double u = 1.0 / static_cast<double>(pool.size());
    for (ExpertState& e : pool) e.p = u;
    return;
  }
  for (ExpertState& e : pool) e.p /= sum;
}

/// Re-activate the experts whose intervals start at round t: replace the
/// owned interval, reset params to the incoming meta pair, and freeze the
/// step size eta = S / (G * sqrt(nominal length)). R and C carry over from
/// the replaced expert.
inline void activate(std::vector<ExpertState>& pool, const std::vector<IntervalId>& targets,
                     const ParamPair& meta, const DomainBounds& bounds, long t) {
  if (bounds.G <= 0.0)
    throw gradient_bound_zero("activate: gradient bound G must be positive");
  for (const IntervalId& iv : targets) {
    ExpertState& e = pool.at(static_cast<std::size_t>(iv.level));
    e.interval = iv;
    e.params = meta;
    e.step_size = bounds.S / (bounds.G * std::sqrt(static_cast<double>(iv.nominal_length)));
    e.last_active = t;
  }
}

/// Accumulate the meta-vs-expert Lagrangian gap into the weight statistics:
/// R += F(meta) - F(expert), C += |F(meta) - F(expert)|, per level.
inline void update_rc(std::vector<ExpertState>& pool, const std::vector<double>& meta_value,
                      const std::vector<double>& expert_value) {
  if (meta_value.size() != pool.size() || expert_value.size() != pool.size())
    throw std::invalid_argument("update_rc: values must cover every level");
  for (std::size_t k = 0; k < pool.size(); ++k) {
    const double diff = meta_value[k] - expert_value[k];
    pool[k].R += diff;
    pool[k].C += std::abs(diff);
  }
}

}  // namespace fairsar
