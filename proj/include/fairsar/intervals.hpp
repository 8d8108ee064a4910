#pragma once

#include <vector>

#include "fairsar/errors.hpp"

namespace fairsar {

/// One geometric covering interval [start, end] at a given level.
/// nominal_length is b^level and feeds step sizes even when the last
/// interval of a level is clipped at the horizon.
struct IntervalId {
  int level = 0;
  long index = 1;  // 1-based position within the level
  long start = 1;
  long end = 1;
  long nominal_length = 1;

  friend bool operator==(const IntervalId&, const IntervalId&) = default;
};

/// Number of interval levels for horizon T and base b: floor(log_b T).
inline int level_count(long T, int b) {
  if (T < 2) throw degenerate_horizon("level_count: horizon must be >= 2");
  if (b < 2) throw std::invalid_argument("level_count: base must be >= 2");
  int k = 0;
  long p = 1;
  while (p <= T / b) {
    p *= b;
    ++k;
  }
  return k;
}

/// The full covering is never materialized; intervals are computed on
/// demand from (t, level). Levels run 0..levels-1.
struct CoveringSet {
  long horizon;
  int base;
  int levels;

  CoveringSet(long T, int b) : horizon(T), base(b), levels(level_count(T, b)) {}
};

/// The unique level-k interval containing round t.
inline IntervalId interval_at(long t, int k, const CoveringSet& cov) {
  if (t < 1 || t > cov.horizon) throw std::invalid_argument("interval_at: round out of range");
  if (k < 0 || k >= cov.levels) throw std::invalid_argument("interval_at: bad level");
  long len = 1;
  for (int i = 0; i < k; ++i) len *= cov.base;
  const long index = (t - 1) / len + 1;
  const long start = (index - 1) * len + 1;
  const long end = std::min(cov.horizon, index * len);
  return {k, index, start, end, len};
}

/// Intervals that begin exactly at round t (one per level k with
/// (t-1) mod b^k == 0), ascending by level. These determine which experts
/// get re-activated.
inline std::vector<IntervalId> target_set(long t, const CoveringSet& cov) {
  if (t < 1 || t > cov.horizon) throw std::invalid_argument("target_set: round out of range");
  std::vector<IntervalId> out;
  long len = 1;
  for (int k = 0; k < cov.levels; ++k) {
    if ((t - 1) % len == 0) out.push_back(interval_at(t, k, cov));
    len *= cov.base;
  }
  return out;
}

}  // namespace fairsar
