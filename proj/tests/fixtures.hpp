#pragma once

#include <vector>

#include "fairsar/types.hpp"

// Three fixed 8-point tasks (d=2) used by the learner and baseline tests.
// Feature entries stay below 1 so the gradient bound is pinned at
// sqrt(2) + S for the whole stream, and each split of size 3/3/2 contains
// both protected groups. With support_frac = 0.4 the per-expert samples
// cover the whole split, so traces are independent of the sampling RNG.

namespace fixtures {

inline fairsar::TaskBatch task(long round) {
  using fairsar::DataPoint;
  using fairsar::Vector;
  static const double data[3][8][4] = {
      {
          {0.5, -0.3, 1, 1},
          {-0.7, 0.4, -1, 0},
          {0.2, 0.8, 1, 1},
          {0.9, -0.1, -1, 0},
          {-0.4, -0.6, 1, 1},
          {0.3, 0.5, -1, 0},
          {-0.2, 0.7, 1, 1},
          {0.6, -0.8, -1, 0},
      },
      {
          {-0.5, 0.2, -1, 1},
          {0.8, -0.6, 1, 0},
          {-0.1, -0.9, 1, 1},
          {0.4, 0.3, -1, 1},
          {-0.8, 0.5, 1, 0},
          {0.1, -0.2, -1, 0},
          {0.7, 0.6, 1, 0},
          {-0.3, -0.4, -1, 1},
      },
      {
          {0.6, 0.1, 1, 0},
          {-0.2, -0.5, -1, 1},
          {0.9, 0.4, -1, 0},
          {-0.6, 0.8, 1, 0},
          {0.2, -0.7, -1, 1},
          {-0.9, 0.3, 1, 1},
          {0.5, 0.9, -1, 1},
          {-0.1, -0.3, 1, 0},
      },
  };
  const std::size_t which = static_cast<std::size_t>((round - 1) % 3);
  std::vector<DataPoint> pts;
  for (int i = 0; i < 8; ++i) {
    Vector f(2);
    f << data[which][i][0], data[which][i][1];
    pts.emplace_back(std::move(f), static_cast<int>(data[which][i][2]),
                     static_cast<int>(data[which][i][3]));
  }
  return fairsar::TaskBatch(round, std::move(pts), {0, 1, 2}, {3, 4, 5}, {6, 7});
}

inline std::vector<fairsar::TaskBatch> stream(long rounds) {
  std::vector<fairsar::TaskBatch> out;
  for (long t = 1; t <= rounds; ++t) out.push_back(task(t));
  return out;
}

}  // namespace fixtures
