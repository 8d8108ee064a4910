#pragma once

#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Core>

namespace fairsar {

// Base class for library errors so callers can catch everything at once.
struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct dimension_mismatch : error {
  using error::error;
};
struct degenerate_horizon : error {
  using error::error;
};
struct gradient_bound_zero : error {
  using error::error;
};
struct infeasible_group_estimate : error {
  using error::error;
};
struct undefined_ratio : error {
  using error::error;
};
struct schema_error : error {
  using error::error;
};
struct empty_task : error {
  using error::error;
};
struct round_order_violation : error {
  using error::error;
};

// Batch comparator stalled before reaching first-order stationarity.
// Carries the best iterate seen so the caller can inspect or reuse it.
struct comparator_nonconvergence : error {
  comparator_nonconvergence(const std::string& what, Eigen::VectorXd best,
                            long iters, double last_step)
      : error(what),
        best_iterate(std::move(best)),
        iterations(iters),
        final_step(last_step) {}

  Eigen::VectorXd best_iterate;
  long iterations;
  double final_step;
};

}  // namespace fairsar
