#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fairsar/types.hpp"

namespace fairsar {

/// One data domain of the drifting stream. Features are drawn standard
/// normal, shifted by group_shift for the protected group, then multiplied
/// by flip_sign; labels follow a logistic model on the (post-flip) features
/// with an extra group_bias on the score for s=1. group_shift defaults to 0;
/// the spec'd construction is recovered exactly in that case, and a nonzero
/// value makes the group signal expressible by a feature-based classifier.
struct DomainSpec {
  Vector true_weights;      // d+1, last entry is the bias
  int flip_sign = 1;        // {+1,-1} multiplier on non-protected features
  double group_bias = 0.0;  // added to the label score for s=1
  double group1_prob = 0.5; // P(s=1), must lie strictly in (0,1)
  double group_shift = 0.0; // pre-flip feature mean offset for s=1
};

struct EnvironmentSpec {
  std::vector<std::pair<long, DomainSpec>> segments;  // (length in rounds, domain)
  Eigen::Index d = 2;
  long n_per_task = 16;
  std::uint64_t seed = 0;

  long horizon() const;
  void validate() const;
};

/// Seeded synthetic task stream; a pure function of the spec. Each task is
/// split 40/40/20 into support/query/validation.
std::vector<TaskBatch> generate(const EnvironmentSpec& spec);

/// Read a task stream from CSV (gzip accepted when the name ends in .gz).
/// Header: task_id,split,label,protected,f1,...,fd. Tasks are ordered by
/// ascending task_id; id gaps are renumbered consecutively with a warning.
std::vector<TaskBatch> load_csv(const std::string& path,
                                std::vector<std::string>* warnings = nullptr);

/// Write a stream in the same schema (gzip when the name ends in .gz).
void write_csv(const std::string& path, const std::vector<TaskBatch>& tasks);

}  // namespace fairsar
