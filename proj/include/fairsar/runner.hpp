#pragma once

#include <string>
#include <vector>

#include "fairsar/config.hpp"
#include "fairsar/types.hpp"

namespace fairsar {

/// Build the task stream named by the config (synthetic preset or CSV).
std::vector<TaskBatch> make_stream(const Config& cfg);

/// Execute the configured algorithm over a stream. Reads FAIRSAR_THREADS to
/// cap worker parallelism (default 1). Step failures are rethrown with the
/// round and operation in the message.
std::vector<RoundRecord> run_algorithm(const Config& cfg, const std::string& algo_name,
                                       const std::string& ablation,
                                       const std::vector<TaskBatch>& tasks);

void write_rounds_csv(const std::string& path, const std::vector<RoundRecord>& records);

/// `run`: execute + persist rounds.csv, summary.json and the effective
/// config under cfg.out.dir.
int run_command(const Config& cfg);

/// `gen`: write the configured synthetic stream to <out>/stream.csv.
int gen_command(const Config& cfg);

/// `compare`: one stream, several algorithms/ablations, merged long-format
/// CSV keyed by (algorithm, round).
int compare_command(const Config& cfg);

}  // namespace fairsar
