#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "fedpid/config.hpp"

namespace fedpid {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfigError = 2;

// Writes <out_dir>/records.jsonl, summary.csv, final_model.fpv and config.txt.
int cmd_run(const SimulationConfig& config, std::ostream& log);

// Runs every strategy on one shared federation. Each strategy's outputs go
// to <out_dir>/<strategy>/ and the side-by-side table to <out_dir>/compare.csv.
int cmd_compare(const SimulationConfig& config, const std::vector<Strategy>& strategies,
                std::ostream& log);

// Replays every *.json aggregation fixture in dir against its stored
// expectation. Exit 0 only if at least one fixture ran and all passed.
int cmd_verify(const std::filesystem::path& fixtures_dir, std::ostream& log);

}  // namespace fedpid
