#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "fedpid/aggregation.hpp"

namespace fedpid {

// Outcome of one federated round.
struct RoundRecord {
  std::uint64_t round_index = 0;
  std::uint64_t total_clients = 0;
  std::vector<ClientId> selected_ids;
  AggregationWeights weights;  // aligned with selected_ids
  std::map<ClientId, double> per_client_cost;  // post-training cost of each participant
  std::vector<ClientId> carried_forward_ids;  // non-participants whose last cost was reused
  bool all_outliers = false;
  double global_cost = 0.0;  // new global model on the pooled federation data
  double participation_fraction = 0.0;
  Fallback fallback_applied = Fallback::none;
  std::uint64_t wall_ms = 0;

  friend bool operator==(const RoundRecord&, const RoundRecord&) = default;
};

// Mean participation fraction across rounds. This is this project's own
// communication-cost accounting, reported as mean_participation_fraction.
double comm_cost_summary(std::span<const RoundRecord> records);

// One JSON object per line, keys in a fixed order, doubles with 17
// significant digits.
std::string record_to_json(const RoundRecord& record);
RoundRecord record_from_json(std::string_view line);

void write_records(std::span<const RoundRecord> records, const std::filesystem::path& path);
std::vector<RoundRecord> read_records(const std::filesystem::path& path);

// Companion CSV: round,global_cost,participation_fraction,fallback
void write_summary_csv(std::span<const RoundRecord> records, const std::filesystem::path& path);

}  // namespace fedpid
