#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "fedpid/aggregation.hpp"
#include "fedpid/config.hpp"
#include "fedpid/metrics.hpp"
#include "fedpid/params.hpp"
#include "fedpid/selection.hpp"

namespace fedpid {

// A client's local samples. features is row-major, labels.size() rows by dim
// columns. Logistic labels are 0/1.
struct ClientDataset {
  TaskKind kind = TaskKind::least_squares;
  std::size_t dim = 0;
  std::vector<double> features;
  std::vector<double> labels;

  std::size_t rows() const noexcept { return labels.size(); }
};

struct ClientRecord {
  ClientId id = 0;
  std::uint64_t size = 0;
  ClientDataset data;
  std::vector<double> cost_history;  // one entry per completed round
};

struct FederationState {
  ParameterVector global_model;
  std::vector<ClientRecord> clients;  // ascending id
  std::uint64_t round_index = 0;
  std::uint64_t rng_seed = 0;
  double lambda_estimate = 0.0;  // sample mean of client sizes
};

// Deterministic synthetic federation. Sizes are Poisson(lambda) draws with
// zeros redrawn; size_overrides replaces chosen clients' sizes before their
// data is generated.
FederationState generate_federation(const SimulationConfig& config,
                                    const std::map<ClientId, std::uint64_t>& size_overrides = {});

// Mean local cost of model on data (squared error / 2 or log loss), floored
// at kCostFloor.
double local_cost(const ClientDataset& data, const ParameterVector& model);

// Sample-weighted cost of model over every client's data.
double pooled_cost(const FederationState& state, const ParameterVector& model);

inline constexpr double kCostFloor = 1e-12;

struct LocalUpdate {
  ParameterVector model;
  double cost;
};

// Full-batch gradient descent from global_model. Throws DivergenceError when
// parameters or cost stop being finite.
LocalUpdate local_train(const ClientRecord& client, const ParameterVector& global_model,
                        std::uint64_t epochs, double lr);

struct RoundOptions {
  Strategy strategy = Strategy::fedavg;
  StrategyParams params;
  SelectionPolicy policy;
  std::uint64_t epochs = 1;
  double lr = 0.1;
  unsigned workers = 1;
  bool record_timing = false;
};

RoundOptions round_options(const SimulationConfig& config, double lambda_estimate);

// One broadcast / local train / collect / aggregate cycle. Advances state.
RoundRecord run_round(FederationState& state, const RoundOptions& options);

struct SimulationResult {
  std::vector<RoundRecord> records;
  FederationState final_state;
};

// Runs config.rounds rounds on an existing federation, stopping early when
// the pooled cost improved by less than tol (relative) over the last
// `patience` rounds.
SimulationResult run_rounds(FederationState state, const SimulationConfig& config);

SimulationResult run_simulation(const SimulationConfig& config);

}  // namespace fedpid
