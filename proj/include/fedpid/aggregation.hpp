#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "fedpid/params.hpp"

namespace fedpid {

using ClientId = std::int64_t;

// One participant's contribution to a round.
//   size          number of local training samples (>= 1)
//   cost_history  per-round local costs, oldest first; back() is the cost
//                 after this round's local training
struct ClientRoundInput {
  ClientId client_id = 0;
  std::uint64_t size = 0;
  ParameterVector model;
  std::vector<double> cost_history;
};

// Mixing coefficients for the size, cost-drop and cost-sum terms.
// alpha + beta + gamma must be 1 within 1e-12.
class PidCoefficients {
 public:
  PidCoefficients() = default;
  PidCoefficients(double alpha, double beta, double gamma);

  double alpha() const noexcept { return alpha_; }
  double beta() const noexcept { return beta_; }
  double gamma() const noexcept { return gamma_; }

 private:
  double alpha_ = 0.45;
  double beta_ = 0.45;
  double gamma_ = 0.1;
};

enum class Fallback { none, missing_history, degenerate_normalizer };

std::string_view to_string(Fallback f) noexcept;
Fallback fallback_from_string(std::string_view s);

struct AggregationWeights {
  std::vector<ClientId> client_ids;
  std::vector<double> weights;
  Fallback fallback_applied = Fallback::none;

  friend bool operator==(const AggregationWeights&, const AggregationWeights&) = default;
};

enum class Strategy { fedavg, fedcostwavg, fedpidavg };

std::string_view to_string(Strategy s) noexcept;
Strategy strategy_from_string(std::string_view s);

// How the per-client cost change is turned into k_j for FedPIDAvg.
//   magnitude_drop  k_j = |c_prev - c_curr| (default)
//   signed_drop     k_j = c_prev - c_curr; K can cross zero once clients'
//                   costs move in opposite directions, and the weights then
//                   grow without bound short of the degeneracy guard.
enum class CostDropForm { signed_drop, magnitude_drop };

struct StrategyParams {
  double cw_alpha = 0.5;
  PidCoefficients pid;
  std::size_t window = 6;
  CostDropForm k_form = CostDropForm::magnitude_drop;
};

AggregationWeights fedavg_weights(std::span<const ClientRoundInput> inputs);

AggregationWeights fedcostwavg_weights(std::span<const ClientRoundInput> inputs, double alpha);

AggregationWeights fedpidavg_weights(std::span<const ClientRoundInput> inputs,
                                     const PidCoefficients& coeffs, std::size_t window = 6,
                                     CostDropForm k_form = CostDropForm::magnitude_drop);

AggregationWeights compute_weights(Strategy strategy, std::span<const ClientRoundInput> inputs,
                                   const StrategyParams& params);

struct AggregateResult {
  ParameterVector model;
  AggregationWeights weights;
};

// Weights from the chosen strategy, applied to the inputs' models in input
// order. Does not fall back on MissingHistory; that is the caller's call.
AggregateResult aggregate(Strategy strategy, std::span<const ClientRoundInput> inputs,
                          const StrategyParams& params);

}  // namespace fedpid
