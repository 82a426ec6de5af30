#include "fedpid/aggregation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fedpid/error.hpp"

namespace fedpid {
namespace {

constexpr double kCoefficientSumTolerance = 1e-12;
// Relative threshold below which a normalizer (K or I) is treated as zero.
constexpr double kDegenerateScale = 1e-12;

void require_nonempty(std::span<const ClientRoundInput> inputs) {
  if (inputs.empty()) throw EmptyInput("aggregation needs at least one client");
}

double total_size(std::span<const ClientRoundInput> inputs) {
  double total = 0.0;
  for (const auto& in : inputs) {
    if (in.size == 0) {
      throw InvalidArgument("client " + std::to_string(in.client_id) + " has size 0");
    }
    total += static_cast<double>(in.size);
  }
  return total;
}

// Histories must be aligned, at least two entries long, finite and positive.
void validate_histories(std::span<const ClientRoundInput> inputs) {
  const std::size_t len = inputs.front().cost_history.size();
  for (const auto& in : inputs) {
    if (in.cost_history.size() < 2) {
      throw MissingHistory("client " + std::to_string(in.client_id) + " has " +
                           std::to_string(in.cost_history.size()) +
                           " cost entries, need at least 2");
    }
    if (in.cost_history.size() != len) {
      throw InvalidArgument("cost histories differ in length across clients");
    }
  }
  for (const auto& in : inputs) {
    for (double c : in.cost_history) {
      if (!std::isfinite(c) || c <= 0.0) {
        throw InvalidCost("client " + std::to_string(in.client_id) +
                          " has a non-positive or non-finite cost");
      }
    }
  }
}

double previous_cost(const ClientRoundInput& in) { return in.cost_history[in.cost_history.size() - 2]; }
double current_cost(const ClientRoundInput& in) { return in.cost_history.back(); }

AggregationWeights empty_weights(std::span<const ClientRoundInput> inputs) {
  AggregationWeights out;
  out.client_ids.reserve(inputs.size());
  for (const auto& in : inputs) out.client_ids.push_back(in.client_id);
  out.weights.assign(inputs.size(), 0.0);
  return out;
}

}  // namespace

PidCoefficients::PidCoefficients(double alpha, double beta, double gamma)
    : alpha_(alpha), beta_(beta), gamma_(gamma) {
  for (double c : {alpha, beta, gamma}) {
    if (!(c >= 0.0 && c <= 1.0)) {
      throw InvalidArgument("alpha, beta and gamma must each lie in [0, 1]");
    }
  }
  if (std::abs(alpha + beta + gamma - 1.0) > kCoefficientSumTolerance) {
    throw InvalidArgument("alpha + beta + gamma must equal 1, got " +
                          std::to_string(alpha + beta + gamma));
  }
}

std::string_view to_string(Fallback f) noexcept {
  switch (f) {
    case Fallback::none: return "none";
    case Fallback::missing_history: return "missing_history";
    case Fallback::degenerate_normalizer: return "degenerate_normalizer";
  }
  return "none";
}

Fallback fallback_from_string(std::string_view s) {
  if (s == "none") return Fallback::none;
  if (s == "missing_history") return Fallback::missing_history;
  if (s == "degenerate_normalizer") return Fallback::degenerate_normalizer;
  throw InvalidArgument("unknown fallback '" + std::string(s) + "'");
}

std::string_view to_string(Strategy s) noexcept {
  switch (s) {
    case Strategy::fedavg: return "fedavg";
    case Strategy::fedcostwavg: return "fedcostwavg";
    case Strategy::fedpidavg: return "fedpidavg";
  }
  return "fedavg";
}

Strategy strategy_from_string(std::string_view s) {
  if (s == "fedavg") return Strategy::fedavg;
  if (s == "fedcostwavg") return Strategy::fedcostwavg;
  if (s == "fedpidavg") return Strategy::fedpidavg;
  throw InvalidArgument("unknown strategy '" + std::string(s) + "'");
}

AggregationWeights fedavg_weights(std::span<const ClientRoundInput> inputs) {
  require_nonempty(inputs);
  const double total = total_size(inputs);
  auto out = empty_weights(inputs);
  for (std::size_t j = 0; j < inputs.size(); ++j) {
    out.weights[j] = static_cast<double>(inputs[j].size) / total;
  }
  return out;
}

AggregationWeights fedcostwavg_weights(std::span<const ClientRoundInput> inputs, double alpha) {
  require_nonempty(inputs);
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvalidArgument("FedCostWAvg alpha must lie in [0, 1]");
  const double total = total_size(inputs);
  validate_histories(inputs);

  std::vector<double> ratio(inputs.size());
  double ratio_sum = 0.0;
  for (std::size_t j = 0; j < inputs.size(); ++j) {
    ratio[j] = previous_cost(inputs[j]) / current_cost(inputs[j]);
    ratio_sum += ratio[j];
  }

  auto out = empty_weights(inputs);
  for (std::size_t j = 0; j < inputs.size(); ++j) {
    double w = alpha * static_cast<double>(inputs[j].size) / total;
    if (alpha != 1.0) w += (1.0 - alpha) * ratio[j] / ratio_sum;
    out.weights[j] = w;
  }
  return out;
}

AggregationWeights fedpidavg_weights(std::span<const ClientRoundInput> inputs,
                                     const PidCoefficients& coeffs, std::size_t window,
                                     CostDropForm k_form) {
  require_nonempty(inputs);
  if (window == 0) throw InvalidArgument("integral window must be >= 1");
  const double total = total_size(inputs);
  validate_histories(inputs);

  const std::size_t n = inputs.size();
  std::vector<double> drop(n);
  std::vector<double> integral(n);
  double drop_sum = 0.0;
  double integral_sum = 0.0;
  double max_prev = 0.0;
  double max_integral = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const auto& hist = inputs[j].cost_history;
    const double prev = previous_cost(inputs[j]);
    drop[j] = prev - current_cost(inputs[j]);
    if (k_form == CostDropForm::magnitude_drop) drop[j] = std::abs(drop[j]);
    drop_sum += drop[j];
    max_prev = std::max(max_prev, std::abs(prev));

    const std::size_t take = std::min(window, hist.size());
    double m = 0.0;
    for (std::size_t l = hist.size() - take; l < hist.size(); ++l) m += hist[l];
    integral[j] = m;
    integral_sum += m;
    max_integral = std::max(max_integral, m);
  }

  double a = coeffs.alpha();
  double b = coeffs.beta();
  double g = coeffs.gamma();
  auto out = empty_weights(inputs);
  if (std::abs(drop_sum) <= kDegenerateScale * max_prev) {
    a += b;
    b = 0.0;
    out.fallback_applied = Fallback::degenerate_normalizer;
  }
  if (std::abs(integral_sum) <= kDegenerateScale * max_integral) {
    a += g;
    g = 0.0;
    out.fallback_applied = Fallback::degenerate_normalizer;
  }

  for (std::size_t j = 0; j < n; ++j) {
    double w = a * static_cast<double>(inputs[j].size) / total;
    if (b != 0.0) w += b * drop[j] / drop_sum;
    if (g != 0.0) w += g * integral[j] / integral_sum;
    out.weights[j] = w;
  }
  return out;
}

AggregationWeights compute_weights(Strategy strategy, std::span<const ClientRoundInput> inputs,
                                   const StrategyParams& params) {
  switch (strategy) {
    case Strategy::fedavg: return fedavg_weights(inputs);
    case Strategy::fedcostwavg: return fedcostwavg_weights(inputs, params.cw_alpha);
    case Strategy::fedpidavg:
      return fedpidavg_weights(inputs, params.pid, params.window, params.k_form);
  }
  throw InvalidArgument("unknown strategy");
}

AggregateResult aggregate(Strategy strategy, std::span<const ClientRoundInput> inputs,
                          const StrategyParams& params) {
  auto weights = compute_weights(strategy, inputs, params);
  std::vector<ParameterVector> models;
  models.reserve(inputs.size());
  for (const auto& in : inputs) models.push_back(in.model);
  auto model = weighted_sum(models, weights.weights);
  return {std::move(model), std::move(weights)};
}

}  // namespace fedpid
