#include "fedpid/sim.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <optional>
#include <string>
#include <thread>

#include <boost/random/mersenne_twister.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/poisson_distribution.hpp>

#include "fedpid/error.hpp"

namespace fedpid {
namespace {

using Rng = boost::random::mt19937_64;

double dot(const double* row, std::span<const double> w) {
  double acc = 0.0;
  for (std::size_t d = 0; d < w.size(); ++d) acc += row[d] * w[d];
  return acc;
}

double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// Unfloored mean cost; may be non-finite for divergent parameters.
double raw_cost(const ClientDataset& data, std::span<const double> w) {
  double acc = 0.0;
  for (std::size_t i = 0; i < data.rows(); ++i) {
    const double z = dot(&data.features[i * data.dim], w);
    if (data.kind == TaskKind::least_squares) {
      const double r = z - data.labels[i];
      acc += 0.5 * r * r;
    } else {
      acc += softplus(z) - data.labels[i] * z;
    }
  }
  return acc / static_cast<double>(data.rows());
}

void gradient(const ClientDataset& data, std::span<const double> w, std::vector<double>& grad) {
  std::fill(grad.begin(), grad.end(), 0.0);
  for (std::size_t i = 0; i < data.rows(); ++i) {
    const double* row = &data.features[i * data.dim];
    const double z = dot(row, w);
    const double r = data.kind == TaskKind::least_squares ? z - data.labels[i]
                                                          : sigmoid(z) - data.labels[i];
    for (std::size_t d = 0; d < data.dim; ++d) grad[d] += r * row[d];
  }
  const double inv_n = 1.0 / static_cast<double>(data.rows());
  for (double& g : grad) g *= inv_n;
}

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

ClientDataset make_dataset(const SyntheticTask& task, std::uint64_t rows,
                           std::span<const double> true_weights, Rng& rng) {
  boost::random::normal_distribution<double> normal(0.0, 1.0);
  const std::size_t dim = task.dim;

  std::vector<double> mean(dim);
  std::vector<double> weights(true_weights.begin(), true_weights.end());
  for (auto& m : mean) m = task.client_shift * normal(rng);
  for (auto& w : weights) w += task.client_shift * normal(rng);

  ClientDataset data;
  data.kind = task.kind;
  data.dim = dim;
  data.features.resize(rows * dim);
  data.labels.resize(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    double* row = &data.features[i * dim];
    for (std::size_t d = 0; d < dim; ++d) row[d] = mean[d] + normal(rng);
    const double signal = dot(row, weights) + task.noise_sigma * normal(rng);
    data.labels[i] = task.kind == TaskKind::least_squares ? signal : (signal > 0.0 ? 1.0 : 0.0);
  }
  return data;
}

}  // namespace

FederationState generate_federation(const SimulationConfig& config,
                                    const std::map<ClientId, std::uint64_t>& size_overrides) {
  config.validate();
  Rng rng(config.seed);
  boost::random::poisson_distribution<std::uint64_t, double> poisson(config.lambda);
  boost::random::normal_distribution<double> normal(0.0, 1.0);

  std::vector<std::uint64_t> sizes(config.clients);
  for (auto& s : sizes) {
    do {
      s = poisson(rng);
    } while (s == 0);
  }
  for (const auto& [id, size] : size_overrides) {
    if (id < 0 || static_cast<std::uint64_t>(id) >= config.clients) {
      throw InvalidConfig("size override for unknown client " + std::to_string(id));
    }
    if (size == 0) throw InvalidConfig("size override must be >= 1");
    sizes[static_cast<std::size_t>(id)] = size;
  }

  std::vector<double> true_weights(config.task.dim);
  for (auto& w : true_weights) w = normal(rng);

  std::vector<ClientRecord> clients;
  clients.reserve(config.clients);
  for (std::size_t j = 0; j < config.clients; ++j) {
    clients.push_back({static_cast<ClientId>(j), sizes[j],
                       make_dataset(config.task, sizes[j], true_weights, rng), {}});
  }

  return FederationState{ParameterVector(std::vector<double>(config.task.dim, 0.0)),
                         std::move(clients), 0, config.seed, estimate_lambda(sizes)};
}

double local_cost(const ClientDataset& data, const ParameterVector& model) {
  if (data.rows() == 0) throw EmptyInput("client dataset is empty");
  if (model.dim() != data.dim) throw DimensionMismatch("model and data dims differ");
  return std::max(raw_cost(data, model.values()), kCostFloor);
}

double pooled_cost(const FederationState& state, const ParameterVector& model) {
  double weighted = 0.0;
  double total = 0.0;
  for (const auto& c : state.clients) {
    weighted += static_cast<double>(c.size) * local_cost(c.data, model);
    total += static_cast<double>(c.size);
  }
  return weighted / total;
}

LocalUpdate local_train(const ClientRecord& client, const ParameterVector& global_model,
                        std::uint64_t epochs, double lr) {
  const auto& data = client.data;
  if (data.rows() == 0) throw EmptyInput("client " + std::to_string(client.id) + " has no data");
  if (!(lr > 0.0)) throw InvalidArgument("learning rate must be > 0");
  if (global_model.dim() != data.dim) throw DimensionMismatch("model and data dims differ");

  std::vector<double> w(global_model.begin(), global_model.end());
  std::vector<double> grad(w.size());
  for (std::uint64_t e = 0; e < epochs; ++e) {
    gradient(data, w, grad);
    for (std::size_t d = 0; d < w.size(); ++d) w[d] -= lr * grad[d];
    if (!all_finite(w)) {
      throw DivergenceError("client " + std::to_string(client.id) + " diverged at epoch " +
                            std::to_string(e));
    }
  }
  const double cost = raw_cost(data, w);
  if (!std::isfinite(cost)) {
    throw DivergenceError("client " + std::to_string(client.id) + " produced a non-finite cost");
  }
  return {ParameterVector(std::move(w)), std::max(cost, kCostFloor)};
}

RoundOptions round_options(const SimulationConfig& config, double lambda_estimate) {
  RoundOptions o;
  o.strategy = config.strategy;
  o.params = config.strategy_params();
  o.policy = config.selection_policy(lambda_estimate);
  o.epochs = config.epochs;
  o.lr = config.lr;
  o.workers = config.workers;
  o.record_timing = config.record_timing;
  return o;
}

RoundRecord run_round(FederationState& state, const RoundOptions& options) {
  const auto started = std::chrono::steady_clock::now();
  if (state.clients.empty()) throw EmptyInput("federation has no clients");

  std::map<ClientId, std::uint64_t> sizes;
  for (const auto& c : state.clients) sizes.emplace(c.id, c.size);
  const Selection selection = select_clients(sizes, options.policy, state.round_index);

  std::vector<const ClientRecord*> participants;
  for (const auto& c : state.clients) {
    if (std::binary_search(selection.ids.begin(), selection.ids.end(), c.id)) {
      participants.push_back(&c);
    }
  }

  // Local training may run concurrently; results land in per-participant
  // slots and are consumed in ascending id order.
  std::vector<std::optional<LocalUpdate>> updates(participants.size());
  std::vector<std::exception_ptr> failures(participants.size());
  auto train = [&](std::size_t k) {
    try {
      updates[k] = local_train(*participants[k], state.global_model, options.epochs, options.lr);
    } catch (...) {
      failures[k] = std::current_exception();
    }
  };
  const std::size_t workers = std::min<std::size_t>(std::max(options.workers, 1u), participants.size());
  if (workers <= 1) {
    for (std::size_t k = 0; k < participants.size(); ++k) train(k);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < workers; ++t) {
      pool.emplace_back([&, t] {
        for (std::size_t k = t; k < participants.size(); k += workers) train(k);
      });
    }
  }
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }

  RoundRecord record;
  record.round_index = state.round_index;
  record.total_clients = state.clients.size();
  record.selected_ids = selection.ids;
  record.all_outliers = selection.all_outliers;

  std::vector<ClientRoundInput> inputs;
  inputs.reserve(participants.size());
  std::size_t k = 0;
  for (auto& c : state.clients) {
    if (k < participants.size() && participants[k] == &c) {
      const auto& u = *updates[k];
      c.cost_history.push_back(u.cost);
      record.per_client_cost[c.id] = u.cost;
      inputs.push_back({c.id, c.size, u.model, c.cost_history});
      ++k;
    } else {
      const double carried = c.cost_history.empty() ? local_cost(c.data, state.global_model)
                                                    : c.cost_history.back();
      c.cost_history.push_back(carried);
      record.carried_forward_ids.push_back(c.id);
    }
  }

  std::optional<AggregateResult> result;
  try {
    result = aggregate(options.strategy, inputs, options.params);
  } catch (const MissingHistory&) {
    result = aggregate(Strategy::fedavg, inputs, options.params);
    result->weights.fallback_applied = Fallback::missing_history;
  }

  state.global_model = std::move(result->model);
  ++state.round_index;

  record.fallback_applied = result->weights.fallback_applied;
  record.weights = std::move(result->weights);
  record.global_cost = pooled_cost(state, state.global_model);
  record.participation_fraction =
      static_cast<double>(selection.ids.size()) / static_cast<double>(state.clients.size());
  if (options.record_timing) {
    record.wall_ms = static_cast<std::uint64_t>(std::chrono::duration_cast<std::chrono::milliseconds>(
                                                    std::chrono::steady_clock::now() - started)
                                                    .count());
  }
  return record;
}

SimulationResult run_rounds(FederationState state, const SimulationConfig& config) {
  config.validate();
  const RoundOptions options = round_options(config, state.lambda_estimate);
  std::vector<RoundRecord> records;
  records.reserve(config.rounds);
  for (std::uint64_t r = 0; r < config.rounds; ++r) {
    records.push_back(run_round(state, options));
    if (config.patience > 0 && records.size() > config.patience) {
      const double before = records[records.size() - 1 - config.patience].global_cost;
      const double now = records.back().global_cost;
      if (before - now < config.tol * std::abs(before)) break;
    }
  }
  return {std::move(records), std::move(state)};
}

SimulationResult run_simulation(const SimulationConfig& config) {
  return run_rounds(generate_federation(config), config);
}

}  // namespace fedpid
