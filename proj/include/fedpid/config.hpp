#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "fedpid/aggregation.hpp"
#include "fedpid/selection.hpp"

namespace fedpid {

enum class TaskKind { least_squares, logistic };

std::string_view to_string(TaskKind k) noexcept;
TaskKind task_kind_from_string(std::string_view s);

struct SyntheticTask {
  TaskKind kind = TaskKind::least_squares;
  std::size_t dim = 5;
  double client_shift = 0.5;  // spread of per-client feature means and true weights
  double noise_sigma = 0.5;

  friend bool operator==(const SyntheticTask&, const SyntheticTask&) = default;
};

inline constexpr std::uint64_t kDefaultSeed = 20220917;

struct SimulationConfig {
  SyntheticTask task;
  std::uint64_t clients = 8;
  double lambda = 20.0;
  Strategy strategy = Strategy::fedpidavg;
  double alpha = 0.45;
  double beta = 0.45;
  double gamma = 0.1;
  double cw_alpha = 0.5;
  std::size_t window = 6;
  bool k_abs = true;  // false selects the signed cost drop
  SelectionMode selection_mode = SelectionMode::poisson_dropout;
  std::uint64_t full_participation_period = 5;
  std::uint64_t rounds = 50;
  std::uint64_t epochs = 1;
  double lr = 0.1;
  std::uint64_t patience = 10;  // 0 disables early stopping
  double tol = 1e-6;
  unsigned workers = 1;
  bool record_timing = false;
  std::uint64_t seed = kDefaultSeed;
  std::filesystem::path out_dir = "runs/default";

  // Throws ConfigError naming the first violated field.
  void validate() const;

  // Aggregation parameters for the configured strategy. Only meaningful on a
  // validated config.
  StrategyParams strategy_params() const;
  SelectionPolicy selection_policy(double lambda_estimate) const;

  friend bool operator==(const SimulationConfig&, const SimulationConfig&) = default;
};

// Key/value text: one "key = value" per line, '#' starts a comment, keys are
// dotted (task.dim, selection.mode, ...). Overrides use the same keys and
// win over file values.
using ConfigOverrides = std::map<std::string, std::string>;

SimulationConfig parse_config(const std::optional<std::filesystem::path>& file,
                              const ConfigOverrides& overrides = {});
SimulationConfig parse_config_text(std::string_view text, const ConfigOverrides& overrides = {});

// Canonical key/value rendering; parse_config_text(render_config(c)) == c.
std::string render_config(const SimulationConfig& config);

}  // namespace fedpid
