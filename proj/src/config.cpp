#include "fedpid/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <vector>

#include "fedpid/error.hpp"

namespace fedpid {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::uint64_t to_u64(const std::string& key, std::string_view v) {
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size()) {
    throw ConfigError(key, "expected a nonnegative integer, got '" + std::string(v) + "'");
  }
  return out;
}

double to_double(const std::string& key, std::string_view v) {
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size() || !std::isfinite(out)) {
    throw ConfigError(key, "expected a finite number, got '" + std::string(v) + "'");
  }
  return out;
}

bool to_bool(const std::string& key, std::string_view v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError(key, "expected true/false, got '" + std::string(v) + "'");
}

template <typename F>
auto parse_enum(const std::string& key, std::string_view v, F&& from_string) {
  try {
    return from_string(v);
  } catch (const InvalidArgument& e) {
    throw ConfigError(key, e.what());
  }
}

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

using Setter = std::function<void(SimulationConfig&, const std::string&, std::string_view)>;

struct Field {
  const char* key;
  Setter set;
  std::function<std::string(const SimulationConfig&)> get;
};

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      {"task.kind",
       [](auto& c, auto& k, auto v) { c.task.kind = parse_enum(k, v, task_kind_from_string); },
       [](auto& c) { return std::string(to_string(c.task.kind)); }},
      {"task.dim", [](auto& c, auto& k, auto v) { c.task.dim = to_u64(k, v); },
       [](auto& c) { return std::to_string(c.task.dim); }},
      {"task.client_shift", [](auto& c, auto& k, auto v) { c.task.client_shift = to_double(k, v); },
       [](auto& c) { return fmt_double(c.task.client_shift); }},
      {"task.noise_sigma", [](auto& c, auto& k, auto v) { c.task.noise_sigma = to_double(k, v); },
       [](auto& c) { return fmt_double(c.task.noise_sigma); }},
      {"clients", [](auto& c, auto& k, auto v) { c.clients = to_u64(k, v); },
       [](auto& c) { return std::to_string(c.clients); }},
      {"lambda", [](auto& c, auto& k, auto v) { c.lambda = to_double(k, v); },
       [](auto& c) { return fmt_double(c.lambda); }},
      {"strategy",
       [](auto& c, auto& k, auto v) { c.strategy = parse_enum(k, v, strategy_from_string); },
       [](auto& c) { return std::string(to_string(c.strategy)); }},
      {"alpha", [](auto& c, auto& k, auto v) { c.alpha = to_double(k, v); },
       [](auto& c) { return fmt_double(c.alpha); }},
      {"beta", [](auto& c, auto& k, auto v) { c.beta = to_double(k, v); },
       [](auto& c) { return fmt_double(c.beta); }},
      {"gamma", [](auto& c, auto& k, auto v) { c.gamma = to_double(k, v); },
       [](auto& c) { return fmt_double(c.gamma); }},
      {"cw_alpha", [](auto& c, auto& k, auto v) { c.cw_alpha = to_double(k, v); },
       [](auto& c) { return fmt_double(c.cw_alpha); }},
      {"window", [](auto& c, auto& k, auto v) { c.window = to_u64(k, v); },
       [](auto& c) { return std::to_string(c.window); }},
      {"k_abs", [](auto& c, auto& k, auto v) { c.k_abs = to_bool(k, v); },
       [](auto& c) { return std::string(c.k_abs ? "true" : "false"); }},
      {"selection.mode",
       [](auto& c, auto& k, auto v) {
         c.selection_mode = parse_enum(k, v, selection_mode_from_string);
       },
       [](auto& c) { return std::string(to_string(c.selection_mode)); }},
      {"selection.full_participation_period",
       [](auto& c, auto& k, auto v) { c.full_participation_period = to_u64(k, v); },
       [](auto& c) { return std::to_string(c.full_participation_period); }},
      {"rounds", [](auto& c, auto& k, auto v) { c.rounds = to_u64(k, v); },
       [](auto& c) { return std::to_string(c.rounds); }},
      {"epochs", [](auto& c, auto& k, auto v) { c.epochs = to_u64(k, v); },
       [](auto& c) { return std::to_string(c.epochs); }},
      {"lr", [](auto& c, auto& k, auto v) { c.lr = to_double(k, v); },
       [](auto& c) { return fmt_double(c.lr); }},
      {"patience", [](auto& c, auto& k, auto v) { c.patience = to_u64(k, v); },
       [](auto& c) { return std::to_string(c.patience); }},
      {"tol", [](auto& c, auto& k, auto v) { c.tol = to_double(k, v); },
       [](auto& c) { return fmt_double(c.tol); }},
      {"workers",
       [](auto& c, auto& k, auto v) { c.workers = static_cast<unsigned>(to_u64(k, v)); },
       [](auto& c) { return std::to_string(c.workers); }},
      {"record_timing", [](auto& c, auto& k, auto v) { c.record_timing = to_bool(k, v); },
       [](auto& c) { return std::string(c.record_timing ? "true" : "false"); }},
      {"seed", [](auto& c, auto& k, auto v) { c.seed = to_u64(k, v); },
       [](auto& c) { return std::to_string(c.seed); }},
      {"out_dir", [](auto& c, auto&, auto v) { c.out_dir = std::string(v); },
       [](auto& c) { return c.out_dir.string(); }},
  };
  return table;
}

void apply(SimulationConfig& config, const std::string& key, std::string_view value) {
  for (const auto& f : fields()) {
    if (key == f.key) {
      f.set(config, key, value);
      return;
    }
  }
  throw ConfigError(key, "unknown configuration key");
}

void check(bool ok, const char* field, const std::string& message) {
  if (!ok) throw ConfigError(field, message);
}

}  // namespace

std::string_view to_string(TaskKind k) noexcept {
  return k == TaskKind::least_squares ? "least_squares" : "logistic";
}

TaskKind task_kind_from_string(std::string_view s) {
  if (s == "least_squares") return TaskKind::least_squares;
  if (s == "logistic") return TaskKind::logistic;
  throw InvalidArgument("unknown task kind '" + std::string(s) + "'");
}

void SimulationConfig::validate() const {
  check(task.dim >= 1, "task.dim", "must be >= 1");
  check(task.client_shift >= 0.0, "task.client_shift", "must be >= 0");
  check(task.noise_sigma >= 0.0, "task.noise_sigma", "must be >= 0");
  check(clients >= 1, "clients", "must be >= 1");
  check(lambda > 0.0, "lambda", "must be > 0, got " + fmt_double(lambda));
  check(alpha >= 0.0 && alpha <= 1.0, "alpha", "must lie in [0, 1]");
  check(beta >= 0.0 && beta <= 1.0, "beta", "must lie in [0, 1]");
  check(gamma >= 0.0 && gamma <= 1.0, "gamma", "must lie in [0, 1]");
  if (strategy == Strategy::fedpidavg) {
    const double sum = alpha + beta + gamma;
    check(std::abs(sum - 1.0) <= 1e-12, "alpha+beta+gamma",
          "alpha + beta + gamma must equal 1 within 1e-12, got " + fmt_double(sum));
  }
  if (strategy == Strategy::fedcostwavg) {
    check(cw_alpha >= 0.0 && cw_alpha <= 1.0, "cw_alpha", "must lie in [0, 1]");
  }
  check(window >= 1, "window", "must be >= 1");
  check(full_participation_period >= 1, "selection.full_participation_period", "must be >= 1");
  check(epochs >= 1, "epochs", "must be >= 1");
  check(lr > 0.0, "lr", "must be > 0");
  check(tol >= 0.0, "tol", "must be >= 0");
  check(workers >= 1, "workers", "must be >= 1");
  check(!out_dir.empty(), "out_dir", "must not be empty");
}

StrategyParams SimulationConfig::strategy_params() const {
  StrategyParams p;
  p.cw_alpha = cw_alpha;
  p.window = window;
  p.k_form = k_abs ? CostDropForm::magnitude_drop : CostDropForm::signed_drop;
  if (strategy == Strategy::fedpidavg) p.pid = PidCoefficients(alpha, beta, gamma);
  return p;
}

SelectionPolicy SimulationConfig::selection_policy(double lambda_estimate) const {
  return {selection_mode, full_participation_period, lambda_estimate};
}

SimulationConfig parse_config_text(std::string_view text, const ConfigOverrides& overrides) {
  SimulationConfig config;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;

    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no), "expected 'key = value'");
    }
    apply(config, std::string(trim(line.substr(0, eq))), trim(line.substr(eq + 1)));
  }
  for (const auto& [key, value] : overrides) apply(config, key, trim(value));
  config.validate();
  return config;
}

SimulationConfig parse_config(const std::optional<std::filesystem::path>& file,
                              const ConfigOverrides& overrides) {
  if (!file) return parse_config_text({}, overrides);
  std::ifstream in(*file);
  if (!in) throw ConfigError("config", "cannot read " + file->string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), overrides);
}

std::string render_config(const SimulationConfig& config) {
  std::string out;
  for (const auto& f : fields()) out += std::string(f.key) + " = " + f.get(config) + "\n";
  return out;
}

}  // namespace fedpid
