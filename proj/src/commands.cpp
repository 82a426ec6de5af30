#include "fedpid/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>

#include "fedpid/error.hpp"
#include "fedpid/metrics.hpp"
#include "fedpid/sim.hpp"
#include "json.hpp"

namespace fedpid {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string fmt17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_run_outputs(const SimulationResult& result, const SimulationConfig& config,
                       const fs::path& dir) {
  fs::create_directories(dir);
  write_records(result.records, dir / "records.jsonl");
  write_summary_csv(result.records, dir / "summary.csv");
  checkpoint_write(result.final_state.global_model, dir / "final_model.fpv");
  std::ofstream cfg(dir / "config.txt", std::ios::trunc);
  if (!cfg) throw IoError("cannot write " + (dir / "config.txt").string());
  cfg << render_config(config);
}

std::size_t fallback_rounds(const std::vector<RoundRecord>& records) {
  return static_cast<std::size_t>(std::count_if(records.begin(), records.end(), [](const auto& r) {
    return r.fallback_applied != Fallback::none;
  }));
}

struct FixtureOutcome {
  bool passed = false;
  std::string detail;
};

FixtureOutcome run_fixture(const json& fx) {
  const auto strategy = strategy_from_string(fx.at("strategy").get<std::string>());
  StrategyParams params;
  const json p = fx.value("params", json::object());
  params.cw_alpha = p.value("cw_alpha", 0.5);
  params.pid = PidCoefficients(p.value("alpha", 0.45), p.value("beta", 0.45), p.value("gamma", 0.1));
  params.window = p.value("window", std::size_t{6});
  params.k_form = p.value("k_abs", true) ? CostDropForm::magnitude_drop : CostDropForm::signed_drop;

  std::vector<ClientRoundInput> inputs;
  for (const auto& c : fx.at("clients")) {
    inputs.push_back({c.at("id").get<ClientId>(), c.at("size").get<std::uint64_t>(),
                      ParameterVector(c.at("model").get<std::vector<double>>()),
                      c.at("cost_history").get<std::vector<double>>()});
  }

  const json& expected = fx.at("expected");
  if (expected.contains("error")) {
    const auto want = expected.at("error").get<std::string>();
    try {
      aggregate(strategy, inputs, params);
    } catch (const MissingHistory&) {
      return {want == "MissingHistory", "raised MissingHistory"};
    } catch (const InvalidCost&) {
      return {want == "InvalidCost", "raised InvalidCost"};
    } catch (const Error& e) {
      return {false, std::string("raised unexpected error: ") + e.what()};
    }
    return {false, "expected " + want + " but aggregation succeeded"};
  }

  const double tol = fx.value("tolerance", 1e-10);
  const auto result = aggregate(strategy, inputs, params);
  const auto want_w = expected.at("weights").get<std::vector<double>>();
  const auto want_m = expected.at("model").get<std::vector<double>>();
  const auto want_fb = fallback_from_string(expected.value("fallback", std::string("none")));
  if (want_w.size() != result.weights.weights.size() || want_m.size() != result.model.dim()) {
    return {false, "shape mismatch"};
  }
  double err = 0.0;
  for (std::size_t j = 0; j < want_w.size(); ++j) {
    err = std::max(err, std::abs(want_w[j] - result.weights.weights[j]));
  }
  for (std::size_t d = 0; d < want_m.size(); ++d) {
    err = std::max(err, std::abs(want_m[d] - result.model[d]));
  }
  if (want_fb != result.weights.fallback_applied) {
    return {false, "fallback " + std::string(to_string(result.weights.fallback_applied)) +
                       ", expected " + std::string(to_string(want_fb))};
  }
  return {err <= tol, "max abs error " + fmt17(err)};
}

}  // namespace

int cmd_run(const SimulationConfig& config, std::ostream& log) {
  try {
    const auto result = run_simulation(config);
    write_run_outputs(result, config, config.out_dir);
    log << "rounds " << result.records.size() << '\n';
    if (!result.records.empty()) {
      log << "final_global_cost " << fmt17(result.records.back().global_cost) << '\n';
      log << "mean_participation_fraction " << fmt17(comm_cost_summary(result.records)) << '\n';
    }
    log << "outputs written to " << config.out_dir.string() << '\n';
    return kExitOk;
  } catch (const InvalidConfig& e) {
    log << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const std::exception& e) {
    log << "run failed: " << e.what() << '\n';
    return kExitFailure;
  }
}

int cmd_compare(const SimulationConfig& config, const std::vector<Strategy>& strategies,
                std::ostream& log) {
  if (strategies.empty()) {
    log << "config error: compare needs at least one strategy\n";
    return kExitConfigError;
  }
  try {
    config.validate();
    const FederationState federation = generate_federation(config);

    std::string table = "strategy,rounds,final_global_cost,mean_participation_fraction,fallback_rounds\n";
    for (const auto strategy : strategies) {
      SimulationConfig c = config;
      c.strategy = strategy;
      c.validate();
      const auto result = run_rounds(federation, c);
      write_run_outputs(result, c, config.out_dir / std::string(to_string(strategy)));

      const auto& recs = result.records;
      table += std::string(to_string(strategy)) + ',' + std::to_string(recs.size()) + ',' +
               (recs.empty() ? std::string("nan") : fmt17(recs.back().global_cost)) + ',' +
               (recs.empty() ? std::string("nan") : fmt17(comm_cost_summary(recs))) + ',' +
               std::to_string(fallback_rounds(recs)) + '\n';
    }
    std::ofstream out(config.out_dir / "compare.csv", std::ios::trunc);
    if (!out) throw IoError("cannot write " + (config.out_dir / "compare.csv").string());
    out << table;
    log << table;
    return kExitOk;
  } catch (const InvalidConfig& e) {
    log << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const std::exception& e) {
    log << "compare failed: " << e.what() << '\n';
    return kExitFailure;
  }
}

int cmd_verify(const fs::path& fixtures_dir, std::ostream& log) {
  std::error_code ec;
  if (!fs::is_directory(fixtures_dir, ec)) {
    log << "fixtures directory not found: " << fixtures_dir.string() << '\n';
    return kExitFailure;
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(fixtures_dir)) {
    if (entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) {
    log << "no fixtures in " << fixtures_dir.string() << '\n';
    return kExitFailure;
  }

  std::size_t failed = 0;
  std::size_t total = 0;
  for (const auto& file : files) {
    std::ifstream in(file);
    json doc;
    try {
      doc = json::parse(in);
    } catch (const json::exception& e) {
      log << "FAIL " << file.filename().string() << ": unreadable (" << e.what() << ")\n";
      ++failed;
      ++total;
      continue;
    }
    const json cases = doc.is_array() ? doc : json::array({doc});
    for (const auto& fx : cases) {
      ++total;
      const auto name = fx.value("name", file.stem().string());
      FixtureOutcome outcome;
      try {
        outcome = run_fixture(fx);
      } catch (const std::exception& e) {
        outcome = {false, e.what()};
      }
      log << (outcome.passed ? "PASS " : "FAIL ") << name << ": " << outcome.detail << '\n';
      if (!outcome.passed) ++failed;
    }
  }
  log << (total - failed) << '/' << total << " fixtures passed\n";
  return failed == 0 ? kExitOk : kExitFailure;
}

}  // namespace fedpid
