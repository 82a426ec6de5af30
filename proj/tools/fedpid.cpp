#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fedpid/commands.hpp"
#include "fedpid/config.hpp"
#include "fedpid/error.hpp"

namespace {

struct FlagSpec {
  const char* flag;
  const char* key;
  const char* help;
};

// Flags mirror config keys one-to-one.
const std::vector<FlagSpec> kValueFlags = {
    {"--task", "task.kind", "least_squares | logistic"},
    {"--dim", "task.dim", "model dimension"},
    {"--client-shift", "task.client_shift", "non-IID heterogeneity"},
    {"--noise-sigma", "task.noise_sigma", "label noise"},
    {"--clients", "clients", "number of clients"},
    {"--lambda", "lambda", "Poisson rate of client dataset sizes"},
    {"--strategy", "strategy", "fedavg | fedcostwavg | fedpidavg"},
    {"--alpha", "alpha", "FedPIDAvg size weight"},
    {"--beta", "beta", "FedPIDAvg cost-drop weight"},
    {"--gamma", "gamma", "FedPIDAvg cost-sum weight"},
    {"--cw-alpha", "cw_alpha", "FedCostWAvg size weight"},
    {"--window", "window", "cost-sum window length"},
    {"--selection-mode", "selection.mode", "all | poisson_dropout"},
    {"--full-participation-period", "selection.full_participation_period",
     "every P-th round includes all clients"},
    {"--rounds", "rounds", "federated rounds"},
    {"--epochs", "epochs", "local epochs per round"},
    {"--lr", "lr", "local learning rate"},
    {"--patience", "patience", "early-stop patience in rounds (0 disables)"},
    {"--tol", "tol", "early-stop relative tolerance"},
    {"--workers", "workers", "local training threads"},
    {"--seed", "seed", "RNG seed"},
    {"--out-dir", "out_dir", "output directory"},
};

struct ConfigArgs {
  std::optional<std::string> config_file;
  std::map<std::string, std::string> values;
  bool k_abs = false;
  bool k_signed = false;
  bool record_timing = false;
};

void add_config_options(CLI::App* cmd, ConfigArgs& args) {
  cmd->add_option("--config", args.config_file, "key = value config file");
  for (const auto& spec : kValueFlags) {
    cmd->add_option_function<std::string>(
        spec.flag, [&args, key = std::string(spec.key)](const std::string& v) { args.values[key] = v; },
        spec.help);
  }
  auto* k_abs = cmd->add_flag("--k-abs", args.k_abs, "use |c_prev - c_curr| for the cost-drop term (default)");
  cmd->add_flag("--k-signed", args.k_signed, "use c_prev - c_curr for the cost-drop term")->excludes(k_abs);
  cmd->add_flag("--record-timing", args.record_timing, "record per-round wall time");
}

fedpid::SimulationConfig resolve(const ConfigArgs& args) {
  auto overrides = args.values;
  if (args.k_abs) overrides["k_abs"] = "true";
  if (args.k_signed) overrides["k_abs"] = "false";
  if (args.record_timing) overrides["record_timing"] = "true";
  std::optional<std::filesystem::path> file;
  if (args.config_file) file = *args.config_file;
  return fedpid::parse_config(file, overrides);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Federated aggregation simulator (FedAvg, FedCostWAvg, FedPIDAvg)"};
  app.require_subcommand(1);

  ConfigArgs run_args;
  auto* run = app.add_subcommand("run", "run one simulation and write its records");
  add_config_options(run, run_args);

  ConfigArgs compare_args;
  std::string strategies = "fedavg,fedcostwavg,fedpidavg";
  auto* compare = app.add_subcommand("compare", "run several strategies on one shared federation");
  add_config_options(compare, compare_args);
  compare->add_option("--strategies", strategies, "comma-separated strategy list");

  std::string fixtures = "tests/fixtures";
  auto* verify = app.add_subcommand("verify", "check aggregators against stored fixtures");
  verify->add_option("fixtures", fixtures, "fixture directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : fedpid::kExitConfigError;
  }

  try {
    if (*run) return fedpid::cmd_run(resolve(run_args), std::cout);
    if (*compare) {
      std::vector<fedpid::Strategy> list;
      std::stringstream ss(strategies);
      for (std::string item; std::getline(ss, item, ',');) {
        if (!item.empty()) list.push_back(fedpid::strategy_from_string(item));
      }
      return fedpid::cmd_compare(resolve(compare_args), list, std::cout);
    }
    if (*verify) return fedpid::cmd_verify(fixtures, std::cout);
  } catch (const fedpid::InvalidConfig& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return fedpid::kExitConfigError;
  } catch (const fedpid::InvalidArgument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return fedpid::kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return fedpid::kExitFailure;
  }
  return fedpid::kExitFailure;
}
