// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fedpid/aggregation.hpp"
#include "fedpid/metrics.hpp"
#include "fedpid/selection.hpp"
#include "fedpid/sim.hpp"
#include "oracle/least_squares_oracle.hpp"
#include "oracle/poisson_oracle.hpp"
#include "oracle/rational_oracle.hpp"

using namespace fedpid;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool passed;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double weight_sum(const AggregationWeights& w) {
  double s = 0.0;
  for (double x : w.weights) s += x;
  return s;
}

// Small instance with dyadic-rational costs, sizes and parameters.
std::vector<ClientRoundInput> random_instance(std::mt19937_64& rng, int min_n, int max_n, int max_dim,
                                              int min_len, int max_len) {
  std::uniform_int_distribution<int> n_dist(min_n, max_n), dim_dist(1, max_dim),
      len_dist(min_len, max_len), size_dist(1, 60), cost_dist(1, 64), param_dist(-40, 40);
  const int n = n_dist(rng), dim = dim_dist(rng), len = len_dist(rng);
  std::vector<ClientRoundInput> out;
  for (int j = 0; j < n; ++j) {
    std::vector<double> model(dim), hist(len);
    for (auto& x : model) x = param_dist(rng) / 8.0;
    for (auto& c : hist) c = cost_dist(rng) / 16.0;
    out.push_back({j, static_cast<std::uint64_t>(size_dist(rng)), ParameterVector(model), hist});
  }
  return out;
}

std::vector<oracle::Client> to_oracle(const std::vector<ClientRoundInput>& in) {
  std::vector<oracle::Client> out;
  for (const auto& c : in) {
    out.push_back({static_cast<long long>(c.size), {c.model.begin(), c.model.end()}, c.cost_history});
  }
  return out;
}

Outcome oracle_equivalence() {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(1);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto in = random_instance(rng, 1, 5, 4, 2, 8);
    const auto oc = to_oracle(in);
    StrategyParams params;
    params.k_form = trial % 2 ? CostDropForm::signed_drop : CostDropForm::magnitude_drop;
    const oracle::Result want[] = {oracle::fedavg(oc), oracle::fedcostwavg(oc, params.cw_alpha),
                                   oracle::fedpidavg(oc, 0.45, 0.45, 0.1, params.window, trial % 2 == 0)};
    const Strategy strategies[] = {Strategy::fedavg, Strategy::fedcostwavg, Strategy::fedpidavg};
    for (int s = 0; s < 3; ++s) {
      const auto got = aggregate(strategies[s], in, params);
      for (std::size_t j = 0; j < in.size(); ++j) {
        worst = std::max(worst, std::abs(got.weights.weights[j] - oracle::to_double(want[s].weights[j])));
      }
      for (std::size_t d = 0; d < got.model.dim(); ++d) {
        worst = std::max(worst, std::abs(got.model[d] - oracle::to_double(want[s].model[d])));
      }
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {worst < 1e-10 && secs < 10.0,
          "max abs error " + fmt("%.3g", worst) + ", " + fmt("%.2f", secs) + " s"};
}

Outcome weight_sum_invariant() {
  std::mt19937_64 rng(2);
  double worst = 0.0;
  int fallbacks = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    auto in = random_instance(rng, 2, 10, 3, 2, 8);
    if (trial % 4 == 0) {
      // flat histories: every cost drop is zero
      for (auto& c : in) std::fill(c.cost_history.begin(), c.cost_history.end(), c.cost_history.back());
    }
    StrategyParams params;
    params.k_form = trial % 2 ? CostDropForm::signed_drop : CostDropForm::magnitude_drop;
    for (auto s : {Strategy::fedavg, Strategy::fedcostwavg, Strategy::fedpidavg}) {
      const auto w = compute_weights(s, in, params);
      if (w.fallback_applied == Fallback::degenerate_normalizer) ++fallbacks;
      worst = std::max(worst, std::abs(weight_sum(w) - 1.0));
    }
  }
  return {worst <= 1e-9 && fallbacks > 0,
          "max |sum - 1| " + fmt("%.3g", worst) + ", " + std::to_string(fallbacks) +
              " degenerate-normalizer cases"};
}

// Steps two copies of one federation in lockstep and returns the largest
// per-round difference in global parameters, global cost and weights.
double trace_difference(const SimulationConfig& base, const SimulationConfig& other) {
  auto a = generate_federation(base);
  auto b = generate_federation(other);
  const auto oa = round_options(base, a.lambda_estimate);
  const auto ob = round_options(other, b.lambda_estimate);
  double worst = 0.0;
  for (std::uint64_t r = 0; r < base.rounds; ++r) {
    const auto ra = run_round(a, oa);
    const auto rb = run_round(b, ob);
    if (ra.selected_ids != rb.selected_ids) return INFINITY;
    worst = std::max(worst, max_abs_diff(a.global_model.values(), b.global_model.values()));
    worst = std::max(worst, std::abs(ra.global_cost - rb.global_cost));
    worst = std::max(worst, max_abs_diff(ra.weights.weights, rb.weights.weights));
  }
  return worst;
}

Outcome reduction_equivalences() {
  SimulationConfig avg;
  avg.rounds = 50;
  avg.strategy = Strategy::fedavg;
  avg.task.client_shift = 1.0;

  SimulationConfig pid = avg;
  pid.strategy = Strategy::fedpidavg;
  pid.alpha = 1.0;
  pid.beta = 0.0;
  pid.gamma = 0.0;

  SimulationConfig cw = avg;
  cw.strategy = Strategy::fedcostwavg;
  cw.cw_alpha = 1.0;

  const double d_pid = trace_difference(avg, pid);
  const double d_cw = trace_difference(avg, cw);
  return {d_pid < 1e-12 && d_cw < 1e-12,
          "FedPIDAvg(1,0,0) " + fmt("%.3g", d_pid) + ", FedCostWAvg(1) " + fmt("%.3g", d_cw)};
}

Outcome cost_scale_invariance() {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> log_factor(-6.0, 6.0);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto in = random_instance(rng, 2, 8, 2, 2, 8);
    const double c = std::exp(log_factor(rng));
    auto scaled = in;
    for (auto& x : scaled) for (auto& h : x.cost_history) h *= c;

    StrategyParams signed_params;
    signed_params.k_form = CostDropForm::signed_drop;
    StrategyParams magnitude_params;
    const std::pair<Strategy, StrategyParams> cases[] = {
        {Strategy::fedcostwavg, magnitude_params},
        {Strategy::fedpidavg, magnitude_params},
        {Strategy::fedpidavg, signed_params}};
    for (const auto& [s, p] : cases) {
      const auto a = compute_weights(s, in, p);
      const auto b = compute_weights(s, scaled, p);
      worst = std::max(worst, max_abs_diff(a.weights, b.weights));
    }
  }
  return {worst <= 1e-12, "max weight change " + fmt("%.3g", worst)};
}

Outcome convergence() {
  const auto start = std::chrono::steady_clock::now();
  int passed = 0;
  std::string ratios;
  for (int s = 0; s < 10; ++s) {
    SimulationConfig c;
    c.task.kind = TaskKind::least_squares;
    c.clients = 8;
    c.lambda = 20.0;
    c.strategy = Strategy::fedpidavg;
    c.rounds = 50;
    c.patience = 0;
    c.seed = 1000 + s;
    const auto state = generate_federation(c);
    const double optimum = oracle::pooled_optimum(state).cost;
    const auto result = run_rounds(state, c);
    const double ratio = result.records.back().global_cost / optimum;
    passed += ratio <= 1.05 ? 1 : 0;
    ratios += (s ? " " : "") + fmt("%.4f", ratio);
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {passed >= 9 && secs < 60.0, std::to_string(passed) + "/10 seeds within 1.05x (ratios " +
                                          ratios + "), " + fmt("%.2f", secs) + " s"};
}

Outcome selection_correctness() {
  SimulationConfig c;
  c.clients = 8;
  c.lambda = 20.0;
  c.rounds = 20;
  c.patience = 0;
  c.full_participation_period = 5;
  c.selection_mode = SelectionMode::poisson_dropout;
  const ClientId outlier = 3;
  const auto state = generate_federation(c, {{outlier, 100}});
  const auto result = run_rounds(state, c);

  std::set<std::uint64_t> with_outlier;
  for (const auto& r : result.records) {
    if (std::find(r.selected_ids.begin(), r.selected_ids.end(), outlier) != r.selected_ids.end()) {
      with_outlier.insert(r.round_index);
    }
  }
  const double n = 8.0;
  const double expected = (16.0 * (n - 1.0) / n + 4.0 * 1.0) / 20.0;
  const double got = comm_cost_summary(result.records);
  const bool rounds_ok = with_outlier == std::set<std::uint64_t>{4, 9, 14, 19};
  std::string listed;
  for (auto r : with_outlier) listed += (listed.empty() ? "" : ",") + std::to_string(r);
  return {rounds_ok && result.records.size() == 20 && got == expected,
          "outlier rounds {" + listed + "}, comm cost " + fmt("%.17g", got) + " vs " +
              fmt("%.17g", expected)};
}

Outcome poisson_pmf_accuracy() {
  double worst = 0.0;
  for (double lambda : {0.5, 1.0, 5.0, 20.0, 100.0}) {
    for (std::uint64_t x = 0; x <= 300; ++x) {
      worst = std::max(worst, oracle::relative_error(poisson_pmf(x, lambda), oracle::poisson_pmf(x, lambda)));
    }
  }
  long double total = 0.0L;
  for (std::uint64_t x = 0; x <= 200; ++x) total += poisson_pmf(x, 20.0);
  const double norm_err = std::abs(static_cast<double>(total - 1.0L));
  return {worst <= 1e-12 && norm_err <= 1e-12,
          "max relative error " + fmt("%.3g", worst) + ", |sum - 1| " + fmt("%.3g", norm_err)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome determinism() {
  const auto root = fs::temp_directory_path() / "fedpid_acceptance";
  fs::remove_all(root);
  const std::string bin = FEDPID_CLI_PATH;
  const std::string common = " run --strategy fedpidavg --rounds 30 --clients 10 --seed 4242 --workers 3";
  const int a = std::system((bin + common + " --out-dir " + (root / "a").string() + " > /dev/null").c_str());
  const int b = std::system((bin + common + " --out-dir " + (root / "b").string() + " > /dev/null").c_str());
  const auto ra = slurp(root / "a" / "records.jsonl");
  const auto rb = slurp(root / "b" / "records.jsonl");
  return {a == 0 && b == 0 && !ra.empty() && ra == rb,
          std::to_string(ra.size()) + " bytes, identical: " + (ra == rb ? "yes" : "no")};
}

Outcome round_zero_fallback() {
  SimulationConfig c;
  c.strategy = Strategy::fedpidavg;
  c.rounds = 3;
  c.patience = 0;
  const auto state = generate_federation(c);
  const auto result = run_rounds(state, c);
  const auto& first = result.records.front();

  std::vector<ClientRoundInput> sized;
  for (auto id : first.selected_ids) {
    const auto& cl = state.clients[static_cast<std::size_t>(id)];
    sized.push_back({id, cl.size, ParameterVector{0.0}, {1.0}});
  }
  const double diff = max_abs_diff(first.weights.weights, fedavg_weights(sized).weights);
  return {first.fallback_applied == Fallback::missing_history && diff <= 1e-12,
          "fallback " + std::string(to_string(first.fallback_applied)) + ", max diff from FedAvg " +
              fmt("%.3g", diff)};
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"oracle-equivalence", oracle_equivalence},
      {"weight-sum", weight_sum_invariant},
      {"reduction-equivalence", reduction_equivalences},
      {"cost-scale-invariance", cost_scale_invariance},
      {"convergence", convergence},
      {"selection-correctness", selection_correctness},
      {"poisson-pmf", poisson_pmf_accuracy},
      {"determinism", determinism},
      {"round-zero-fallback", round_zero_fallback},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    std::printf("%s %-22s %s\n", o.passed ? "PASS" : "FAIL", name, o.detail.c_str());
    failed += o.passed ? 0 : 1;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(std::size(criteria)) - failed, std::size(criteria));
  return failed == 0 ? 0 : 1;
}
