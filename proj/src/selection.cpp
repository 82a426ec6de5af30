#include "fedpid/selection.hpp"

#include <cmath>
#include <string>

#include "fedpid/error.hpp"

namespace fedpid {

long double poisson_pmf(std::uint64_t x, double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw InvalidArgument("Poisson rate must be positive and finite");
  }
  const long double lam = lambda;
  const long double xl = static_cast<long double>(x);
  const long double log_p = -lam + (x == 0 ? 0.0L : xl * std::log(lam)) - std::lgamma(xl + 1.0L);
  return std::exp(log_p);
}

double log_poisson_pmf(std::uint64_t x, double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw InvalidArgument("Poisson rate must be positive and finite");
  }
  const long double lam = lambda;
  const long double xl = static_cast<long double>(x);
  return static_cast<double>(-lam + (x == 0 ? 0.0L : xl * std::log(lam)) -
                             std::lgamma(xl + 1.0L));
}

double estimate_lambda(std::span<const std::uint64_t> sizes) {
  if (sizes.empty()) throw EmptyInput("cannot estimate lambda from no sizes");
  long double total = 0.0L;
  for (auto s : sizes) total += static_cast<long double>(s);
  return static_cast<double>(total / static_cast<long double>(sizes.size()));
}

std::string_view to_string(SelectionMode m) noexcept {
  return m == SelectionMode::all ? "all" : "poisson_dropout";
}

SelectionMode selection_mode_from_string(std::string_view s) {
  if (s == "all") return SelectionMode::all;
  if (s == "poisson_dropout") return SelectionMode::poisson_dropout;
  throw InvalidArgument("unknown selection mode '" + std::string(s) + "'");
}

void SelectionPolicy::validate() const {
  if (full_participation_period < 1) {
    throw InvalidArgument("full_participation_period must be >= 1");
  }
  if (mode == SelectionMode::poisson_dropout && !(lambda_estimate > 0.0)) {
    throw InvalidArgument("lambda_estimate must be > 0 for poisson_dropout");
  }
}

bool is_full_participation_round(const SelectionPolicy& policy, std::uint64_t round_index) {
  if (policy.mode == SelectionMode::all) return true;
  const auto period = policy.full_participation_period;
  return round_index % period == period - 1;
}

Selection select_clients(const std::map<ClientId, std::uint64_t>& sizes,
                         const SelectionPolicy& policy, std::uint64_t round_index) {
  if (sizes.empty()) throw EmptyInput("no clients to select from");
  policy.validate();

  Selection out;
  out.ids.reserve(sizes.size());
  if (is_full_participation_round(policy, round_index)) {
    for (const auto& [id, size] : sizes) out.ids.push_back(id);
    return out;
  }

  // Outliers are strictly above the threshold; a tie is retained.
  const double threshold = 2.0 * policy.lambda_estimate;
  for (const auto& [id, size] : sizes) {
    if (static_cast<double>(size) <= threshold) out.ids.push_back(id);
  }
  if (out.ids.empty()) {
    for (const auto& [id, size] : sizes) out.ids.push_back(id);
    out.all_outliers = true;
  }
  return out;
}

}  // namespace fedpid
