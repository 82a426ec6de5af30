#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string_view>
#include <vector>

#include "fedpid/aggregation.hpp"

namespace fedpid {

// Poisson probability mass e^-lambda lambda^x / x!, evaluated in log space.
// Returned in extended precision so tail masses far below the binary64
// normal range keep full relative accuracy.
long double poisson_pmf(std::uint64_t x, double lambda);
double log_poisson_pmf(std::uint64_t x, double lambda);

// Maximum-likelihood Poisson rate: the sample mean.
double estimate_lambda(std::span<const std::uint64_t> sizes);

enum class SelectionMode { all, poisson_dropout };

std::string_view to_string(SelectionMode m) noexcept;
SelectionMode selection_mode_from_string(std::string_view s);

struct SelectionPolicy {
  SelectionMode mode = SelectionMode::poisson_dropout;
  // Every period-th round (round_index % period == period - 1) includes everyone.
  std::uint64_t full_participation_period = 5;
  double lambda_estimate = 1.0;

  void validate() const;
};

struct Selection {
  std::vector<ClientId> ids;  // ascending
  // Set when every client was an outlier and the round fell back to everyone.
  bool all_outliers = false;
};

bool is_full_participation_round(const SelectionPolicy& policy, std::uint64_t round_index);

Selection select_clients(const std::map<ClientId, std::uint64_t>& sizes,
                         const SelectionPolicy& policy, std::uint64_t round_index);

}  // namespace fedpid
