#pragma once

// Exact-rational reference for the three aggregation rules. Shares no code
// with the library: inputs are converted exactly from binary64 and every
// operation is carried out in cpp_rational.

#include <algorithm>
#include <boost/multiprecision/cpp_int.hpp>
#include <string>
#include <vector>

namespace oracle {

using Rational = boost::multiprecision::cpp_rational;

struct Client {
  long long size;
  std::vector<double> model;
  std::vector<double> history;
};

struct Result {
  std::vector<Rational> weights;
  std::vector<Rational> model;
  bool degenerate = false;
};

inline Rational exact(double v) { return Rational(v); }

inline Rational abs_r(const Rational& v) { return v < 0 ? Rational(-v) : v; }

inline std::vector<Rational> combine(const std::vector<Client>& clients,
                                     const std::vector<Rational>& w) {
  std::vector<Rational> model(clients.front().model.size(), Rational(0));
  for (std::size_t j = 0; j < clients.size(); ++j) {
    for (std::size_t d = 0; d < model.size(); ++d) model[d] += w[j] * exact(clients[j].model[d]);
  }
  return model;
}

inline Rational total_size(const std::vector<Client>& clients) {
  Rational s = 0;
  for (const auto& c : clients) s += c.size;
  return s;
}

inline Result fedavg(const std::vector<Client>& clients) {
  const Rational s = total_size(clients);
  Result r;
  for (const auto& c : clients) r.weights.push_back(Rational(c.size) / s);
  r.model = combine(clients, r.weights);
  return r;
}

inline Result fedcostwavg(const std::vector<Client>& clients, double alpha_d) {
  const Rational alpha = exact(alpha_d);
  const Rational s = total_size(clients);
  std::vector<Rational> k;
  Rational ksum = 0;
  for (const auto& c : clients) {
    k.push_back(exact(c.history[c.history.size() - 2]) / exact(c.history.back()));
    ksum += k.back();
  }
  Result r;
  for (std::size_t j = 0; j < clients.size(); ++j) {
    r.weights.push_back(alpha * Rational(clients[j].size) / s + (1 - alpha) * k[j] / ksum);
  }
  r.model = combine(clients, r.weights);
  return r;
}

inline Result fedpidavg(const std::vector<Client>& clients, double a_d, double b_d, double g_d,
                        std::size_t window, bool k_abs) {
  Rational a = exact(a_d), b = exact(b_d), g = exact(g_d);
  const Rational s = total_size(clients);
  std::vector<Rational> k, m;
  Rational ksum = 0, msum = 0, max_prev = 0, max_m = 0;
  for (const auto& c : clients) {
    const Rational prev = exact(c.history[c.history.size() - 2]);
    Rational d = prev - exact(c.history.back());
    if (k_abs) d = abs_r(d);
    k.push_back(d);
    ksum += d;
    max_prev = std::max(max_prev, abs_r(prev));
    Rational sum = 0;
    const std::size_t take = std::min(window, c.history.size());
    for (std::size_t l = c.history.size() - take; l < c.history.size(); ++l) sum += exact(c.history[l]);
    m.push_back(sum);
    msum += sum;
    max_m = std::max(max_m, sum);
  }
  Result r;
  const Rational scale = exact(1e-12);
  if (abs_r(ksum) <= scale * max_prev) {
    a += b;
    b = 0;
    r.degenerate = true;
  }
  if (abs_r(msum) <= scale * max_m) {
    a += g;
    g = 0;
    r.degenerate = true;
  }
  for (std::size_t j = 0; j < clients.size(); ++j) {
    Rational w = a * Rational(clients[j].size) / s;
    if (b != 0) w += b * k[j] / ksum;
    if (g != 0) w += g * m[j] / msum;
    r.weights.push_back(w);
  }
  r.model = combine(clients, r.weights);
  return r;
}

inline double to_double(const Rational& v) { return v.convert_to<double>(); }

}  // namespace oracle
