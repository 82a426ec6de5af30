#include "fedpid/metrics.hpp"

#include <cstdio>
#include <fstream>

#include "json.hpp"

#include "fedpid/error.hpp"

namespace fedpid {
namespace {

void append_double(std::string& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}

template <typename Range>
void append_ids(std::string& out, const Range& ids) {
  out += '[';
  bool first = true;
  for (auto id : ids) {
    if (!first) out += ',';
    out += std::to_string(id);
    first = false;
  }
  out += ']';
}

std::ofstream open_for_write(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

}  // namespace

double comm_cost_summary(std::span<const RoundRecord> records) {
  if (records.empty()) throw EmptyInput("comm_cost_summary needs at least one round");
  double sum = 0.0;
  for (const auto& r : records) sum += r.participation_fraction;
  return sum / static_cast<double>(records.size());
}

std::string record_to_json(const RoundRecord& r) {
  std::string out = "{\"round\":" + std::to_string(r.round_index);
  out += ",\"total_clients\":" + std::to_string(r.total_clients);
  out += ",\"selected_ids\":";
  append_ids(out, r.selected_ids);
  out += ",\"weights\":{\"client_ids\":";
  append_ids(out, r.weights.client_ids);
  out += ",\"values\":[";
  for (std::size_t j = 0; j < r.weights.weights.size(); ++j) {
    if (j) out += ',';
    append_double(out, r.weights.weights[j]);
  }
  out += "]},\"per_client_cost\":{";
  bool first = true;
  for (const auto& [id, cost] : r.per_client_cost) {
    if (!first) out += ',';
    out += '"' + std::to_string(id) + "\":";
    append_double(out, cost);
    first = false;
  }
  out += "},\"carried_forward_ids\":";
  append_ids(out, r.carried_forward_ids);
  out += ",\"all_outliers\":";
  out += r.all_outliers ? "true" : "false";
  out += ",\"global_cost\":";
  append_double(out, r.global_cost);
  out += ",\"participation_fraction\":";
  append_double(out, r.participation_fraction);
  out += ",\"fallback_applied\":\"";
  out += to_string(r.fallback_applied);
  out += "\",\"wall_ms\":" + std::to_string(r.wall_ms) + "}";
  return out;
}

RoundRecord record_from_json(std::string_view line) {
  try {
    const auto j = nlohmann::json::parse(line);
    RoundRecord r;
    r.round_index = j.at("round").get<std::uint64_t>();
    r.total_clients = j.at("total_clients").get<std::uint64_t>();
    r.selected_ids = j.at("selected_ids").get<std::vector<ClientId>>();
    r.weights.client_ids = j.at("weights").at("client_ids").get<std::vector<ClientId>>();
    r.weights.weights = j.at("weights").at("values").get<std::vector<double>>();
    for (const auto& [key, value] : j.at("per_client_cost").items()) {
      r.per_client_cost[std::stoll(key)] = value.get<double>();
    }
    r.carried_forward_ids = j.at("carried_forward_ids").get<std::vector<ClientId>>();
    r.all_outliers = j.at("all_outliers").get<bool>();
    r.global_cost = j.at("global_cost").get<double>();
    r.participation_fraction = j.at("participation_fraction").get<double>();
    r.fallback_applied = fallback_from_string(j.at("fallback_applied").get<std::string>());
    r.weights.fallback_applied = r.fallback_applied;
    r.wall_ms = j.at("wall_ms").get<std::uint64_t>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed round record: ") + e.what());
  }
}

void write_records(std::span<const RoundRecord> records, const std::filesystem::path& path) {
  auto out = open_for_write(path);
  for (const auto& r : records) out << record_to_json(r) << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

std::vector<RoundRecord> read_records(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<RoundRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) out.push_back(record_from_json(line));
  }
  return out;
}

void write_summary_csv(std::span<const RoundRecord> records, const std::filesystem::path& path) {
  auto out = open_for_write(path);
  out << "round,global_cost,participation_fraction,fallback\n";
  for (const auto& r : records) {
    std::string line = std::to_string(r.round_index) + ',';
    append_double(line, r.global_cost);
    line += ',';
    append_double(line, r.participation_fraction);
    line += ',';
    line += to_string(r.fallback_applied);
    out << line << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace fedpid
