#pragma once

#include <cstddef>
#include <filesystem>
#include <initializer_list>
#include <span>
#include <vector>

namespace fedpid {

// Flat, immutable vector of model parameters. Construction rejects empty
// input and any NaN/Inf, so every live instance is dim >= 1 and finite.
class ParameterVector {
 public:
  explicit ParameterVector(std::vector<double> values);
  ParameterVector(std::initializer_list<double> values);

  std::size_t dim() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t d) const { return values_[d]; }

  auto begin() const noexcept { return values_.begin(); }
  auto end() const noexcept { return values_.end(); }

  friend bool operator==(const ParameterVector&, const ParameterVector&) = default;

 private:
  std::vector<double> values_;
};

// result[d] = sum_j weights[j] * models[j][d], accumulated in ascending j.
ParameterVector weighted_sum(std::span<const ParameterVector> models,
                             std::span<const double> weights);

// Checkpoint layout: "FPV1", dim as u64 LE, dim binary64 values LE.
void checkpoint_write(const ParameterVector& model, const std::filesystem::path& path);
ParameterVector checkpoint_read(const std::filesystem::path& path);

// In-memory form of the checkpoint layout, shared by the file functions.
std::vector<unsigned char> encode_checkpoint(const ParameterVector& model);
ParameterVector decode_checkpoint(std::span<const unsigned char> bytes);

}  // namespace fedpid
