#include "fedpid/params.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "fedpid/error.hpp"

namespace fedpid {
namespace {

constexpr std::array<unsigned char, 4> kMagic = {'F', 'P', 'V', '1'};
constexpr std::size_t kHeaderBytes = kMagic.size() + sizeof(std::uint64_t);

void put_u64_le(std::vector<unsigned char>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

std::uint64_t get_u64_le(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return v;
}

}  // namespace

ParameterVector::ParameterVector(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw EmptyInput("parameter vector must have dim >= 1");
  for (std::size_t d = 0; d < values_.size(); ++d) {
    if (!std::isfinite(values_[d])) {
      throw NonFiniteValue("parameter vector has non-finite value at index " + std::to_string(d));
    }
  }
}

ParameterVector::ParameterVector(std::initializer_list<double> values)
    : ParameterVector(std::vector<double>(values)) {}

ParameterVector weighted_sum(std::span<const ParameterVector> models,
                             std::span<const double> weights) {
  if (models.empty()) throw EmptyInput("weighted_sum needs at least one model");
  if (weights.size() != models.size()) {
    throw DimensionMismatch("weighted_sum got " + std::to_string(models.size()) + " models but " +
                            std::to_string(weights.size()) + " weights");
  }
  const std::size_t dim = models.front().dim();
  for (std::size_t j = 0; j < models.size(); ++j) {
    if (models[j].dim() != dim) {
      throw DimensionMismatch("model " + std::to_string(j) + " has dim " +
                              std::to_string(models[j].dim()) + ", expected " +
                              std::to_string(dim));
    }
    if (!std::isfinite(weights[j])) {
      throw NonFiniteWeight("weight " + std::to_string(j) + " is not finite");
    }
  }

  std::vector<double> out(dim, 0.0);
  for (std::size_t j = 0; j < models.size(); ++j) {
    const auto m = models[j].values();
    for (std::size_t d = 0; d < dim; ++d) out[d] += weights[j] * m[d];
  }
  return ParameterVector(std::move(out));
}

std::vector<unsigned char> encode_checkpoint(const ParameterVector& model) {
  std::vector<unsigned char> out;
  out.reserve(kHeaderBytes + 8 * model.dim());
  for (unsigned char b : kMagic) out.push_back(b);
  put_u64_le(out, model.dim());
  for (double v : model) put_u64_le(out, std::bit_cast<std::uint64_t>(v));
  return out;
}

ParameterVector decode_checkpoint(std::span<const unsigned char> bytes) {
  if (bytes.size() < kHeaderBytes) throw FormatError("checkpoint truncated: missing header");
  if (std::memcmp(bytes.data(), kMagic.data(), kMagic.size()) != 0) {
    throw FormatError("checkpoint has bad magic bytes");
  }
  const std::uint64_t dim = get_u64_le(bytes.data() + kMagic.size());
  if (dim == 0) throw FormatError("checkpoint declares dim 0");
  const std::size_t payload = bytes.size() - kHeaderBytes;
  if (dim > payload / 8 || payload != dim * 8) {
    throw FormatError("checkpoint payload is " + std::to_string(payload) + " bytes, expected " +
                      std::to_string(dim) + " values");
  }

  std::vector<double> values(dim);
  const unsigned char* p = bytes.data() + kHeaderBytes;
  for (std::size_t d = 0; d < dim; ++d, p += 8) {
    values[d] = std::bit_cast<double>(get_u64_le(p));
    if (!std::isfinite(values[d])) {
      throw FormatError("checkpoint holds non-finite value at index " + std::to_string(d));
    }
  }
  return ParameterVector(std::move(values));
}

void checkpoint_write(const ParameterVector& model, const std::filesystem::path& path) {
  const auto bytes = encode_checkpoint(model);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

ParameterVector checkpoint_read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("failed reading " + path.string());
  return decode_checkpoint(bytes);
}

}  // namespace fedpid
