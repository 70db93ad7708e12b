#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace nfmimo {

/// Precondition violated by a caller-supplied value (bad count, shape mismatch, index out of range).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A quantity is mathematically undefined for the given input (all-zero scene for SNR, all-zero
/// measurements for normalization).
class UndefinedQuantity : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A voxel coincides with an antenna, so the free-space Green's function blows up.
class DegenerateGeometry : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Requested dense materialization exceeds the configured memory budget.
class CapacityError : public std::length_error {
 public:
  using std::length_error::length_error;
};

/// Malformed file content. Carries the byte offset of the problem when known.
class FormatError : public std::runtime_error {
 public:
  explicit FormatError(const std::string& what, std::optional<std::uint64_t> offset = std::nullopt)
      : std::runtime_error(offset ? what + " (at byte offset " + std::to_string(*offset) + ")" : what),
        offset_(offset) {}

  std::optional<std::uint64_t> offset() const noexcept { return offset_; }

 private:
  std::optional<std::uint64_t> offset_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Iterative solver breakdown (non-finite residual). Keeps the objective trace up to the failure.
class NumericalFailure : public std::runtime_error {
 public:
  NumericalFailure(const std::string& what, std::vector<double> trace)
      : std::runtime_error(what), trace_(std::move(trace)) {}

  const std::vector<double>& trace() const noexcept { return trace_; }

 private:
  std::vector<double> trace_;
};

}  // namespace nfmimo
