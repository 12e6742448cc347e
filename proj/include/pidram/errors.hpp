#pragma once

#include <stdexcept>
#include <string>

namespace pidram {

// Base class for everything the simulator throws.
class SimError : public std::runtime_error {
 public:
  explicit SimError(const std::string& what) : std::runtime_error(what) {}
};

// Rejected input: out-of-range index, malformed command, bad address.
class BoundsError : public SimError {
 public:
  using SimError::SimError;
};

// Illegal command for the current device/bank state (e.g. RD on a
// precharged bank) or an out-of-order command stream.
class ProtocolError : public SimError {
 public:
  using SimError::SimError;
};

// Operation requested with operands the engine cannot serve
// (e.g. RowClone across banks, init from a foreign zero row).
class OperandError : public SimError {
 public:
  using SimError::SimError;
};

// Invalid or inconsistent configuration.
class ConfigError : public SimError {
 public:
  using SimError::SimError;
};

// A component was used before a required setup step (characterization,
// discovery) completed.
class StateError : public SimError {
 public:
  using SimError::SimError;
};

// Not enough co-subarray space to satisfy an allocation request.
class AllocationError : public SimError {
 public:
  using SimError::SimError;
};

}  // namespace pidram
