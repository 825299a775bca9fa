#pragma once

#include <stdexcept>
#include <string>

namespace trajopt {

// Invalid user-supplied configuration (bad rates, broken invariants, bad sweep rows).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Linear-algebra failure that survived jitter escalation.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

// Child-process simulator failure; carries the raw payload we got back.
class SimulatorError : public std::runtime_error {
 public:
  SimulatorError(const std::string& msg, std::string payload)
      : std::runtime_error(msg), payload_(std::move(payload)) {}
  const std::string& payload() const { return payload_; }

 private:
  std::string payload_;
};

// Mismatched series lengths and similar structural problems.
class ShapeError : public std::runtime_error {
 public:
  explicit ShapeError(const std::string& msg) : std::runtime_error(msg) {}
};

// Requested joint-sampling grid larger than the configured cap.
class SizeError : public std::runtime_error {
 public:
  explicit SizeError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace trajopt
