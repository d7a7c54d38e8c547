#pragma once

#include <stdexcept>
#include <string>

namespace ipmsm {

// Invalid parameters, timelines or configuration files. Maps to CLI exit code 3.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A state left its admissible envelope (non-finite or beyond the configured bound).
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// L_q - L_d too small for the MTPA angle to be defined.
class DegenerateSaliencyError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Requested torque is above what the current limit can produce on the MTPA curve.
class UnreachableTorqueError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace ipmsm
