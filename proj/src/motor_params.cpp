#include "ipmsm/motor_params.hpp"

#include <cmath>
#include <string>

#include "ipmsm/errors.hpp"

namespace ipmsm {

namespace {

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw ConfigError(std::string("motor parameter '") + name + "' must be positive and finite");
  }
}

}  // namespace

void MotorParams::validate() const {
  require_positive(r_s, "r_s");
  require_positive(l_d, "l_d");
  require_positive(l_q, "l_q");
  require_positive(psi_f, "psi_f");
  require_positive(inertia, "inertia");
  require_positive(u_dc, "u_dc");
  require_positive(i_s_max, "i_s_max");
  if (!(l_q > l_d)) throw ConfigError("motor parameters require L_q > L_d (salient machine)");
  if (pole_pairs < 1) throw ConfigError("pole_pairs must be >= 1");
  if (!(viscous >= 0.0)) throw ConfigError("viscous friction must be non-negative");
}

}  // namespace ipmsm
