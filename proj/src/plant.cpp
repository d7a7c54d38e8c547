#include "ipmsm/plant.hpp"

#include <cmath>
#include <sstream>

#include "ipmsm/errors.hpp"

namespace ipmsm {

StateDerivative plant_derivatives(const MotorState& s, const PlantInput& in, const MotorParams& p) {
  const double omega_r = p.pole_pairs * s.omega_m;
  StateDerivative d;
  d.di_d = (in.u_d - p.r_s * s.i_d + omega_r * p.l_q * s.i_q) / p.l_d;
  d.di_q = (in.u_q - p.r_s * s.i_q - omega_r * (p.l_d * s.i_d + p.psi_f)) / p.l_q;
  const double t_e = electromagnetic_torque(s.i_d, s.i_q, p);
  d.domega_m = (t_e - p.viscous * s.omega_m - in.load_torque) / p.inertia;
  return d;
}

double electromagnetic_torque(double i_d, double i_q, const MotorParams& p) {
  return 1.5 * p.pole_pairs * (p.psi_f * i_q + (p.l_d - p.l_q) * i_d * i_q);
}

double copper_loss(double i_d, double i_q, double r_s) { return 3.0 * r_s * (i_d * i_d + i_q * i_q); }

PlantInput limit_voltage(PlantInput in, double limit) {
  const double mag = std::hypot(in.u_d, in.u_q);
  if (mag > limit && mag > 0.0) {
    const double k = limit / mag;
    in.u_d *= k;
    in.u_q *= k;
  }
  return in;
}

double max_stable_step(const MotorParams& p) { return 2.0 * p.l_d / p.r_s; }

namespace {

MotorState offset(const MotorState& s, const StateDerivative& d, double h) {
  return {s.i_d + h * d.di_d, s.i_q + h * d.di_q, s.omega_m + h * d.domega_m, s.t + h};
}

}  // namespace

MotorState step_plant(const MotorState& s, const PlantInput& in, const MotorParams& p, double dt,
                      double current_bound) {
  const StateDerivative k1 = plant_derivatives(s, in, p);
  const StateDerivative k2 = plant_derivatives(offset(s, k1, 0.5 * dt), in, p);
  const StateDerivative k3 = plant_derivatives(offset(s, k2, 0.5 * dt), in, p);
  const StateDerivative k4 = plant_derivatives(offset(s, k3, dt), in, p);

  MotorState next;
  next.i_d = s.i_d + dt / 6.0 * (k1.di_d + 2.0 * k2.di_d + 2.0 * k3.di_d + k4.di_d);
  next.i_q = s.i_q + dt / 6.0 * (k1.di_q + 2.0 * k2.di_q + 2.0 * k3.di_q + k4.di_q);
  next.omega_m =
      s.omega_m + dt / 6.0 * (k1.domega_m + 2.0 * k2.domega_m + 2.0 * k3.domega_m + k4.domega_m);
  next.t = s.t + dt;

  const bool finite =
      std::isfinite(next.i_d) && std::isfinite(next.i_q) && std::isfinite(next.omega_m);
  if (!finite || std::hypot(next.i_d, next.i_q) > current_bound) {
    std::ostringstream msg;
    msg << "plant diverged at t=" << next.t << " s (i_d=" << next.i_d << " A, i_q=" << next.i_q
        << " A, omega_m=" << next.omega_m << " rad/s)";
    throw DivergenceError(msg.str());
  }
  return next;
}

Plant::Plant(MotorParams params, double dt, double divergence_factor)
    : params_(params), dt_(dt), current_bound_(divergence_factor * params.i_s_max) {
  params_.validate();
  if (!(dt > 0.0)) throw ConfigError("plant step must be positive");
  if (dt > max_stable_step(params_)) throw ConfigError("plant step exceeds 2 L_d / R_s");
  if (!(divergence_factor > 0.0)) throw ConfigError("divergence factor must be positive");
}

bool Plant::set_input(const PlantInput& commanded) {
  input_ = limit_voltage(commanded, params_.voltage_limit());
  return std::hypot(commanded.u_d, commanded.u_q) > params_.voltage_limit();
}

void Plant::advance(int steps) {
  for (int i = 0; i < steps; ++i) {
    state_ = step_plant(state_, input_, params_, dt_, current_bound_);
  }
}

}  // namespace ipmsm
