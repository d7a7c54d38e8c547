#pragma once

namespace ipmsm {

/// Below this saliency (H) the MTPA angle is treated as undefined.
inline constexpr double kSaliencyGuard = 1e-5;

/// A point on the maximum-torque-per-ampere curve.
/// i_d_ref = -i_s_ref sin(beta), i_q_ref = i_s_ref cos(beta), 0 <= beta < pi/2.
struct MtpaPoint {
  double i_base = 0.0;  // psi_f / (L_q - L_d), A
  double beta = 0.0;    // rad, measured from +q toward -d
  double i_d_ref = 0.0;
  double i_q_ref = 0.0;
  double i_s_ref = 0.0;
};

/// True when (psi_f, L_q - L_d) satisfy the preconditions of mtpa_point.
bool mtpa_defined(double psi_f, double saliency);

/// Closed-form MTPA reference for a current magnitude.
/// Throws DegenerateSaliencyError if saliency <= kSaliencyGuard, std::invalid_argument
/// for psi_f <= 0 or i_s_ref < 0.
MtpaPoint mtpa_point(double i_s_ref, double psi_f, double saliency);

/// Reference point at angle `beta` on the circle of radius i_s.
MtpaPoint point_at_angle(double i_s, double beta, double i_base);

/// Torque of a current vector (i_s, beta) with the given parameters (N·m).
double torque_at_angle(double i_s, double beta, double psi_f, double saliency, int pole_pairs);

/// Brute-force MTPA: uniform grid over [0, pi/2] followed by golden-section
/// refinement to 1e-9 rad. Independent of the closed form.
MtpaPoint mtpa_oracle(double i_s_ref, double psi_f, double saliency, int grid_points = 10000);

/// Smallest current magnitude whose MTPA point produces `torque`. Bisection to
/// 1e-6 relative. Throws UnreachableTorqueError above the torque at i_s_max.
double torque_to_current(double torque, double psi_f, double saliency, int pole_pairs,
                         double i_s_max);

}  // namespace ipmsm
