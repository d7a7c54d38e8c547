#include "ipmsm/mtpa.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "ipmsm/errors.hpp"

namespace ipmsm {

bool mtpa_defined(double psi_f, double saliency) {
  return psi_f > 0.0 && saliency > kSaliencyGuard && std::isfinite(psi_f) && std::isfinite(saliency);
}

MtpaPoint point_at_angle(double i_s, double beta, double i_base) {
  return {i_base, beta, -i_s * std::sin(beta), i_s * std::cos(beta), i_s};
}

MtpaPoint mtpa_point(double i_s_ref, double psi_f, double saliency) {
  if (!(saliency > kSaliencyGuard)) {
    throw DegenerateSaliencyError("saliency L_q - L_d below guard; MTPA undefined");
  }
  if (!(psi_f > 0.0)) throw std::invalid_argument("psi_f must be positive");
  if (!(i_s_ref >= 0.0)) throw std::invalid_argument("current reference must be non-negative");

  const double i_base = psi_f / saliency;
  if (i_s_ref == 0.0) return point_at_angle(0.0, 0.0, i_base);

  const double arg = (std::sqrt(i_base * i_base + 8.0 * i_s_ref * i_s_ref) - i_base) / (4.0 * i_s_ref);
  const double beta = std::asin(std::clamp(arg, 0.0, 1.0));
  return point_at_angle(i_s_ref, beta, i_base);
}

double torque_at_angle(double i_s, double beta, double psi_f, double saliency, int pole_pairs) {
  const double i_d = -i_s * std::sin(beta);
  const double i_q = i_s * std::cos(beta);
  return 1.5 * pole_pairs * (psi_f * i_q - saliency * i_d * i_q);
}

MtpaPoint mtpa_oracle(double i_s_ref, double psi_f, double saliency, int grid_points) {
  if (grid_points < 1000) throw std::invalid_argument("oracle needs at least 1000 grid points");
  const double i_base = psi_f / saliency;
  if (i_s_ref <= 0.0) return point_at_angle(0.0, 0.0, i_base);

  // Torque per ampere; keeps the objective O(psi_f) regardless of i_s.
  auto f = [&](double b) { return torque_at_angle(i_s_ref, b, psi_f, saliency, 1) / i_s_ref; };

  const double half_pi = std::numbers::pi / 2.0;
  const double h = half_pi / grid_points;
  int best = 0;
  double best_val = f(0.0);
  for (int k = 1; k <= grid_points; ++k) {
    const double v = f(k * h);
    if (v > best_val) {
      best_val = v;
      best = k;
    }
  }

  double lo = std::max(0.0, (best - 1) * h);
  double hi = std::min(half_pi, (best + 1) * h);
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = f(x1);
  double f2 = f(x2);
  while (hi - lo > 1e-9) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = f(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = f(x1);
    }
  }
  return point_at_angle(i_s_ref, 0.5 * (lo + hi), i_base);
}

double torque_to_current(double torque, double psi_f, double saliency, int pole_pairs,
                         double i_s_max) {
  if (!(torque >= 0.0)) throw std::invalid_argument("torque reference must be non-negative");
  if (torque == 0.0) return 0.0;

  auto torque_of = [&](double i_s) {
    const MtpaPoint pt = mtpa_point(i_s, psi_f, saliency);
    return torque_at_angle(i_s, pt.beta, psi_f, saliency, pole_pairs);
  };
  if (torque_of(i_s_max) < torque) {
    throw UnreachableTorqueError("torque exceeds MTPA capability at the current limit");
  }
  // MTPA torque is strictly increasing in i_s.
  double lo = 0.0;
  double hi = i_s_max;
  while (hi - lo > 1e-6 * hi) {
    const double mid = 0.5 * (lo + hi);
    if (torque_of(mid) < torque) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace ipmsm
