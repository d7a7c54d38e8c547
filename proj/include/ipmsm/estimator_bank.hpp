#pragma once

#include <Eigen/Dense>
#include <vector>

#include "ipmsm/mtpa.hpp"

namespace ipmsm {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

/// One RLS estimate of theta = [psi_f (Wb), L_q - L_d (H)] with its covariance.
struct ParamEstimate {
  Vec2 theta = Vec2::Zero();
  Mat2 covariance = Mat2::Identity();

  double psi_f() const { return theta(0); }
  double saliency() const { return theta(1); }
  /// psi_f / (L_q - L_d); infinite when the saliency estimate is not positive.
  double i_base() const;
};

/// Regressor of the normalized torque: T_e1 = phi(i_d, i_q)' theta, phi = [i_q, -i_d i_q].
Vec2 regressor(double i_d, double i_q);

/// 2 T_e / (3 p_n).
double normalized_torque(double torque, int pole_pairs);

/// Forgetting-factor RLS step (standard form, covariance symmetrized afterwards).
ParamEstimate rls_update(const ParamEstimate& est, const Vec2& phi, double measurement,
                         double lambda);

/// MTPA references from every estimator plus their mean.
struct BankReferences {
  std::vector<Vec2> per_estimator;  // (i_d, i_q) per estimator
  Vec2 mean = Vec2::Zero();
  /// (1/N) sum ||mean - r_j||²
  double spread = 0.0;
};

/// Reference from one parameter estimate; falls back to the i_d = 0 point when
/// the estimate does not define an MTPA angle.
Vec2 estimator_reference(const ParamEstimate& est, double i_s_ref);

/// N parallel estimators sharing the same measurement stream.
class EstimatorBank {
 public:
  EstimatorBank() = default;
  /// Throws ConfigError for an empty bank or lambda outside (0, 1].
  EstimatorBank(std::vector<ParamEstimate> estimators, double lambda);

  /// Applies rls_update to every estimator with the same data.
  void update(const Vec2& phi, double measurement);

  BankReferences references(double i_s_ref) const;

  /// Mean of the N parameter vectors.
  Vec2 mean_theta() const;

  std::size_t size() const { return estimators_.size(); }
  double lambda() const { return lambda_; }
  const std::vector<ParamEstimate>& estimators() const { return estimators_; }
  const ParamEstimate& operator[](std::size_t j) const { return estimators_[j]; }

  bool operator==(const EstimatorBank& other) const;

 private:
  std::vector<ParamEstimate> estimators_;
  double lambda_ = 1.0;
};

/// Functional form of EstimatorBank::update.
EstimatorBank bank_update(EstimatorBank bank, const Vec2& phi, double measurement);

/// Initial spread of the bank.
struct BankInit {
  int count = 5;
  double lambda = 0.99;
  double psi_f_guess = 0.12;     // Wb
  double saliency_guess = 1.2e-3;  // H
  double psi_f_spread_lo = 0.5;  // multiples of the guess
  double psi_f_spread_hi = 2.5;
  double saliency_spread_lo = 0.4;
  double saliency_spread_hi = 1.2;
  bool pin_first = true;  // estimator 0 at (pinned_psi_f, pinned_saliency)
  double pinned_psi_f = 0.25;
  double pinned_saliency = 0.5e-3;
  double p0_psi_f = 1.0;
  double p0_saliency = 1e-4;

  void validate() const;
};

/// Deterministic bank: unpinned estimators sit on an evenly spaced diagonal of
/// the spread box, estimator 0 optionally pinned.
EstimatorBank make_bank(const BankInit& init);

}  // namespace ipmsm
