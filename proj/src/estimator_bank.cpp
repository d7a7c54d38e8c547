#include "ipmsm/estimator_bank.hpp"

#include <limits>

#include "ipmsm/errors.hpp"

namespace ipmsm {

double ParamEstimate::i_base() const {
  if (!(saliency() > 0.0)) return std::numeric_limits<double>::infinity();
  return psi_f() / saliency();
}

Vec2 regressor(double i_d, double i_q) { return {i_q, -i_d * i_q}; }

double normalized_torque(double torque, int pole_pairs) { return 2.0 * torque / (3.0 * pole_pairs); }

ParamEstimate rls_update(const ParamEstimate& est, const Vec2& phi, double measurement,
                         double lambda) {
  const Mat2& p = est.covariance;
  const Vec2 p_phi = p * phi;
  const double denom = lambda + phi.dot(p_phi);
  const Vec2 gain = p_phi / denom;

  ParamEstimate out;
  out.theta = est.theta + gain * (measurement - phi.dot(est.theta));
  const Mat2 next = (p - gain * p_phi.transpose()) / lambda;
  out.covariance = 0.5 * (next + next.transpose());
  return out;
}

Vec2 estimator_reference(const ParamEstimate& est, double i_s_ref) {
  if (!mtpa_defined(est.psi_f(), est.saliency())) return {0.0, i_s_ref};
  const MtpaPoint pt = mtpa_point(i_s_ref, est.psi_f(), est.saliency());
  return {pt.i_d_ref, pt.i_q_ref};
}

EstimatorBank::EstimatorBank(std::vector<ParamEstimate> estimators, double lambda)
    : estimators_(std::move(estimators)), lambda_(lambda) {
  if (estimators_.empty()) throw ConfigError("estimator bank needs at least one estimator");
  if (!(lambda_ > 0.0 && lambda_ <= 1.0)) throw ConfigError("forgetting factor must be in (0, 1]");
}

void EstimatorBank::update(const Vec2& phi, double measurement) {
  for (auto& est : estimators_) est = rls_update(est, phi, measurement, lambda_);
}

BankReferences EstimatorBank::references(double i_s_ref) const {
  BankReferences refs;
  refs.per_estimator.reserve(estimators_.size());
  for (const auto& est : estimators_) refs.per_estimator.push_back(estimator_reference(est, i_s_ref));
  // offset from the first reference so that identical estimators give an exact mean
  const Vec2& r0 = refs.per_estimator.front();
  const double n = static_cast<double>(estimators_.size());
  Vec2 offset = Vec2::Zero();
  for (const auto& r : refs.per_estimator) offset += r - r0;
  refs.mean = r0 + offset / n;
  for (const auto& r : refs.per_estimator) refs.spread += (refs.mean - r).squaredNorm();
  refs.spread /= n;
  return refs;
}

Vec2 EstimatorBank::mean_theta() const {
  Vec2 sum = Vec2::Zero();
  for (const auto& est : estimators_) sum += est.theta;
  return sum / static_cast<double>(estimators_.size());
}

bool EstimatorBank::operator==(const EstimatorBank& other) const {
  if (lambda_ != other.lambda_ || estimators_.size() != other.estimators_.size()) return false;
  for (std::size_t j = 0; j < estimators_.size(); ++j) {
    if (estimators_[j].theta != other.estimators_[j].theta) return false;
    if (estimators_[j].covariance != other.estimators_[j].covariance) return false;
  }
  return true;
}

EstimatorBank bank_update(EstimatorBank bank, const Vec2& phi, double measurement) {
  bank.update(phi, measurement);
  return bank;
}

void BankInit::validate() const {
  if (count < 1) throw ConfigError("estimator count must be >= 1");
  if (!(lambda > 0.0 && lambda <= 1.0)) throw ConfigError("forgetting factor must be in (0, 1]");
  if (!(p0_psi_f > 0.0 && p0_saliency > 0.0)) throw ConfigError("initial covariance must be positive");
  if (psi_f_spread_lo > psi_f_spread_hi || saliency_spread_lo > saliency_spread_hi) {
    throw ConfigError("estimator spread bounds are reversed");
  }
}

EstimatorBank make_bank(const BankInit& init) {
  init.validate();
  Mat2 p0 = Mat2::Zero();
  p0(0, 0) = init.p0_psi_f;
  p0(1, 1) = init.p0_saliency;

  std::vector<ParamEstimate> ests;
  ests.reserve(init.count);
  const int free_slots = init.pin_first ? init.count - 1 : init.count;
  if (init.pin_first) ests.push_back({Vec2(init.pinned_psi_f, init.pinned_saliency), p0});
  for (int k = 0; k < free_slots; ++k) {
    const double frac = free_slots > 1 ? static_cast<double>(k) / (free_slots - 1) : 0.5;
    const double psi =
        init.psi_f_guess * (init.psi_f_spread_lo + frac * (init.psi_f_spread_hi - init.psi_f_spread_lo));
    const double sal = init.saliency_guess *
                       (init.saliency_spread_lo + frac * (init.saliency_spread_hi - init.saliency_spread_lo));
    ests.push_back({Vec2(psi, sal), p0});
  }
  return EstimatorBank(std::move(ests), init.lambda);
}

}  // namespace ipmsm
