#include "mimpact/farmer_model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mimpact/hurwitz_zeta.hpp"

namespace mimpact {

void FarmerParams::validate() const {
  if (!(beta > 0.0)) throw std::invalid_argument("FarmerParams: beta > 0 violated");
  if (horizon < 2) throw std::invalid_argument("FarmerParams: horizon >= 2 violated");
  if (!(r0_plus > 0.0)) throw std::invalid_argument("FarmerParams: R0+ > 0 violated");
  if (!(r1_plus > 0.0)) throw std::invalid_argument("FarmerParams: R1+ > 0 violated");
}

double continuation_prob(int t, double beta) {
  if (t < 1) throw std::invalid_argument("continuation_prob: t >= 1 required");
  if (!(beta > 0.0)) throw std::invalid_argument("continuation_prob: beta > 0 required");
  const double s = 1.0 + beta;
  return hurwitz_zeta(s, t + 1.0) / hurwitz_zeta(s, t);
}

double continuation_prob_asymptotic(int t, double beta) {
  if (t < 1) throw std::invalid_argument("continuation_prob_asymptotic: t >= 1 required");
  return std::pow(1.0 + 1.0 / t, -beta);
}

ImpactSchedule::ImpactSchedule(const FarmerParams& params, Uninitialised) : params_(params) {
  params_.validate();
}

ImpactSchedule::ImpactSchedule(const FarmerParams& params) : ImpactSchedule(params, Uninitialised{}) {
  const int m = params_.horizon;
  const double s = 1.0 + params_.beta;
  std::vector<double> zeta(m + 2, 0.0);
  for (int t = 1; t <= m + 1; ++t) zeta[t] = hurwitz_zeta(s, t);
  finish(zeta);
}

ImpactSchedule ImpactSchedule::parallel(const FarmerParams& params) {
  ImpactSchedule out(params, Uninitialised{});
  const int m = out.params_.horizon;
  const double s = 1.0 + out.params_.beta;
  std::vector<double> zeta(m + 2, 0.0);
#pragma omp parallel for schedule(static)
  for (int t = 1; t <= m + 1; ++t) zeta[t] = hurwitz_zeta(s, t);
  out.finish(zeta);
  return out;
}

void ImpactSchedule::finish(const std::vector<double>& zeta) {
  const int m = params_.horizon;
  const double s = 1.0 + params_.beta;
  const long double c = params_.r1_plus;
  zeta_ = zeta;
  p_.assign(m + 1, 0.0);
  q_.assign(m + 1, 0.0);
  up_.assign(m + 1, 0.0);
  down_.assign(m + 1, 0.0);
  immediate_.assign(m + 1, 0.0);
  immediate_prefix_.assign(m + 1, 0.0L);

  for (int t = 1; t <= m; ++t) {
    p_[t] = zeta[t + 1] / zeta[t];
    q_[t] = std::pow(static_cast<double>(t), -s) / zeta[t];
  }

  up_[1] = static_cast<double>(c / p_[1]);
  down_[1] = static_cast<double>(c / q_[1]);
  long double log_prefix = 0.0L;  // log(P_1 ... P_{t-1})
  for (int t = 2; t <= m; ++t) {
    log_prefix += std::log1p(-static_cast<long double>(q_[t - 1]));
    const long double down = c / (t * std::exp(log_prefix));
    down_[t] = static_cast<double>(down);
    up_[t] = static_cast<double>(down * q_[t] / p_[t]);
    const double closed = closed_form_up_increment(t);
    if (std::abs(up_[t] - closed) > 1e-10 * closed) {
      throw InternalInvariantFailure("R+ recursive/closed-form disagreement at t=" + std::to_string(t));
    }
  }

  long double level = params_.r0_plus;
  long double prefix = 0.0L;
  for (int t = 1; t <= m; ++t) {
    if (t > 1) level += up_[t - 1];
    immediate_[t] = static_cast<double>(level);
    prefix += level;
    immediate_prefix_[t] = prefix;
  }
}

int ImpactSchedule::check(int t) const {
  if (t < 1 || t > params_.horizon) {
    throw std::out_of_range("t=" + std::to_string(t) + " outside 1.." + std::to_string(params_.horizon));
  }
  return t;
}

double ImpactSchedule::closed_form_up_increment(int t) const {
  check(t);
  if (t < 2) throw std::out_of_range("closed form defined for t >= 2");
  const double s = 1.0 + params_.beta;
  return params_.r1_plus * zeta_[1] /
         (std::pow(static_cast<double>(t), 1.0 + s) * zeta_[t] * zeta_[t + 1]);
}

double ImpactSchedule::permanent_impact(int n) const {
  if (n < 2) throw std::out_of_range("permanent impact requires N >= 2");
  check(n);
  return immediate_[n] - down_[n];
}

double ImpactSchedule::martingale_residual(int t) const {
  check(t);
  return p_[t] * up_[t] - q_[t] * down_[t];
}

double ImpactSchedule::fair_pricing_residual(int n) const {
  if (n < 2) throw std::out_of_range("fair pricing residual requires N >= 2");
  check(n);
  const long double mean = immediate_prefix_[n] / n;
  return static_cast<double>(mean - (static_cast<long double>(immediate_[n]) - down_[n]));
}

ImpactSchedule impact_increments(const FarmerParams& params) { return ImpactSchedule(params); }

namespace {
ImpactSchedule schedule_up_to(FarmerParams params, int t) {
  params.validate();
  if (t < 1 || t > params.horizon) {
    throw std::out_of_range("t=" + std::to_string(t) + " outside 1.." + std::to_string(params.horizon));
  }
  params.horizon = std::max(t, 2);
  return ImpactSchedule(params);
}
}  // namespace

double immediate_impact(const FarmerParams& params, int t) {
  return schedule_up_to(params, t).immediate_impact(t);
}

double permanent_impact_value(const FarmerParams& params, int n) {
  return schedule_up_to(params, n).permanent_impact(n);
}

double impact_ratio(const FarmerParams& params, int n) { return schedule_up_to(params, n).impact_ratio(n); }

double immediate_impact_growth(double beta, double t) {
  return beta == 1.0 ? std::log(t + 1.0) : std::pow(t, beta - 1.0);
}

double mixture_impact_ratio(const ImpactSchedule& schedule, int n_max) {
  if (n_max < 2 || n_max > schedule.horizon()) throw std::out_of_range("mixture_impact_ratio: n_max");
  const double s = 1.0 + schedule.params().beta;
  long double num = 0.0L, den = 0.0L;
  for (int n = n_max; n >= 2; --n) {
    const long double w = std::pow(static_cast<double>(n), -s);
    num += w * schedule.impact_ratio(n);
    den += w;
  }
  return static_cast<double>(num / den);
}

}  // namespace mimpact
