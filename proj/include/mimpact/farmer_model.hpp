#pragma once

#include <stdexcept>
#include <vector>

namespace mimpact {

/// Raised when two independent evaluations of the same quantity disagree,
/// which can only mean a numerical bug.
class InternalInvariantFailure : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct FarmerParams {
  double beta = 1.5;
  int horizon = 1000;
  double r0_plus = 1.0;
  double r1_plus = 1.0;

  /// Throws std::invalid_argument unless beta > 0, horizon >= 2 and both seeds > 0.
  void validate() const;
};

/// P_t = zeta(1+beta, t+1) / zeta(1+beta, t).
double continuation_prob(int t, double beta);
/// (1 + 1/t)^-beta, the large-t form of P_t.
double continuation_prob_asymptotic(int t, double beta);

/// The full schedule of the model for t = 1..M, computed once.
///
/// Prices move by R_t^+ when the metaorder continues past step t and by
/// -R_t^- when it stops. Martingale and fair-pricing conditions fix
///
///   R_t^- = R1 / (t P_1...P_{t-1}),  R_t^+ = R_t^- (1 - P_t) / P_t   (t >= 2),
///
/// with R1 the free constant. The first continuation step is R_1^+ = R1 / P_1,
/// which is what makes the average execution price equal the final price for
/// every N. R_1^- = R1 / (1 - P_1) keeps the martingale condition at t = 1.
///
/// Immediate impact: imm(1) = R0, imm(t) = imm(t-1) + R_{t-1}^+.
/// Permanent impact after N steps: perm(N) = imm(N) - R_N^-, N >= 2.
class ImpactSchedule {
 public:
  /// Serial evaluation; throws InternalInvariantFailure if the recursive and
  /// closed-form R_t^+ disagree by more than 1e-10 relative.
  explicit ImpactSchedule(const FarmerParams& params);

  /// Same result with the zeta evaluations spread over OpenMP threads.
  static ImpactSchedule parallel(const FarmerParams& params);

  const FarmerParams& params() const noexcept { return params_; }
  int horizon() const noexcept { return params_.horizon; }

  double continuation(int t) const { return p_.at(check(t)); }
  /// 1 - P_t computed without cancellation.
  double stop_probability(int t) const { return q_.at(check(t)); }
  double up_increment(int t) const { return up_.at(check(t)); }
  double down_increment(int t) const { return down_.at(check(t)); }
  /// The explicit zeta form of R_t^+ for t >= 2.
  double closed_form_up_increment(int t) const;
  double immediate_impact(int t) const { return immediate_.at(check(t)); }
  /// Requires 2 <= n <= M.
  double permanent_impact(int n) const;
  double impact_ratio(int n) const { return permanent_impact(n) / immediate_impact(n); }

  /// P_t R_t^+ - (1 - P_t) R_t^-.
  double martingale_residual(int t) const;
  /// (1/N) sum_{t<=N} imm(t) - perm(N) for N >= 2, accumulated in extended precision.
  double fair_pricing_residual(int n) const;

  const std::vector<double>& immediate_curve() const noexcept { return immediate_; }

 private:
  struct Uninitialised {};
  ImpactSchedule(const FarmerParams& params, Uninitialised);
  void finish(const std::vector<double>& zeta);
  int check(int t) const;

  FarmerParams params_;
  // Indexed by t, entry 0 unused.
  std::vector<double> p_, q_, up_, down_, immediate_;
  std::vector<double> zeta_;  // zeta(1+beta, t), t = 1..M+1
  std::vector<long double> immediate_prefix_;
};

ImpactSchedule impact_increments(const FarmerParams& params);
double immediate_impact(const FarmerParams& params, int t);
double permanent_impact_value(const FarmerParams& params, int n);
double impact_ratio(const FarmerParams& params, int n);

/// Large-t growth of the immediate impact: t^(beta-1), or log(t+1) at beta = 1.
double immediate_impact_growth(double beta, double t);

/// Expected perm(N) / imm(N) over lengths drawn from p_n proportional to n^-(1+beta)
/// on 2..n_max, by direct summation.
double mixture_impact_ratio(const ImpactSchedule& schedule, int n_max);

}  // namespace mimpact
