#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "mimpact/core_types.hpp"
#include "mimpact/ingestion.hpp"

namespace mimpact {

/// (p_t - p_t0) / p_t0. Throws std::invalid_argument when p_t0 <= 0.
double return_proxy(double p_t, double p_t0);

struct PathPoint {
  double rescaled_time = 0.0;
  double signed_impact = 0.0;
};

/// Signed impact of one metaorder.
///
/// Execution: one point per merged fill at volume time cumQ/Q, from the fill
/// price. Relaxation: m points at t_end + j T / m (j = 1..m), rescaled time
/// 1 + j/m, from the as-of mid (or last trade when the tape has no quotes).
/// The reference price is the last mid strictly before t0, else the last
/// trade before t0, else the first fill.
struct ImpactPath {
  int length = 0;
  int sign = 1;
  double reference_price = 0.0;
  std::vector<PathPoint> execution;
  /// Empty when the tape ends before t0 + 2T.
  std::vector<PathPoint> relaxation;
  bool relaxation_truncated = false;
  bool relaxation_proxy = false;
  /// Signed mid-price impact at the last fill, when a quote is available.
  std::optional<double> seam_mid;
  /// Price at t0 + 2T; empty when truncated.
  std::optional<double> final_price;
  /// Index of the source metaorder in the input span.
  std::size_t source = 0;
};

struct PathOptions {
  int relaxation_points = 50;
};

ImpactPath signed_impact_path(const Metaorder& metaorder, const TradeTape& tape,
                              const PathOptions& options = {});

struct PathSet {
  std::vector<ImpactPath> paths;
  /// Metaorders skipped because no tape matched their instrument and day.
  std::size_t missing_tape = 0;
};

/// Reference implementation, one metaorder after another.
PathSet compute_impact_paths_serial(std::span<const Metaorder> metaorders, const TapeSet& tapes,
                                    const PathOptions& options = {});
/// OpenMP version; produces exactly the serial result.
PathSet compute_impact_paths(std::span<const Metaorder> metaorders, const TapeSet& tapes,
                             const PathOptions& options = {});

struct BucketPoint {
  double x = 0.0;
  double y = 0.0;
  std::size_t count = 0;
};

/// Half-open index ranges of n contiguous groups over `size` sorted items;
/// the first size % n groups hold one extra item.
std::vector<std::pair<std::size_t, std::size_t>> bucket_ranges(std::size_t size, std::size_t n);

/// Stable sort by x, split into n_buckets near-equal groups, mean of each.
/// Throws std::invalid_argument when sizes differ or there are fewer points
/// than buckets.
std::vector<BucketPoint> bucket_average(std::span<const double> xs, std::span<const double> ys,
                                        std::size_t n_buckets);

struct PowerLawFit {
  double prefactor = 0.0;
  double exponent = 0.0;
  /// RMS error of log y.
  double residual = 0.0;
  std::size_t point_count = 0;
};

enum class FitMethod { log_ols, nonlinear };

/// y = a x^b. Log-space OLS by default; `nonlinear` refines the log fit by
/// Levenberg-Marquardt on squared errors in y. Needs >= 3 points, all
/// coordinates > 0 and at least two distinct x.
PowerLawFit fit_power_law(std::span<const double> xs, std::span<const double> ys,
                          FitMethod method = FitMethod::log_ols);

struct DynamicsOptions {
  std::size_t n_buckets = 100;
};

/// Pools the paths and bucket-averages execution and relaxation separately.
/// Relaxation uses min(n_buckets, m) buckets so that each one holds a single
/// grid offset. Throws std::invalid_argument on empty input or when the
/// execution points are fewer than n_buckets.
ImpactCurve impact_dynamics(std::span<const ImpactPath> paths, const DynamicsOptions& options = {});

/// Last execution bucket, or the one before when the last is flagged as an
/// N=2 artifact.
double temporary_impact(const ImpactCurve& curve);
/// Last relaxation bucket.
double permanent_impact(const ImpactCurve& curve);

/// Quantity-weighted mean fill price.
double vwap(const Metaorder& metaorder);

struct SqrtLawPoint {
  double participation = 0.0;
  double impact = 0.0;
  double duration_s = 0.0;
};

struct DispersionBin {
  double duration_lo = 0.0;
  double duration_hi = 0.0;
  double residual_sd = 0.0;
  std::size_t count = 0;
};

struct SqrtLawAnalysis {
  std::vector<SqrtLawPoint> scatter;
  /// impact = a (Q/V)^delta over points with positive impact.
  PowerLawFit participation_fit;
  /// Partial coefficient of log T in log impact ~ log(Q/V) + log T.
  double duration_coefficient = 0.0;
  double duration_coefficient_se = 0.0;
  std::size_t excluded_nonpositive = 0;
  /// Residual spread of the participation fit by duration tercile.
  std::vector<DispersionBin> dispersion;
};

/// `paths[i].source` indexes `metaorders`, which must carry V.
/// Throws std::invalid_argument with fewer than 10 usable metaorders.
SqrtLawAnalysis square_root_analysis(std::span<const Metaorder> metaorders,
                                     std::span<const ImpactPath> paths);

struct FairPricingPoint {
  std::size_t source = 0;
  double one_plus_r_vwap = 1.0;
  double one_plus_r_final = 1.0;
};

struct FairPricingReport {
  std::vector<FairPricingPoint> points;
  double slope = 0.0;
  double intercept = 0.0;
  /// RMS perpendicular distance to the identity line.
  double rms_distance = 0.0;
  double max_abs_deviation = 0.0;
  std::size_t excluded_truncated = 0;
};

FairPricingReport fair_pricing_check(std::span<const Metaorder> metaorders,
                                     std::span<const ImpactPath> paths);

// ----------------------------------------------------------------- writers

void write_curve(std::ostream& out, const ImpactCurve& curve);
void write_power_law_fit(std::ostream& out, const PowerLawFit& fit);
void write_sqrt_law(std::ostream& out, const SqrtLawAnalysis& analysis);
void write_fair_pricing(std::ostream& out, std::span<const Metaorder> metaorders,
                        const FairPricingReport& report);

}  // namespace mimpact
