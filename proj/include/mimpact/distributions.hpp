#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <string_view>
#include <vector>

namespace mimpact {

struct Binning {
  enum class Kind { linear, log, integer };
  Kind kind = Kind::linear;
  int bins = 50;  // ignored for integer binning

  static Binning linear(int n) { return {Kind::linear, n}; }
  static Binning logarithmic(int n) { return {Kind::log, n}; }
  static Binning integer() { return {Kind::integer, 0}; }
};

struct Histogram {
  std::vector<double> centers;
  std::vector<double> frequencies;  // sums to 1
  std::vector<std::size_t> counts;
};

/// Normalised histogram. Linear and log bins span [min, max]; log binning
/// needs positive values and reports geometric bin centres. Integer binning
/// emits one bin per observed value. Only non-empty bins are returned.
/// Throws std::invalid_argument on empty input.
Histogram empirical_histogram(std::span<const double> values, Binning binning);

void write_histogram(std::ostream& out, const Histogram& h);

enum class BetaMethod { loglog_regression, mle };

struct BetaEstimate {
  double beta = 0.0;
  double standard_error = 0.0;
  BetaMethod method = BetaMethod::mle;
  std::size_t samples = 0;
  /// Distinct lengths entering the fit (regression only).
  std::size_t points_used = 0;
};

std::string_view to_string(BetaMethod method) noexcept;

/// Tail exponent of lengths N >= 2 assumed to follow p_n ~ n^-(1+beta).
///
/// Regression: OLS of log frequency on log n over lengths seen at least five
/// times; needs at least five distinct lengths overall.
/// MLE: zeta law renormalised over n >= 2 (and n <= n_max when given), solved
/// by safeguarded Newton on the score; the error is the inverse Fisher
/// information.
BetaEstimate estimate_beta(std::span<const int> lengths, BetaMethod method,
                           std::optional<int> n_max = std::nullopt);

/// Draws N from p_n ~ n^-(1+beta) restricted to 2 <= n (<= n_max).
///
/// Inverse CDF: a table covers small n exactly; beyond it the survival
/// function is inverted through the integral approximation of the Hurwitz
/// tail and then corrected with exact tail values.
class ZetaLengthSampler {
 public:
  explicit ZetaLengthSampler(double beta, std::optional<int> n_max = std::nullopt);

  double beta() const noexcept { return beta_; }
  std::optional<int> n_max() const noexcept { return n_max_; }
  /// Exact probability of length n.
  double pmf(int n) const;
  /// P(N > n).
  double survival(int n) const;

  /// Maps u in [0, 1) to a length.
  int quantile(double u) const;

  template <class Rng>
  int operator()(Rng& rng) const {
    return quantile(std::generate_canonical<double, 53>(rng));
  }

 private:
  double beta_;
  std::optional<int> n_max_;
  double norm_ = 0.0;      // sum of n^-s over the support
  std::vector<double> cdf_;  // cdf_[i] = P(N <= i + 2)
};

}  // namespace mimpact
