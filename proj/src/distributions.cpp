#include "mimpact/distributions.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <map>
#include <ostream>
#include <stdexcept>

#include "mimpact/hurwitz_zeta.hpp"
#include "mimpact/regression.hpp"
#include "mimpact/text.hpp"

namespace mimpact {

Histogram empirical_histogram(std::span<const double> values, Binning binning) {
  if (values.empty()) throw std::invalid_argument("empirical_histogram: empty input");
  for (double v : values) {
    if (!std::isfinite(v)) throw std::invalid_argument("empirical_histogram: non-finite value");
  }
  const double total = static_cast<double>(values.size());
  Histogram h;

  if (binning.kind == Binning::Kind::integer) {
    std::map<long long, std::size_t> counts;
    for (double v : values) {
      if (v != std::floor(v)) throw std::invalid_argument("integer binning: non-integral value");
      ++counts[static_cast<long long>(v)];
    }
    for (const auto& [k, c] : counts) {
      h.centers.push_back(static_cast<double>(k));
      h.counts.push_back(c);
      h.frequencies.push_back(c / total);
    }
    return h;
  }

  if (binning.bins < 1) throw std::invalid_argument("empirical_histogram: bins must be >= 1");
  const bool log = binning.kind == Binning::Kind::log;
  auto map = [log](double v) { return log ? std::log(v) : v; };
  if (log) {
    for (double v : values) {
      if (!(v > 0.0)) throw std::invalid_argument("log binning requires positive values");
    }
  }
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = map(*lo_it), hi = map(*hi_it);
  if (lo == hi) {
    h.centers.push_back(*lo_it);
    h.counts.push_back(values.size());
    h.frequencies.push_back(1.0);
    return h;
  }
  const int n = binning.bins;
  const double width = (hi - lo) / n;
  std::vector<std::size_t> counts(n, 0);
  for (double v : values) {
    const int k = std::min(n - 1, static_cast<int>((map(v) - lo) / width));
    ++counts[k];
  }
  for (int k = 0; k < n; ++k) {
    if (counts[k] == 0) continue;
    const double mid = lo + (k + 0.5) * width;
    h.centers.push_back(log ? std::exp(mid) : mid);
    h.counts.push_back(counts[k]);
    h.frequencies.push_back(counts[k] / total);
  }
  return h;
}

void write_histogram(std::ostream& out, const Histogram& h) {
  out << "center,frequency,count\n";
  for (std::size_t i = 0; i < h.centers.size(); ++i) {
    out << text::fmt(h.centers[i]) << ',' << text::fmt(h.frequencies[i]) << ',' << h.counts[i] << '\n';
  }
}

std::string_view to_string(BetaMethod method) noexcept {
  return method == BetaMethod::mle ? "mle" : "loglog_regression";
}

namespace {

BetaEstimate regression_estimate(std::span<const int> lengths) {
  std::map<int, std::size_t> counts;
  for (int n : lengths) ++counts[n];
  if (counts.size() < 5) throw std::invalid_argument("too few distinct lengths");
  const double total = static_cast<double>(lengths.size());
  std::vector<double> xs, ys;
  // Contiguous run of well-populated lengths from the smallest one; stopping
  // at the first sparse length avoids keeping only upward tail fluctuations.
  int expected = counts.begin()->first;
  for (const auto& [n, c] : counts) {
    if (c < 5 || n != expected++) break;
    xs.push_back(std::log(static_cast<double>(n)));
    ys.push_back(std::log(c / total));
  }
  if (xs.size() < 3) throw std::invalid_argument("too few lengths observed at least 5 times");
  const LinearFit fit = fit_linear(xs, ys);
  BetaEstimate e;
  e.method = BetaMethod::loglog_regression;
  e.beta = -fit.slope - 1.0;
  e.standard_error = fit.slope_se;
  e.samples = lengths.size();
  e.points_used = xs.size();
  return e;
}

// Normaliser of the zeta law over 2..n_max (or 2..inf) with s-derivatives.
ZetaWithDerivatives truncated_normaliser(double s, std::optional<int> n_max) {
  ZetaWithDerivatives z = hurwitz_zeta_derivatives(s, 2.0);
  if (n_max) {
    const ZetaWithDerivatives tail = hurwitz_zeta_derivatives(s, *n_max + 1.0);
    z.value -= tail.value;
    z.d_ds -= tail.d_ds;
    z.d2_ds2 -= tail.d2_ds2;
  }
  return z;
}

BetaEstimate mle_estimate(std::span<const int> lengths, std::optional<int> n_max) {
  const int max_len = *std::max_element(lengths.begin(), lengths.end());
  const int min_len = *std::min_element(lengths.begin(), lengths.end());
  if (min_len == max_len) throw std::invalid_argument("too few distinct lengths");
  if (n_max && *n_max < max_len) throw std::invalid_argument("length above n_max");

  long double sum_log = 0.0L;
  for (int n : lengths) sum_log += std::log(static_cast<double>(n));
  const double k = static_cast<double>(lengths.size());
  const double mean_log = static_cast<double>(sum_log / k);

  // score(s) = E_s[log N] - mean_log, strictly decreasing in s.
  auto score = [&](double s, double* slope) {
    const auto z = truncated_normaliser(s, n_max);
    const double m1 = -z.d_ds / z.value;
    if (slope) *slope = -(z.d2_ds2 / z.value - m1 * m1);
    return m1 - mean_log;
  };

  double lo = 1.0 + 1e-6, hi = 60.0;
  if (score(lo, nullptr) < 0.0) throw std::invalid_argument("MLE: beta below estimable range");
  if (score(hi, nullptr) > 0.0) throw std::invalid_argument("MLE: beta above estimable range");
  double s = 2.5;
  for (int it = 0; it < 200; ++it) {
    double slope = 0.0;
    const double g = score(s, &slope);
    if (g > 0.0) lo = s;
    else hi = s;
    double next = s - g / slope;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - s) < 1e-13 * s) {
      s = next;
      break;
    }
    s = next;
  }
  double slope = 0.0;
  score(s, &slope);
  BetaEstimate e;
  e.method = BetaMethod::mle;
  e.beta = s - 1.0;
  e.standard_error = 1.0 / std::sqrt(k * -slope);
  e.samples = lengths.size();
  return e;
}

}  // namespace

BetaEstimate estimate_beta(std::span<const int> lengths, BetaMethod method, std::optional<int> n_max) {
  if (lengths.empty()) throw std::invalid_argument("estimate_beta: empty input");
  for (int n : lengths) {
    if (n < 2) throw std::invalid_argument("estimate_beta: lengths must be >= 2");
  }
  return method == BetaMethod::mle ? mle_estimate(lengths, n_max) : regression_estimate(lengths);
}

// ------------------------------------------------------------------ sampler

namespace {
constexpr int kTableLengths = 4096;
constexpr int kMaxLength = 1'000'000'000;
}  // namespace

ZetaLengthSampler::ZetaLengthSampler(double beta, std::optional<int> n_max) : beta_(beta), n_max_(n_max) {
  if (!(beta > 0.0)) throw std::invalid_argument("ZetaLengthSampler: beta > 0 required");
  if (n_max && *n_max < 2) throw std::invalid_argument("ZetaLengthSampler: n_max >= 2 required");
  const double s = 1.0 + beta;
  norm_ = hurwitz_zeta(s, 2.0);
  if (n_max) norm_ -= hurwitz_zeta(s, *n_max + 1.0);

  const int last = n_max ? std::min(*n_max, kTableLengths + 1) : kTableLengths + 1;
  cdf_.reserve(last - 1);
  long double acc = 0.0L;
  for (int n = 2; n <= last; ++n) {
    acc += std::pow(static_cast<long double>(n), -static_cast<long double>(s));
    cdf_.push_back(static_cast<double>(acc / norm_));
  }
  if (n_max && last == *n_max) cdf_.back() = 1.0;
}

double ZetaLengthSampler::pmf(int n) const {
  if (n < 2 || (n_max_ && n > *n_max_)) return 0.0;
  return std::pow(static_cast<double>(n), -(1.0 + beta_)) / norm_;
}

double ZetaLengthSampler::survival(int n) const {
  if (n < 2) return 1.0;
  if (n_max_ && n >= *n_max_) return 0.0;
  const double s = 1.0 + beta_;
  double tail = hurwitz_zeta(s, n + 1.0);
  if (n_max_) tail -= hurwitz_zeta(s, *n_max_ + 1.0);
  return tail / norm_;
}

int ZetaLengthSampler::quantile(double u) const {
  if (!(u >= 0.0 && u < 1.0)) {
    if (u >= 1.0) u = std::nextafter(1.0, 0.0);
    else throw std::invalid_argument("quantile: u must lie in [0, 1)");
  }
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  if (it != cdf_.end()) return static_cast<int>(it - cdf_.begin()) + 2;

  // Tail beyond the table: smallest n with survival(n) < 1 - u.
  const int first = static_cast<int>(cdf_.size()) + 2;
  const double r = 1.0 - u;
  const double s = 1.0 + beta_;
  const double guess = std::pow(r * norm_ * (s - 1.0), -1.0 / (s - 1.0)) - 0.5;
  const int upper = n_max_ ? *n_max_ : kMaxLength;
  int n = static_cast<int>(std::clamp(std::ceil(guess), static_cast<double>(first), static_cast<double>(upper)));
  while (n < upper && survival(n) >= r) ++n;
  while (n > first && survival(n - 1) < r) --n;
  return n;
}

}  // namespace mimpact
