#include "mimpact/impact_engine.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <functional>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "mimpact/regression.hpp"
#include "mimpact/text.hpp"

namespace mimpact {

double return_proxy(double p_t, double p_t0) {
  if (!(p_t0 > 0.0)) throw std::invalid_argument("return_proxy: reference price must be > 0");
  return (p_t - p_t0) / p_t0;
}

namespace {

// Last quote with timestamp <= t (or < t when strict).
const Quote* quote_asof(const TradeTape& tape, TimestampMs t, bool strict) {
  auto cmp = [](TimestampMs v, const Quote& q) { return v < q.timestamp_ms; };
  auto cmp_strict = [](TimestampMs v, const Quote& q) { return v <= q.timestamp_ms; };
  auto it = strict ? std::upper_bound(tape.quotes.begin(), tape.quotes.end(), t, cmp_strict)
                   : std::upper_bound(tape.quotes.begin(), tape.quotes.end(), t, cmp);
  return it == tape.quotes.begin() ? nullptr : &*std::prev(it);
}

const TapeTrade* trade_asof(const TradeTape& tape, TimestampMs t, bool strict) {
  auto cmp = [](TimestampMs v, const TapeTrade& q) { return v < q.timestamp_ms; };
  auto cmp_strict = [](TimestampMs v, const TapeTrade& q) { return v <= q.timestamp_ms; };
  auto it = strict ? std::upper_bound(tape.trades.begin(), tape.trades.end(), t, cmp_strict)
                   : std::upper_bound(tape.trades.begin(), tape.trades.end(), t, cmp);
  return it == tape.trades.begin() ? nullptr : &*std::prev(it);
}

std::vector<std::size_t> stable_order(std::span<const double> xs) {
  std::vector<std::size_t> order(xs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
  return order;
}

}  // namespace

ImpactPath signed_impact_path(const Metaorder& metaorder, const TradeTape& tape, const PathOptions& options) {
  if (tape.instrument_id != metaorder.instrument_id() || tape.day != metaorder.day()) {
    throw InvariantViolation("tape does not match metaorder instrument/day");
  }
  if (options.relaxation_points < 1) throw std::invalid_argument("relaxation_points must be >= 1");

  ImpactPath path;
  path.length = metaorder.length();
  path.sign = metaorder.sign();
  const TimestampMs t0 = metaorder.start_ms();
  const TimestampMs t_end = metaorder.end_ms();
  const TimestampMs span = metaorder.duration_ms();

  if (const Quote* q = quote_asof(tape, t0, true)) {
    path.reference_price = q->mid();
  } else if (const TapeTrade* tr = trade_asof(tape, t0, true)) {
    path.reference_price = tr->price.to_double();
  } else {
    path.reference_price = metaorder.fills().front().price();
  }
  const double p0 = path.reference_price;
  const double eps = path.sign;

  const double total = static_cast<double>(metaorder.size());
  Quantity cum = 0;
  path.execution.reserve(metaorder.fills().size());
  for (const auto& f : metaorder.fills()) {
    cum += f.quantity;
    path.execution.push_back({static_cast<double>(cum) / total, eps * return_proxy(f.price(), p0)});
  }

  if (tape.has_quotes()) {
    if (const Quote* q = quote_asof(tape, t_end, false)) path.seam_mid = eps * return_proxy(q->mid(), p0);
  }

  const auto last = tape.last_timestamp();
  if (!last || *last < t_end + span) {
    path.relaxation_truncated = true;
    return path;
  }

  const int m = options.relaxation_points;
  path.relaxation.reserve(m);
  path.relaxation_proxy = !tape.has_quotes();
  double price = metaorder.fills().back().price();
  for (int j = 1; j <= m; ++j) {
    const TimestampMs tau = t_end + span * j / m;
    const Quote* q = tape.has_quotes() ? quote_asof(tape, tau, false) : nullptr;
    if (q) {
      price = q->mid();
    } else {
      path.relaxation_proxy = true;
      if (const TapeTrade* tr = trade_asof(tape, tau, false)) price = tr->price.to_double();
    }
    path.relaxation.push_back({1.0 + static_cast<double>(j) / m, eps * return_proxy(price, p0)});
  }
  path.final_price = price;
  return path;
}

PathSet compute_impact_paths_serial(std::span<const Metaorder> metaorders, const TapeSet& tapes,
                                    const PathOptions& options) {
  PathSet out;
  out.paths.reserve(metaorders.size());
  for (std::size_t i = 0; i < metaorders.size(); ++i) {
    const auto& m = metaorders[i];
    auto it = tapes.find(TapeKey{m.instrument_id(), m.day()});
    if (it == tapes.end()) {
      ++out.missing_tape;
      continue;
    }
    out.paths.push_back(signed_impact_path(m, it->second, options));
    out.paths.back().source = i;
  }
  return out;
}

PathSet compute_impact_paths(std::span<const Metaorder> metaorders, const TapeSet& tapes,
                             const PathOptions& options) {
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(metaorders.size());
  std::vector<std::optional<ImpactPath>> slots(metaorders.size());
  std::exception_ptr error;

#pragma omp parallel for schedule(dynamic, 256)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      const auto& m = metaorders[i];
      auto it = tapes.find(TapeKey{m.instrument_id(), m.day()});
      if (it != tapes.end()) {
        slots[i] = signed_impact_path(m, it->second, options);
        slots[i]->source = static_cast<std::size_t>(i);
      }
    } catch (...) {
#pragma omp critical(mimpact_path_error)
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);

  PathSet out;
  out.paths.reserve(metaorders.size());
  for (auto& s : slots) {
    if (s) out.paths.push_back(std::move(*s));
    else ++out.missing_tape;
  }
  return out;
}

std::vector<std::pair<std::size_t, std::size_t>> bucket_ranges(std::size_t size, std::size_t n) {
  if (n == 0) throw std::invalid_argument("bucket count must be positive");
  if (size < n) throw std::invalid_argument("fewer points than buckets");
  std::vector<std::pair<std::size_t, std::size_t>> out;
  out.reserve(n);
  const std::size_t base = size / n, extra = size % n;
  std::size_t begin = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t len = base + (k < extra ? 1 : 0);
    out.emplace_back(begin, begin + len);
    begin += len;
  }
  return out;
}

std::vector<BucketPoint> bucket_average(std::span<const double> xs, std::span<const double> ys,
                                        std::size_t n_buckets) {
  if (xs.size() != ys.size()) throw std::invalid_argument("bucket_average: |xs| != |ys|");
  const auto ranges = bucket_ranges(xs.size(), n_buckets);
  const auto order = stable_order(xs);
  std::vector<BucketPoint> out;
  out.reserve(n_buckets);
  for (const auto& [b, e] : ranges) {
    double sx = 0.0, sy = 0.0;
    for (std::size_t k = b; k < e; ++k) {
      sx += xs[order[k]];
      sy += ys[order[k]];
    }
    const double c = static_cast<double>(e - b);
    out.push_back({sx / c, sy / c, e - b});
  }
  return out;
}

PowerLawFit fit_power_law(std::span<const double> xs, std::span<const double> ys, FitMethod method) {
  if (xs.size() != ys.size()) throw std::invalid_argument("fit_power_law: |xs| != |ys|");
  if (xs.size() < 3) throw std::invalid_argument("fit_power_law: need at least 3 points");
  std::vector<double> lx(xs.size()), ly(ys.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!(xs[i] > 0.0) || !(ys[i] > 0.0)) {
      throw std::invalid_argument("fit_power_law: coordinates must be > 0");
    }
    lx[i] = std::log(xs[i]);
    ly[i] = std::log(ys[i]);
  }
  const LinearFit lin = fit_linear(lx, ly);
  double a = std::exp(lin.intercept), b = lin.slope;

  if (method == FitMethod::nonlinear) {
    auto sse = [&](double pa, double pb) {
      double s = 0.0;
      for (std::size_t i = 0; i < xs.size(); ++i) {
        const double r = ys[i] - pa * std::pow(xs[i], pb);
        s += r * r;
      }
      return s;
    };
    double lambda = 1e-3;
    double current = sse(a, b);
    for (int it = 0; it < 200; ++it) {
      double jtj00 = 0, jtj01 = 0, jtj11 = 0, g0 = 0, g1 = 0;
      for (std::size_t i = 0; i < xs.size(); ++i) {
        const double p = std::pow(xs[i], b);
        const double r = ys[i] - a * p;
        const double ja = p, jb = a * p * lx[i];
        jtj00 += ja * ja;
        jtj01 += ja * jb;
        jtj11 += jb * jb;
        g0 += ja * r;
        g1 += jb * r;
      }
      const double d00 = jtj00 * (1 + lambda), d11 = jtj11 * (1 + lambda);
      const double det = d00 * d11 - jtj01 * jtj01;
      if (!(std::abs(det) > 0.0)) break;
      const double da = (d11 * g0 - jtj01 * g1) / det;
      const double db = (d00 * g1 - jtj01 * g0) / det;
      const double trial = sse(a + da, b + db);
      if (trial < current && a + da > 0.0) {
        const bool converged = std::abs(da) < 1e-14 * a && std::abs(db) < 1e-14 * (1 + std::abs(b));
        a += da;
        b += db;
        current = trial;
        lambda *= 0.3;
        if (converged) break;
      } else {
        lambda *= 10.0;
        if (lambda > 1e12) break;
      }
    }
  }

  PowerLawFit fit;
  fit.prefactor = a;
  fit.exponent = b;
  fit.point_count = xs.size();
  double s = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ly[i] - std::log(a) - b * lx[i];
    s += r * r;
  }
  fit.residual = std::sqrt(s / xs.size());
  return fit;
}

ImpactCurve impact_dynamics(std::span<const ImpactPath> paths, const DynamicsOptions& options) {
  if (paths.empty()) throw std::invalid_argument("impact_dynamics: no metaorders");
  if (options.n_buckets == 0) throw std::invalid_argument("impact_dynamics: n_buckets must be positive");

  std::vector<double> xs, ys;
  std::vector<int> lengths;
  std::vector<double> rx, ry;
  std::size_t grid = 0;
  double seam_sum = 0.0, mid_sum = 0.0;
  std::size_t mid_count = 0;
  bool proxy = false;
  for (const auto& p : paths) {
    for (const auto& pt : p.execution) {
      xs.push_back(pt.rescaled_time);
      ys.push_back(pt.signed_impact);
      lengths.push_back(p.length);
    }
    if (!p.execution.empty()) seam_sum += p.execution.back().signed_impact;
    if (p.seam_mid) {
      mid_sum += *p.seam_mid;
      ++mid_count;
    }
    for (const auto& pt : p.relaxation) {
      rx.push_back(pt.rescaled_time);
      ry.push_back(pt.signed_impact);
    }
    grid = std::max(grid, p.relaxation.size());
    proxy = proxy || (!p.relaxation.empty() && p.relaxation_proxy);
  }
  if (xs.size() < options.n_buckets) {
    throw std::invalid_argument("n_buckets (" + std::to_string(options.n_buckets) +
                                ") exceeds execution point count (" + std::to_string(xs.size()) + ")");
  }

  ImpactCurve curve;
  const auto order = stable_order(xs);
  const auto ranges = bucket_ranges(xs.size(), options.n_buckets);
  for (const auto& [b, e] : ranges) {
    double sx = 0.0, sy = 0.0;
    for (std::size_t k = b; k < e; ++k) {
      sx += xs[order[k]];
      sy += ys[order[k]];
    }
    const double c = static_cast<double>(e - b);
    curve.points.push_back({sx / c, sy / c, e - b, Phase::execution});
  }
  {
    const auto [b, e] = ranges.back();
    std::size_t short_ones = 0;
    for (std::size_t k = b; k < e; ++k) short_ones += lengths[order[k]] == 2;
    curve.terminal_artifact = 2 * short_ones > (e - b);
  }

  if (!rx.empty()) {
    const std::size_t n_rel = std::min({options.n_buckets, grid, rx.size()});
    for (const auto& bp : bucket_average(rx, ry, n_rel)) {
      curve.points.push_back({bp.x, bp.y, bp.count, Phase::relaxation});
    }
    curve.relaxation_proxy = proxy;
  }
  curve.seam_execution = seam_sum / static_cast<double>(paths.size());
  if (mid_count > 0) curve.seam_mid = mid_sum / static_cast<double>(mid_count);
  curve.check_invariants();
  return curve;
}

double temporary_impact(const ImpactCurve& curve) {
  const auto exec = curve.phase_points(Phase::execution);
  if (exec.empty()) throw std::invalid_argument("temporary_impact: no execution points");
  if (curve.terminal_artifact && exec.size() >= 2) return exec[exec.size() - 2].mean_signed_impact;
  return exec.back().mean_signed_impact;
}

double permanent_impact(const ImpactCurve& curve) {
  const auto rel = curve.phase_points(Phase::relaxation);
  if (rel.empty()) throw std::invalid_argument("permanent_impact: no relaxation points");
  return rel.back().mean_signed_impact;
}

double vwap(const Metaorder& metaorder) {
  __int128 notional = 0;
  for (const auto& f : metaorder.fills()) notional += f.notional_ticks;
  return static_cast<double>(notional) / static_cast<double>(metaorder.size()) /
         static_cast<double>(Price::kScale);
}

SqrtLawAnalysis square_root_analysis(std::span<const Metaorder> metaorders, std::span<const ImpactPath> paths) {
  SqrtLawAnalysis out;
  std::vector<double> qv, imp, dur;
  for (const auto& p : paths) {
    if (p.source >= metaorders.size()) throw std::out_of_range("path source outside metaorder range");
    const auto& m = metaorders[p.source];
    const auto participation = m.participation();
    if (!participation) throw InvariantViolation("square_root_analysis: metaorder lacks market volume");
    if (p.execution.empty()) continue;
    const SqrtLawPoint pt{*participation, p.execution.back().signed_impact, m.duration_s()};
    out.scatter.push_back(pt);
    if (pt.impact > 0.0) {
      qv.push_back(pt.participation);
      imp.push_back(pt.impact);
      dur.push_back(pt.duration_s);
    } else {
      ++out.excluded_nonpositive;
    }
  }
  if (qv.size() < 10) throw std::invalid_argument("square_root_analysis: fewer than 10 metaorders");

  out.participation_fit = fit_power_law(qv, imp);
  const std::size_t n = qv.size();
  std::vector<double> lq(n), li(n), lt(n);
  for (std::size_t i = 0; i < n; ++i) {
    lq[i] = std::log(qv[i]);
    li[i] = std::log(imp[i]);
    lt[i] = std::log(dur[i]);
  }
  // Partial regression: residualise both log impact and log T on log(Q/V).
  const LinearFit on_impact = fit_linear(lq, li);
  const LinearFit on_duration = fit_linear(lq, lt);
  std::vector<double> ri(n), rt(n);
  for (std::size_t i = 0; i < n; ++i) {
    ri[i] = li[i] - on_impact.intercept - on_impact.slope * lq[i];
    rt[i] = lt[i] - on_duration.intercept - on_duration.slope * lq[i];
  }
  const LinearFit partial = fit_linear(rt, ri);
  out.duration_coefficient = partial.slope;
  out.duration_coefficient_se =
      n > 3 ? partial.slope_se * std::sqrt(static_cast<double>(n - 2) / static_cast<double>(n - 3)) : 0.0;

  const auto order = stable_order(dur);
  for (const auto& [b, e] : bucket_ranges(n, 3)) {
    double mean = 0.0;
    for (std::size_t k = b; k < e; ++k) mean += ri[order[k]];
    mean /= static_cast<double>(e - b);
    double ss = 0.0;
    for (std::size_t k = b; k < e; ++k) ss += (ri[order[k]] - mean) * (ri[order[k]] - mean);
    out.dispersion.push_back({dur[order[b]], dur[order[e - 1]],
                              e - b > 1 ? std::sqrt(ss / static_cast<double>(e - b - 1)) : 0.0, e - b});
  }
  return out;
}

FairPricingReport fair_pricing_check(std::span<const Metaorder> metaorders, std::span<const ImpactPath> paths) {
  FairPricingReport out;
  std::vector<double> xs, ys;
  double sq = 0.0;
  for (const auto& p : paths) {
    if (p.source >= metaorders.size()) throw std::out_of_range("path source outside metaorder range");
    if (!p.final_price) {
      ++out.excluded_truncated;
      continue;
    }
    const double x = vwap(metaorders[p.source]) / p.reference_price;
    const double y = *p.final_price / p.reference_price;
    out.points.push_back({p.source, x, y});
    xs.push_back(x);
    ys.push_back(y);
    sq += 0.5 * (y - x) * (y - x);
    out.max_abs_deviation = std::max(out.max_abs_deviation, std::abs(y - x));
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  out.slope = out.intercept = nan;
  if (!xs.empty()) out.rms_distance = std::sqrt(sq / static_cast<double>(xs.size()));
  if (xs.size() >= 2 && std::adjacent_find(xs.begin(), xs.end(), std::not_equal_to<>()) != xs.end()) {
    const LinearFit fit = fit_linear(xs, ys);
    out.slope = fit.slope;
    out.intercept = fit.intercept;
  }
  return out;
}

// ----------------------------------------------------------------- writers

void write_curve(std::ostream& out, const ImpactCurve& curve) {
  out << "phase,rescaled_time,mean_signed_impact,count\n";
  for (const auto& p : curve.points) {
    out << (p.phase == Phase::execution ? "execution" : "relaxation") << ',' << text::fmt(p.rescaled_time)
        << ',' << text::fmt(p.mean_signed_impact) << ',' << p.count << '\n';
  }
}

void write_power_law_fit(std::ostream& out, const PowerLawFit& fit) {
  out << "prefactor,exponent,residual,point_count\n"
      << text::fmt(fit.prefactor) << ',' << text::fmt(fit.exponent) << ',' << text::fmt(fit.residual) << ','
      << fit.point_count << '\n';
}

void write_sqrt_law(std::ostream& out, const SqrtLawAnalysis& analysis) {
  out << "participation,impact,duration_s\n";
  for (const auto& p : analysis.scatter) {
    out << text::fmt(p.participation) << ',' << text::fmt(p.impact) << ',' << text::fmt(p.duration_s) << '\n';
  }
}

void write_fair_pricing(std::ostream& out, std::span<const Metaorder> metaorders,
                        const FairPricingReport& report) {
  out << "agent,instrument,day,sign,one_plus_r_vwap,one_plus_r_final\n";
  for (const auto& p : report.points) {
    const auto& m = metaorders[p.source];
    out << m.agent_id() << ',' << m.instrument_id() << ',' << m.day().to_string() << ',' << m.sign() << ','
        << text::fmt(p.one_plus_r_vwap) << ',' << text::fmt(p.one_plus_r_final) << '\n';
  }
}

}  // namespace mimpact
