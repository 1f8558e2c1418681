#include "mimpact/core_types.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <limits>

#include "mimpact/calendar.hpp"

namespace mimpact {

namespace {

constexpr std::int64_t kPow10[] = {1,         10,         100,         1000,       10000,
                                   100000,    1000000,    10000000,    100000000};

template <class Int>
std::optional<Int> parse_int(std::string_view text) {
  Int value{};
  if (text.empty()) return std::nullopt;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end) return std::nullopt;
  return value;
}

}  // namespace

std::string_view to_string(Side side) noexcept { return side == Side::buy ? "buy" : "sell"; }

std::string_view to_string(OrderClass cls) noexcept {
  switch (cls) {
    case OrderClass::aggressive_limit: return "aggressive_limit";
    case OrderClass::passive_limit: return "passive_limit";
    case OrderClass::other: return "other";
  }
  return "other";
}

std::optional<Side> parse_side(std::string_view text) noexcept {
  if (text == "buy") return Side::buy;
  if (text == "sell") return Side::sell;
  return std::nullopt;
}

std::optional<OrderClass> parse_order_class(std::string_view text) noexcept {
  if (text == "aggressive_limit") return OrderClass::aggressive_limit;
  if (text == "passive_limit") return OrderClass::passive_limit;
  if (text == "other") return OrderClass::other;
  return std::nullopt;
}

// ---------------------------------------------------------------- Price

std::optional<Price> Price::parse(std::string_view text) noexcept {
  bool negative = false;
  if (!text.empty() && (text.front() == '-' || text.front() == '+')) {
    negative = text.front() == '-';
    text.remove_prefix(1);
  }
  const auto dot = text.find('.');
  const std::string_view whole = text.substr(0, dot);
  const std::string_view frac = dot == std::string_view::npos ? std::string_view{} : text.substr(dot + 1);
  if (whole.empty()) return std::nullopt;
  if (dot != std::string_view::npos && frac.empty()) return std::nullopt;
  if (frac.size() > static_cast<std::size_t>(kMaxDecimals)) return std::nullopt;
  if (!std::all_of(whole.begin(), whole.end(), [](char c) { return c >= '0' && c <= '9'; }) ||
      !std::all_of(frac.begin(), frac.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    return std::nullopt;
  }
  const auto w = parse_int<std::int64_t>(whole);
  if (!w || *w > std::numeric_limits<std::int64_t>::max() / kScale - 1) return std::nullopt;
  std::int64_t f = 0;
  if (!frac.empty()) {
    f = *parse_int<std::int64_t>(frac) * kPow10[kMaxDecimals - frac.size()];
  }
  std::int64_t ticks = *w * kScale + f;
  if (negative) ticks = -ticks;
  return Price::from_ticks(ticks, static_cast<int>(frac.size()));
}

Price Price::from_double(double value, int decimals) {
  if (!std::isfinite(value) || std::abs(value) > 9.0e10) {
    throw InvariantViolation("price out of representable range");
  }
  decimals = std::clamp(decimals, 0, kMaxDecimals);
  const double unit = static_cast<double>(kPow10[kMaxDecimals - decimals]);
  const double scaled = std::round(value * static_cast<double>(kScale) / unit) * unit;
  return Price::from_ticks(static_cast<std::int64_t>(scaled), decimals);
}

std::string Price::to_string() const {
  const bool negative = ticks_ < 0;
  const std::uint64_t mag =
      negative ? static_cast<std::uint64_t>(-(ticks_ + 1)) + 1 : static_cast<std::uint64_t>(ticks_);
  const std::uint64_t whole = mag / kScale;
  std::uint64_t frac = mag % kScale;
  int decimals = decimals_;
  // Values produced by arithmetic may carry more digits than were declared.
  while (decimals < kMaxDecimals && frac % static_cast<std::uint64_t>(kPow10[kMaxDecimals - decimals]) != 0) {
    ++decimals;
  }
  std::string out = negative ? "-" : "";
  out += std::to_string(whole);
  if (decimals > 0) {
    frac /= static_cast<std::uint64_t>(kPow10[kMaxDecimals - decimals]);
    std::string digits = std::to_string(frac);
    out += '.';
    out.append(static_cast<std::size_t>(decimals) - digits.size(), '0');
    out += digits;
  }
  return out;
}

// ---------------------------------------------------------- TradingDay

std::string TradingDay::to_string() const {
  using namespace std::chrono;
  const year_month_day ymd{sys_days{days{days_since_epoch}}};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

std::optional<TradingDay> TradingDay::parse(std::string_view text) noexcept {
  using namespace std::chrono;
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
  const auto y = parse_int<int>(text.substr(0, 4));
  const auto m = parse_int<unsigned>(text.substr(5, 2));
  const auto d = parse_int<unsigned>(text.substr(8, 2));
  if (!y || !m || !d) return std::nullopt;
  const year_month_day ymd{year{*y}, month{*m}, day{*d}};
  if (!ymd.ok()) return std::nullopt;
  return TradingDay{static_cast<std::int32_t>(sys_days{ymd}.time_since_epoch().count())};
}

// -------------------------------------------------------- validate_fill

FillOrRejection validate_fill(const RawFill& raw, const ExchangeCalendar& calendar) {
  const auto ts = parse_int<std::int64_t>(raw.timestamp_ms);
  if (!ts || *ts < 0) return Rejection{"malformed timestamp"};
  if (raw.agent_id.empty()) return Rejection{"agent_id must not be empty"};
  if (raw.instrument_id.empty()) return Rejection{"instrument_id must not be empty"};
  const auto side = parse_side(raw.side);
  if (!side) return Rejection{"unknown side '" + raw.side + "'"};
  const auto price = Price::parse(raw.price);
  if (!price) return Rejection{"malformed price '" + raw.price + "'"};
  if (price->ticks() <= 0) return Rejection{"price > 0 violated"};
  if (raw.quantity.find('.') != std::string::npos) return Rejection{"fractional quantity rejected"};
  const auto qty = parse_int<Quantity>(raw.quantity);
  if (!qty) return Rejection{"malformed quantity '" + raw.quantity + "'"};
  if (*qty <= 0) return Rejection{"quantity > 0 violated"};
  const auto cls = parse_order_class(raw.order_class);
  if (!cls) return Rejection{"unknown order_class '" + raw.order_class + "'"};

  Fill fill;
  fill.timestamp_ms = *ts;
  fill.agent_id = raw.agent_id;
  fill.instrument_id = raw.instrument_id;
  fill.venue_id = raw.venue_id;
  fill.side = *side;
  fill.price = *price;
  fill.quantity = *qty;
  fill.order_class = *cls;
  fill.day = calendar.day_of(*ts);
  return fill;
}

// ------------------------------------------------------------ Metaorder

Metaorder Metaorder::create(MetaorderKey key, std::vector<MergedFill> fills) {
  if (fills.size() < 2) throw InvariantViolation("N >= 2 violated");
  Quantity total = 0;
  for (std::size_t i = 0; i < fills.size(); ++i) {
    const auto& f = fills[i];
    if (f.quantity <= 0) throw InvariantViolation("quantity > 0 violated");
    if (f.notional_ticks <= 0) throw InvariantViolation("price > 0 violated");
    if (i > 0 && f.timestamp_ms < fills[i - 1].timestamp_ms) {
      throw InvariantViolation("fill timestamps non-decreasing violated");
    }
    total += f.quantity;
  }
  if (fills.back().timestamp_ms == fills.front().timestamp_ms) {
    throw InvariantViolation("T > 0 violated");
  }
  Metaorder m;
  m.key_ = std::move(key);
  m.fills_ = std::move(fills);
  m.size_ = total;
  return m;
}

std::optional<double> Metaorder::participation() const noexcept {
  if (!market_volume_) return std::nullopt;
  return static_cast<double>(size_) / static_cast<double>(*market_volume_);
}

Metaorder Metaorder::with_market_volume(Quantity volume) const {
  if (volume < size_) throw InvariantViolation("Q <= V violated");
  Metaorder m = *this;
  m.market_volume_ = volume;
  return m;
}

// ------------------------------------------------------------ TradeTape

std::optional<TimestampMs> TradeTape::last_timestamp() const noexcept {
  std::optional<TimestampMs> last;
  if (!trades.empty()) last = trades.back().timestamp_ms;
  if (!quotes.empty()) last = std::max(last.value_or(quotes.back().timestamp_ms), quotes.back().timestamp_ms);
  return last;
}

void TradeTape::check_invariants() const {
  for (std::size_t i = 1; i < trades.size(); ++i) {
    if (trades[i].timestamp_ms < trades[i - 1].timestamp_ms) {
      throw InvariantViolation("trades non-decreasing in time violated");
    }
  }
  for (std::size_t i = 0; i < quotes.size(); ++i) {
    if (!(quotes[i].best_bid < quotes[i].best_ask)) throw InvariantViolation("best_bid < best_ask violated");
    if (i > 0 && quotes[i].timestamp_ms < quotes[i - 1].timestamp_ms) {
      throw InvariantViolation("quotes non-decreasing in time violated");
    }
  }
}

// ---------------------------------------------------------- ImpactCurve

std::vector<CurvePoint> ImpactCurve::phase_points(Phase phase) const {
  std::vector<CurvePoint> out;
  std::copy_if(points.begin(), points.end(), std::back_inserter(out),
               [phase](const CurvePoint& p) { return p.phase == phase; });
  return out;
}

void ImpactCurve::check_invariants() const {
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    if (p.count == 0) throw InvariantViolation("count > 0 violated");
    if (p.phase == Phase::execution && (p.rescaled_time < 0.0 || p.rescaled_time > 1.0)) {
      throw InvariantViolation("execution points in [0,1] violated");
    }
    if (p.phase == Phase::relaxation && (p.rescaled_time < 1.0 || p.rescaled_time > 2.0)) {
      throw InvariantViolation("relaxation points in [1,2] violated");
    }
    if (i > 0 && p.rescaled_time < points[i - 1].rescaled_time) {
      throw InvariantViolation("rescaled_time non-decreasing violated");
    }
  }
}

}  // namespace mimpact
