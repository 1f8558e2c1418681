#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace mimpact {

/// Milliseconds since the Unix epoch, UTC.
using TimestampMs = std::int64_t;

/// Share counts are integral; fractional quantities are rejected at ingestion.
using Quantity = std::int64_t;

enum class Side { buy, sell };
enum class OrderClass { aggressive_limit, passive_limit, other };

/// +1 for a buy, -1 for a sell.
constexpr int sign_of(Side side) noexcept { return side == Side::buy ? 1 : -1; }

std::string_view to_string(Side side) noexcept;
std::string_view to_string(OrderClass cls) noexcept;
std::optional<Side> parse_side(std::string_view text) noexcept;
std::optional<OrderClass> parse_order_class(std::string_view text) noexcept;

/// Raised when a domain invariant is broken by a caller.
class InvariantViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Exact decimal price stored as an integer number of 1e-8 units.
///
/// The number of decimals written in the source text is retained so that a
/// parsed value prints back exactly as it was read. Comparison uses the value
/// only.
class Price {
 public:
  static constexpr int kMaxDecimals = 8;
  static constexpr std::int64_t kScale = 100'000'000;

  constexpr Price() = default;

  static std::optional<Price> parse(std::string_view text) noexcept;
  /// Rounds to the nearest 1e-8 (half away from zero).
  static Price from_double(double value, int decimals = kMaxDecimals);
  static constexpr Price from_ticks(std::int64_t ticks, int decimals = kMaxDecimals) {
    Price p;
    p.ticks_ = ticks;
    p.decimals_ = static_cast<std::uint8_t>(decimals);
    return p;
  }

  constexpr std::int64_t ticks() const noexcept { return ticks_; }
  constexpr int decimals() const noexcept { return decimals_; }
  double to_double() const noexcept { return static_cast<double>(ticks_) / kScale; }
  std::string to_string() const;

  friend constexpr bool operator==(const Price& a, const Price& b) noexcept {
    return a.ticks_ == b.ticks_;
  }
  friend constexpr auto operator<=>(const Price& a, const Price& b) noexcept {
    return a.ticks_ <=> b.ticks_;
  }

 private:
  std::int64_t ticks_ = 0;
  std::uint8_t decimals_ = 0;
};

/// Calendar date in the exchange timezone, counted in days since 1970-01-01.
struct TradingDay {
  std::int32_t days_since_epoch = 0;

  std::string to_string() const;  // YYYY-MM-DD
  static std::optional<TradingDay> parse(std::string_view text) noexcept;

  friend constexpr auto operator<=>(const TradingDay&, const TradingDay&) = default;
};

struct Fill {
  TimestampMs timestamp_ms = 0;
  std::string agent_id;
  std::string instrument_id;
  std::string venue_id;
  Side side = Side::buy;
  Price price;
  Quantity quantity = 0;
  OrderClass order_class = OrderClass::other;
  TradingDay day;

  friend bool operator==(const Fill&, const Fill&) = default;
};

/// Fields of one order-log line before validation.
struct RawFill {
  std::string timestamp_ms;
  std::string agent_id;
  std::string instrument_id;
  std::string venue_id;
  std::string side;
  std::string price;
  std::string quantity;
  std::string order_class;
};

/// Names the invariant a candidate record violated.
struct Rejection {
  std::string reason;
};

class ExchangeCalendar;

/// Either a valid Fill or the reason it was refused.
using FillOrRejection = std::variant<Fill, Rejection>;

FillOrRejection validate_fill(const RawFill& candidate, const ExchangeCalendar& calendar);

/// One execution after same-second aggregation.
///
/// `notional_ticks` is the exact sum of quantity * price-ticks of the source
/// fills, so the merged price is the exact local VWAP.
struct MergedFill {
  TimestampMs timestamp_ms = 0;
  Quantity quantity = 0;
  __int128 notional_ticks = 0;
  int source_count = 1;

  static MergedFill from(const Fill& fill) {
    return {fill.timestamp_ms, fill.quantity,
            static_cast<__int128>(fill.quantity) * fill.price.ticks(), 1};
  }
  double price() const noexcept {
    return static_cast<double>(notional_ticks) / static_cast<double>(quantity) /
           static_cast<double>(Price::kScale);
  }

  friend bool operator==(const MergedFill&, const MergedFill&) = default;
};

/// Grouping key of a metaorder: agent, instrument, direction, day.
struct MetaorderKey {
  std::string agent_id;
  std::string instrument_id;
  Side side = Side::buy;
  TradingDay day;

  friend auto operator<=>(const MetaorderKey& a, const MetaorderKey& b) {
    if (auto c = a.day <=> b.day; c != 0) return c;
    if (auto c = a.instrument_id <=> b.instrument_id; c != 0) return c;
    if (auto c = a.agent_id <=> b.agent_id; c != 0) return c;
    return a.side <=> b.side;
  }
  friend bool operator==(const MetaorderKey&, const MetaorderKey&) = default;
};

/// A reconstructed metaorder. Immutable once built through `create`.
class Metaorder {
 public:
  /// Validates every invariant; throws InvariantViolation naming the first
  /// violated one.
  static Metaorder create(MetaorderKey key, std::vector<MergedFill> fills);

  const MetaorderKey& key() const noexcept { return key_; }
  const std::string& agent_id() const noexcept { return key_.agent_id; }
  const std::string& instrument_id() const noexcept { return key_.instrument_id; }
  TradingDay day() const noexcept { return key_.day; }
  Side side() const noexcept { return key_.side; }
  int sign() const noexcept { return sign_of(key_.side); }

  const std::vector<MergedFill>& fills() const noexcept { return fills_; }
  TimestampMs start_ms() const noexcept { return fills_.front().timestamp_ms; }
  TimestampMs end_ms() const noexcept { return fills_.back().timestamp_ms; }
  TimestampMs duration_ms() const noexcept { return end_ms() - start_ms(); }
  double duration_s() const noexcept { return static_cast<double>(duration_ms()) / 1000.0; }
  int length() const noexcept { return static_cast<int>(fills_.size()); }
  Quantity size() const noexcept { return size_; }

  std::optional<Quantity> market_volume() const noexcept { return market_volume_; }
  /// Q/V; empty until enriched.
  std::optional<double> participation() const noexcept;

  /// Copy carrying the market volume V; requires 0 < Q <= V.
  Metaorder with_market_volume(Quantity volume) const;

 private:
  Metaorder() = default;

  MetaorderKey key_;
  std::vector<MergedFill> fills_;
  Quantity size_ = 0;
  std::optional<Quantity> market_volume_;
};

struct TapeTrade {
  TimestampMs timestamp_ms = 0;
  Price price;
  Quantity quantity = 0;
};

struct Quote {
  TimestampMs timestamp_ms = 0;
  Price best_bid;
  Price best_ask;

  double mid() const noexcept { return 0.5 * (best_bid.to_double() + best_ask.to_double()); }
};

/// Market-wide prints (and optionally quotes) of one instrument on one day.
struct TradeTape {
  std::string instrument_id;
  TradingDay day;
  std::vector<TapeTrade> trades;
  std::vector<Quote> quotes;

  bool has_quotes() const noexcept { return !quotes.empty(); }
  /// Last event time on the tape; nullopt when empty.
  std::optional<TimestampMs> last_timestamp() const noexcept;
  /// Throws InvariantViolation when trades are out of order or a quote is crossed.
  void check_invariants() const;
};

enum class Phase { execution, relaxation };

struct CurvePoint {
  double rescaled_time = 0.0;
  double mean_signed_impact = 0.0;
  std::size_t count = 0;
  Phase phase = Phase::execution;
};

/// Bucket-averaged signed impact in rescaled time: execution on [0,1],
/// relaxation on [1,2].
struct ImpactCurve {
  std::vector<CurvePoint> points;
  /// Last execution bucket dominated (>50%) by N=2 metaorders.
  bool terminal_artifact = false;
  /// Relaxation built from last-trade prices because quotes were missing.
  bool relaxation_proxy = false;
  /// Values on both sides of the execution/relaxation seam, when available:
  /// mean execution impact at completion, and mean mid-price impact at the
  /// same instant.
  std::optional<double> seam_execution;
  std::optional<double> seam_mid;

  std::vector<CurvePoint> phase_points(Phase phase) const;
  /// Throws InvariantViolation when ordering/range/count invariants fail.
  void check_invariants() const;
};

}  // namespace mimpact
