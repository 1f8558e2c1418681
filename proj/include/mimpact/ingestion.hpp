#pragma once

#include <functional>
#include <iosfwd>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mimpact/calendar.hpp"
#include "mimpact/core_types.hpp"

namespace mimpact {

inline constexpr const char* kOrderLogHeader =
    "timestamp_ms,agent_id,instrument_id,venue_id,side,price,quantity,order_class";
inline constexpr const char* kTapeHeader = "timestamp_ms,instrument_id,price,quantity";
inline constexpr const char* kTapeHeaderWithQuotes =
    "timestamp_ms,instrument_id,price,quantity,best_bid,best_ask";

/// Fatal input problem: unreadable stream or bad header.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One refused input line. Line numbers are physical (the header is line 1).
struct LineRejection {
  std::size_t line = 0;
  std::string reason;
};

using RejectionReport = std::vector<LineRejection>;

struct OrderLog {
  std::vector<Fill> fills;
  RejectionReport rejections;
};

/// Single pass over an order log; calls `on_fill` for each valid line in file
/// order and appends malformed lines to `rejections`.
void stream_order_log(std::istream& source, const ExchangeCalendar& calendar,
                      const std::function<void(Fill&&)>& on_fill, RejectionReport& rejections);

OrderLog parse_order_log(std::istream& source, const ExchangeCalendar& calendar);

struct TapeKey {
  std::string instrument_id;
  TradingDay day;
  friend auto operator<=>(const TapeKey&, const TapeKey&) = default;
};

using TapeSet = std::map<TapeKey, TradeTape>;

struct MarketTape {
  TapeSet tapes;
  RejectionReport rejections;
};

/// Partitions a market tape by (instrument, day); each tape is time-sorted.
MarketTape parse_market_tape(std::istream& source, const ExchangeCalendar& calendar);

/// Replaces fills sharing a whole second (floor(ms/1000)) by one fill carrying
/// the summed quantity, the exact local VWAP and the last timestamp.
/// Throws InvariantViolation on unsorted input.
std::vector<MergedFill> aggregate_same_second(std::span<const MergedFill> fills);
/// Same, for raw fills of a single (agent, instrument, side, day) candidate.
std::vector<MergedFill> aggregate_same_second(std::span<const Fill> fills);

// ----------------------------------------------------------------- writers

void write_order_log(std::ostream& out, std::span<const Fill> fills);
void write_order_log_header(std::ostream& out);
void write_fill(std::ostream& out, const Fill& fill);

/// One tape line; `quote` empty leaves the quote columns blank.
struct TapeRow {
  TimestampMs timestamp_ms = 0;
  std::string instrument_id;
  Price price;
  Quantity quantity = 0;
  std::optional<std::pair<Price, Price>> quote;
};

void write_tape_header(std::ostream& out, bool with_quotes);
void write_tape_row(std::ostream& out, const TapeRow& row, bool with_quotes);

void write_rejections(std::ostream& out, const RejectionReport& report);

}  // namespace mimpact
