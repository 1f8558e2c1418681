#include "mimpact/ingestion.hpp"

#include <algorithm>
#include <istream>
#include <ostream>

#include "mimpact/text.hpp"

namespace mimpact {

namespace {

std::string read_header(std::istream& source, std::size_t& line_no) {
  if (!source) throw ParseError("unreadable source");
  std::string header;
  if (!std::getline(source, header)) throw ParseError("missing header");
  ++line_no;
  if (!header.empty() && header.back() == '\r') header.pop_back();
  // Tolerate a UTF-8 byte order mark.
  if (header.rfind("\xEF\xBB\xBF", 0) == 0) header.erase(0, 3);
  return header;
}

}  // namespace

void stream_order_log(std::istream& source, const ExchangeCalendar& calendar,
                      const std::function<void(Fill&&)>& on_fill, RejectionReport& rejections) {
  std::size_t line_no = 0;
  const std::string header = read_header(source, line_no);
  if (header != kOrderLogHeader) {
    throw ParseError("order log header mismatch: expected '" + std::string(kOrderLogHeader) + "'");
  }
  std::string line;
  RawFill raw;
  while (std::getline(source, line)) {
    ++line_no;
    const auto fields = text::split(line);
    if (fields.size() != 8) {
      rejections.push_back({line_no, "expected 8 columns, got " + std::to_string(fields.size())});
      continue;
    }
    raw.timestamp_ms.assign(fields[0]);
    raw.agent_id.assign(fields[1]);
    raw.instrument_id.assign(fields[2]);
    raw.venue_id.assign(fields[3]);
    raw.side.assign(fields[4]);
    raw.price.assign(fields[5]);
    raw.quantity.assign(fields[6]);
    raw.order_class.assign(fields[7]);
    auto result = validate_fill(raw, calendar);
    if (auto* fill = std::get_if<Fill>(&result)) {
      on_fill(std::move(*fill));
    } else {
      rejections.push_back({line_no, std::get<Rejection>(result).reason});
    }
  }
  if (source.bad()) throw ParseError("read error at line " + std::to_string(line_no + 1));
}

OrderLog parse_order_log(std::istream& source, const ExchangeCalendar& calendar) {
  OrderLog log;
  stream_order_log(
      source, calendar, [&](Fill&& f) { log.fills.push_back(std::move(f)); }, log.rejections);
  return log;
}

MarketTape parse_market_tape(std::istream& source, const ExchangeCalendar& calendar) {
  std::size_t line_no = 0;
  const std::string header = read_header(source, line_no);
  bool with_quotes = false;
  if (header == kTapeHeaderWithQuotes) {
    with_quotes = true;
  } else if (header != kTapeHeader) {
    throw ParseError("tape header mismatch: expected '" + std::string(kTapeHeader) +
                     "' optionally followed by ',best_bid,best_ask'");
  }
  const std::size_t columns = with_quotes ? 6 : 4;

  MarketTape out;
  // Consecutive lines usually hit the same tape.
  TradeTape* current = nullptr;
  std::string line;
  while (std::getline(source, line)) {
    ++line_no;
    const auto fields = text::split(line);
    if (fields.size() != columns) {
      out.rejections.push_back(
          {line_no, "expected " + std::to_string(columns) + " columns, got " + std::to_string(fields.size())});
      continue;
    }
    const auto ts = text::to_number<TimestampMs>(fields[0]);
    if (!ts || *ts < 0) {
      out.rejections.push_back({line_no, "malformed timestamp"});
      continue;
    }
    if (fields[1].empty()) {
      out.rejections.push_back({line_no, "instrument_id must not be empty"});
      continue;
    }
    const auto price = Price::parse(fields[2]);
    if (!price) {
      out.rejections.push_back({line_no, "malformed price"});
      continue;
    }
    if (price->ticks() <= 0) {
      out.rejections.push_back({line_no, "price > 0 violated"});
      continue;
    }
    const auto qty = text::to_number<Quantity>(fields[3]);
    if (!qty) {
      out.rejections.push_back({line_no, "malformed quantity"});
      continue;
    }
    if (*qty <= 0) {
      out.rejections.push_back({line_no, "quantity > 0 violated"});
      continue;
    }
    std::optional<Quote> quote;
    if (with_quotes && !(fields[4].empty() && fields[5].empty())) {
      const auto bid = Price::parse(fields[4]);
      const auto ask = Price::parse(fields[5]);
      if (!bid || !ask) {
        out.rejections.push_back({line_no, "malformed quote"});
        continue;
      }
      if (!(*bid < *ask)) {
        out.rejections.push_back({line_no, "crossed quote: best_bid >= best_ask"});
        continue;
      }
      quote = Quote{*ts, *bid, *ask};
    }

    const TradingDay day = calendar.day_of(*ts);
    if (current == nullptr || current->day != day || current->instrument_id != fields[1]) {
      TapeKey key{std::string(fields[1]), day};
      auto [it, inserted] = out.tapes.try_emplace(key);
      if (inserted) {
        it->second.instrument_id = key.instrument_id;
        it->second.day = day;
      }
      current = &it->second;
    }
    current->trades.push_back({*ts, *price, *qty});
    if (quote) current->quotes.push_back(*quote);
  }
  if (source.bad()) throw ParseError("read error at line " + std::to_string(line_no + 1));

  for (auto& [key, tape] : out.tapes) {
    std::stable_sort(tape.trades.begin(), tape.trades.end(),
                     [](const TapeTrade& a, const TapeTrade& b) { return a.timestamp_ms < b.timestamp_ms; });
    std::stable_sort(tape.quotes.begin(), tape.quotes.end(),
                     [](const Quote& a, const Quote& b) { return a.timestamp_ms < b.timestamp_ms; });
  }
  return out;
}

std::vector<MergedFill> aggregate_same_second(std::span<const MergedFill> fills) {
  std::vector<MergedFill> out;
  out.reserve(fills.size());
  for (std::size_t i = 0; i < fills.size(); ++i) {
    const auto& f = fills[i];
    if (i > 0 && f.timestamp_ms < fills[i - 1].timestamp_ms) {
      throw InvariantViolation("aggregate_same_second: input not sorted by timestamp");
    }
    if (!out.empty() && out.back().timestamp_ms / 1000 == f.timestamp_ms / 1000) {
      auto& m = out.back();
      m.quantity += f.quantity;
      m.notional_ticks += f.notional_ticks;
      m.source_count += f.source_count;
      m.timestamp_ms = f.timestamp_ms;
    } else {
      out.push_back(f);
    }
  }
  return out;
}

std::vector<MergedFill> aggregate_same_second(std::span<const Fill> fills) {
  std::vector<MergedFill> merged;
  merged.reserve(fills.size());
  for (const auto& f : fills) {
    const auto& first = fills.front();
    if (f.agent_id != first.agent_id || f.instrument_id != first.instrument_id || f.side != first.side ||
        f.day != first.day) {
      throw InvariantViolation("aggregate_same_second: fills do not share agent/instrument/side/day");
    }
    merged.push_back(MergedFill::from(f));
  }
  return aggregate_same_second(std::span<const MergedFill>(merged));
}

// ----------------------------------------------------------------- writers

void write_order_log_header(std::ostream& out) { out << kOrderLogHeader << '\n'; }

void write_fill(std::ostream& out, const Fill& f) {
  out << f.timestamp_ms << ',' << f.agent_id << ',' << f.instrument_id << ',' << f.venue_id << ','
      << to_string(f.side) << ',' << f.price.to_string() << ',' << f.quantity << ','
      << to_string(f.order_class) << '\n';
}

void write_order_log(std::ostream& out, std::span<const Fill> fills) {
  write_order_log_header(out);
  for (const auto& f : fills) write_fill(out, f);
}

void write_tape_header(std::ostream& out, bool with_quotes) {
  out << (with_quotes ? kTapeHeaderWithQuotes : kTapeHeader) << '\n';
}

void write_tape_row(std::ostream& out, const TapeRow& row, bool with_quotes) {
  out << row.timestamp_ms << ',' << row.instrument_id << ',' << row.price.to_string() << ','
      << row.quantity;
  if (with_quotes) {
    out << ',';
    if (row.quote) out << row.quote->first.to_string() << ',' << row.quote->second.to_string();
    else out << ',';
  }
  out << '\n';
}

void write_rejections(std::ostream& out, const RejectionReport& report) {
  out << "line,reason\n";
  for (const auto& r : report) {
    std::string reason = r.reason;
    std::replace(reason.begin(), reason.end(), ',', ';');
    out << r.line << ',' << reason << '\n';
  }
}

}  // namespace mimpact
