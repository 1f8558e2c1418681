#include "mimpact/reconstruction.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>

#include "mimpact/text.hpp"

namespace mimpact {

namespace {

bool same_key(const Fill& a, const Fill& b) {
  return a.day == b.day && a.instrument_id == b.instrument_id && a.agent_id == b.agent_id &&
         a.side == b.side;
}

bool key_less(const Fill& a, const Fill& b) {
  if (a.day != b.day) return a.day < b.day;
  if (a.instrument_id != b.instrument_id) return a.instrument_id < b.instrument_id;
  if (a.agent_id != b.agent_id) return a.agent_id < b.agent_id;
  return a.side < b.side;
}

}  // namespace

Reconstruction reconstruct_metaorders(std::span<const Fill> fills, const ReconstructionOptions& options) {
  // Sort by key, then time; ties broken by the remaining fields so the result
  // does not depend on input order.
  std::vector<std::size_t> order(fills.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    const Fill& a = fills[i];
    const Fill& b = fills[j];
    if (!same_key(a, b)) return key_less(a, b);
    if (a.timestamp_ms != b.timestamp_ms) return a.timestamp_ms < b.timestamp_ms;
    if (a.price != b.price) return a.price < b.price;
    if (a.quantity != b.quantity) return a.quantity < b.quantity;
    if (a.venue_id != b.venue_id) return a.venue_id < b.venue_id;
    return a.order_class < b.order_class;
  });

  Reconstruction out;
  std::vector<MergedFill> group;
  auto flush = [&](const Fill& first, std::vector<MergedFill>& merged_input) {
    auto merged = aggregate_same_second(std::span<const MergedFill>(merged_input));
    std::size_t fill_count = merged_input.size();
    merged_input.clear();
    if (merged.size() < 2) {
      ++out.discarded_groups;
      out.discarded_fills += fill_count;
      return;
    }
    MetaorderKey key{first.agent_id, first.instrument_id, first.side, first.day};
    out.metaorders.push_back(Metaorder::create(std::move(key), std::move(merged)));
  };

  std::size_t begin = 0;
  while (begin < order.size()) {
    std::size_t end = begin + 1;
    while (end < order.size() && same_key(fills[order[begin]], fills[order[end]])) ++end;

    const Fill& first = fills[order[begin]];
    for (std::size_t k = begin; k < end; ++k) {
      const Fill& f = fills[order[k]];
      if (options.max_gap_ms && !group.empty() &&
          f.timestamp_ms - group.back().timestamp_ms > *options.max_gap_ms) {
        flush(first, group);
      }
      group.push_back(MergedFill::from(f));
    }
    flush(first, group);
    begin = end;
  }
  return out;
}

std::vector<Metaorder> filter_min_length(std::span<const Metaorder> metaorders, int n_star) {
  if (n_star < 2) throw std::invalid_argument("filter_min_length: n_star must be >= 2");
  std::vector<Metaorder> out;
  std::copy_if(metaorders.begin(), metaorders.end(), std::back_inserter(out),
               [n_star](const Metaorder& m) { return m.length() >= n_star; });
  return out;
}

Metaorder enrich_with_market_volume(const Metaorder& metaorder, const TradeTape& tape) {
  if (tape.instrument_id != metaorder.instrument_id() || tape.day != metaorder.day()) {
    throw InvariantViolation("tape does not match metaorder instrument/day");
  }
  const TimestampMs lo = metaorder.start_ms();
  const TimestampMs hi = metaorder.end_ms();
  auto first = std::lower_bound(tape.trades.begin(), tape.trades.end(), lo,
                                [](const TapeTrade& t, TimestampMs v) { return t.timestamp_ms < v; });
  auto last = std::upper_bound(tape.trades.begin(), tape.trades.end(), hi,
                               [](TimestampMs v, const TapeTrade& t) { return v < t.timestamp_ms; });
  Quantity volume = 0;
  for (auto it = first; it != last; ++it) volume += it->quantity;
  if (volume < metaorder.size()) {
    throw InvariantViolation("inconsistent tape: V < Q for " + metaorder.agent_id() + "/" +
                             metaorder.instrument_id());
  }
  return metaorder.with_market_volume(volume);
}

std::vector<Metaorder> enrich_all(std::span<const Metaorder> metaorders, const TapeSet& tapes,
                                  std::size_t* missing) {
  std::vector<Metaorder> out;
  out.reserve(metaorders.size());
  std::size_t miss = 0;
  for (const auto& m : metaorders) {
    auto it = tapes.find(TapeKey{m.instrument_id(), m.day()});
    if (it == tapes.end()) {
      ++miss;
      continue;
    }
    out.push_back(enrich_with_market_volume(m, it->second));
  }
  if (missing) *missing = miss;
  return out;
}

void write_metaorder_summary(std::ostream& out, std::span<const Metaorder> metaorders) {
  out << "agent,instrument,day,sign,t0_ms,T_s,N,Q,V,participation\n";
  for (const auto& m : metaorders) {
    out << m.agent_id() << ',' << m.instrument_id() << ',' << m.day().to_string() << ',' << m.sign()
        << ',' << m.start_ms() << ',' << text::fmt(m.duration_s()) << ',' << m.length() << ','
        << m.size() << ',';
    if (m.market_volume()) {
      out << *m.market_volume() << ',' << text::fmt(*m.participation());
    } else {
      out << ',';
    }
    out << '\n';
  }
}

}  // namespace mimpact
