#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "mimpact/reconstruction.hpp"

using namespace mimpact;

namespace {

const ExchangeCalendar kCal;
constexpr TimestampMs kMorning = 1704186000000;  // 2024-01-02 10:00 CET

Fill fill(TimestampMs ts, const char* agent, const char* instrument, Side side, Quantity q = 100,
          const char* price = "10") {
  return {ts, agent, instrument, "XPAR", side, *Price::parse(price), q, OrderClass::aggressive_limit,
          kCal.day_of(ts)};
}

Metaorder of_length(int n) {
  std::vector<MergedFill> fills;
  for (int i = 0; i < n; ++i) {
    fills.push_back(MergedFill::from(fill(kMorning + 1000 * i, "A", "X", Side::buy)));
  }
  return Metaorder::create({"A", "X", Side::buy, kCal.day_of(kMorning)}, fills);
}

std::vector<int> lengths(std::span<const Metaorder> ms) {
  std::vector<int> out;
  for (const auto& m : ms) out.push_back(m.length());
  return out;
}

}  // namespace

TEST_CASE("one key with four distinct seconds gives one metaorder of length 4") {
  std::vector<Fill> fills;
  for (int i = 0; i < 4; ++i) fills.push_back(fill(kMorning + 7000 * i, "A", "X", Side::buy));
  const auto r = reconstruct_metaorders(fills);
  REQUIRE(r.metaorders.size() == 1);
  const Metaorder& m = r.metaorders[0];
  CHECK(m.length() == 4);
  CHECK(m.size() == 400);
  CHECK(m.start_ms() == kMorning);
  CHECK(m.duration_s() == 21.0);
  CHECK(m.sign() == 1);
}

TEST_CASE("direction is part of the key") {
  std::vector<Fill> fills{fill(kMorning, "A", "X", Side::buy), fill(kMorning + 2000, "A", "X", Side::buy),
                          fill(kMorning + 1000, "A", "X", Side::sell),
                          fill(kMorning + 5000, "A", "X", Side::sell)};
  const auto r = reconstruct_metaorders(fills);
  REQUIRE(r.metaorders.size() == 2);
  CHECK(r.metaorders[0].sign() == 1);
  CHECK(r.metaorders[1].sign() == -1);
}

TEST_CASE("singletons and same-second collapses are discarded") {
  std::vector<Fill> fills{fill(kMorning, "A", "X", Side::buy), fill(kMorning, "B", "X", Side::buy),
                          fill(kMorning + 400, "B", "X", Side::buy)};
  const auto r = reconstruct_metaorders(fills);
  CHECK(r.metaorders.empty());
  CHECK(r.discarded_groups == 2);
  CHECK(r.discarded_fills == 3);
  CHECK(reconstruct_metaorders(std::span<const Fill>{}).metaorders.empty());
}

TEST_CASE("days split keys") {
  const TimestampMs next_day = kMorning + 24 * 3600 * 1000;
  std::vector<Fill> fills{fill(kMorning, "A", "X", Side::buy), fill(kMorning + 1000, "A", "X", Side::buy),
                          fill(next_day, "A", "X", Side::buy), fill(next_day + 1000, "A", "X", Side::buy)};
  const auto r = reconstruct_metaorders(fills);
  REQUIRE(r.metaorders.size() == 2);
  CHECK(r.metaorders[0].day() < r.metaorders[1].day());
}

TEST_CASE("optional gap split") {
  std::vector<Fill> fills;
  for (int i = 0; i < 3; ++i) fills.push_back(fill(kMorning + 1000 * i, "A", "X", Side::buy));
  for (int i = 0; i < 3; ++i) fills.push_back(fill(kMorning + 3'600'000 + 1000 * i, "A", "X", Side::buy));
  CHECK(reconstruct_metaorders(fills).metaorders.size() == 1);
  ReconstructionOptions opt;
  opt.max_gap_ms = 60'000;
  const auto r = reconstruct_metaorders(fills, opt);
  CHECK(lengths(r.metaorders) == std::vector<int>{3, 3});
}

TEST_CASE("partition and order independence on random logs") {
  std::mt19937_64 rng(23);
  const char* agents[] = {"A", "B", "C", "D"};
  const char* instruments[] = {"X", "Y"};
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Fill> fills;
    const int n = 1 + static_cast<int>(rng() % 200);
    for (int i = 0; i < n; ++i) {
      fills.push_back(fill(kMorning + static_cast<TimestampMs>(rng() % 100'000'000), agents[rng() % 4],
                           instruments[rng() % 2], rng() % 2 ? Side::buy : Side::sell,
                           1 + static_cast<Quantity>(rng() % 500)));
    }
    const auto r = reconstruct_metaorders(fills);
    std::size_t assigned = 0;
    Quantity q_out = 0;
    for (const auto& m : r.metaorders) {
      for (const auto& f : m.fills()) assigned += static_cast<std::size_t>(f.source_count);
      q_out += m.size();
      CHECK(m.length() >= 2);
    }
    CHECK(assigned + r.discarded_fills == fills.size());
    Quantity q_kept = 0;
    for (const auto& f : fills) q_kept += f.quantity;
    CHECK(q_out <= q_kept);
    CHECK(std::is_sorted(r.metaorders.begin(), r.metaorders.end(),
                         [](const Metaorder& a, const Metaorder& b) { return a.key() < b.key(); }));

    std::shuffle(fills.begin(), fills.end(), rng);
    const auto shuffled = reconstruct_metaorders(fills);
    REQUIRE(shuffled.metaorders.size() == r.metaorders.size());
    for (std::size_t i = 0; i < r.metaorders.size(); ++i) {
      CHECK(shuffled.metaorders[i].key() == r.metaorders[i].key());
      CHECK(shuffled.metaorders[i].fills() == r.metaorders[i].fills());
    }
  }
}

TEST_CASE("filter_min_length") {
  const std::vector<Metaorder> omega{of_length(2), of_length(4), of_length(12), of_length(35)};
  CHECK(lengths(filter_min_length(omega, 10)) == std::vector<int>{12, 35});
  CHECK(lengths(filter_min_length(omega, 2)) == std::vector<int>{2, 4, 12, 35});
  const std::vector<Metaorder> small{of_length(2), of_length(4), of_length(12)};
  CHECK(filter_min_length(small, 30).empty());
  CHECK_THROWS_AS(filter_min_length(omega, 1), std::invalid_argument);
}

TEST_CASE("market volume over the closed execution interval") {
  std::vector<Fill> fills{fill(kMorning, "A", "X", Side::buy, 600),
                          fill(kMorning + 10'000, "A", "X", Side::buy, 400)};
  const Metaorder m = reconstruct_metaorders(fills).metaorders.at(0);
  TradeTape tape;
  tape.instrument_id = "X";
  tape.day = m.day();
  tape.trades = {{kMorning, *Price::parse("10"), 600}, {kMorning + 10'000, *Price::parse("10"), 400}};
  CHECK(*enrich_with_market_volume(m, tape).participation() == 1.0);

  tape.trades = {{kMorning - 1, *Price::parse("10"), 5000},
                 {kMorning, *Price::parse("10"), 600},
                 {kMorning + 5000, *Price::parse("10"), 9000},
                 {kMorning + 10'000, *Price::parse("10"), 400},
                 {kMorning + 10'001, *Price::parse("10"), 5000}};
  const Metaorder e = enrich_with_market_volume(m, tape);
  CHECK(*e.market_volume() == 10'000);
  CHECK(*e.participation() == doctest::Approx(0.1).epsilon(1e-15));

  // The trade exactly at t0 + T counts.
  tape.trades = {{kMorning, *Price::parse("10"), 600}, {kMorning + 10'000, *Price::parse("10"), 1400}};
  CHECK(*enrich_with_market_volume(m, tape).market_volume() == 2000);

  tape.trades = {{kMorning, *Price::parse("10"), 600}};
  CHECK_THROWS_AS(enrich_with_market_volume(m, tape), InvariantViolation);
  tape.instrument_id = "Y";
  CHECK_THROWS_AS(enrich_with_market_volume(m, tape), InvariantViolation);

  TapeSet none;
  std::size_t missing = 0;
  CHECK(enrich_all(std::span<const Metaorder>(&m, 1), none, &missing).empty());
  CHECK(missing == 1);
}

TEST_CASE("metaorder summary format") {
  const Metaorder m = of_length(3).with_market_volume(1200);
  std::ostringstream out;
  write_metaorder_summary(out, std::span<const Metaorder>(&m, 1));
  CHECK(out.str() ==
        "agent,instrument,day,sign,t0_ms,T_s,N,Q,V,participation\n"
        "A,X,2024-01-02,1,1704186000000,2,3,300,1200,0.25\n");
}
