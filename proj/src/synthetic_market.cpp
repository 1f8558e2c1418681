#include "mimpact/synthetic_market.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "mimpact/text.hpp"

namespace mimpact {

namespace {

constexpr int kInstrumentsPerDay = 1000;
constexpr std::int64_t kSessionOpenS = 9 * 3600;
constexpr std::int64_t kSessionCloseS = 17 * 3600 + 1800;
constexpr std::int64_t kStartJitterS = 3600;
// Longest execution that still leaves room for the relaxation window.
constexpr std::int64_t kMaxDurationS = (kSessionCloseS - kSessionOpenS - kStartJitterS - 60) / 2;
constexpr std::size_t kChunk = 8192;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

template <class T>
T parse_or_throw(const std::string& key, const std::string& value) {
  const auto v = text::to_number<T>(value);
  if (!v) throw std::invalid_argument("config: bad value for " + key + ": '" + value + "'");
  return *v;
}

std::string padded(char prefix, std::size_t value, int width) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%c%0*zu", prefix, width, value);
  return buf;
}

}  // namespace

void GeneratorConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("generator config: ") + what);
  };
  require(beta > 0.0, "beta > 0");
  require(count >= 1, "count >= 1");
  require(noise >= 0.0, "noise >= 0");
  require(mean_gap_s >= 1.0, "mean_gap_s >= 1");
  require(decay_steps >= 0, "decay_steps >= 0");
  require(decay_ratio > 0.0 && decay_ratio < 1.0, "0 < decay_ratio < 1");
  require(buy_probability >= 0.0 && buy_probability <= 1.0, "buy_probability in [0,1]");
  require(base_price > 0.0, "base_price > 0");
  require(volume_multiplier_min >= 1.0 && volume_multiplier_max >= volume_multiplier_min,
          "1 <= volume_multiplier_min <= volume_multiplier_max");
  require(horizon >= 2, "horizon >= 2");
  require(impact_scale > 0.0, "impact_scale > 0");
  require(r0_plus > 0.0 && r1_plus > 0.0, "r0_plus, r1_plus > 0");
  require(lot >= 1, "lot >= 1");
  require(relaxation_quotes >= 1, "relaxation_quotes >= 1");
  require(half_spread > 0.0 && half_spread < 0.1, "0 < half_spread < 0.1");
  require(planted_scale > 0.0, "planted_scale > 0");
  require(planted_noise >= 0.0, "planted_noise >= 0");
  require(TradingDay::parse(start_day).has_value(), "start_day is YYYY-MM-DD");
  require(static_cast<long double>(count) / kInstrumentsPerDay < 20000, "count too large for the calendar");
}

void GeneratorConfig::set(const std::string& key, const std::string& value) {
  using Setter = std::function<void(GeneratorConfig&, const std::string&)>;
  static const std::map<std::string, Setter> setters = {
      {"beta", [](auto& c, auto& v) { c.beta = parse_or_throw<double>("beta", v); }},
      {"count", [](auto& c, auto& v) { c.count = parse_or_throw<std::size_t>("count", v); }},
      {"noise", [](auto& c, auto& v) { c.noise = parse_or_throw<double>("noise", v); }},
      {"mean_gap_s", [](auto& c, auto& v) { c.mean_gap_s = parse_or_throw<double>("mean_gap_s", v); }},
      {"decay_steps", [](auto& c, auto& v) { c.decay_steps = parse_or_throw<int>("decay_steps", v); }},
      {"decay_ratio", [](auto& c, auto& v) { c.decay_ratio = parse_or_throw<double>("decay_ratio", v); }},
      {"buy_probability",
       [](auto& c, auto& v) { c.buy_probability = parse_or_throw<double>("buy_probability", v); }},
      {"base_price", [](auto& c, auto& v) { c.base_price = parse_or_throw<double>("base_price", v); }},
      {"seed", [](auto& c, auto& v) { c.seed = parse_or_throw<std::uint64_t>("seed", v); }},
      {"volume_multiplier_min",
       [](auto& c, auto& v) { c.volume_multiplier_min = parse_or_throw<double>("volume_multiplier_min", v); }},
      {"volume_multiplier_max",
       [](auto& c, auto& v) { c.volume_multiplier_max = parse_or_throw<double>("volume_multiplier_max", v); }},
      {"horizon", [](auto& c, auto& v) { c.horizon = parse_or_throw<int>("horizon", v); }},
      {"impact_scale", [](auto& c, auto& v) { c.impact_scale = parse_or_throw<double>("impact_scale", v); }},
      {"r0_plus", [](auto& c, auto& v) { c.r0_plus = parse_or_throw<double>("r0_plus", v); }},
      {"r1_plus", [](auto& c, auto& v) { c.r1_plus = parse_or_throw<double>("r1_plus", v); }},
      {"lot", [](auto& c, auto& v) { c.lot = parse_or_throw<Quantity>("lot", v); }},
      {"relaxation_quotes",
       [](auto& c, auto& v) { c.relaxation_quotes = parse_or_throw<int>("relaxation_quotes", v); }},
      {"half_spread", [](auto& c, auto& v) { c.half_spread = parse_or_throw<double>("half_spread", v); }},
      {"mode",
       [](auto& c, auto& v) {
         if (v == "farmer") c.mode = ImpactMode::farmer;
         else if (v == "planted") c.mode = ImpactMode::planted;
         else throw std::invalid_argument("config: mode must be farmer or planted");
       }},
      {"planted_scale", [](auto& c, auto& v) { c.planted_scale = parse_or_throw<double>("planted_scale", v); }},
      {"planted_delta", [](auto& c, auto& v) { c.planted_delta = parse_or_throw<double>("planted_delta", v); }},
      {"planted_gamma", [](auto& c, auto& v) { c.planted_gamma = parse_or_throw<double>("planted_gamma", v); }},
      {"planted_noise", [](auto& c, auto& v) { c.planted_noise = parse_or_throw<double>("planted_noise", v); }},
      {"start_day", [](auto& c, auto& v) { c.start_day = v; }},
      {"zone", [](auto& c, auto& v) { c.zone = v; }},
  };
  const auto it = setters.find(key);
  if (it == setters.end()) throw std::invalid_argument("config: unknown key '" + key + "'");
  it->second(*this, value);
}

MarketModel::MarketModel(GeneratorConfig config)
    : config_((config.validate(), std::move(config))),
      schedule_(FarmerParams{config_.beta, config_.horizon, config_.r0_plus, config_.r1_plus}),
      sampler_(config_.beta, config_.horizon),
      calendar_(config_.zone),
      first_day_(*TradingDay::parse(config_.start_day)) {}

double MarketModel::decay_weight(double f) const {
  if (f <= 0.0) return 1.0;
  if (f >= 1.0) return 0.0;
  if (config_.decay_steps == 0) return 0.0;
  const double k = config_.decay_steps;
  const double rho_k = std::pow(config_.decay_ratio, k);
  return (std::pow(config_.decay_ratio, k * f) - rho_k) / (1.0 - rho_k);
}

std::mt19937_64 metaorder_rng(std::uint64_t seed, std::size_t index) {
  const std::uint64_t a = splitmix64(seed);
  const std::uint64_t b = splitmix64(a ^ splitmix64(static_cast<std::uint64_t>(index) + 1));
  std::seed_seq seq{static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32),
                    static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32)};
  return std::mt19937_64(seq);
}

int sample_metaorder_length(const ZetaLengthSampler& sampler, std::mt19937_64& rng) { return sampler(rng); }

SimulatedMetaorder simulate_metaorder(const MarketModel& model, std::size_t index,
                                      std::optional<int> forced_length, std::optional<int> forced_sign) {
  const GeneratorConfig& cfg = model.config();
  auto rng = metaorder_rng(cfg.seed, index);
  auto uniform = [&rng] { return std::generate_canonical<double, 53>(rng); };

  // Fixed draw order so that overriding one draw leaves the others unchanged.
  int n = sample_metaorder_length(model.sampler(), rng);
  const bool buy = uniform() < cfg.buy_probability;
  const double log_lo = std::log(cfg.volume_multiplier_min), log_hi = std::log(cfg.volume_multiplier_max);
  const double multiplier = std::exp(log_lo + (log_hi - log_lo) * uniform());
  const std::int64_t start_s = kSessionOpenS + static_cast<std::int64_t>(uniform() * kStartJitterS);
  const std::int64_t start_ms_offset = static_cast<std::int64_t>(uniform() * 1000.0);
  const double planted_z = std::normal_distribution<double>(0.0, 1.0)(rng);

  if (forced_length) {
    if (*forced_length < 2 || *forced_length > cfg.horizon) {
      throw std::out_of_range("metaorder length outside 2..horizon");
    }
    n = *forced_length;
  }
  const int sign = forced_sign ? (*forced_sign >= 0 ? 1 : -1) : (buy ? 1 : -1);

  SimulatedMetaorder out;
  GroundTruth& truth = out.truth;
  truth.index = index;
  truth.agent_id = padded('A', index, 7);
  truth.instrument_id = padded('S', index % kInstrumentsPerDay, 3);
  truth.day = TradingDay{model.first_day().days_since_epoch + static_cast<std::int32_t>(index / kInstrumentsPerDay)};
  truth.sign = sign;
  truth.length = n;
  truth.size = cfg.lot * n;
  truth.market_volume = std::max<Quantity>(truth.size + n, std::llround(multiplier * truth.size));
  truth.beta = cfg.beta;

  // Whole-second gaps of at least one second, so no two fills merge.
  const std::int64_t max_gap = std::max<std::int64_t>(1, kMaxDurationS / (n - 1));
  std::exponential_distribution<double> gap_draw(1.0 / std::max(cfg.mean_gap_s - 0.5, 1e-9));
  std::vector<TimestampMs> times(n);
  times[0] = model.calendar().to_utc_ms(truth.day, start_s) + start_ms_offset;
  for (int t = 1; t < n; ++t) {
    const std::int64_t gap = std::min<std::int64_t>(max_gap, 1 + static_cast<std::int64_t>(gap_draw(rng)));
    times[t] = times[t - 1] + 1000 * gap;
  }
  truth.t0_ms = times.front();
  const TimestampMs span = times.back() - times.front();
  truth.duration_s = static_cast<double>(span) / 1000.0;

  std::normal_distribution<double> eta(0.0, 1.0);
  std::vector<double> walk(n);
  double w = 0.0;
  for (int t = 0; t < n; ++t) {
    w += cfg.noise * eta(rng);
    walk[t] = w;
  }

  // Noise-free impact at fill t (0-based) and after relaxation.
  std::vector<double> impact(n);
  double permanent = 0.0;
  if (cfg.mode == ImpactMode::farmer) {
    const ImpactSchedule& s = model.schedule();
    for (int t = 0; t < n; ++t) impact[t] = cfg.impact_scale * s.immediate_impact(t + 1);
    permanent = cfg.impact_scale * s.permanent_impact(n);
  } else {
    const double participation = static_cast<double>(truth.size) / static_cast<double>(truth.market_volume);
    const double a = cfg.planted_scale * std::pow(participation, cfg.planted_delta) *
                     std::pow(truth.duration_s, cfg.planted_gamma) * std::exp(cfg.planted_noise * planted_z);
    for (int t = 0; t < n; ++t) impact[t] = a * std::sqrt(static_cast<double>(t + 1) / n);
    permanent = a * 2.0 / 3.0;
  }
  truth.immediate_return = impact.back();
  truth.permanent_return = permanent;

  const double x0 = cfg.base_price;
  const std::int64_t spread_ticks =
      std::max<std::int64_t>(1, std::llround(cfg.half_spread * x0 * static_cast<double>(Price::kScale)));
  auto to_price = [&](double v) {
    if (!(v > 0.0)) throw std::runtime_error("non-positive simulated price; lower impact_scale or noise");
    const Price p = Price::from_double(v);
    if (p.ticks() <= spread_ticks) throw std::runtime_error("simulated price below the spread");
    return p;
  };
  auto quote_for = [&](Price mid) {
    return std::make_pair(Price::from_ticks(mid.ticks() - spread_ticks), Price::from_ticks(mid.ticks() + spread_ticks));
  };

  const Side side = sign > 0 ? Side::buy : Side::sell;
  const Price open = to_price(x0);
  out.tape.reserve(2 * n + 1 + cfg.relaxation_quotes);
  out.tape.push_back({times.front() - 1000, truth.instrument_id, open, cfg.lot, quote_for(open)});

  // Background volume shares the fill timestamps, so V over [t0, t0+T] is exact.
  const Quantity background = truth.market_volume - truth.size;
  out.fills.reserve(n);
  for (int t = 0; t < n; ++t) {
    const Price p = to_price(x0 * (1.0 + sign * (impact[t] + walk[t])));
    out.fills.push_back({times[t], truth.agent_id, truth.instrument_id, "XPAR", side, p, cfg.lot,
                         OrderClass::aggressive_limit, truth.day});
    out.tape.push_back({times[t], truth.instrument_id, p, cfg.lot, quote_for(p)});
    const Quantity share = background / n + (t < background % n ? 1 : 0);
    out.tape.push_back({times[t], truth.instrument_id, p, share, std::nullopt});
  }

  const double last = out.fills.back().price.to_double();
  const double final_price = x0 * (1.0 + sign * (permanent + walk.back()));
  const int quotes = cfg.relaxation_quotes;
  for (int k = 1; k <= quotes; ++k) {
    const TimestampMs ts = times.back() + span * k / quotes;
    const double f = static_cast<double>(k) / quotes;
    const Price mid = to_price(final_price + (last - final_price) * model.decay_weight(f));
    out.tape.push_back({ts, truth.instrument_id, mid, cfg.lot, quote_for(mid)});
  }
  return out;
}

std::vector<SimulatedMetaorder> simulate_all(const MarketModel& model, bool parallel) {
  const std::size_t count = model.config().count;
  std::vector<SimulatedMetaorder> out(count);
  std::exception_ptr error;
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(count);
#pragma omp parallel for schedule(dynamic, 64) if (parallel)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      out[i] = simulate_metaorder(model, static_cast<std::size_t>(i));
    } catch (...) {
#pragma omp critical(mimpact_sim_error)
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
  return out;
}

CorpusFiles generate_corpus(const GeneratorConfig& config, const std::filesystem::path& dir, bool parallel) {
  const MarketModel model(config);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  CorpusFiles files{dir / "orders.csv", dir / "tape.csv", dir / "truth.csv"};
  std::ofstream orders(files.orders, std::ios::binary);
  std::ofstream tape(files.tape, std::ios::binary);
  std::ofstream truth(files.truth, std::ios::binary);
  if (!orders || !tape || !truth) throw std::runtime_error("cannot write corpus under " + dir.string());

  write_order_log_header(orders);
  write_tape_header(tape, true);
  write_truth_header(truth);

  const std::size_t count = config.count;
  std::vector<SimulatedMetaorder> chunk;
  for (std::size_t begin = 0; begin < count; begin += kChunk) {
    const std::size_t end = std::min(count, begin + kChunk);
    chunk.assign(end - begin, {});
    std::exception_ptr error;
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(end - begin);
#pragma omp parallel for schedule(dynamic, 64) if (parallel)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      try {
        chunk[i] = simulate_metaorder(model, begin + static_cast<std::size_t>(i));
      } catch (...) {
#pragma omp critical(mimpact_sim_error)
        if (!error) error = std::current_exception();
      }
    }
    if (error) std::rethrow_exception(error);

    std::ostringstream ob, tb, gb;
    for (const auto& sim : chunk) {
      for (const auto& f : sim.fills) write_fill(ob, f);
      for (const auto& row : sim.tape) write_tape_row(tb, row, true);
      write_truth_row(gb, sim.truth);
    }
    orders << ob.view();
    tape << tb.view();
    truth << gb.view();
  }
  orders.flush();
  tape.flush();
  truth.flush();
  if (!orders || !tape || !truth) throw std::runtime_error("write failed under " + dir.string());
  return files;
}

namespace {
constexpr const char* kTruthHeader =
    "index,agent_id,instrument_id,day,sign,N,Q,V,T_s,t0_ms,beta,immediate_return,permanent_return";
}

void write_truth_header(std::ostream& out) { out << kTruthHeader << '\n'; }

void write_truth_row(std::ostream& out, const GroundTruth& g) {
  out << g.index << ',' << g.agent_id << ',' << g.instrument_id << ',' << g.day.to_string() << ',' << g.sign
      << ',' << g.length << ',' << g.size << ',' << g.market_volume << ',' << text::fmt(g.duration_s) << ','
      << g.t0_ms << ',' << text::fmt(g.beta) << ',' << text::fmt(g.immediate_return) << ','
      << text::fmt(g.permanent_return) << '\n';
}

std::vector<GroundTruth> read_truth(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || text::chomp(line) != kTruthHeader) {
    throw std::runtime_error("truth file: header mismatch");
  }
  std::vector<GroundTruth> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const auto f = text::split(line);
    auto fail = [&] { return std::runtime_error("truth file: bad line " + std::to_string(line_no)); };
    if (f.size() != 13) throw fail();
    GroundTruth g;
    auto num = [&](std::string_view s, auto& dst) {
      auto v = text::to_number<std::remove_reference_t<decltype(dst)>>(s);
      if (!v) throw fail();
      dst = *v;
    };
    num(f[0], g.index);
    g.agent_id = f[1];
    g.instrument_id = f[2];
    const auto day = TradingDay::parse(f[3]);
    if (!day) throw fail();
    g.day = *day;
    num(f[4], g.sign);
    num(f[5], g.length);
    num(f[6], g.size);
    num(f[7], g.market_volume);
    num(f[8], g.duration_s);
    num(f[9], g.t0_ms);
    num(f[10], g.beta);
    num(f[11], g.immediate_return);
    num(f[12], g.permanent_return);
    out.push_back(std::move(g));
  }
  return out;
}

}  // namespace mimpact
