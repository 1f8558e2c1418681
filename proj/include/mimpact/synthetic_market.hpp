#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "mimpact/calendar.hpp"
#include "mimpact/core_types.hpp"
#include "mimpact/distributions.hpp"
#include "mimpact/farmer_model.hpp"
#include "mimpact/ingestion.hpp"

namespace mimpact {

enum class ImpactMode {
  /// Execution follows the model's immediate impact, relaxation its permanent impact.
  farmer,
  /// Final execution impact A = k (Q/V)^delta T^gamma with lognormal scatter;
  /// used to test the square-root analysis.
  planted,
};

struct GeneratorConfig {
  double beta = 1.5;
  std::size_t count = 1000;
  /// Std. dev. of the per-fill return noise.
  double noise = 2e-3;
  double mean_gap_s = 30.0;
  /// Relaxation gap decays like decay_ratio^(decay_steps * f) over the window
  /// fraction f; 0 steps means an instant jump to the final price.
  int decay_steps = 20;
  double decay_ratio = 0.8;
  double buy_probability = 0.5;
  double base_price = 100.0;
  std::uint64_t seed = 7;
  /// V = multiplier * Q, multiplier log-uniform on [min, max].
  double volume_multiplier_min = 2.0;
  double volume_multiplier_max = 50.0;
  /// Lengths are drawn on 2..horizon.
  int horizon = 100;
  /// Return per unit of model impact.
  double impact_scale = 1e-2;
  double r0_plus = 1.0;
  double r1_plus = 1.0;
  Quantity lot = 100;
  /// Quotes emitted over the relaxation window.
  int relaxation_quotes = 50;
  /// Relative half spread of the synthetic quotes.
  double half_spread = 5e-5;

  ImpactMode mode = ImpactMode::farmer;
  double planted_scale = 1e-2;
  double planted_delta = 0.5;
  double planted_gamma = 0.2;
  double planted_noise = 0.1;

  std::string start_day = "2024-01-02";
  std::string zone = ExchangeCalendar::kDefaultZone;

  /// Throws std::invalid_argument naming the first bad field.
  void validate() const;
  /// Applies key=value pairs (same names as the fields); unknown keys throw.
  void set(const std::string& key, const std::string& value);
};

/// True parameters of one simulated metaorder.
struct GroundTruth {
  std::size_t index = 0;
  std::string agent_id;
  std::string instrument_id;
  TradingDay day;
  int sign = 1;
  int length = 0;
  Quantity size = 0;
  Quantity market_volume = 0;
  double duration_s = 0.0;
  TimestampMs t0_ms = 0;
  double beta = 0.0;
  /// Noise-free signed return at the last fill and after relaxation.
  double immediate_return = 0.0;
  double permanent_return = 0.0;
};

struct SimulatedMetaorder {
  GroundTruth truth;
  std::vector<Fill> fills;
  std::vector<TapeRow> tape;
};

/// Shared read-only state: the schedule, the length sampler and the calendar.
class MarketModel {
 public:
  explicit MarketModel(GeneratorConfig config);

  const GeneratorConfig& config() const noexcept { return config_; }
  const ImpactSchedule& schedule() const noexcept { return schedule_; }
  const ZetaLengthSampler& sampler() const noexcept { return sampler_; }
  const ExchangeCalendar& calendar() const noexcept { return calendar_; }
  TradingDay first_day() const noexcept { return first_day_; }

  /// Relaxation gap weight at window fraction f in [0, 1]: 1 at f=0, 0 at f=1.
  double decay_weight(double f) const;

 private:
  GeneratorConfig config_;
  ImpactSchedule schedule_;
  ZetaLengthSampler sampler_;
  ExchangeCalendar calendar_;
  TradingDay first_day_;
};

/// Independent stream for metaorder `index`, split from the seed.
std::mt19937_64 metaorder_rng(std::uint64_t seed, std::size_t index);

int sample_metaorder_length(const ZetaLengthSampler& sampler, std::mt19937_64& rng);

/// Simulates metaorder `index` with its own stream. `forced_length` and
/// `forced_sign` override the draws (N > horizon throws std::out_of_range).
SimulatedMetaorder simulate_metaorder(const MarketModel& model, std::size_t index,
                                      std::optional<int> forced_length = std::nullopt,
                                      std::optional<int> forced_sign = std::nullopt);

struct CorpusFiles {
  std::filesystem::path orders;
  std::filesystem::path tape;
  std::filesystem::path truth;
};

/// Writes orders.csv, tape.csv and truth.csv under `dir`. The parallel and
/// serial paths produce byte-identical files. Throws std::runtime_error when
/// the destination is not writable.
CorpusFiles generate_corpus(const GeneratorConfig& config, const std::filesystem::path& dir,
                            bool parallel = true);

/// Same metaorders kept in memory, in index order.
std::vector<SimulatedMetaorder> simulate_all(const MarketModel& model, bool parallel = true);

void write_truth_header(std::ostream& out);
void write_truth_row(std::ostream& out, const GroundTruth& truth);
/// Reads a truth file written by write_truth_row.
std::vector<GroundTruth> read_truth(std::istream& in);

}  // namespace mimpact
