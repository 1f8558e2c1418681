#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "mimpact/core_types.hpp"
#include "mimpact/ingestion.hpp"

namespace mimpact {

struct ReconstructionOptions {
  /// Split a key's fills into separate metaorders when two consecutive merged
  /// fills are further apart than this. Off by default.
  std::optional<TimestampMs> max_gap_ms;
};

struct Reconstruction {
  /// Sorted by (day, instrument, agent, side).
  std::vector<Metaorder> metaorders;
  /// Groups dropped because they had fewer than two merged fills.
  std::size_t discarded_groups = 0;
  std::size_t discarded_fills = 0;
};

/// Groups fills by (agent, instrument, side, day), sorts each group by time,
/// merges same-second fills and keeps groups with N >= 2.
Reconstruction reconstruct_metaorders(std::span<const Fill> fills,
                                      const ReconstructionOptions& options = {});

/// Metaorders with N >= n_star, order preserved. Throws std::invalid_argument when n_star < 2.
std::vector<Metaorder> filter_min_length(std::span<const Metaorder> metaorders, int n_star);

/// Sets V to the tape volume traded in the closed interval [t0, t0 + T].
/// Throws InvariantViolation on instrument/day mismatch or when V < Q.
Metaorder enrich_with_market_volume(const Metaorder& metaorder, const TradeTape& tape);

/// Enriches every metaorder that has a tape; metaorders without one are dropped
/// and counted in `missing`.
std::vector<Metaorder> enrich_all(std::span<const Metaorder> metaorders, const TapeSet& tapes,
                                  std::size_t* missing = nullptr);

/// agent,instrument,day,sign,t0_ms,T_s,N,Q,V,participation
void write_metaorder_summary(std::ostream& out, std::span<const Metaorder> metaorders);

}  // namespace mimpact
