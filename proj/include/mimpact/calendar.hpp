#pragma once

#include <memory>
#include <string>

#include "mimpact/core_types.hpp"

namespace mimpact {

/// Assigns trading days to UTC timestamps using the exchange's local timezone.
///
/// Zones are given as Boost POSIX strings, e.g. the default
/// "CET+01CEST+01,M3.5.0/02:00,M10.5.0/03:00" (Europe/Paris rules).
/// Safe to share read-only across threads.
class ExchangeCalendar {
 public:
  static constexpr const char* kDefaultZone = "CET+01CEST+01,M3.5.0/02:00,M10.5.0/03:00";

  explicit ExchangeCalendar(const std::string& posix_zone = kDefaultZone);
  ~ExchangeCalendar();
  ExchangeCalendar(const ExchangeCalendar&);
  ExchangeCalendar& operator=(const ExchangeCalendar&);

  /// UTC offset in seconds in force at `timestamp_ms`.
  int utc_offset_s(TimestampMs timestamp_ms) const;
  TradingDay day_of(TimestampMs timestamp_ms) const;
  /// UTC timestamp of a local wall-clock time on `day` (seconds after local midnight).
  TimestampMs to_utc_ms(TradingDay day, std::int64_t local_seconds) const;

  const std::string& zone() const noexcept { return zone_; }

 private:
  std::string zone_;
  struct Zone;
  std::shared_ptr<const Zone> tz_;
  std::uint64_t id_ = 0;
};

}  // namespace mimpact
