#include "mimpact/calendar.hpp"

#include <boost/date_time/local_time/local_time.hpp>
#include <boost/date_time/posix_time/posix_time.hpp>
#include <boost/make_shared.hpp>
#include <atomic>
#include <limits>

namespace mimpact {

namespace {

namespace lt = boost::local_time;
namespace pt = boost::posix_time;
namespace gr = boost::gregorian;

const gr::date kEpoch(1970, 1, 1);

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

}  // namespace

struct ExchangeCalendar::Zone {
  boost::shared_ptr<lt::time_zone> tz;
};

ExchangeCalendar::ExchangeCalendar(const std::string& posix_zone)
    : zone_(posix_zone) {
  try {
    tz_ = std::make_shared<const Zone>(Zone{boost::make_shared<lt::posix_time_zone>(posix_zone)});
    static std::atomic<std::uint64_t> next_id{1};
    id_ = next_id++;
  } catch (const std::exception& e) {
    throw std::invalid_argument("invalid timezone '" + posix_zone + "': " + e.what());
  }
}

ExchangeCalendar::~ExchangeCalendar() = default;
ExchangeCalendar::ExchangeCalendar(const ExchangeCalendar&) = default;
ExchangeCalendar& ExchangeCalendar::operator=(const ExchangeCalendar&) = default;

int ExchangeCalendar::utc_offset_s(TimestampMs timestamp_ms) const {
  // Offsets only change on whole UTC hours; remember the last hour per thread.
  struct Cache {
    std::uint64_t zone = 0;
    std::int64_t hour = std::numeric_limits<std::int64_t>::min();
    int offset = 0;
  };
  thread_local Cache cache;
  const std::int64_t hour = floor_div(timestamp_ms, 3'600'000);
  if (cache.zone == id_ && cache.hour == hour) return cache.offset;

  const std::int64_t secs = hour * 3600;
  const std::int64_t days = floor_div(secs, 86400);
  const pt::ptime utc(kEpoch + gr::days(static_cast<long>(days)),
                      pt::seconds(static_cast<long>(secs - days * 86400)));
  const lt::local_date_time local(utc, tz_->tz);
  const int offset = static_cast<int>((local.local_time() - utc).total_seconds());
  cache = {id_, hour, offset};
  return offset;
}

TradingDay ExchangeCalendar::day_of(TimestampMs timestamp_ms) const {
  const std::int64_t local_s = floor_div(timestamp_ms, 1000) + utc_offset_s(timestamp_ms);
  return TradingDay{static_cast<std::int32_t>(floor_div(local_s, 86400))};
}

TimestampMs ExchangeCalendar::to_utc_ms(TradingDay day, std::int64_t local_seconds) const {
  const gr::date d = kEpoch + gr::days(day.days_since_epoch);
  const lt::local_date_time local(d, pt::seconds(static_cast<long>(local_seconds)), tz_->tz,
                                  lt::local_date_time::NOT_DATE_TIME_ON_ERROR);
  if (local.is_not_a_date_time()) {
    throw std::invalid_argument("local time does not exist or is ambiguous on " + day.to_string());
  }
  const pt::ptime utc = local.utc_time();
  const std::int64_t secs =
      static_cast<std::int64_t>((utc.date() - kEpoch).days()) * 86400 +
      utc.time_of_day().total_seconds();
  return secs * 1000;
}

}  // namespace mimpact
