#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "mimpact/distributions.hpp"
#include "mimpact/hurwitz_zeta.hpp"
#include "mimpact/regression.hpp"

using namespace mimpact;

namespace {

std::vector<int> draw(const ZetaLengthSampler& sampler, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<int> out(n);
  for (auto& v : out) v = sampler(rng);
  return out;
}

double sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

}  // namespace

TEST_CASE("fit_linear") {
  const std::vector<double> x{1, 2, 3, 4}, y{3, 5, 7, 9};
  const LinearFit f = fit_linear(x, y);
  CHECK(f.slope == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(f.intercept == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(f.rss == doctest::Approx(0.0));
  // y = 0, 1, 1, 3: slope 0.9, residuals -0.4,  0.2, -0.2 ... rss 0.7, se sqrt(0.35/5)
  const std::vector<double> y2{0, 1, 1, 3};
  const LinearFit g = fit_linear(x, y2);
  CHECK(g.slope == doctest::Approx(0.9));
  CHECK(g.intercept == doctest::Approx(-1.0));
  CHECK(g.rss == doctest::Approx(0.7));
  CHECK(g.slope_se == doctest::Approx(std::sqrt(0.35 / 5.0)));
  CHECK_THROWS_AS(fit_linear(std::vector<double>{1, 1, 1}, std::vector<double>{1, 2, 3}), std::invalid_argument);
  CHECK_THROWS_AS(fit_linear(std::vector<double>{1}, std::vector<double>{1}), std::invalid_argument);
  CHECK_THROWS_AS(fit_linear(x, std::vector<double>{1, 2}), std::invalid_argument);
}

TEST_CASE("histogram of identical values has one bin") {
  const std::vector<double> v(17, 3.5);
  for (Binning b : {Binning::linear(10), Binning::logarithmic(10)}) {
    const Histogram h = empirical_histogram(v, b);
    REQUIRE(h.centers.size() == 1);
    CHECK(h.centers[0] == 3.5);
    CHECK(h.frequencies[0] == 1.0);
    CHECK(h.counts[0] == 17);
  }
  const std::vector<double> ints(5, 2.0);
  CHECK(empirical_histogram(ints, Binning::integer()).frequencies == std::vector<double>{1.0});
}

TEST_CASE("histogram frequencies sum to one") {
  std::mt19937_64 rng(2);
  std::lognormal_distribution<double> d(0.0, 2.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> v(1 + rng() % 2000);
    for (auto& x : v) x = d(rng);
    for (Binning b : {Binning::linear(1 + rng() % 60), Binning::logarithmic(1 + rng() % 60)}) {
      const Histogram h = empirical_histogram(v, b);
      CHECK(sum(h.frequencies) == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(std::accumulate(h.counts.begin(), h.counts.end(), std::size_t{0}) == v.size());
      for (std::size_t i = 1; i < h.centers.size(); ++i) CHECK(h.centers[i] > h.centers[i - 1]);
    }
  }
}

TEST_CASE("histogram binning kinds") {
  const std::vector<double> v{1, 10, 100, 1000};
  const Histogram lg = empirical_histogram(v, Binning::logarithmic(3));
  REQUIRE(lg.centers.size() == 3);
  CHECK(lg.centers[0] == doctest::Approx(std::pow(10.0, 0.5)));
  CHECK(lg.counts == std::vector<std::size_t>{1, 1, 2});
  const Histogram lin = empirical_histogram(std::vector<double>{0, 1, 2, 3, 4}, Binning::linear(2));
  CHECK(lin.centers == std::vector<double>{1.0, 3.0});
  CHECK(lin.counts == std::vector<std::size_t>{2, 3});
  const Histogram in = empirical_histogram(std::vector<double>{2, 3, 2, 7}, Binning::integer());
  CHECK(in.centers == std::vector<double>{2, 3, 7});
  CHECK(in.frequencies == std::vector<double>{0.5, 0.25, 0.25});
  CHECK_THROWS_AS(empirical_histogram(std::vector<double>{}, Binning::linear(3)), std::invalid_argument);
  CHECK_THROWS_AS(empirical_histogram(std::vector<double>{2.5}, Binning::integer()), std::invalid_argument);
  CHECK_THROWS_AS(empirical_histogram(std::vector<double>{0, 1}, Binning::logarithmic(3)),
                  std::invalid_argument);
  std::ostringstream out;
  write_histogram(out, in);
  CHECK(out.str() == "center,frequency,count\n2,0.5,2\n3,0.25,1\n7,0.25,1\n");
}

TEST_CASE("sampler pmf, survival and support") {
  const ZetaLengthSampler s(1.5);
  CHECK(s.pmf(1) == 0.0);
  CHECK(s.pmf(2) == doctest::Approx(std::pow(2.0, -2.5) / hurwitz_zeta(2.5, 2)).epsilon(1e-14));
  long double acc = 0;
  for (int n = 2; n <= 5000; ++n) acc += s.pmf(n);
  CHECK(static_cast<double>(acc) + s.survival(5000) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(s.survival(1) == 1.0);

  const ZetaLengthSampler t(1.5, 40);
  long double tacc = 0;
  for (int n = 2; n <= 40; ++n) tacc += t.pmf(n);
  CHECK(static_cast<double>(tacc) == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(t.pmf(41) == 0.0);
  CHECK(t.survival(40) == 0.0);
  CHECK_THROWS_AS(ZetaLengthSampler(0.0), std::invalid_argument);
  CHECK_THROWS_AS(ZetaLengthSampler(1.5, 1), std::invalid_argument);
}

TEST_CASE("sampler quantile inverts the distribution function, including the tail") {
  for (double beta : {0.8, 1.5}) {
    const ZetaLengthSampler s(beta);
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> body(0.0, 1.0);
    for (int i = 0; i < 3000; ++i) {
      // Half the draws land deep in the tail beyond the table.
      const double u = i % 2 ? body(rng) : 1.0 - s.survival(4097) * body(rng);
      const int n = s.quantile(u);
      CHECK(n >= 2);
      CHECK(s.survival(n) <= 1.0 - u + 1e-15);
      CHECK(s.survival(n - 1) >= 1.0 - u - 1e-15);
    }
    for (double u = 0.0; u < 0.999; u += 0.01) CHECK(s.quantile(u) <= s.quantile(u + 0.01));
  }
}

TEST_CASE("sampler frequency of N = 2 over 10^6 draws") {
  const ZetaLengthSampler s(1.5);
  const auto xs = draw(s, 1'000'000, 42);
  const double p = std::pow(2.0, -2.5) / hurwitz_zeta(2.5, 2.0);
  const double freq = std::count(xs.begin(), xs.end(), 2) / 1e6;
  const double se = std::sqrt(p * (1 - p) / 1e6);
  CHECK(std::abs(freq - p) < 3 * se);
  CHECK(*std::min_element(xs.begin(), xs.end()) >= 2);
  const double tail = std::count_if(xs.begin(), xs.end(), [](int n) { return n > 100; }) / 1e6;
  CHECK(std::abs(tail - s.survival(100)) < 4 * std::sqrt(s.survival(100) / 1e6));
  const ZetaLengthSampler t(1.5, 100);
  const auto ys = draw(t, 100'000, 43);
  CHECK(*std::max_element(ys.begin(), ys.end()) <= 100);
}

TEST_CASE("degenerate lengths") {
  const std::vector<int> twos(500, 2);
  CHECK_THROWS_WITH_AS(estimate_beta(twos, BetaMethod::loglog_regression), "too few distinct lengths",
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(estimate_beta(twos, BetaMethod::mle), "too few distinct lengths", std::invalid_argument);
  CHECK_THROWS_AS(estimate_beta(std::vector<int>{}, BetaMethod::mle), std::invalid_argument);
  CHECK_THROWS_AS(estimate_beta(std::vector<int>{1, 2, 3}, BetaMethod::mle), std::invalid_argument);
  const std::vector<int> four{2, 3, 4, 5, 2, 3, 4, 5, 2, 3, 4, 5, 2, 3, 4, 5, 2, 3, 4, 5};
  CHECK_THROWS_WITH(estimate_beta(four, BetaMethod::loglog_regression), "too few distinct lengths");
}

TEST_CASE("MLE on 10^6 draws and agreement with the regression") {
  const ZetaLengthSampler s(1.5);
  const auto xs = draw(s, 1'000'000, 7);
  const BetaEstimate mle = estimate_beta(xs, BetaMethod::mle);
  CHECK(mle.beta >= 1.4);
  CHECK(mle.beta <= 1.6);
  CHECK(std::abs(mle.beta - 1.5) < 4 * mle.standard_error);
  CHECK(mle.samples == 1'000'000);
  const BetaEstimate reg = estimate_beta(xs, BetaMethod::loglog_regression);
  CHECK(reg.points_used >= 5);
  const double combined = std::hypot(mle.standard_error, reg.standard_error);
  INFO("mle=" << mle.beta << " reg=" << reg.beta << " combined se=" << combined);
  CHECK(std::abs(mle.beta - reg.beta) < 3 * combined);
}

TEST_CASE("MLE standard error matches the observed spread") {
  const ZetaLengthSampler s(1.5);
  std::vector<double> estimates;
  double se = 0;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const auto xs = draw(s, 5000, 100 + seed);
    const BetaEstimate e = estimate_beta(xs, BetaMethod::mle);
    estimates.push_back(e.beta);
    se += e.standard_error / 40;
  }
  const double mean = sum(estimates) / 40;
  double var = 0;
  for (double e : estimates) var += (e - mean) * (e - mean) / 39;
  CHECK(std::abs(mean - 1.5) < 4 * se / std::sqrt(40.0));
  CHECK(std::sqrt(var) == doctest::Approx(se).epsilon(0.35));
}

TEST_CASE("MLE consistency at 10^4, 10^5 and 10^6 draws") {
  for (double beta : {1.2, 1.5, 1.8}) {
    const ZetaLengthSampler s(beta);
    double previous_se = 1e9;
    for (std::size_t n : {10'000u, 100'000u, 1'000'000u}) {
      const auto xs = draw(s, n, 1000 + n);
      const BetaEstimate e = estimate_beta(xs, BetaMethod::mle);
      CHECK(std::abs(e.beta - beta) < 4 * e.standard_error);
      CHECK(e.standard_error < previous_se / 3.0);
      previous_se = e.standard_error;
    }
    CHECK(previous_se < 0.005);
  }
}

TEST_CASE("MLE with a length cap") {
  const ZetaLengthSampler s(1.5, 100);
  const auto xs = draw(s, 200'000, 5);
  const BetaEstimate capped = estimate_beta(xs, BetaMethod::mle, 100);
  CHECK(std::abs(capped.beta - 1.5) < 4 * capped.standard_error);
  CHECK_THROWS_AS(estimate_beta(xs, BetaMethod::mle, 50), std::invalid_argument);
}

TEST_CASE("regression is invariant under duplicating every sample") {
  // All lengths well populated, so doubling counts leaves every frequency and
  // the set of fitted lengths unchanged.
  const ZetaLengthSampler s(1.5, 30);
  auto xs = draw(s, 400'000, 77);
  const BetaEstimate once = estimate_beta(xs, BetaMethod::loglog_regression);
  CHECK(once.points_used == 29);
  const std::vector<int> copy = xs;
  xs.insert(xs.end(), copy.begin(), copy.end());
  const BetaEstimate twice = estimate_beta(xs, BetaMethod::loglog_regression);
  CHECK(twice.beta == doctest::Approx(once.beta).epsilon(1e-12));
  CHECK(twice.points_used == once.points_used);
  CHECK(std::abs(once.beta - 1.5) < 0.1);

  // Exact frequencies: the regression recovers the exponent.
  std::vector<int> exact;
  for (int n = 2; n <= 20; ++n) {
    const int c = static_cast<int>(std::lround(1e7 * std::pow(n, -2.2)));
    exact.insert(exact.end(), c, n);
  }
  CHECK(estimate_beta(exact, BetaMethod::loglog_regression).beta == doctest::Approx(1.2).epsilon(1e-4));
}
