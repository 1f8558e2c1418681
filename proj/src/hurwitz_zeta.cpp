#include "mimpact/hurwitz_zeta.hpp"

#include <cmath>
#include <stdexcept>

namespace mimpact {

namespace {

// B_{2j} / (2j)! for j = 1..8.
constexpr double kBernoulliOverFactorial[] = {
    1.0 / 6.0 / 2.0,
    -1.0 / 30.0 / 24.0,
    1.0 / 42.0 / 720.0,
    -1.0 / 30.0 / 40320.0,
    5.0 / 66.0 / 3628800.0,
    -691.0 / 2730.0 / 479001600.0,
    7.0 / 6.0 / 87178291200.0,
    -3617.0 / 510.0 / 20922789888000.0,
};

void check_domain(double s, double a) {
  if (!(s > 1.0)) throw std::domain_error("hurwitz_zeta: s must be > 1 (series diverges)");
  if (!(a > 0.0)) throw std::domain_error("hurwitz_zeta: a must be > 0");
}

template <bool WithDerivatives>
ZetaWithDerivatives evaluate(double s, double a) {
  check_domain(s, a);
  const double shift_point = 20.0 + s;
  const int direct = a >= shift_point ? 0 : static_cast<int>(std::ceil(shift_point - a));

  // Sum small terms last-to-first for accuracy.
  long double v = 0.0L, d1 = 0.0L, d2 = 0.0L;
  const double x = a + direct;
  const double lx = std::log(x);

  // Euler-Maclaurin tail at x.
  {
    const double integral = std::pow(x, 1.0 - s) / (s - 1.0);
    const double half = 0.5 * std::pow(x, -s);
    v += integral + half;
    if constexpr (WithDerivatives) {
      const double g = -lx - 1.0 / (s - 1.0);
      d1 += integral * g - lx * half;
      d2 += integral * (g * g + 1.0 / ((s - 1.0) * (s - 1.0))) + lx * lx * half;
    }
    double poch = s;                      // s (s+1) ... (s+2j-2)
    double xpow = std::pow(x, -s - 1.0);  // x^{-s-2j+1}
    double sum_inv = 1.0 / s;             // sum_i 1/(s+i)
    double sum_inv2 = 1.0 / (s * s);
    for (int j = 1; j <= 8; ++j) {
      const double term = kBernoulliOverFactorial[j - 1] * poch * xpow;
      v += term;
      if constexpr (WithDerivatives) {
        const double h = sum_inv - lx;
        d1 += term * h;
        d2 += term * (h * h - sum_inv2);
      }
      const double i1 = s + 2 * j - 1, i2 = s + 2 * j;
      poch *= i1 * i2;
      xpow /= x * x;
      sum_inv += 1.0 / i1 + 1.0 / i2;
      sum_inv2 += 1.0 / (i1 * i1) + 1.0 / (i2 * i2);
    }
  }

  for (int k = direct - 1; k >= 0; --k) {
    const double base = a + k;
    const double term = std::pow(base, -s);
    v += term;
    if constexpr (WithDerivatives) {
      const double lb = std::log(base);
      d1 -= lb * term;
      d2 += lb * lb * term;
    }
  }
  return {static_cast<double>(v), static_cast<double>(d1), static_cast<double>(d2)};
}

}  // namespace

double hurwitz_zeta(double s, double a) { return evaluate<false>(s, a).value; }

ZetaWithDerivatives hurwitz_zeta_derivatives(double s, double a) { return evaluate<true>(s, a); }

}  // namespace mimpact
