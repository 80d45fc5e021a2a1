#include "doctest.h"

#include <cmath>

#include "hybridlab/fourier.hpp"

using namespace hybridlab;

TEST_CASE("fit recovers the coefficients of a synthetic signal") {
  const double w = kTwoPi * 13.0, h = 1e-4;
  const int periods = 13;  // 10000 samples exactly
  const std::size_t n = samples_for_periods(h, w, periods);
  CHECK(n == 10000);
  std::vector<double> x(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double th = w * h * static_cast<double>(j) + 0.4;
    x[j] = 0.1 + 2.0 * std::cos(th) - 0.5 * std::sin(th) + 0.25 * std::cos(3 * th);
  }
  const FourierSignal s = extract_fourier(x, h, w, 3, periods, 0.4);
  CHECK(s.a0 == doctest::Approx(0.1).epsilon(1e-10));
  CHECK(s.a(0) == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(s.b(0) == doctest::Approx(-0.5).epsilon(1e-10));
  CHECK(std::abs(s.a(1)) < 1e-10);
  CHECK(s.a(2) == doctest::Approx(0.25).epsilon(1e-10));
  CHECK(s.amplitude(1) == doctest::Approx(std::hypot(2.0, 0.5)));
}

TEST_CASE("fit rejects a window that is not whole periods") {
  std::vector<double> x(1234, 0.0);
  CHECK_THROWS_AS(extract_fourier(x, 1e-4, kTwoPi * 13.0, 1, 13), ValidationError);
}

TEST_CASE("value and rate agree with the series and its derivative") {
  FourierSignal s(7.0, 3);
  s.a0 = 0.2;
  s.a << 1.0, -0.3, 0.05;
  s.b << 0.5, 0.1, -0.2;
  for (double th : {0.0, 0.3, 2.1, 5.9}) {
    double x = s.a0, dx = 0.0;
    for (int k = 1; k <= 3; ++k) {
      x += s.a(k - 1) * std::cos(k * th) + s.b(k - 1) * std::sin(k * th);
      dx += 7.0 * k * (-s.a(k - 1) * std::sin(k * th) + s.b(k - 1) * std::cos(k * th));
    }
    CHECK(s.value(th) == doctest::Approx(x).epsilon(1e-12));
    CHECK(s.rate(th) == doctest::Approx(dx).epsilon(1e-12));
    double v = 0.0, r = 0.0;
    s.evaluate(std::cos(th), std::sin(th), v, r);
    CHECK(v == doctest::Approx(x).epsilon(1e-12));
    CHECK(r == doctest::Approx(dx).epsilon(1e-12));
  }
}
