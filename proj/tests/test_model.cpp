#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "fise/errors.hpp"
#include "fise/model.hpp"

using namespace fise;

TEST_CASE("fractional order accepts (1, 2] only") {
  CHECK_NOTHROW(FractionalOrder(2.0));
  CHECK_NOTHROW(FractionalOrder(1.0001));
  CHECK_THROWS_AS(FractionalOrder(1.0), config_error);
  CHECK_THROWS_AS(FractionalOrder(2.0001), config_error);
  CHECK_THROWS_AS(FractionalOrder(0.5), config_error);
  CHECK_THROWS_AS(FractionalOrder(-1.5), config_error);
}

TEST_CASE("kinetic symbol |k|^alpha / 2") {
  CHECK(riesz_symbol(0.0, FractionalOrder(1.3)) == 0.0);
  CHECK(riesz_symbol(2.0, FractionalOrder(2.0)) == doctest::Approx(2.0).epsilon(1e-15));
  // 3^1.5 / 2 at high precision
  CHECK(riesz_symbol(3.0, FractionalOrder(1.5)) ==
        doctest::Approx(2.5980762113533160).epsilon(1e-12));
}

TEST_CASE("kinetic symbol is even and monotone in |k|, with the power-law crossover at |k|=1") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> kdist(0.0, 40.0);
  std::uniform_real_distribution<double> adist(1.01, 2.0);
  for (int i = 0; i < 200; ++i) {
    const FractionalOrder alpha(adist(rng));
    const double k1 = kdist(rng), k2 = kdist(rng);
    CHECK(riesz_symbol(-k1, alpha) == riesz_symbol(k1, alpha));
    if (std::fabs(k1) <= std::fabs(k2))
      CHECK(riesz_symbol(k1, alpha) <= riesz_symbol(k2, alpha));
  }
  // larger alpha weighs |k| > 1 more and |k| < 1 less
  CHECK(riesz_symbol(3.0, FractionalOrder(1.9)) > riesz_symbol(3.0, FractionalOrder(1.2)));
  CHECK(riesz_symbol(0.3, FractionalOrder(1.9)) < riesz_symbol(0.3, FractionalOrder(1.2)));
}

TEST_CASE("soft-core well values") {
  CHECK(soft_core(0.0, {1.0, 1.0}) == doctest::Approx(-1.0));
  CHECK(soft_core(std::sqrt(3.0), {1.0, 1.0}) == doctest::Approx(-0.5));
  CHECK(soft_core(0.0, {2.0, 0.5}) == doctest::Approx(-4.0));
  CHECK(soft_core(-5.0, {1.0, 1.0}) == soft_core(5.0, {1.0, 1.0}));  // even
}

TEST_CASE("ramped total potential") {
  const SoftCoreSpec well{1.0, 1.0};
  const FieldSpec field{0.05, RampShape::sin2, 20.0};
  // after the ramp: V(x) + F0 x
  CHECK(total_potential(5.0, well, field, 100.0) ==
        doctest::Approx(-1.0 / std::sqrt(26.0) + 0.25).epsilon(1e-14));
  // half-way through a sin^2 ramp the field is at half strength
  CHECK(total_potential(5.0, well, field, 10.0) ==
        doctest::Approx(-1.0 / std::sqrt(26.0) + 0.5 * 0.25).epsilon(1e-12));
  // no field
  const FieldSpec off{0.0, RampShape::sin2, 20.0};
  CHECK(total_potential(3.7, well, off, 4.0) == doctest::Approx(soft_core(3.7, well)));
}

TEST_CASE("ramp envelope shapes") {
  const FieldSpec none{0.1, RampShape::none, 20.0};
  CHECK(ramp_envelope(none, 0.0) == 1.0);
  const FieldSpec lin{0.1, RampShape::linear, 20.0};
  CHECK(ramp_envelope(lin, 10.0) == doctest::Approx(0.5));
  const FieldSpec s2{0.1, RampShape::sin2, 20.0};
  CHECK(ramp_envelope(s2, 0.0) == 0.0);
  CHECK(ramp_envelope(s2, 20.0) == 1.0);
  CHECK(ramp_envelope(s2, 1e9) == 1.0);
  double prev = -1.0;
  for (double t = 0.0; t <= 20.0; t += 0.25) {
    const double g = ramp_envelope(s2, t);
    CHECK(g >= prev);
    prev = g;
  }
}

TEST_CASE("absorbing mask profile") {
  const double L = 100.0;
  const MaskSpec inside{80.0, 5.0, 4.0};
  CHECK(mask_value(12.0, inside, L) == 1.0);
  CHECK(mask_value(-79.9, inside, L) == 1.0);

  const MaskSpec unit_eta{80.0, 1.0, 4.0};
  CHECK(mask_value(L, unit_eta, L) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));

  // midpoint of the buffer with eta = 2, m = 4: exp(-2 (1/2)^4) = exp(-0.125)
  const MaskSpec mid{80.0, 2.0, 4.0};
  CHECK(mask_value(90.0, mid, L) == doctest::Approx(0.88249690258459546).epsilon(1e-12));

  // continuous at the onset
  CHECK(mask_value(80.0, inside, L) == 1.0);
  CHECK(mask_value(80.0 + 1e-12, inside, L) == doctest::Approx(1.0).epsilon(1e-13));

  // monotone non-increasing in |x|
  double prev = 1.0;
  for (double x = 0.0; x <= L; x += 0.5) {
    const double m = mask_value(x, inside, L);
    CHECK(m <= prev + 1e-15);
    CHECK(m > 0.0);
    prev = m;
  }

  CHECK_THROWS_AS(mask_value(5.0, MaskSpec{100.0, 5.0, 4.0}, L), config_error);
  CHECK_THROWS_AS(mask_value(5.0, MaskSpec{120.0, 5.0, 4.0}, L), config_error);
}

TEST_CASE("barrier-suppression field estimate") {
  CHECK(barrier_suppression_field(0.5, 1.0) == doctest::Approx(0.0625));
  CHECK(barrier_suppression_field(0.67, 1.0) == doctest::Approx(0.112225).epsilon(1e-12));
  CHECK(barrier_suppression_field(1.0, 2.0) == doctest::Approx(0.125));
  // the benchmark field window stays below it at Ip = 0.67, Z = 1
  for (double f0 : {0.04, 0.05, 0.06, 0.07})
    CHECK(f0 < barrier_suppression_field(0.67, 1.0));
}

TEST_CASE("ramp shape names round-trip") {
  for (auto s : {RampShape::none, RampShape::linear, RampShape::sin2})
    CHECK(ramp_shape_from_string(to_string(s)) == s);
  CHECK_THROWS_AS(ramp_shape_from_string("cos2"), config_error);
}
