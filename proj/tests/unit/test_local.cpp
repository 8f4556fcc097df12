#include <doctest.h>

#include <stdexcept>

#include "ecdb/enumerate.hpp"
#include "ecdb/local.hpp"

using namespace ecdb;

TEST_CASE("conductor fixtures") {
  const std::vector<std::pair<Curve, i128>> fixtures{
      {{-1, -1}, 368}, {{-1, 1}, 92},    {{1, -1}, 248}, {{1, 1}, 496},   {{-4, 1}, 916},      {{-13, 4}, 66848},
      {{0, 4}, 108},   {{0, 1}, 36},     {{-2, 1}, 40},  {{-1, 0}, 32},   {{-18, 51}, 750384}, {{-432, 8208}, 11},
      {{-43, 166}, 26}, {{-219, 1654}, 54}, {{-351, 1890}, 24}, {{-16, 16}, 37}};
  for (const auto& [c, n] : fixtures) {
    CAPTURE(c.str());
    CHECK(conductor(c) == n);
  }
  CHECK(conductor({-43, 8208}) == 5819859520LL);
}

TEST_CASE("local data on known curves") {
  // 11a3: minimal discriminant -11, split I1 at 11, good at 2 and 3 after
  // the non-minimal restart.
  const auto bad = bad_primes({-432, 8208});
  REQUIRE(bad.size() == 1);
  CHECK(bad[0].p == 11);
  CHECK(bad[0].kodaira.str() == "I1");
  CHECK(bad[0].reduction == Reduction::split_multiplicative);
  CHECK(bad[0].c_p == 1);
  CHECK(bad[0].f_p == 1);
  CHECK(bad[0].ord_disc == 1);
  CHECK(tate_local(Curve{-432, 8208}, 2).reduction == Reduction::good);
  CHECK(tate_local(Curve{-432, 8208}, 3).reduction == Reduction::good);
  CHECK(tamagawa_product({-432, 8208}) == 1);
  // 37a1 is nonsplit at 37.
  const auto l37 = tate_local(Curve{-16, 16}, 37);
  CHECK(l37.reduction == Reduction::nonsplit_multiplicative);
  CHECK(l37.c_p == 1);
  // Good reduction everywhere is impossible over Q, but the empty product is 1.
  CHECK(tamagawa_product(std::vector<LocalData>{}) == 1);
  CHECK(conductor(std::vector<LocalData>{}) == 1);
}

TEST_CASE("local invariants over a window") {
  for (const auto& c : enumerate_curves({HeightKind::naive, 0, 20000})) {
    const auto local = bad_primes(c);
    i128 n = 1;
    for (const auto& l : local) {
      CAPTURE(c.str());
      CAPTURE(l.p);
      CHECK(l.reduction != Reduction::good);
      CHECK(l.f_p >= 1);
      CHECK(l.c_p >= 1);
      if (l.p == 2) CHECK(l.f_p <= 8);
      if (l.p == 3) CHECK(l.f_p <= 5);
      if (l.p >= 5) CHECK(l.f_p <= 2);
      const bool mult = l.reduction == Reduction::split_multiplicative ||
                        l.reduction == Reduction::nonsplit_multiplicative;
      CHECK(mult == (l.f_p == 1));
      if (mult) {
        CHECK(l.kodaira.type == KodairaType::In);
        CHECK(l.kodaira.n == l.ord_disc);
        if (l.reduction == Reduction::split_multiplicative) {
          CHECK(l.c_p == l.kodaira.n);
        } else {
          CHECK(l.c_p == (l.kodaira.n % 2 == 0 ? 2 : 1));
        }
      } else {
        CHECK(l.kodaira.type != KodairaType::In);
        CHECK(l.c_p <= 4);
      }
      // p^{f_p} divides the local minimal discriminant.
      CHECK(l.f_p <= l.ord_disc);
      CHECK(l.minimal_model.discriminant() % checked_pow(i128(l.p), l.ord_disc) == 0);
      n *= checked_pow(i128(l.p), l.f_p);
    }
    CHECK(conductor(c) == n);
  }
}

TEST_CASE("root numbers") {
  CHECK(root_number({-1, -1}).value == 1);
  CHECK(root_number({-1, 1}).value == -1);
  CHECK(root_number({-4, 1}).value == 1);
  CHECK(root_number({-13, 4}).value == -1);
  CHECK(root_number({-16, 16}).value == -1);
  // Split multiplicative at 11 only: w = -(-1) = +1.
  const RootNumber w11 = root_number({-432, 8208});
  CHECK(w11.value == 1);
  CHECK(w11.method == RootNumberMethod::local_formulas);
  CHECK(root_number_numeric({-1, 1}).value == -1);
  CHECK(root_number_numeric({-4, 1}).value == 1);
  CHECK(root_number_numeric({-1, 1}).method == RootNumberMethod::numeric_functional_equation);
}

TEST_CASE("root number: disabled or starved numeric route is unknown") {
  // (-1,1) is additive at 2.
  const RootNumber off = root_number({-1, 1}, false);
  CHECK_FALSE(off.known());
  CHECK(off.method == RootNumberMethod::unavailable);
  NumericRootOptions starved;
  starved.max_coefficients = 5;
  const RootNumber low = root_number_numeric({-1, 1}, starved);
  CHECK_FALSE(low.known());
  CHECK(low.method == RootNumberMethod::unavailable);
}

TEST_CASE("local and numeric root numbers agree for N <= 10^4") {
  int compared = 0;
  for (const auto& c : enumerate_curves({HeightKind::naive, 0, 300000})) {
    const auto local = bad_primes(c);
    if (conductor(local) > 10000) continue;
    const RootNumber a = root_number(c, local, false);
    if (!a.known()) continue;
    const RootNumber b = root_number_numeric(c, local);
    CAPTURE(c.str());
    REQUIRE(b.known());
    CHECK(a.value == b.value);
    ++compared;
  }
  CHECK(compared > 20);
}
