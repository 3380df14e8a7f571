#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "bspulse/greens.hpp"

using namespace bspulse;

TEST_CASE("disk trace basics", "[greens]") {
  CHECK(disk_trace_green(0.3, 1.7) ==
        Catch::Approx(disk_trace_green(1.7, 0.3)).epsilon(1e-14));
  CHECK_THROWS_AS(disk_trace_green(0.5, 0.5), SingularEvaluationError);
  // antipodal points: distance 2
  CHECK(disk_trace_green(0.0, num::kPi) ==
        Catch::Approx(-std::log(2.0) / num::kPi + 1.0 / (8.0 * num::kPi))
            .epsilon(1e-13));
}

TEST_CASE("annulus trace: term sum equals log-product resummation",
          "[greens]") {
  for (double a : {0.2, 0.5, 0.8}) {
    for (double d : {0.1, 1.0, 2.5, 3.14}) {
      const double s1 = annulus_trace_green(a, d, 0.0, 1e-14);
      const double s2 = annulus_trace_green_product(a, d, 0.0, 1e-14);
      CHECK(s1 == Catch::Approx(s2).margin(1e-12));
    }
  }
  CHECK_THROWS_AS(annulus_trace_green(1.5, 0.1, 0.0), DomainParameterError);
}

TEST_CASE("potential field validates the half-width", "[greens]") {
  const auto dom = ConformalDomain::dumbbell(0.3);
  CHECK_THROWS_AS(PotentialField(dom, 0.0), DomainParameterError);
  CHECK_THROWS_AS(PotentialField(dom, 0.5 * dom.perimeter()),
                  DomainParameterError);
  CHECK(PotentialField(dom, 1e-4).near_degenerate_width());
  CHECK_FALSE(PotentialField(dom, 0.7).near_degenerate_width());
}

TEST_CASE("disk potential is constant in s0", "[greens]") {
  const auto dom = ConformalDomain::disk();
  const PotentialField pf(dom, 0.7);
  const double e0 = potential(pf, 0.0);
  for (int i = 1; i < 64; ++i) {
    const double s0 = dom.perimeter() * i / 64.0;
    CHECK(potential(pf, s0) == Catch::Approx(e0).margin(1e-10));
    CHECK(potential_generic(pf, s0) == Catch::Approx(e0).margin(1e-10));
  }
}

TEST_CASE("closed forms equal the generic conformal evaluation", "[greens]") {
  // dumbbell: pointwise agreement
  for (double k : {0.1, 0.44, 0.8}) {
    const auto dom = ConformalDomain::dumbbell(k);
    for (double w : {0.3, 0.7}) {
      const PotentialField pf(dom, w);
      for (int i = 0; i < 32; ++i) {
        const double s0 = dom.perimeter() * (i + 0.21) / 32.0;
        CHECK(potential(pf, s0) ==
              Catch::Approx(potential_generic(pf, s0)).margin(1e-10));
      }
    }
  }
  // hole: the closed form carries the normalization C_w = 0, so it matches
  // the generic evaluation only up to an additive constant
  {
    const auto dom = ConformalDomain::perforated_disk(0.4, 0.15);
    const PotentialField pf(dom, 0.7);
    const double offset = potential(pf, 0.31) - potential_generic(pf, 0.31);
    for (int i = 0; i < 32; ++i) {
      const double s0 = dom.perimeter() * (i + 0.21) / 32.0;
      CHECK(potential(pf, s0) - potential_generic(pf, s0) ==
            Catch::Approx(offset).margin(1e-10));
    }
  }
}

TEST_CASE("analytic E' matches finite differences", "[greens]") {
  const auto db = ConformalDomain::dumbbell(0.44);
  const auto pd = ConformalDomain::perforated_disk(0.4, 0.15);
  for (const ConformalDomain* dom : {&db, &pd}) {
    const PotentialField pf(*dom, 0.7);
    for (double frac : {0.11, 0.29, 0.52, 0.83}) {
      const double s0 = dom->perimeter() * frac;
      const double fd = num::deriv4(
          [&](double s) { return potential(pf, s); }, s0, 1e-3);
      CHECK(potential_derivative(pf, s0, 1) ==
            Catch::Approx(fd).margin(1e-6));
    }
  }
}

TEST_CASE("E'' matches a direct second difference", "[greens]") {
  const auto dom = ConformalDomain::dumbbell(0.44);
  const PotentialField pf(dom, 0.7);
  for (double frac : {0.13, 0.31, 0.62}) {
    const double s0 = dom.perimeter() * frac;
    const double fd = num::second_deriv(
        [&](double s) { return potential(pf, s); }, s0, 1e-3);
    CHECK(potential_derivative(pf, s0, 2) == Catch::Approx(fd).margin(1e-5));
  }
}

TEST_CASE("potential symmetries of the dumbbell", "[greens]") {
  const auto dom = ConformalDomain::dumbbell(0.37);
  const double L = dom.perimeter();
  const PotentialField pf(dom, 0.6);
  for (double frac : {0.08, 0.19, 0.41}) {
    const double s0 = frac * L;
    CHECK(potential(pf, s0) ==
          Catch::Approx(potential(pf, L - s0)).margin(1e-10));
    CHECK(potential(pf, s0) ==
          Catch::Approx(potential(pf, s0 + 0.5 * L)).margin(1e-10));
  }
  // trivial critical points at the symmetry axes
  CHECK(std::abs(potential_derivative(pf, 0.0, 1)) < 1e-9);
  CHECK(std::abs(potential_derivative(pf, 0.25 * L, 1)) < 1e-9);
}

TEST_CASE("hole potential symmetry about the offset axis", "[greens]") {
  const auto dom = ConformalDomain::perforated_disk(0.4, 0.15);
  const PotentialField pf(dom, 0.5);
  for (double s0 : {0.3, 1.1, 2.4}) {
    CHECK(potential(pf, s0) ==
          Catch::Approx(potential(pf, 2.0 * num::kPi - s0)).margin(1e-12));
  }
  CHECK(std::abs(potential_derivative(pf, 0.0, 1)) < 1e-12);
  CHECK(std::abs(potential_derivative(pf, num::kPi, 1)) < 1e-12);
}

TEST_CASE("regular part mixed derivative vanishes for the disk", "[greens]") {
  const auto dom = ConformalDomain::disk();
  CHECK(std::abs(regular_part_mixed_deriv(dom, 1.0)) < 1e-8);
  const auto pd = ConformalDomain::perforated_disk(0.3, 0.2);
  CHECK_THROWS_AS(regular_part_mixed_deriv(pd, 1.0), UnsupportedDomainError);
  CHECK_THROWS_AS(small_w_expansion(pd, 1.0, 0.1), UnsupportedDomainError);
}

TEST_CASE("small-w expansion reproduces the disk closed form", "[greens]") {
  const auto dom = ConformalDomain::disk();
  for (double w : {0.1, 0.05, 0.025}) {
    const PotentialField pf(dom, w);
    const double exact = potential(pf, 1.0);
    const double approx = small_w_expansion(dom, 1.0, w);
    CHECK(std::abs(exact - approx) < 2.0 * w * w * w * w);
  }
}

TEST_CASE("small-w expansion converges on the dumbbell", "[greens]") {
  const auto dom = ConformalDomain::dumbbell(0.3);
  const double s0 = 0.7;
  double prev = std::numeric_limits<double>::infinity();
  for (double w : {0.1, 0.05, 0.025}) {
    const PotentialField pf(dom, w);
    const double err =
        std::abs(potential(pf, s0) - small_w_expansion(dom, s0, w)) / (w * w);
    CHECK(err < prev);
    prev = err;
  }
}
