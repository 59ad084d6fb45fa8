#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "rror/error.hpp"
#include "rror/rng.hpp"

using rror::Philox4x32;
using rror::RandomStream;

TEST_CASE("Philox4x32-10 known-answer vectors") {
  using B = Philox4x32::Block;
  using K = Philox4x32::Key;
  CHECK(Philox4x32::encrypt(B{0, 0, 0, 0}, K{0, 0}) ==
        B{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
  CHECK(Philox4x32::encrypt(B{0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                            K{0xffffffffu, 0xffffffffu}) ==
        B{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
  CHECK(Philox4x32::encrypt(B{0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                            K{0xa4093822u, 0x299f31d0u}) ==
        B{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("generator walks the counter and separates streams") {
  Philox4x32 g(0, 0);
  const auto first = Philox4x32::encrypt({0, 0, 0, 0}, {0, 0});
  for (auto w : first) CHECK(g() == w);
  const auto second = Philox4x32::encrypt({1, 0, 0, 0}, {0, 0});
  CHECK(g() == second[0]);

  Philox4x32 a(42, 0), b(42, 1), c(42, 0);
  int same = 0;
  for (int i = 0; i < 64; ++i) {
    const auto x = a(), y = b();
    CHECK(x == c());
    same += x == y;
  }
  CHECK(same < 2);
}

TEST_CASE("uniform and normal moments") {
  RandomStream rng(7);
  const int n = 200000;
  double su = 0.0, sz = 0.0, szz = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    CHECK_UNARY(u > 0.0);
    CHECK_UNARY(u < 1.0);
    su += u;
    const double z = rng.normal();
    sz += z;
    szz += z * z;
  }
  CHECK(std::abs(su / n - 0.5) < 4.0 * std::sqrt(1.0 / 12.0 / n));
  CHECK(std::abs(sz / n) < 4.0 / std::sqrt(n));
  CHECK(std::abs(szz / n - 1.0) < 4.0 * std::sqrt(2.0 / n));
}

TEST_CASE("gamma moments") {
  for (double shape : {0.4, 1.0, 3.5, 60.0}) {
    RandomStream rng(11);
    const int n = 100000;
    double s = 0.0, ss = 0.0;
    for (int i = 0; i < n; ++i) {
      const double g = rng.gamma(shape);
      CHECK_UNARY(g > 0.0);
      s += g;
      ss += g * g;
    }
    const double mean = s / n;
    const double var = ss / n - mean * mean;
    CHECK(std::abs(mean - shape) < 4.0 * std::sqrt(shape / n));
    CHECK(std::abs(var / shape - 1.0) < 0.05);
  }
  RandomStream rng(1);
  CHECK_THROWS_AS(rng.gamma(0.0), rror::InputError);
}

TEST_CASE("same seed, same sequence") {
  RandomStream a(99, 3), b(99, 3);
  for (int i = 0; i < 1000; ++i) {
    CHECK(a.normal() == b.normal());
    CHECK(a.gamma(2.5) == b.gamma(2.5));
  }
}
