#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdint>

#include "barankin/rng.hpp"

using barankin::rng::philox4x32;
using barankin::rng::Stream;

TEST_CASE("philox4x32-10 known-answer vector (zero key, zero counter)") {
  const auto out = philox4x32(0, 0, 0);
  CHECK(out[0] == 0x6627e8d5u);
  CHECK(out[1] == 0xe169c58du);
  CHECK(out[2] == 0xbc57ac4cu);
  CHECK(out[3] == 0x9b00dbd8u);
}

TEST_CASE("distinct counters, streams and seeds give distinct blocks") {
  const auto a = philox4x32(1, 0, 0);
  CHECK(philox4x32(1, 0, 1) != a);
  CHECK(philox4x32(1, 1, 0) != a);
  CHECK(philox4x32(2, 0, 0) != a);
}

TEST_CASE("streams are reproducible") {
  Stream a(42, 7), b(42, 7);
  for (int i = 0; i < 100; ++i) CHECK(a.uniform() == b.uniform());
  Stream c(42, 8);
  int same = 0;
  Stream a2(42, 7);
  for (int i = 0; i < 100; ++i) same += a2.uniform() == c.uniform();
  CHECK(same < 5);
}

TEST_CASE("uniform moments") {
  Stream s(123, 0);
  const int n = 200000;
  double mean = 0.0, var = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = s.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    mean += u;
    var += (u - 0.5) * (u - 0.5);
  }
  mean /= n;
  var /= n;
  CHECK(std::abs(mean - 0.5) < 4.0 / std::sqrt(12.0 * n));
  CHECK(std::abs(var - 1.0 / 12.0) < 4.0 * 0.1 / std::sqrt(double(n)));
}

TEST_CASE("normal moments") {
  Stream s(321, 5);
  const int n = 200000;
  double mean = 0.0, var = 0.0, kurt = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = s.normal();
    mean += z;
    var += z * z;
    kurt += z * z * z * z;
  }
  mean /= n;
  var /= n;
  kurt /= n;
  CHECK(std::abs(mean) < 4.0 / std::sqrt(double(n)));
  CHECK(std::abs(var - 1.0) < 4.0 * std::sqrt(2.0 / n));
  CHECK(std::abs(kurt - 3.0) < 4.0 * std::sqrt(96.0 / n));
}
