#include <doctest.h>

#include <cmath>
#include <vector>

#include "npglab/rng.hpp"

using namespace npglab;

TEST_SUITE_BEGIN("rng");

TEST_CASE("draws are deterministic in (seed, run, stream, index)") {
  CounterRng a(42, 7), b(42, 7);
  for (int i = 0; i < 100; ++i)
    CHECK(a.uniform(RngStream::kAction) == b.uniform(RngStream::kAction));

  CounterRng c(42, 8);
  int same = 0;
  for (int i = 0; i < 100; ++i) {
    CounterRng fresh(42, 7);
    (void)fresh;
    if (b.uniform(RngStream::kAction) == c.uniform(RngStream::kAction)) ++same;
  }
  CHECK(same < 5);
}

TEST_CASE("streams are independent cursors") {
  CounterRng a(1, 0);
  double first_action = a.uniform(RngStream::kAction);
  CounterRng b(1, 0);
  // consuming other streams does not shift the action stream
  b.uniform(RngStream::kState);
  b.uniform(RngStream::kReward);
  CHECK(b.uniform(RngStream::kAction) == first_action);
}

TEST_CASE("uniform lies in [0, 1) and looks uniform") {
  CounterRng rng(123, 0);
  const int n = 200000;
  int buckets[10] = {0};
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    double u = rng.uniform(RngStream::kGeneric);
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    sum += u;
    ++buckets[static_cast<int>(u * 10.0)];
  }
  CHECK(std::abs(sum / n - 0.5) < 0.005);
  for (int count : buckets) CHECK(std::abs(count - n / 10) < 1000);
}

TEST_CASE("categorical sampling skips zero-probability entries") {
  std::vector<double> probs = {0.0, 0.5, 0.0, 0.5, 0.0};
  CounterRng rng(5, 0);
  for (int i = 0; i < 1000; ++i) {
    std::size_t pick = sample_categorical(probs, rng.uniform(RngStream::kGeneric));
    CHECK((pick == 1 || pick == 3));
  }
  // u beyond the accumulated sum falls back to the last positive entry
  CHECK(sample_categorical(probs, 0.999999999999999) == 3);
}

TEST_SUITE_END();
