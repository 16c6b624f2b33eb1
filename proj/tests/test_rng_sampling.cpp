#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <limits>
#include <vector>

#include "armpg/rng.hpp"
#include "armpg/sampling.hpp"

using namespace armpg;

TEST_CASE("streams replay and differ by id") {
  RngStream a(42, 7);
  RngStream b(42, 7);
  for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());

  RngStream c(42, 8);
  RngStream d(43, 7);
  int equal_c = 0, equal_d = 0;
  RngStream a2(42, 7);
  for (int i = 0; i < 1000; ++i) {
    const std::uint64_t x = a2.next_u64();
    equal_c += x == c.next_u64();
    equal_d += x == d.next_u64();
  }
  CHECK(equal_c < 5);
  CHECK(equal_d < 5);
}

TEST_CASE("uniform01 stays strictly inside (0,1) and never hits 1/2") {
  RngStream rng(1, 0);
  double sum = 0.0;
  for (int i = 0; i < 1000000; ++i) {
    const double u = rng.uniform01();
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
    REQUIRE(u != 0.5);
    sum += u;
  }
  // mean of 1e6 uniforms: se = 1/sqrt(12e6) ~ 2.9e-4
  CHECK(std::abs(sum / 1e6 - 0.5) < 3.0 * 2.9e-4);
}

TEST_CASE("substreams never advance the parent") {
  RngStream parent(9, 3);
  RngStream witness(9, 3);
  RngStream child = parent.substream(11);
  for (int i = 0; i < 100; ++i) (void)child.next_u64();
  for (int i = 0; i < 100; ++i) CHECK(parent.next_u64() == witness.next_u64());

  // same key reproduces the same child; different keys differ
  RngStream child2 = witness.substream(11);
  RngStream child3 = witness.substream(12);
  RngStream child1 = parent.substream(11);
  CHECK(child1.next_u64() == child2.next_u64());
  CHECK(child2.next_u64() != child3.next_u64());
}

TEST_CASE("sigmoid fixed points") {
  CHECK(sigmoid(0.0) == 0.5);
  CHECK(std::abs(sigmoid(std::log(3.0)) - 0.75) <= 1e-15);
  CHECK(std::abs(sigmoid(50.0) - 1.0) <= 1e-15);
  CHECK(sigmoid(-50.0) <= 1e-15);
  CHECK(sigmoid(-50.0) > 0.0);
  CHECK(std::isfinite(sigmoid(745.0)));
  CHECK(std::isfinite(sigmoid(-745.0)));
  CHECK(std::abs(sigmoid(2.0) + sigmoid(-2.0) - 1.0) <= 1e-15);
  CHECK_THROWS(sigmoid(std::numeric_limits<double>::quiet_NaN()));
}

TEST_CASE("coupled pair at pinned (phi, u) points") {
  // logit 0: u below 1/2 takes action 1 while the companion stays at 0
  CoupledDraw d = sample_coupled(0.0, 0.3);
  CHECK(d.action == 1);
  CHECK(d.pseudo_action == 0);
  CHECK(d.prob_one == 0.5);
  CHECK(d.u == 0.3);

  // strong positive logit: the middle of (0,1) is agreement territory
  d = sample_coupled(2.0, 0.5);
  CHECK(d.action == 1);
  CHECK(d.pseudo_action == 1);

  d = sample_coupled(-2.0, 0.5);
  CHECK(d.action == 0);
  CHECK(d.pseudo_action == 0);
}

TEST_CASE("coupled pair rejects bad inputs") {
  CHECK_THROWS(sample_coupled(0.0, 0.0));
  CHECK_THROWS(sample_coupled(0.0, 1.0));
  CHECK_THROWS(sample_coupled(0.0, -0.1));
  CHECK_THROWS(sample_coupled(0.0, 1.5));
  CHECK_THROWS(sample_coupled(0.0, std::numeric_limits<double>::quiet_NaN()));
  CHECK_THROWS(sample_coupled(std::numeric_limits<double>::infinity(), 0.5));
  CHECK_THROWS(sample_coupled(std::numeric_limits<double>::quiet_NaN(), 0.5));
}

TEST_CASE("disagreement probability closed form") {
  CHECK(prob_actions_differ(0.0) == 1.0);
  CHECK(std::abs(prob_actions_differ(2.0) - 0.23840584404423515) <= 1e-15);
  CHECK(prob_actions_differ(2.0) == prob_actions_differ(-2.0));
  CHECK(prob_actions_differ(40.0) < 1e-16);
}

TEST_CASE("empirical pair law matches the closed forms") {
  const double phi = 1.0;
  const std::size_t n = 100000;
  RngStream rng(5, 0);
  std::size_t differ = 0, act1 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const CoupledDraw d = sample_coupled(phi, rng);
    differ += d.action != d.pseudo_action;
    act1 += d.action == 1;
  }
  const double nd = static_cast<double>(n);
  const double p_diff = prob_actions_differ(phi);
  const double se_diff = std::sqrt(p_diff * (1.0 - p_diff) / nd);
  CHECK(std::abs(static_cast<double>(differ) / nd - p_diff) < 3.0 * se_diff);

  const double p1 = sigmoid(phi);
  const double se1 = std::sqrt(p1 * (1.0 - p1) / nd);
  CHECK(std::abs(static_cast<double>(act1) / nd - p1) < 3.0 * se1);
}

TEST_CASE("marginal of the companion action is sigma(phi) too") {
  const double phi = -0.5;
  const std::size_t n = 100000;
  RngStream rng(6, 0);
  std::size_t pseudo1 = 0;
  for (std::size_t i = 0; i < n; ++i) pseudo1 += sample_coupled(phi, rng).pseudo_action == 1;
  const double p1 = sigmoid(phi);
  const double se = std::sqrt(p1 * (1.0 - p1) / static_cast<double>(n));
  CHECK(std::abs(static_cast<double>(pseudo1) / static_cast<double>(n) - p1) < 3.0 * se);
}
