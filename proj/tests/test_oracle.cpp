#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstddef>
#include <vector>

#include "armpg/grad.hpp"
#include "armpg/oracle.hpp"
#include "armpg/rng.hpp"
#include "armpg/sampling.hpp"

using namespace armpg;

namespace {

// Single-state, single-step bandit; rewards[0] is action 0's reward.
TabularMdp bandit(double reward_a0, double reward_a1) {
  TabularMdp m;
  m.num_states = 1;
  m.horizon = 1;
  m.gamma = 1.0;
  m.transitions = {1.0, 1.0};
  m.rewards = {reward_a0, reward_a1};
  m.init = {1.0};
  return m;
}

// Two-state chain used for all pinned-value checks below: action 1 moves
// (with prob 0.9), action 0 stays (with prob 0.9); staying in state 1 pays.
TabularMdp two_state_chain() {
  TabularMdp m;
  m.num_states = 2;
  m.horizon = 2;
  m.gamma = 1.0;
  m.transitions = {0.9, 0.1, 0.1, 0.9,   // from s=0: a=0 stays, a=1 moves
                   0.9, 0.1, 0.1, 0.9};  // from s=1: a=0 moves back, a=1 stays
  m.rewards = {0.0, 1.0, 2.0, -0.5};
  m.init = {0.7, 0.3};
  return m;
}

}  // namespace

TEST_CASE("zero rewards give zero values and zero gradient") {
  TabularMdp m = two_state_chain();
  m.rewards = {0.0, 0.0, 0.0, 0.0};
  const std::vector<double> logits{0.8, -1.1};
  const ExactValues ev = exact_values(m, logits);
  for (double v : ev.v) CHECK(v == 0.0);
  for (double q : ev.q) CHECK(q == 0.0);
  for (double g : exact_policy_gradient(m, logits)) CHECK(g == 0.0);
  CHECK(exact_objective(m, logits) == 0.0);
}

TEST_CASE("bandit values and gradient in closed form") {
  const TabularMdp m = bandit(0.0, 1.0);
  const std::vector<double> logits{0.0};
  const ExactValues ev = exact_values(m, logits);
  CHECK(std::abs(ev.value(0, 0) - 0.5) <= 1e-15);
  CHECK(ev.qvalue(0, 0, 1) == 1.0);
  CHECK(ev.qvalue(0, 0, 0) == 0.0);
  CHECK(std::abs(ev.advantage(0, 0, 1) - 0.5) <= 1e-15);
  CHECK(std::abs(ev.advantage(0, 0, 0) + 0.5) <= 1e-15);
  // d/dphi sigma(phi) at 0 times the reward gap
  CHECK(std::abs(exact_policy_gradient(m, logits)[0] - 0.25) <= 1e-15);

  const TabularMdp wide = bandit(-1.0, 1.0);
  CHECK(std::abs(exact_policy_gradient(wide, logits)[0] - 0.5) <= 1e-15);
}

TEST_CASE("two-state chain against independently computed values") {
  const TabularMdp m = two_state_chain();
  const std::vector<double> logits{0.3, -0.4};
  const ExactValues ev = exact_values(m, logits);
  REQUIRE(ev.num_states == 2);
  REQUIRE(ev.horizon == 2);

  // last step (t = 1): Q is just the immediate reward
  CHECK(ev.qvalue(1, 0, 0) == 0.0);
  CHECK(ev.qvalue(1, 0, 1) == 1.0);
  CHECK(ev.qvalue(1, 1, 0) == 2.0);
  CHECK(ev.qvalue(1, 1, 1) == -0.5);
  CHECK(std::abs(ev.value(1, 0) - 0.574442516811659) <= 1e-12);
  CHECK(std::abs(ev.value(1, 1) - 0.99671915028113) <= 1e-12);
  CHECK(std::abs(ev.advantage(1, 0, 1) - 0.42555748318834097) <= 1e-12);
  CHECK(std::abs(ev.advantage(1, 1, 0) - 1.00328084971887) <= 1e-12);

  // first step (t = 0): one lookahead through the transition kernel
  CHECK(std::abs(ev.qvalue(0, 0, 0) - 0.6166701801586062) <= 1e-12);
  CHECK(std::abs(ev.qvalue(0, 0, 1) - 1.954491486934183) <= 1e-12);
  CHECK(std::abs(ev.qvalue(0, 1, 0) - 2.6166701801586063) <= 1e-12);
  CHECK(std::abs(ev.qvalue(0, 1, 1) - 0.45449148693418295) <= 1e-12);
  CHECK(std::abs(ev.value(0, 0) - 1.385171618667031) <= 1e-12);
  CHECK(std::abs(ev.value(0, 1) - 1.7489611895257122) <= 1e-12);
  CHECK(std::abs(ev.advantage(0, 0, 0) + 0.7685014385084249) <= 1e-12);
  CHECK(std::abs(ev.advantage(0, 0, 1) - 0.5693198682671519) <= 1e-12);
  CHECK(std::abs(ev.advantage(0, 1, 0) - 0.8677089906328941) <= 1e-12);
  CHECK(std::abs(ev.advantage(0, 1, 1) + 1.2944697025915293) <= 1e-12);

  CHECK(std::abs(exact_objective(m, logits) - 1.4943084899246353) <= 1e-12);

  const auto g = exact_policy_gradient(m, logits);
  CHECK(std::abs(g[0] - 0.34675730544278904) <= 1e-12);
  CHECK(std::abs(g[1] + 0.46698532971227613) <= 1e-12);

  // at the uniform policy the gradient has a short closed form
  const std::vector<double> uniform{0.0, 0.0};
  const auto gu = exact_policy_gradient(m, uniform);
  CHECK(std::abs(gu[0] - 0.335) <= 1e-12);
  CHECK(std::abs(gu[1] + 0.485) <= 1e-12);
}

TEST_CASE("policy-weighted advantages sum to zero at every (t, s)") {
  const TabularMdp m = two_state_chain();
  const std::vector<double> logits{1.2, -0.7};
  const ExactValues ev = exact_values(m, logits);
  for (std::size_t t = 0; t < 2; ++t) {
    for (std::size_t s = 0; s < 2; ++s) {
      const double p1 = sigmoid(logits[s]);
      const double mix = p1 * ev.advantage(t, s, 1) + (1.0 - p1) * ev.advantage(t, s, 0);
      CHECK(std::abs(mix) <= 1e-12);
    }
  }
}

TEST_CASE("gradient vanishes for saturated policies and flips with the problem") {
  const TabularMdp m = two_state_chain();
  const std::vector<double> sat{20.0, -20.0};
  for (double g : exact_policy_gradient(m, sat)) CHECK(std::abs(g) <= 1e-7);

  // swapping the two actions' rewards and negating the logit mirrors the bandit
  const auto g1 = exact_policy_gradient(bandit(0.0, 1.0), std::vector<double>{0.7});
  const auto g2 = exact_policy_gradient(bandit(1.0, 0.0), std::vector<double>{-0.7});
  CHECK(std::abs(g1[0] + g2[0]) <= 1e-15);
}

TEST_CASE("gradient matches finite differences of the objective") {
  const TabularMdp m = two_state_chain();
  std::vector<double> logits{0.3, -0.4};
  const auto g = exact_policy_gradient(m, logits);
  const double h = 1e-6;
  for (std::size_t s = 0; s < 2; ++s) {
    const double keep = logits[s];
    logits[s] = keep + h;
    const double up = exact_objective(m, logits);
    logits[s] = keep - h;
    const double dn = exact_objective(m, logits);
    logits[s] = keep;
    CHECK(std::abs(g[s] - (up - dn) / (2.0 * h)) <= 1e-6);
  }
}

TEST_CASE("mdp validation rejects malformed inputs") {
  TabularMdp ok = two_state_chain();
  CHECK_NOTHROW(ok.validate());

  TabularMdp big = ok;
  big.num_states = 9;
  CHECK_THROWS(big.validate());

  TabularMdp long_h = ok;
  long_h.horizon = 5;
  CHECK_THROWS(long_h.validate());

  TabularMdp bad_row = ok;
  bad_row.transitions[0] = 0.5;  // row no longer sums to 1
  CHECK_THROWS(bad_row.validate());

  TabularMdp neg = ok;
  neg.transitions[0] = -0.1;
  neg.transitions[1] = 1.1;
  CHECK_THROWS(neg.validate());
}

TEST_CASE("bias report: unbiased estimator lands, biased one is caught") {
  const TabularMdp m = two_state_chain();
  const std::vector<double> logits{0.0, 0.0};

  const BiasReport arm = estimator_bias_report(m, logits, EstimatorKind::kArm, 2000,
                                               RngStream(61, 0));
  REQUIRE(arm.mean.size() == 2);
  CHECK(arm.batches == 2000);
  CHECK(arm.max_abs_z < 4.0);
  for (std::size_t s = 0; s < 2; ++s) {
    CHECK(std::abs(arm.oracle[s] - exact_policy_gradient(m, logits)[s]) <= 1e-15);
  }

  const BiasReport bad = estimator_bias_report(m, logits, EstimatorKind::kResampledA2c, 2000,
                                               RngStream(61, 0));
  CHECK(bad.max_abs_z > 5.0);

  // replaying the stream reproduces the report bit for bit
  const BiasReport again = estimator_bias_report(m, logits, EstimatorKind::kArm, 2000,
                                                 RngStream(61, 0));
  CHECK(again.mean == arm.mean);
  CHECK(again.se == arm.se);
}

TEST_CASE("bandit variance table: pinned points and the global bound") {
  // explicit grid containing exactly 0: the standard coefficient's variance
  // vanishes there while the coupled one keeps its u-noise of c^2/48
  const std::vector<double> small_grid{-1.0, 0.0, 1.0};
  const BanditVarianceTable at0 = bandit_variance_ratio(small_grid, 1.0, 0.0);
  REQUIRE(at0.rows.size() == 3);
  CHECK(at0.rows[1].phi == 0.0);
  CHECK(at0.rows[1].var_standard == 0.0);
  CHECK(std::abs(at0.rows[1].var_arm - 1.0 / 48.0) <= 1e-12);
  CHECK(!at0.degenerate);

  // production grid [-4, 4] in steps of 0.05
  std::vector<double> grid;
  for (int k = 0; k <= 160; ++k) grid.push_back(-4.0 + 0.05 * k);
  const BanditVarianceTable t = bandit_variance_ratio(grid, 1.0, 0.0);
  CHECK(t.sup_ratio > 0.63);
  CHECK(t.sup_ratio <= 0.64 + 1e-9);
  for (const auto& row : t.rows) {
    CHECK(row.ratio <= 0.64 + 1e-9);
    CHECK(row.var_arm >= 0.0);
    CHECK(row.var_standard >= 0.0);
    CHECK(row.ratio == row.var_arm / t.sup_var_standard);
  }

  // scaling both rewards by c scales every variance by c^2
  const BanditVarianceTable t2 = bandit_variance_ratio(grid, 2.0, 0.0);
  CHECK(std::abs(t2.sup_var_arm - 4.0 * t.sup_var_arm) <= 1e-12);
  CHECK(std::abs(t2.sup_ratio - t.sup_ratio) <= 1e-12);

  // equal rewards: nothing to estimate, ratios are flagged NaN
  const BanditVarianceTable flat = bandit_variance_ratio(small_grid, 2.0, 2.0);
  CHECK(flat.degenerate);
  for (const auto& row : flat.rows) {
    CHECK(row.var_arm == 0.0);
    CHECK(row.var_standard == 0.0);
    CHECK(std::isnan(row.ratio));
  }
}

TEST_CASE("closed-form pair variance agrees with quadrature") {
  for (double phi : {0.0, 0.8, -1.45, 3.0}) {
    const std::vector<double> grid{phi};
    const BanditVarianceTable t = bandit_variance_ratio(grid, 1.0, 0.0);
    const double quad = arm_bandit_variance_quadrature(phi, 1.0, 0.0, 100000);
    CHECK(std::abs(t.rows[0].var_arm - quad) <= 1e-5);
  }
}
