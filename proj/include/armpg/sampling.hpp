#pragma once

#include "armpg/rng.hpp"

namespace armpg {

/// Numerically stable logistic function sigma(x) = 1 / (1 + exp(-x)).
/// Never overflows for |x| up to ~700; saturates to 0/1 in double precision
/// beyond |x| of about 37.
double sigmoid(double phi);

/// One antithetically coupled pair of binary actions driven by a single
/// uniform variate u for a policy with logit phi (prob_one = sigma(phi)):
///   action        = 1  iff  u < sigma(phi)
///   pseudo_action = 1  iff  u > sigma(-phi)
/// The pair agrees exactly when u falls strictly between sigma(-|phi|) and
/// sigma(|phi|), and disagrees on the two tails outside that interval.
struct CoupledDraw {
  double u = 0.0;         // uniform variate in (0,1)
  int action = 0;         // action actually taken
  int pseudo_action = 0;  // antithetic companion action
  double prob_one = 0.0;  // sigma(phi) at the time of the draw
};

/// Evaluates the coupled pair at an externally supplied u in (0,1).
/// Throws std::invalid_argument if u is outside the open interval or phi is
/// not finite.
CoupledDraw sample_coupled(double phi, double u);

/// Draws u from `rng` and evaluates the coupled pair.
CoupledDraw sample_coupled(double phi, RngStream& rng);

/// Exact probability that action and pseudo_action differ: the combined mass
/// of the two tails u < sigma(-|phi|) and u > sigma(|phi|), which is
///   P(differ) = 2 * sigma(-|phi|).
/// Equals 1 at phi = 0 and decays to 0 as |phi| grows.
double prob_actions_differ(double phi);

}  // namespace armpg
