#include "armpg/sampling.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace armpg {

double sigmoid(double phi) {
  if (std::isnan(phi)) throw std::invalid_argument("sigmoid: phi is NaN");
  if (phi >= 0.0) {
    return 1.0 / (1.0 + std::exp(-phi));
  }
  const double e = std::exp(phi);
  return e / (1.0 + e);
}

CoupledDraw sample_coupled(double phi, double u) {
  if (!std::isfinite(phi)) throw std::invalid_argument("sample_coupled: phi must be finite");
  if (!(u > 0.0 && u < 1.0)) {
    throw std::invalid_argument("sample_coupled: u must lie strictly in (0,1), got " +
                                std::to_string(u));
  }
  CoupledDraw d;
  d.u = u;
  d.prob_one = sigmoid(phi);
  d.action = u < d.prob_one ? 1 : 0;
  d.pseudo_action = u > sigmoid(-phi) ? 1 : 0;
  return d;
}

CoupledDraw sample_coupled(double phi, RngStream& rng) {
  return sample_coupled(phi, rng.uniform01());
}

double prob_actions_differ(double phi) {
  if (!std::isfinite(phi)) throw std::invalid_argument("prob_actions_differ: phi must be finite");
  return 2.0 * sigmoid(-std::fabs(phi));
}

}  // namespace armpg
