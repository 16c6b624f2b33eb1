#include "armpg/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "armpg/advantage.hpp"
#include "armpg/estimators.hpp"
#include "armpg/parallel.hpp"
#include "armpg/rollout.hpp"
#include "armpg/sampling.hpp"

namespace armpg {

void TabularMdp::validate() const {
  if (num_states == 0 || num_states > 8) {
    throw std::invalid_argument("TabularMdp: num_states must be in [1,8]");
  }
  if (horizon == 0 || horizon > 4) throw std::invalid_argument("TabularMdp: horizon must be in [1,4]");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw std::invalid_argument("TabularMdp: gamma outside [0,1]");
  if (transitions.size() != num_states * 2 * num_states || rewards.size() != num_states * 2 ||
      init.size() != num_states) {
    throw std::invalid_argument("TabularMdp: table sizes disagree with num_states");
  }
  auto check_dist = [](const double* row, std::size_t n, const char* what) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!(row[i] >= 0.0 && row[i] <= 1.0)) {
        throw std::invalid_argument(std::string("TabularMdp: ") + what + " entry outside [0,1]");
      }
      sum += row[i];
    }
    if (std::fabs(sum - 1.0) > 1e-12) {
      throw std::invalid_argument(std::string("TabularMdp: ") + what + " does not sum to 1");
    }
  };
  for (std::size_t s = 0; s < num_states; ++s) {
    for (int a = 0; a < 2; ++a) {
      check_dist(transitions.data() + (s * 2 + static_cast<std::size_t>(a)) * num_states,
                 num_states, "transition row");
    }
  }
  check_dist(init.data(), num_states, "initial distribution");
  for (double rv : rewards) {
    if (!std::isfinite(rv)) throw std::invalid_argument("TabularMdp: non-finite reward");
  }
}

ExactValues exact_values(const TabularMdp& mdp, std::span<const double> logits) {
  mdp.validate();
  if (logits.size() != mdp.num_states) {
    throw std::invalid_argument("exact_values: one logit per state required");
  }
  const std::size_t S = mdp.num_states;
  const std::size_t H = mdp.horizon;

  ExactValues ev;
  ev.num_states = S;
  ev.horizon = H;
  ev.v.assign(H * S, 0.0);
  ev.q.assign(H * S * 2, 0.0);
  ev.a.assign(H * S * 2, 0.0);

  std::vector<double> pi1(S);
  for (std::size_t s = 0; s < S; ++s) pi1[s] = sigmoid(logits[s]);

  for (std::size_t t = H; t-- > 0;) {
    for (std::size_t s = 0; s < S; ++s) {
      double v = 0.0;
      for (int a = 0; a < 2; ++a) {
        double q = mdp.r(s, a);
        if (t + 1 < H) {
          double next = 0.0;
          for (std::size_t sn = 0; sn < S; ++sn) next += mdp.p(s, a, sn) * ev.value(t + 1, sn);
          q += mdp.gamma * next;
        }
        ev.q[(t * S + s) * 2 + static_cast<std::size_t>(a)] = q;
        v += (a == 1 ? pi1[s] : 1.0 - pi1[s]) * q;
      }
      ev.v[t * S + s] = v;
      for (int a = 0; a < 2; ++a) {
        ev.a[(t * S + s) * 2 + static_cast<std::size_t>(a)] =
            ev.qvalue(t, s, a) - v;
      }
    }
  }
  return ev;
}

namespace {

/// Visitation distribution d_t(s) for t in [0, H).
std::vector<double> visitation(const TabularMdp& mdp, const std::vector<double>& pi1) {
  const std::size_t S = mdp.num_states;
  const std::size_t H = mdp.horizon;
  std::vector<double> d(H * S, 0.0);
  for (std::size_t s = 0; s < S; ++s) d[s] = mdp.init[s];
  for (std::size_t t = 0; t + 1 < H; ++t) {
    for (std::size_t s = 0; s < S; ++s) {
      const double mass = d[t * S + s];
      if (mass == 0.0) continue;
      for (int a = 0; a < 2; ++a) {
        const double pa = a == 1 ? pi1[s] : 1.0 - pi1[s];
        for (std::size_t sn = 0; sn < S; ++sn) {
          d[(t + 1) * S + sn] += mass * pa * mdp.p(s, a, sn);
        }
      }
    }
  }
  return d;
}

}  // namespace

std::vector<double> exact_policy_gradient(const TabularMdp& mdp, std::span<const double> logits) {
  const ExactValues ev = exact_values(mdp, logits);
  const std::size_t S = mdp.num_states;
  std::vector<double> pi1(S);
  for (std::size_t s = 0; s < S; ++s) pi1[s] = sigmoid(logits[s]);
  const auto d = visitation(mdp, pi1);

  std::vector<double> grad(S, 0.0);
  for (std::size_t t = 0; t < mdp.horizon; ++t) {
    for (std::size_t s = 0; s < S; ++s) {
      const double diff = ev.advantage(t, s, 1) - ev.advantage(t, s, 0);
      grad[s] += d[t * S + s] * diff * pi1[s] * (1.0 - pi1[s]);
    }
  }
  return grad;
}

double exact_objective(const TabularMdp& mdp, std::span<const double> logits) {
  const ExactValues ev = exact_values(mdp, logits);
  double j = 0.0;
  for (std::size_t s = 0; s < mdp.num_states; ++s) j += mdp.init[s] * ev.value(0, s);
  return j;
}

namespace {

std::size_t sample_categorical(const double* probs, std::size_t n, RngStream& rng) {
  const double u = rng.uniform01();
  double cum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    cum += probs[i];
    if (u < cum) return i;
  }
  return n - 1;  // guards accumulated rounding at the top of the CDF
}

/// One simulated episode assembled as a single-segment RolloutBatch whose
/// "states" are 1-dimensional state indices, with exact on-policy advantages
/// attached. Draw order per step: coupled u, then the transition u (skipped
/// after the final step). The resampling diagnostic consumes
/// stream.substream(kResampleKey) inside the estimator kernel.
struct EpisodeSample {
  RolloutBatch batch;
  AdvantageVector adv;
  std::vector<std::size_t> visited;  // state index per step
};

constexpr std::uint64_t kResampleKey = 0x52;

EpisodeSample simulate_episode(const TabularMdp& mdp, std::span<const double> logits,
                               const ExactValues& ev, RngStream& stream) {
  EpisodeSample ep;
  ep.batch.state_dim = 1;
  const std::size_t H = mdp.horizon;
  ep.batch.reserve(H);
  ep.adv.gamma = mdp.gamma;

  std::size_t s = sample_categorical(mdp.init.data(), mdp.num_states, stream);
  for (std::size_t t = 0; t < H; ++t) {
    const CoupledDraw draw = sample_coupled(logits[s], stream);
    const double state_as_vec = static_cast<double>(s);
    const bool last = t + 1 == H;
    // Horizon end is genuine termination here: the exact Q tables already
    // assume zero value beyond the horizon.
    ep.batch.push_back(std::span<const double>(&state_as_vec, 1), draw,
                       mdp.r(s, draw.action), /*term=*/last, /*trunc=*/false, {});
    ep.adv.values.push_back(ev.advantage(t, s, draw.action));
    ep.visited.push_back(s);
    if (!last) {
      s = sample_categorical(mdp.transitions.data() + (s * 2 + static_cast<std::size_t>(draw.action)) * mdp.num_states,
                             mdp.num_states, stream);
    }
  }
  return ep;
}

}  // namespace

BiasReport estimator_bias_report(const TabularMdp& mdp, std::span<const double> logits,
                                 EstimatorKind kind, std::size_t num_batches,
                                 const RngStream& rng) {
  if (num_batches < 2) throw std::invalid_argument("estimator_bias_report: need >= 2 batches");
  const ExactValues ev = exact_values(mdp, logits);
  const std::size_t S = mdp.num_states;

  const std::size_t chunks = std::min<std::size_t>(par::kReductionChunks, num_batches);
  std::vector<std::vector<double>> sum(chunks, std::vector<double>(S, 0.0));
  std::vector<std::vector<double>> sumsq(chunks, std::vector<double>(S, 0.0));

  par::for_chunks(num_batches, chunks, [&](std::size_t chunk, std::size_t begin, std::size_t end) {
    std::vector<double> g(S);
    for (std::size_t i = begin; i < end; ++i) {
      RngStream stream = rng.substream(i);
      const EpisodeSample ep = simulate_episode(mdp, logits, ev, stream);
      const auto coeff = estimator_coefficients(kind, ep.batch, ep.adv, mdp.gamma,
                                                stream.substream(kResampleKey));
      std::fill(g.begin(), g.end(), 0.0);
      for (std::size_t t = 0; t < coeff.size(); ++t) g[ep.visited[t]] += coeff[t];
      for (std::size_t s = 0; s < S; ++s) {
        sum[chunk][s] += g[s];
        sumsq[chunk][s] += g[s] * g[s];
      }
    }
  });

  BiasReport report;
  report.kind = kind;
  report.batches = num_batches;
  report.oracle = exact_policy_gradient(mdp, logits);
  report.mean.assign(S, 0.0);
  report.se.assign(S, 0.0);
  report.z.assign(S, 0.0);
  for (std::size_t c = 0; c < chunks; ++c) {
    for (std::size_t s = 0; s < S; ++s) {
      report.mean[s] += sum[c][s];
      report.se[s] += sumsq[c][s];
    }
  }
  const auto n = static_cast<double>(num_batches);
  for (std::size_t s = 0; s < S; ++s) {
    report.mean[s] /= n;
    double var = (report.se[s] - n * report.mean[s] * report.mean[s]) / (n - 1.0);
    if (var < 0.0) var = 0.0;
    report.se[s] = std::sqrt(var / n);
    const double dev = report.mean[s] - report.oracle[s];
    report.z[s] = report.se[s] > 0.0 ? dev / report.se[s] : (dev == 0.0 ? 0.0 : INFINITY);
    report.max_abs_z = std::max(report.max_abs_z, std::fabs(report.z[s]));
  }
  return report;
}

namespace {

/// Exact u-variance of the coupled coefficient on a bandit with advantage
/// difference c = A1 - A0. The coefficient is c*(u - 1/2) on the upper tail
/// u > sigma(|phi|), -c*(u - 1/2) on the lower tail u < sigma(-|phi|), and 0
/// between them, giving (with d = sigma(|phi|) - 1/2):
///   E[D]   = c * pi1 * pi0
///   E[D^2] = (2 c^2 / 3) * (1/8 - d^3)
double arm_bandit_variance_exact(double phi, double c) {
  const double pi1 = sigmoid(phi);
  const double pi0 = 1.0 - pi1;
  const double d = sigmoid(std::fabs(phi)) - 0.5;
  const double mean = c * pi1 * pi0;
  const double second = 2.0 * c * c / 3.0 * (0.125 - d * d * d);
  return second - mean * mean;
}

double standard_bandit_variance_exact(double phi, double c) {
  // X(a) = A(a) * (a - pi1) with exact advantages A1 = pi0*c, A0 = -pi1*c:
  // X(1) = c*pi0^2 with prob pi1, X(0) = c*pi1^2 with prob pi0.
  const double pi1 = sigmoid(phi);
  const double pi0 = 1.0 - pi1;
  const double x1 = c * pi0 * pi0;
  const double x0 = c * pi1 * pi1;
  const double mean = pi1 * x1 + pi0 * x0;
  const double second = pi1 * x1 * x1 + pi0 * x0 * x0;
  return second - mean * mean;
}

}  // namespace

double arm_bandit_variance_quadrature(double phi, double reward1, double reward0,
                                      std::size_t points) {
  if (points < 10) throw std::invalid_argument("arm_bandit_variance_quadrature: too few points");
  const double c = reward1 - reward0;  // advantage difference equals reward difference
  const double lo = sigmoid(-std::fabs(phi));
  const double hi = sigmoid(std::fabs(phi));
  // On the upper tail the taken action is 0 and the pseudo action 1, so the
  // coefficient is +c*(u - 1/2); the lower tail mirrors it. This orientation
  // holds for either sign of phi.
  double mean = 0.0;
  double second = 0.0;
  const double w = 1.0 / static_cast<double>(points);
  for (std::size_t i = 0; i < points; ++i) {
    const double u = (static_cast<double>(i) + 0.5) * w;
    double dcoef = 0.0;
    if (u > hi) {
      dcoef = c * (u - 0.5);
    } else if (u < lo) {
      dcoef = -c * (u - 0.5);
    }
    mean += dcoef;
    second += dcoef * dcoef;
  }
  mean *= w;
  second *= w;
  return second - mean * mean;
}

BanditVarianceTable bandit_variance_ratio(std::span<const double> phi_grid, double reward1,
                                          double reward0) {
  if (phi_grid.empty()) throw std::invalid_argument("bandit_variance_ratio: empty grid");
  const double c = reward1 - reward0;
  BanditVarianceTable table;
  table.degenerate = c == 0.0;
  table.rows.resize(phi_grid.size());

  for (std::size_t i = 0; i < phi_grid.size(); ++i) {
    auto& row = table.rows[i];
    row.phi = phi_grid[i];
    row.var_arm = arm_bandit_variance_exact(row.phi, c);
    row.var_standard = standard_bandit_variance_exact(row.phi, c);
    table.sup_var_arm = std::max(table.sup_var_arm, row.var_arm);
    table.sup_var_standard = std::max(table.sup_var_standard, row.var_standard);
  }
  for (auto& row : table.rows) {
    row.ratio = table.degenerate ? std::nan("") : row.var_arm / table.sup_var_standard;
    if (!table.degenerate) table.sup_ratio = std::max(table.sup_ratio, row.ratio);
  }
  if (table.degenerate) table.sup_ratio = std::nan("");
  return table;
}

}  // namespace armpg
