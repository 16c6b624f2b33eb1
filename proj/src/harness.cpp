#include "armpg/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <utility>

#include "armpg/advantage.hpp"
#include "armpg/estimators.hpp"
#include "armpg/grad.hpp"
#include "armpg/parallel.hpp"
#include "armpg/sampling.hpp"

namespace armpg {

const char* const kMetricsCsvHeader =
    "iter,env_steps,mean_return,min_return,max_return,action_diff_rate,zero_grad_frac,"
    "grad_norm,critic_loss,wallclock_s";

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

std::string fmt_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

double elapsed_seconds(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - since).count();
}

}  // namespace

std::string metrics_csv_row(const IterationMetrics& m) {
  std::string row = std::to_string(m.iter);
  row += ',';
  row += std::to_string(m.env_steps);
  for (double x : {m.mean_return, m.min_return, m.max_return, m.action_diff_rate,
                   m.zero_grad_frac, m.grad_norm, m.critic_loss, m.wallclock_s}) {
    row += ',';
    row += fmt_double(x);
  }
  return row;
}

RolloutCollector::RolloutCollector(EnvSpec spec, RngStream env_rng)
    : spec_(std::move(spec)), env_rng_(env_rng), current_(reset(spec_, env_rng_)) {}

RolloutBatch RolloutCollector::collect(const Mlp& policy, std::size_t batch_size,
                                       RngStream& policy_rng,
                                       std::vector<double>* completed_returns) {
  if (batch_size == 0) throw std::invalid_argument("collect: batch_size must be >= 1");
  if (policy.input_dim() != spec_.state_dim()) {
    throw std::invalid_argument("collect: policy input width does not match the observation");
  }
  RolloutBatch batch;
  batch.state_dim = spec_.state_dim();
  batch.reserve(batch_size);
  while (batch.size() < batch_size) {
    const double logit = policy.forward(current_.obs, cache_);
    const CoupledDraw draw = sample_coupled(logit, policy_rng);
    const StepResult sr = step(spec_, current_, draw.action);
    episode_return_ += sr.reward;

    const bool episode_over = sr.terminal || sr.truncated;
    // The batch may end mid-episode; the row is then truncated so the critic
    // bootstraps, but the environment itself keeps running into the next
    // batch.
    const bool batch_cut = !episode_over && batch.size() + 1 == batch_size;
    const bool trunc_row = sr.truncated || batch_cut;
    batch.push_back(current_.obs, draw, sr.reward, sr.terminal, trunc_row,
                    trunc_row ? std::span<const double>(sr.next.obs) : std::span<const double>());

    if (episode_over) {
      if (completed_returns != nullptr) completed_returns->push_back(episode_return_);
      episode_return_ = 0.0;
      current_ = reset(spec_, env_rng_);
    } else {
      current_ = sr.next;
    }
  }
  batch.validate();
  return batch;
}

TrainResult train(const TrainConfig& config, std::ostream* progress) {
  config.validate();
  if (config.out_dir.empty()) throw std::invalid_argument("train: out_dir must be set");

  const EnvSpec spec = EnvSpec::make(config.env, config.horizon);
  const std::size_t dim = spec.state_dim();
  const std::size_t iterations = config.resolved_iterations();

  RngStream policy_init(config.seed, 0);
  RngStream critic_init(config.seed, 1);
  RngStream env_rng(config.seed, 2);
  RngStream policy_u(config.seed, 3);
  RngStream critic_shuffle(config.seed, 4);
  const RngStream resample_base(config.seed, 5);

  Mlp policy = Mlp::he_init({dim, 64, 64, 1}, policy_init);
  Mlp critic = Mlp::he_init({dim, 64, 64, 1}, critic_init);
  AdamState policy_opt(policy.param_count(), config.policy_lr);
  AdamState critic_opt(critic.param_count(), config.critic_lr);
  RolloutCollector collector(spec, env_rng);

  const std::filesystem::path out(config.out_dir);
  std::filesystem::create_directories(out);
  const std::filesystem::path csv_path = out / "metrics.csv";
  std::ofstream csv(csv_path, std::ios::trunc);
  if (!csv) throw std::runtime_error("train: cannot write " + csv_path.string());
  csv << kMetricsCsvHeader << '\n' << std::flush;

  TrainResult result{{}, policy, critic, csv_path};
  result.metrics.reserve(iterations);
  std::size_t env_steps = 0;

  try {
    for (std::size_t iter = 1; iter <= iterations; ++iter) {
      const auto t0 = std::chrono::steady_clock::now();
      std::vector<double> returns;
      RolloutBatch batch = collector.collect(policy, config.batch_size, policy_u, &returns);
      env_steps += batch.size();

      CriticFitResult fit{};
      auto advantages = [&] {
        return config.advantage == AdvantageMethod::kGae
                   ? gae(batch, critic, config.gamma, config.lambda)
                   : a2c_advantage(batch, critic, config.gamma);
      };
      AdvantageVector adv = [&] {
        if (config.fit_critic_first) {
          fit = fit_critic(batch, critic, critic_opt, config.gamma, config.critic_epochs,
                           config.critic_minibatch, critic_shuffle);
          return advantages();
        }
        AdvantageVector pre = advantages();
        fit = fit_critic(batch, critic, critic_opt, config.gamma, config.critic_epochs,
                         config.critic_minibatch, critic_shuffle);
        return pre;
      }();
      if (config.normalize_advantage) normalize_advantages(adv);

      const std::vector<double> coeff = estimator_coefficients(
          config.estimator, batch, adv, config.gamma, resample_base.substream(iter));
      GradientVector grad = policy_gradient_from_coefficients(policy, batch, coeff,
                                                              config.estimator);
      double norm = l2_norm(grad);
      if (config.clip_norm > 0.0 && norm > config.clip_norm) {
        const double scale = config.clip_norm / norm;
        for (double& g : grad.values) g *= scale;
        norm = l2_norm(grad);
      }
      adam_step(policy.params(), policy_opt, grad, /*maximize=*/true);

      IterationMetrics m;
      m.iter = iter;
      m.env_steps = env_steps;
      if (returns.empty()) {
        m.mean_return = m.min_return = m.max_return = kNan;
      } else {
        double sum = 0.0;
        for (double r : returns) sum += r;
        m.mean_return = sum / static_cast<double>(returns.size());
        m.min_return = *std::min_element(returns.begin(), returns.end());
        m.max_return = *std::max_element(returns.begin(), returns.end());
      }
      std::size_t differ = 0;
      std::size_t zeros = 0;
      for (std::size_t t = 0; t < batch.size(); ++t) {
        if (batch.draws[t].action != batch.draws[t].pseudo_action) ++differ;
        if (coeff[t] == 0.0) ++zeros;
      }
      m.action_diff_rate = static_cast<double>(differ) / static_cast<double>(batch.size());
      m.zero_grad_frac = static_cast<double>(zeros) / static_cast<double>(batch.size());
      m.grad_norm = norm;
      m.critic_loss = fit.loss_after;
      m.wallclock_s = elapsed_seconds(t0);
      result.metrics.push_back(m);
      csv << metrics_csv_row(m) << '\n' << std::flush;
      if (progress != nullptr) {
        *progress << "iter " << iter << '/' << iterations << " steps " << env_steps
                  << " mean_return " << fmt_double(m.mean_return) << " diff_rate "
                  << fmt_double(m.action_diff_rate) << '\n';
        progress->flush();
      }
    }
  } catch (const std::exception& e) {
    csv << "# aborted: " << e.what() << '\n' << std::flush;
    throw;
  }

  result.policy = policy;
  result.critic = critic;
  policy.save(out / "policy.bin");
  critic.save(out / "critic.bin");
  TrainConfig resolved = config;
  resolved.iterations = iterations;
  write_resolved_config(resolved, out / "resolved_config.txt");
  return result;
}

const char* to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::kBatch: return "batch";
    case SweepAxis::kLr: return "lr";
    case SweepAxis::kSeeds: return "seeds";
  }
  return "?";
}

namespace {

struct RunPlan {
  std::size_t run_id = 0;
  TrainConfig config;
};

std::string run_dir_name(std::size_t run_id) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "run_%03zu", run_id);
  return buf;
}

/// Mean of the trailing-window mean_return entries, skipping rows where no
/// episode finished (nan); nan when the window holds no finished episodes.
std::pair<double, double> window_stats(const std::vector<IterationMetrics>& metrics,
                                       std::size_t window) {
  const std::size_t n = metrics.size();
  const std::size_t begin = n > window ? n - window : 0;
  std::vector<double> vals;
  for (std::size_t i = begin; i < n; ++i) {
    if (!std::isnan(metrics[i].mean_return)) vals.push_back(metrics[i].mean_return);
  }
  if (vals.empty()) return {kNan, kNan};
  double sum = 0.0;
  for (double v : vals) sum += v;
  const double mean = sum / static_cast<double>(vals.size());
  if (vals.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double v : vals) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / static_cast<double>(vals.size() - 1))};
}

double quantile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return kNan;
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

std::string sanitize_csv_field(std::string s) {
  for (char& c : s) {
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  }
  return s;
}

}  // namespace

SweepResult sweep(const SweepConfig& config, std::ostream* progress) {
  if (config.out_dir.empty()) throw std::invalid_argument("sweep: out_dir must be set");
  if (config.jobs == 0) throw std::invalid_argument("sweep: jobs must be >= 1");

  const std::filesystem::path out(config.out_dir);
  std::filesystem::create_directories(out);

  std::vector<RunPlan> plans;
  switch (config.axis) {
    case SweepAxis::kBatch: {
      if (config.batch_sizes.empty()) {
        throw std::invalid_argument("sweep: batch axis needs batch_sizes");
      }
      // Freeze the iteration count at the base config's so every batch size
      // performs the same number of updates (smaller batches see fewer steps).
      const std::size_t iters = config.base.resolved_iterations();
      for (std::size_t b : config.batch_sizes) {
        for (std::uint64_t seed : config.seeds) {
          TrainConfig c = config.base;
          c.batch_size = b;
          c.iterations = iters;
          c.seed = seed;
          plans.push_back({plans.size(), std::move(c)});
        }
      }
      break;
    }
    case SweepAxis::kLr: {
      // Joint draws: learning rate log-uniform, seed fresh per draw, both
      // from one dedicated stream so the whole sweep replays from base.seed.
      RngStream draw_rng(config.base.seed, 100);
      for (std::size_t i = 0; i < config.lr_draws; ++i) {
        TrainConfig c = config.base;
        c.policy_lr = std::pow(10.0, draw_rng.uniform(config.log10_lr_min, config.log10_lr_max));
        c.critic_lr = c.policy_lr;
        c.seed = draw_rng.next_u64();
        plans.push_back({plans.size(), std::move(c)});
      }
      break;
    }
    case SweepAxis::kSeeds: {
      if (config.seeds.empty()) throw std::invalid_argument("sweep: seeds axis needs seeds");
      for (std::uint64_t seed : config.seeds) {
        TrainConfig c = config.base;
        c.seed = seed;
        plans.push_back({plans.size(), std::move(c)});
      }
      break;
    }
  }
  for (RunPlan& plan : plans) {
    plan.config.out_dir = (out / run_dir_name(plan.run_id)).string();
    plan.config.validate();
  }

  const std::size_t window = config.resolved_window();
  std::vector<SweepRunRow> rows(plans.size());
  const auto run_one = [&](std::size_t i) {
    const RunPlan& plan = plans[i];
    SweepRunRow row;
    row.run_id = plan.run_id;
    row.batch_size = plan.config.batch_size;
    row.lr = plan.config.policy_lr;
    row.seed = plan.config.seed;
    row.iterations = plan.config.resolved_iterations();
    try {
      const TrainResult res = train(plan.config, nullptr);
      row.env_steps = res.metrics.empty() ? 0 : res.metrics.back().env_steps;
      const auto [mean, sd] = window_stats(res.metrics, window);
      row.window_mean = mean;
      row.window_std = sd;
      row.status = "ok";
    } catch (const std::exception& e) {
      row.window_mean = kNan;
      row.window_std = kNan;
      row.status = std::string("failed: ") + e.what();
    }
    rows[i] = row;
    if (progress != nullptr) {
#ifdef _OPENMP
#pragma omp critical(armpg_sweep_progress)
#endif
      {
        *progress << run_dir_name(plan.run_id) << " batch " << row.batch_size << " lr "
                  << fmt_double(row.lr) << " seed " << row.seed << " window_mean "
                  << fmt_double(row.window_mean) << " [" << row.status << "]\n";
        progress->flush();
      }
    }
  };

  if (config.jobs <= 1) {
    for (std::size_t i = 0; i < plans.size(); ++i) run_one(i);
  } else {
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 1) num_threads(static_cast<int>(config.jobs))
#endif
    for (long long i = 0; i < static_cast<long long>(plans.size()); ++i) {
      run_one(static_cast<std::size_t>(i));
    }
  }

  SweepResult result;
  result.runs = rows;
  result.runs_csv = out / "runs.csv";
  result.summary_csv = out / "summary.csv";

  std::ofstream runs_csv(result.runs_csv, std::ios::trunc);
  if (!runs_csv) throw std::runtime_error("sweep: cannot write " + result.runs_csv.string());
  runs_csv << "run_id,batch_size,lr,seed,iterations,env_steps,window_mean,window_std,status\n";
  for (const SweepRunRow& row : rows) {
    runs_csv << row.run_id << ',' << row.batch_size << ',' << fmt_double(row.lr) << ','
             << row.seed << ',' << row.iterations << ',' << row.env_steps << ','
             << fmt_double(row.window_mean) << ',' << fmt_double(row.window_std) << ','
             << sanitize_csv_field(row.status) << '\n';
  }
  runs_csv.flush();

  // Group rows per axis value: batch size for the batch axis, everything in
  // one group for lr draws and seed replications.
  std::vector<std::pair<std::string, std::vector<const SweepRunRow*>>> groups;
  if (config.axis == SweepAxis::kBatch) {
    for (std::size_t b : config.batch_sizes) {
      groups.emplace_back(std::to_string(b), std::vector<const SweepRunRow*>{});
      for (const SweepRunRow& row : rows) {
        if (row.batch_size == b) groups.back().second.push_back(&row);
      }
    }
  } else {
    groups.emplace_back("all", std::vector<const SweepRunRow*>{});
    for (const SweepRunRow& row : rows) groups.back().second.push_back(&row);
  }

  std::ofstream summary(result.summary_csv, std::ios::trunc);
  if (!summary) throw std::runtime_error("sweep: cannot write " + result.summary_csv.string());
  summary << "axis,value,runs,ok,mean,std,min,q25,median,q75,max\n";
  for (const auto& [label, members] : groups) {
    std::vector<double> means;
    for (const SweepRunRow* row : members) {
      if (row->status == "ok" && !std::isnan(row->window_mean)) means.push_back(row->window_mean);
    }
    std::sort(means.begin(), means.end());
    double mean = kNan, sd = kNan;
    if (!means.empty()) {
      double sum = 0.0;
      for (double v : means) sum += v;
      mean = sum / static_cast<double>(means.size());
      double ss = 0.0;
      for (double v : means) ss += (v - mean) * (v - mean);
      sd = means.size() > 1 ? std::sqrt(ss / static_cast<double>(means.size() - 1)) : 0.0;
    }
    summary << to_string(config.axis) << ',' << label << ',' << members.size() << ','
            << means.size() << ',' << fmt_double(mean) << ',' << fmt_double(sd) << ','
            << fmt_double(quantile(means, 0.0)) << ',' << fmt_double(quantile(means, 0.25)) << ','
            << fmt_double(quantile(means, 0.5)) << ',' << fmt_double(quantile(means, 0.75)) << ','
            << fmt_double(quantile(means, 1.0)) << '\n';
  }
  summary.flush();
  return result;
}

}  // namespace armpg
