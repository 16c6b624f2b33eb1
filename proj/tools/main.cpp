#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "armpg/bernoulli.hpp"
#include "armpg/config.hpp"
#include "armpg/grad.hpp"
#include "armpg/harness.hpp"
#include "armpg/rng.hpp"
#include "armpg/verify.hpp"

namespace {

std::string default_out_root() {
  const char* root = std::getenv("ARMPG_OUT_ROOT");
  return root != nullptr && *root != '\0' ? std::string(root) : std::string("runs");
}

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

/// Ties a CLI option to its config-file key so explicitly passed flags can be
/// replayed through the same key=value grammar the config file uses (flags
/// win over the file, the file wins over defaults).
struct KvBinding {
  std::string key;
  CLI::Option* opt = nullptr;
  std::function<std::string()> render;
};

struct TrainOptions {
  std::string config_path;
  std::string env = "cartpole";
  std::string estimator = "arm";
  std::string advantage = "gae";
  std::size_t horizon = 200;
  std::size_t batch_size = 2048;
  std::size_t total_steps = 1000000;
  std::size_t iterations = 0;
  std::size_t critic_epochs = 5;
  std::size_t critic_minibatch = 64;
  double policy_lr = 3e-4;
  double critic_lr = 3e-4;
  double gamma = 0.99;
  double lam = 0.95;
  double clip_norm = 0.0;
  std::uint64_t seed = 0;
  bool normalize_advantage = false;
  bool fit_critic_first = true;
  std::string out_dir;
  std::vector<KvBinding> bindings;
};

void add_train_options(CLI::App* cmd, TrainOptions& o) {
  cmd->add_option("--config", o.config_path, "key=value config file applied before flags")
      ->check(CLI::ExistingFile);
  auto bind = [&o](CLI::Option* opt, const char* key, std::function<std::string()> render) {
    o.bindings.push_back({key, opt, std::move(render)});
  };
  bind(cmd->add_option("--env", o.env, "environment")
           ->check(CLI::IsMember({"cartpole", "mountaincar", "pendulum"})),
       "env", [&o] { return o.env; });
  bind(cmd->add_option("--horizon", o.horizon, "episode step cap"), "horizon",
       [&o] { return std::to_string(o.horizon); });
  bind(cmd->add_option("--estimator", o.estimator, "policy-gradient estimator")
           ->check(CLI::IsMember({"arm", "a2c", "expected", "reinforce", "resampled_a2c"})),
       "estimator", [&o] { return o.estimator; });
  bind(cmd->add_option("--advantage", o.advantage, "advantage method")
           ->check(CLI::IsMember({"a2c", "gae"})),
       "advantage", [&o] { return o.advantage; });
  bind(cmd->add_option("--batch-size", o.batch_size, "transitions per update"), "batch_size",
       [&o] { return std::to_string(o.batch_size); });
  bind(cmd->add_option("--total-steps", o.total_steps, "env-step budget"), "total_steps",
       [&o] { return std::to_string(o.total_steps); });
  bind(cmd->add_option("--iterations", o.iterations,
                       "explicit update count (0 = total-steps / batch-size)"),
       "iterations", [&o] { return std::to_string(o.iterations); });
  bind(cmd->add_option("--policy-lr", o.policy_lr, "policy Adam learning rate"), "policy_lr",
       [&o] { return fmt17(o.policy_lr); });
  bind(cmd->add_option("--critic-lr", o.critic_lr, "critic Adam learning rate"), "critic_lr",
       [&o] { return fmt17(o.critic_lr); });
  bind(cmd->add_option("--gamma", o.gamma, "discount"), "gamma", [&o] { return fmt17(o.gamma); });
  bind(cmd->add_option("--lam", o.lam, "temporal-difference mixing weight"), "lam",
       [&o] { return fmt17(o.lam); });
  bind(cmd->add_option("--seed", o.seed, "master seed"), "seed",
       [&o] { return std::to_string(o.seed); });
  bind(cmd->add_option("--clip-norm", o.clip_norm, "policy gradient norm cap (0 = off)"),
       "clip_norm", [&o] { return fmt17(o.clip_norm); });
  bind(cmd->add_flag("--normalize-advantage,!--no-normalize-advantage", o.normalize_advantage,
                     "standardise advantages before the update"),
       "normalize_advantage", [&o] { return o.normalize_advantage ? "true" : "false"; });
  bind(cmd->add_option("--critic-epochs", o.critic_epochs, "critic fit epochs per iteration"),
       "critic_epochs", [&o] { return std::to_string(o.critic_epochs); });
  bind(cmd->add_option("--critic-minibatch", o.critic_minibatch, "critic fit minibatch size"),
       "critic_minibatch", [&o] { return std::to_string(o.critic_minibatch); });
  bind(cmd->add_flag("--fit-critic-first,!--fit-critic-after", o.fit_critic_first,
                     "fit the critic before (default) or after computing advantages"),
       "fit_critic_first", [&o] { return o.fit_critic_first ? "true" : "false"; });
  bind(cmd->add_option("--out", o.out_dir, "output directory"), "out_dir",
       [&o] { return o.out_dir; });
}

/// Defaults, then the config file, then explicitly passed flags.
armpg::TrainConfig build_config(const TrainOptions& o) {
  armpg::TrainConfig cfg;
  if (!o.config_path.empty()) armpg::apply_kv(cfg, armpg::parse_kv_file(o.config_path));
  std::map<std::string, std::string> kv;
  for (const KvBinding& b : o.bindings) {
    if (b.opt->count() > 0) kv[b.key] = b.render();
  }
  armpg::apply_kv(cfg, kv);
  return cfg;
}

int run_train(const TrainOptions& o, bool quiet) {
  armpg::TrainConfig cfg;
  try {
    cfg = build_config(o);
    if (cfg.out_dir.empty()) {
      cfg.out_dir = default_out_root() + "/train-" + armpg::to_string(cfg.env) + "-" +
                    armpg::to_string(cfg.estimator) + "-seed" + std::to_string(cfg.seed);
    }
    cfg.validate();
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  }
  try {
    armpg::train(cfg, quiet ? nullptr : &std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "train failed: " << e.what() << '\n';
    return 1;
  }
  std::cerr << "outputs in " << cfg.out_dir << '\n';
  return 0;
}

struct SweepOptions {
  std::string axis;
  std::vector<std::size_t> sizes;
  std::vector<std::uint64_t> seeds;
  std::size_t lr_draws = 30;
  double log10_lr_min = -6.0;
  double log10_lr_max = -3.0;
  std::size_t window = 0;
  std::size_t jobs = 1;
  std::string out_dir;
};

int run_sweep(const TrainOptions& base_opts, const SweepOptions& so, const CLI::App* cmd,
              bool quiet) {
  armpg::SweepConfig sc;
  try {
    sc.base = build_config(base_opts);
    if (so.axis == "batch") {
      sc.axis = armpg::SweepAxis::kBatch;
    } else if (so.axis == "lr") {
      sc.axis = armpg::SweepAxis::kLr;
    } else {
      sc.axis = armpg::SweepAxis::kSeeds;
    }
    if (cmd->count("--sizes") > 0) sc.batch_sizes = so.sizes;
    if (cmd->count("--seeds") > 0) sc.seeds = so.seeds;
    sc.lr_draws = so.lr_draws;
    sc.log10_lr_min = so.log10_lr_min;
    sc.log10_lr_max = so.log10_lr_max;
    sc.window = so.window;
    sc.jobs = so.jobs;
    sc.out_dir = so.out_dir.empty() ? default_out_root() + "/sweep-" + so.axis : so.out_dir;
    sc.base.validate();
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  }
  try {
    const armpg::SweepResult result = armpg::sweep(sc, quiet ? nullptr : &std::cerr);
    std::size_t failed = 0;
    for (const armpg::SweepRunRow& row : result.runs) {
      if (row.status != "ok") ++failed;
    }
    std::cerr << result.runs.size() << " runs (" << failed << " failed), tables in "
              << sc.out_dir << '\n';
  } catch (const std::exception& e) {
    std::cerr << "sweep failed: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

int run_verify(const std::string& out_dir) {
  std::vector<armpg::BernoulliOracleRow> rows;
  std::vector<armpg::SuiteResult> results;
  results.push_back(armpg::check_bernoulli_oracle(&rows));
  results.push_back(armpg::check_tabular_unbiasedness());
  results.push_back(armpg::check_variance_bound());
  results.push_back(armpg::check_mlp_gradients());
  results.push_back(armpg::check_advantage_identities());
  results.push_back(armpg::check_coupled_sampling_law());

  bool all_pass = true;
  for (const armpg::SuiteResult& r : results) {
    all_pass = all_pass && r.pass;
    std::printf("[%s] %-22s (%6.2fs) %s\n", r.pass ? "PASS" : "FAIL", r.name.c_str(), r.seconds,
                r.detail.c_str());
  }
  std::fflush(stdout);
  try {
    std::filesystem::create_directories(out_dir);
    armpg::write_suite_csv(results, std::filesystem::path(out_dir) / "verify.csv");
    armpg::write_bernoulli_report_csv(rows,
                                      std::filesystem::path(out_dir) / "bernoulli_report.csv");
    std::cerr << "reports in " << out_dir << '\n';
  } catch (const std::exception& e) {
    std::cerr << "verify report error: " << e.what() << '\n';
    return 1;
  }
  return all_pass ? 0 : 1;
}

struct DemoOptions {
  std::size_t dim = 1;
  std::size_t samples = 100000;
  std::uint64_t seed = 0;
  std::vector<double> phi;
  std::string objective = "sum";
};

int run_demo(const DemoOptions& d) {
  armpg::BernoulliParams params;
  try {
    if (d.dim == 0 || d.dim > 20) throw std::invalid_argument("demo: dim must be in [1, 20]");
    if (d.samples < 2) throw std::invalid_argument("demo: samples must be >= 2");
    params.phi = d.phi.empty() ? std::vector<double>(d.dim, 0.0) : d.phi;
    if (params.phi.size() != d.dim) {
      throw std::invalid_argument("demo: --phi needs exactly dim entries");
    }
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  }

  armpg::BinaryObjective f;
  f.dim = d.dim;
  if (d.objective == "sum") {
    f.eval = [](std::span<const std::uint8_t> z) {
      double s = 0.0;
      for (std::uint8_t b : z) s += b;
      return s;
    };
  } else if (d.objective == "product") {
    f.eval = [](std::span<const std::uint8_t> z) {
      double p = 1.0;
      for (std::uint8_t b : z) p *= b;
      return p;
    };
  } else {
    armpg::RngStream table_rng(d.seed, 1);
    std::vector<double> table(std::size_t{1} << d.dim);
    for (double& v : table) v = table_rng.uniform(-1.0, 1.0);
    const std::size_t dim = d.dim;
    f.eval = [table, dim](std::span<const std::uint8_t> z) {
      std::size_t idx = 0;
      for (std::size_t v = 0; v < dim; ++v) idx |= static_cast<std::size_t>(z[v] != 0) << v;
      return table[idx];
    };
  }

  const std::vector<double> exact = armpg::exact_grad_bruteforce(params, f);
  const armpg::RngStream root(d.seed, 2);
  const armpg::VarianceProbe arm =
      armpg::variance_probe(params, f, armpg::EstimatorKind::kArm, d.samples, root.substream(0));
  const armpg::VarianceProbe score = armpg::variance_probe(
      params, f, armpg::EstimatorKind::kReinforce, d.samples, root.substream(1));

  std::printf("# objective=%s dim=%zu samples=%zu seed=%llu value=%.6g\n", d.objective.c_str(),
              d.dim, d.samples, static_cast<unsigned long long>(d.seed),
              armpg::exact_value_bruteforce(params, f));
  std::printf("%-4s %-10s %-12s %-12s %-12s %-12s %-12s %-10s\n", "i", "logit", "exact_grad",
              "pair_mean", "pair_var", "score_mean", "score_var", "var_ratio");
  for (std::size_t v = 0; v < d.dim; ++v) {
    const double ratio = score.variance[v] > 0.0 ? arm.variance[v] / score.variance[v]
                                                 : std::numeric_limits<double>::quiet_NaN();
    std::printf("%-4zu %-10.4g %-12.6g %-12.6g %-12.6g %-12.6g %-12.6g %-10.4g\n", v,
                params.phi[v], exact[v], arm.mean[v], arm.variance[v], score.mean[v],
                score.variance[v], ratio);
  }
  std::fflush(stdout);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Binary-action policy-gradient lab: antithetically coupled estimator, score-"
               "function baselines, exact oracles, and a reproducible training harness"};
  app.require_subcommand(1);
  bool quiet = false;
  app.add_flag("--quiet", quiet, "suppress per-iteration progress on stderr");

  CLI::App* train_cmd = app.add_subcommand("train", "run one training configuration");
  TrainOptions train_opts;
  add_train_options(train_cmd, train_opts);

  CLI::App* sweep_cmd = app.add_subcommand("sweep", "run a family of training configurations");
  TrainOptions sweep_base;
  SweepOptions sweep_opts;
  add_train_options(sweep_cmd, sweep_base);
  sweep_cmd->add_option("--axis", sweep_opts.axis, "what to vary")
      ->required()
      ->check(CLI::IsMember({"batch", "lr", "seeds"}));
  sweep_cmd->add_option("--sizes", sweep_opts.sizes, "batch sizes for --axis batch")
      ->delimiter(',');
  sweep_cmd->add_option("--seeds", sweep_opts.seeds, "seed list for --axis batch/seeds")
      ->delimiter(',');
  sweep_cmd->add_option("--lr-draws", sweep_opts.lr_draws, "configurations for --axis lr");
  sweep_cmd->add_option("--log10-lr-min", sweep_opts.log10_lr_min, "lr draw range, lower");
  sweep_cmd->add_option("--log10-lr-max", sweep_opts.log10_lr_max, "lr draw range, upper");
  sweep_cmd->add_option("--window", sweep_opts.window,
                        "trailing iterations for the per-run return statistic (0 = axis default)");
  sweep_cmd->add_option("--jobs", sweep_opts.jobs, "concurrent runs");
  sweep_cmd->add_option("--sweep-out", sweep_opts.out_dir, "sweep output directory");

  CLI::App* verify_cmd = app.add_subcommand("verify", "run the verification suites");
  std::string verify_out;
  verify_cmd->add_option("--out", verify_out, "report directory");

  CLI::App* demo_cmd =
      app.add_subcommand("bernoulli-demo", "compare estimators on a small Bernoulli objective");
  DemoOptions demo_opts;
  demo_cmd->add_option("--dim", demo_opts.dim, "number of binary variables (<= 20)");
  demo_cmd->add_option("--samples", demo_opts.samples, "Monte-Carlo sample count");
  demo_cmd->add_option("--seed", demo_opts.seed, "rng seed");
  demo_cmd->add_option("--phi", demo_opts.phi, "logits (comma separated, default all 0)")
      ->delimiter(',');
  demo_cmd->add_option("--objective", demo_opts.objective, "objective family")
      ->check(CLI::IsMember({"sum", "product", "random"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (train_cmd->parsed()) return run_train(train_opts, quiet);
  if (sweep_cmd->parsed()) return run_sweep(sweep_base, sweep_opts, sweep_cmd, quiet);
  if (verify_cmd->parsed()) {
    return run_verify(verify_out.empty() ? default_out_root() + "/verify" : verify_out);
  }
  if (demo_cmd->parsed()) return run_demo(demo_opts);
  return 2;
}
