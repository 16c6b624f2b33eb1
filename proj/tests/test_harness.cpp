#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "armpg/config.hpp"
#include "armpg/envs.hpp"
#include "armpg/harness.hpp"
#include "armpg/mlp.hpp"
#include "armpg/rng.hpp"
#include "armpg/sampling.hpp"

using namespace armpg;

namespace {

namespace fs = std::filesystem;

fs::path fresh_dir(const std::string& leaf) {
  const fs::path dir = fs::temp_directory_path() / "armpg_harness_test" / leaf;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::vector<std::string> read_lines(const fs::path& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

// strips the trailing wallclock_s field from a metrics row
std::string drop_last_field(const std::string& row) {
  return row.substr(0, row.rfind(','));
}

TrainConfig tiny_config(const fs::path& out) {
  TrainConfig cfg;
  cfg.env = EnvId::kPendulum;
  cfg.horizon = 8;
  cfg.batch_size = 64;
  cfg.iterations = 3;
  cfg.critic_epochs = 2;
  cfg.critic_minibatch = 32;
  cfg.seed = 7;
  cfg.out_dir = out.string();
  return cfg;
}

}  // namespace

TEST_CASE("metrics csv formatting") {
  CHECK(std::string(kMetricsCsvHeader) ==
        "iter,env_steps,mean_return,min_return,max_return,action_diff_rate,zero_grad_frac,"
        "grad_norm,critic_loss,wallclock_s");
  IterationMetrics m;
  m.iter = 3;
  m.env_steps = 192;
  m.mean_return = -1.5;
  m.min_return = std::nan("");
  m.max_return = 2.0;
  m.action_diff_rate = 0.25;
  m.zero_grad_frac = 0.75;
  m.grad_norm = 0.125;
  m.critic_loss = 1e-3;
  m.wallclock_s = 0.5;
  const std::string row = metrics_csv_row(m);
  CHECK(row.substr(0, 6) == "3,192,");
  CHECK(row.find("nan") != std::string::npos);
  // %.17g keeps doubles round-trippable
  CHECK(row.find("0.001") != std::string::npos);
}

TEST_CASE("collector episode bookkeeping across batch cuts") {
  // pendulum horizon 5: episodes truncate every 5 steps and never terminate
  const EnvSpec spec = EnvSpec::make(EnvId::kPendulum, 5);
  RolloutCollector collector(spec, RngStream(71, 0));
  const Mlp policy({3, 4, 1});  // zero net: logit identically 0
  RngStream policy_rng(71, 1);
  std::vector<double> returns;

  RolloutBatch b1 = collector.collect(policy, 7, policy_rng, &returns);
  REQUIRE(b1.size() == 7);
  b1.validate();
  // rows 0..4 are episode 1; its horizon truncation closes the segment
  for (std::size_t t = 0; t < 7; ++t) {
    CHECK(!b1.terminal[t]);
    CHECK(b1.truncated[t] == (t == 4 || t == 6));
  }
  // episode 1 finished (horizon), episode 2 got cut by the batch boundary
  // and stays in flight
  REQUIRE(returns.size() == 1);
  double ep1 = 0.0;
  for (std::size_t t = 0; t <= 4; ++t) ep1 += b1.rewards[t];
  CHECK(returns[0] == ep1);

  // at logit 0 the coupled pair always disagrees
  for (std::size_t t = 0; t < 7; ++t) {
    CHECK(b1.draws[t].prob_one == 0.5);
    CHECK(b1.draws[t].action != b1.draws[t].pseudo_action);
  }

  // the next batch resumes episode 2: 2 steps done, 3 to go
  RolloutBatch b2 = collector.collect(policy, 3, policy_rng, &returns);
  b2.validate();
  CHECK(b2.truncated[2]);
  REQUIRE(returns.size() == 2);
  double ep2 = b1.rewards[5] + b1.rewards[6];
  for (std::size_t t = 0; t <= 2; ++t) ep2 += b2.rewards[t];
  CHECK(returns[1] == ep2);

  // a batch of one is a legal degenerate cut
  RolloutBatch b3 = collector.collect(policy, 1, policy_rng, nullptr);
  REQUIRE(b3.size() == 1);
  b3.validate();
}

TEST_CASE("collector replays bit-for-bit and advances otherwise") {
  const EnvSpec spec = EnvSpec::make(EnvId::kCartpole, 20);
  RngStream init(72, 0);
  const Mlp policy = Mlp::he_init({4, 8, 1}, init);

  RolloutCollector ca(spec, RngStream(72, 1));
  RolloutCollector cb(spec, RngStream(72, 1));
  RngStream ra(72, 2), rb(72, 2);
  const RolloutBatch a = ca.collect(policy, 50, ra, nullptr);
  const RolloutBatch b = cb.collect(policy, 50, rb, nullptr);
  CHECK(a.states == b.states);
  CHECK(a.rewards == b.rewards);
  CHECK(a.terminal == b.terminal);
  CHECK(a.truncated == b.truncated);
  for (std::size_t t = 0; t < a.size(); ++t) {
    CHECK(a.draws[t].u == b.draws[t].u);
    CHECK(a.draws[t].action == b.draws[t].action);
  }

  // a second batch from the same collector continues, not repeats
  const RolloutBatch c = ca.collect(policy, 50, ra, nullptr);
  CHECK(c.states != a.states);
}

TEST_CASE("pair disagreement frequency follows the closed form") {
  const EnvSpec spec = EnvSpec::make(EnvId::kPendulum, 16);
  RngStream init(73, 0);
  const Mlp policy = Mlp::he_init({3, 16, 1}, init);
  RolloutCollector collector(spec, RngStream(73, 1));
  RngStream policy_rng(73, 2);
  const RolloutBatch batch = collector.collect(policy, 2048, policy_rng, nullptr);

  double expected = 0.0, var = 0.0;
  std::size_t observed = 0;
  for (std::size_t t = 0; t < batch.size(); ++t) {
    // P(differ) = 2 min(pi, 1 - pi), available straight from prob_one
    const double p = 2.0 * std::min(batch.draws[t].prob_one, 1.0 - batch.draws[t].prob_one);
    expected += p;
    var += p * (1.0 - p);
    observed += batch.draws[t].action != batch.draws[t].pseudo_action;
  }
  CHECK(std::abs(static_cast<double>(observed) - expected) <= 3.0 * std::sqrt(var));
}

TEST_CASE("one short training run: files, accounting, replayable config") {
  const fs::path out = fresh_dir("train_smoke");
  const TrainConfig cfg = tiny_config(out);
  const TrainResult res = train(cfg);

  REQUIRE(res.metrics.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(res.metrics[i].iter == i + 1);
    CHECK(res.metrics[i].env_steps == (i + 1) * 64);
    // the pair estimator writes the exact zero-coefficient complement
    CHECK(res.metrics[i].zero_grad_frac == 1.0 - res.metrics[i].action_diff_rate);
    CHECK(res.metrics[i].grad_norm >= 0.0);
    CHECK(std::isfinite(res.metrics[i].critic_loss));
  }

  CHECK(fs::exists(out / "metrics.csv"));
  CHECK(fs::exists(out / "policy.bin"));
  CHECK(fs::exists(out / "critic.bin"));
  CHECK(fs::exists(out / "resolved_config.txt"));
  CHECK(res.metrics_csv == out / "metrics.csv");

  // saved checkpoints hold exactly the returned parameters
  CHECK(Mlp::load(out / "policy.bin").params() == res.policy.params());
  CHECK(Mlp::load(out / "critic.bin").params() == res.critic.params());

  // the resolved config replays into an identical config
  const auto kv = parse_kv_file(out / "resolved_config.txt");
  TrainConfig replay;
  apply_kv(replay, kv);
  TrainConfig pinned = cfg;
  pinned.iterations = cfg.resolved_iterations();
  CHECK(serialize(replay) == serialize(pinned));

  // the CSV has a header plus one row per iteration
  const auto lines = read_lines(out / "metrics.csv");
  REQUIRE(lines.size() == 4);
  CHECK(lines[0] == kMetricsCsvHeader);
  CHECK(drop_last_field(lines[1]).substr(0, 5) == "1,64,");
}

TEST_CASE("metrics replay bit-for-bit except the wallclock column") {
  const fs::path out_a = fresh_dir("replay_a");
  const fs::path out_b = fresh_dir("replay_b");
  TrainConfig cfg_a = tiny_config(out_a);
  TrainConfig cfg_b = tiny_config(out_b);
  (void)train(cfg_a);
  (void)train(cfg_b);

  const auto la = read_lines(out_a / "metrics.csv");
  const auto lb = read_lines(out_b / "metrics.csv");
  REQUIRE(la.size() == lb.size());
  for (std::size_t i = 0; i < la.size(); ++i) {
    CHECK(drop_last_field(la[i]) == drop_last_field(lb[i]));
  }
}

TEST_CASE("a diverging critic aborts the run and marks the log") {
  const fs::path out = fresh_dir("abort");
  TrainConfig cfg = tiny_config(out);
  cfg.critic_lr = 1e300;  // first fit explodes to a non-finite loss
  CHECK_THROWS(train(cfg));

  const auto lines = read_lines(out / "metrics.csv");
  REQUIRE(!lines.empty());
  bool marked = false;
  for (const auto& l : lines) marked = marked || l.rfind("# aborted:", 0) == 0;
  CHECK(marked);
}

TEST_CASE("train validates its configuration") {
  TrainConfig no_out = tiny_config(fs::path(""));
  no_out.out_dir.clear();
  CHECK_THROWS(train(no_out));

  const fs::path out = fresh_dir("validate");
  TrainConfig bad = tiny_config(out);
  bad.batch_size = 0;
  CHECK_THROWS(train(bad));

  bad = tiny_config(out);
  bad.gamma = 1.5;
  CHECK_THROWS(bad.validate());
  bad = tiny_config(out);
  bad.lambda = -0.2;
  CHECK_THROWS(bad.validate());
  bad = tiny_config(out);
  bad.policy_lr = 0.0;
  CHECK_THROWS(bad.validate());
}

TEST_CASE("batch-size sweep freezes iterations and summarises per size") {
  const fs::path out = fresh_dir("sweep_batch");
  SweepConfig sc;
  sc.base = tiny_config(out / "unused");
  sc.base.out_dir.clear();
  sc.base.iterations = 0;
  sc.base.total_steps = 256;  // resolved against batch 64: 4 iterations
  sc.base.batch_size = 64;
  sc.axis = SweepAxis::kBatch;
  sc.batch_sizes = {32, 64};
  sc.seeds = {0, 1};
  sc.out_dir = out.string();

  const SweepResult res = sweep(sc);
  REQUIRE(res.runs.size() == 4);
  for (const auto& run : res.runs) {
    CHECK(run.status == "ok");
    CHECK(run.iterations == 4);  // frozen at the base config's count
    CHECK(run.env_steps == 4 * run.batch_size);
    CHECK(std::isfinite(run.window_mean));
  }
  CHECK(res.runs[0].batch_size == 32);
  CHECK(res.runs[3].batch_size == 64);

  const auto runs_lines = read_lines(res.runs_csv);
  REQUIRE(runs_lines.size() == 5);
  CHECK(runs_lines[0] ==
        "run_id,batch_size,lr,seed,iterations,env_steps,window_mean,window_std,status");

  const auto summary_lines = read_lines(res.summary_csv);
  REQUIRE(summary_lines.size() == 3);  // header + one row per batch size
  CHECK(summary_lines[0] == "axis,value,runs,ok,mean,std,min,q25,median,q75,max");
  CHECK(summary_lines[1].substr(0, 9) == "batch,32,");
  CHECK(summary_lines[2].substr(0, 9) == "batch,64,");

  // per-run outputs live under run_NNN/
  CHECK(fs::exists(out / "run_000" / "metrics.csv"));
  CHECK(fs::exists(out / "run_003" / "metrics.csv"));
}

TEST_CASE("learning-rate sweep draws within the requested decade range") {
  const fs::path out = fresh_dir("sweep_lr");
  SweepConfig sc;
  sc.base = tiny_config(out / "unused");
  sc.base.out_dir.clear();
  sc.base.iterations = 2;
  sc.axis = SweepAxis::kLr;
  sc.lr_draws = 3;
  sc.log10_lr_min = -4.0;
  sc.log10_lr_max = -3.0;
  sc.out_dir = out.string();

  const SweepResult res = sweep(sc);
  REQUIRE(res.runs.size() == 3);
  for (const auto& run : res.runs) {
    CHECK(run.lr >= 1e-4);
    CHECK(run.lr <= 1e-3);
    CHECK(run.status == "ok");
  }
  // the three draws are genuinely distinct configurations
  CHECK(res.runs[0].lr != res.runs[1].lr);

  const auto summary_lines = read_lines(res.summary_csv);
  REQUIRE(summary_lines.size() == 2);  // single "all" group
  CHECK(summary_lines[1].substr(0, 7) == "lr,all,");
}

TEST_CASE("config text round-trips and rejects junk") {
  TrainConfig cfg;
  cfg.env = EnvId::kMountainCar;
  cfg.estimator = EstimatorKind::kExpected;
  cfg.advantage = AdvantageMethod::kA2c;
  cfg.batch_size = 96;
  cfg.policy_lr = 1.25e-4;
  cfg.out_dir = "some/dir";
  const std::string text = serialize(cfg);

  TrainConfig back;
  apply_kv(back, parse_kv_text(text));
  CHECK(serialize(back) == text);

  TrainConfig target;
  CHECK_THROWS_WITH_AS(apply_kv(target, {{"not_a_key", "1"}}),
                       doctest::Contains("not_a_key"), std::invalid_argument);
  CHECK_THROWS(apply_kv(target, {{"batch_size", "many"}}));
  CHECK_THROWS(apply_kv(target, {{"estimator", "bogus"}}));
}
