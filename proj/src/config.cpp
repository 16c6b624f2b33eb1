#include "armpg/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace armpg {

void TrainConfig::validate() const {
  if (horizon == 0) throw std::invalid_argument("config: horizon must be >= 1");
  if (batch_size == 0) throw std::invalid_argument("config: batch_size must be >= 1");
  if (iterations == 0 && total_steps < batch_size) {
    throw std::invalid_argument("config: total_steps must be >= batch_size");
  }
  if (!(policy_lr > 0.0) || !(critic_lr > 0.0)) {
    throw std::invalid_argument("config: learning rates must be positive");
  }
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw std::invalid_argument("config: gamma outside [0,1]");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw std::invalid_argument("config: lam outside [0,1]");
  if (clip_norm < 0.0) throw std::invalid_argument("config: clip_norm must be >= 0");
  if (critic_minibatch == 0) throw std::invalid_argument("config: critic_minibatch must be >= 1");
  if (estimator == EstimatorKind::kCriticMse) {
    throw std::invalid_argument("config: estimator must be a policy-gradient estimator");
  }
}

std::size_t TrainConfig::resolved_iterations() const {
  return iterations != 0 ? iterations : total_steps / batch_size;
}

std::map<std::string, std::string> parse_kv_text(std::string_view text) {
  std::map<std::string, std::string> kv;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string line(text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos));
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": expected key=value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": empty key");
    }
    kv[key] = value;
  }
  return kv;
}

std::map<std::string, std::string> parse_kv_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::invalid_argument("config: cannot open " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse_kv_text(ss.str());
}

namespace {

std::size_t parse_size(const std::string& v, const std::string& key) {
  try {
    const long long x = std::stoll(v);
    if (x < 0) throw std::invalid_argument("negative");
    return static_cast<std::size_t>(x);
  } catch (const std::exception&) {
    throw std::invalid_argument("config: bad unsigned integer for " + key + ": '" + v + "'");
  }
}

std::uint64_t parse_u64(const std::string& v, const std::string& key) {
  try {
    return std::stoull(v);
  } catch (const std::exception&) {
    throw std::invalid_argument("config: bad seed for " + key + ": '" + v + "'");
  }
}

double parse_double(const std::string& v, const std::string& key) {
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument("trailing junk");
    return x;
  } catch (const std::exception&) {
    throw std::invalid_argument("config: bad real number for " + key + ": '" + v + "'");
  }
}

bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw std::invalid_argument("config: bad boolean for " + key + ": '" + v + "' (use true/false)");
}

}  // namespace

void apply_kv(TrainConfig& config, const std::map<std::string, std::string>& kv) {
  for (const auto& [key, value] : kv) {
    if (key == "env") {
      const auto id = env_from_string(value);
      if (!id) throw std::invalid_argument("config: unknown env '" + value +
                                           "' (allowed: cartpole, mountaincar, pendulum)");
      config.env = *id;
    } else if (key == "horizon") {
      config.horizon = parse_size(value, key);
    } else if (key == "estimator") {
      const auto kind = estimator_from_string(value);
      if (!kind) {
        throw std::invalid_argument(
            "config: unknown estimator '" + value +
            "' (allowed: arm, a2c, expected, reinforce, resampled_a2c)");
      }
      config.estimator = *kind;
    } else if (key == "advantage") {
      if (value == "a2c") config.advantage = AdvantageMethod::kA2c;
      else if (value == "gae") config.advantage = AdvantageMethod::kGae;
      else throw std::invalid_argument("config: unknown advantage '" + value + "' (allowed: a2c, gae)");
    } else if (key == "batch_size") {
      config.batch_size = parse_size(value, key);
    } else if (key == "total_steps") {
      config.total_steps = parse_size(value, key);
    } else if (key == "iterations") {
      config.iterations = parse_size(value, key);
    } else if (key == "policy_lr") {
      config.policy_lr = parse_double(value, key);
    } else if (key == "critic_lr") {
      config.critic_lr = parse_double(value, key);
    } else if (key == "gamma") {
      config.gamma = parse_double(value, key);
    } else if (key == "lam") {
      config.lambda = parse_double(value, key);
    } else if (key == "seed") {
      config.seed = parse_u64(value, key);
    } else if (key == "clip_norm") {
      config.clip_norm = parse_double(value, key);
    } else if (key == "normalize_advantage") {
      config.normalize_advantage = parse_bool(value, key);
    } else if (key == "critic_epochs") {
      config.critic_epochs = parse_size(value, key);
    } else if (key == "critic_minibatch") {
      config.critic_minibatch = parse_size(value, key);
    } else if (key == "fit_critic_first") {
      config.fit_critic_first = parse_bool(value, key);
    } else if (key == "out_dir") {
      config.out_dir = value;
    } else {
      throw std::invalid_argument("config: unknown key '" + key + "'");
    }
  }
}

std::string serialize(const TrainConfig& config) {
  char buf[64];
  auto fmt = [&buf](double x) {
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return std::string(buf);
  };
  std::ostringstream os;
  os << "env = " << to_string(config.env) << '\n'
     << "horizon = " << config.horizon << '\n'
     << "estimator = " << to_string(config.estimator) << '\n'
     << "advantage = " << to_string(config.advantage) << '\n'
     << "batch_size = " << config.batch_size << '\n'
     << "total_steps = " << config.total_steps << '\n'
     << "iterations = " << config.iterations << '\n'
     << "policy_lr = " << fmt(config.policy_lr) << '\n'
     << "critic_lr = " << fmt(config.critic_lr) << '\n'
     << "gamma = " << fmt(config.gamma) << '\n'
     << "lam = " << fmt(config.lambda) << '\n'
     << "seed = " << config.seed << '\n'
     << "clip_norm = " << fmt(config.clip_norm) << '\n'
     << "normalize_advantage = " << (config.normalize_advantage ? "true" : "false") << '\n'
     << "critic_epochs = " << config.critic_epochs << '\n'
     << "critic_minibatch = " << config.critic_minibatch << '\n'
     << "fit_critic_first = " << (config.fit_critic_first ? "true" : "false") << '\n'
     << "out_dir = " << config.out_dir << '\n';
  return os.str();
}

void write_resolved_config(const TrainConfig& config, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write resolved config to " + path.string());
  os << serialize(config);
}

}  // namespace armpg
