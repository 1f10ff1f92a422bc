#include "sbe/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include "sbe/csv.hpp"

extern char** environ;

namespace sbe {

Grid ExperimentConfig::grid() const { return Grid(static_cast<std::size_t>(n_x - 1), x_upper); }

SbeConfig ExperimentConfig::sbe() const {
  SbeConfig c;
  c.nu = nu;
  c.epsilon = epsilon;
  c.dt = dt;
  c.grid = grid();
  c.picard_tol = picard_tol;
  c.picard_max_iters = picard_max_iters;
  c.u_min = u_min;
  c.u_max = u_max;
  return c;
}

EnvConfig ExperimentConfig::env() const {
  EnvConfig c;
  c.sbe = sbe();
  c.t_start = t_start;
  c.t_end = t_end;
  c.action_dim = static_cast<std::size_t>(action_dim);
  c.f_min = f_min;
  c.f_max = f_max;
  c.lambda = lambda;
  c.gamma = gamma;
  c.control_domain = {control_lo, control_hi};
  c.u0 = {u0_amplitude, u0_offset, u0_wavenumber};
  return c;
}

ddpg::DdpgConfig ExperimentConfig::agent() const {
  ddpg::DdpgConfig c;
  c.hidden1 = static_cast<std::size_t>(layer1_size);
  c.hidden2 = static_cast<std::size_t>(layer2_size);
  c.actor_lr = actor_lr;
  c.critic_lr = critic_lr;
  c.tau = tau;
  c.buffer_capacity = static_cast<std::size_t>(buffer_size);
  c.batch_size = static_cast<std::size_t>(batch_size);
  c.warmup = static_cast<std::size_t>(warmup);
  c.reward_scale = reward_scale;
  c.q_max = q_max;
  c.exploration.kind = exploration == "ou" ? ddpg::NoiseKind::kOrnsteinUhlenbeck : ddpg::NoiseKind::kGaussian;
  c.exploration.sigma = noise_sigma;
  c.exploration.decay = noise_decay;
  c.exploration.floor = noise_floor;
  c.exploration.ou_theta = ou_theta;
  return ddpg::config_for(env(), c);
}

namespace {

std::string join(const std::vector<std::string>& items, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? sep : "") + items[i];
  return out;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> problems)
    : std::runtime_error("invalid configuration: " + join(problems, "; ")), problems_(std::move(problems)) {}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const char* expected) {
  throw ConfigError({key + ": cannot parse '" + value + "' as " + expected});
}

double parse_double(const std::string& key, const std::string& text) {
  const std::string v = trim(text);
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || v.empty()) bad_value(key, text, "a number");
  return out;
}

template <class Int>
Int parse_int(const std::string& key, const std::string& text) {
  const std::string v = trim(text);
  Int out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || v.empty()) bad_value(key, text, "an integer");
  return out;
}

bool parse_bool(const std::string& key, const std::string& text) {
  const std::string v = trim(text);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  bad_value(key, text, "a boolean");
}

std::vector<double> parse_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!trim(item).empty()) out.push_back(parse_double(key, item));
  return out;
}

std::string format_list(const std::vector<double>& values) {
  std::vector<std::string> parts;
  for (double v : values) parts.push_back(format_double(v));
  return join(parts, ",");
}

struct Entry {
  std::string key;
  std::function<std::string(const ExperimentConfig&)> get;
  std::function<void(ExperimentConfig&, const std::string&)> set;
};

template <class T>
Entry make_entry(std::string key, T ExperimentConfig::*member) {
  Entry e;
  e.key = key;
  if constexpr (std::is_same_v<T, double>) {
    e.get = [member](const ExperimentConfig& c) { return format_double(c.*member); };
    e.set = [member, key](ExperimentConfig& c, const std::string& v) { c.*member = parse_double(key, v); };
  } else if constexpr (std::is_same_v<T, bool>) {
    e.get = [member](const ExperimentConfig& c) { return std::string(c.*member ? "true" : "false"); };
    e.set = [member, key](ExperimentConfig& c, const std::string& v) { c.*member = parse_bool(key, v); };
  } else if constexpr (std::is_same_v<T, std::string>) {
    e.get = [member](const ExperimentConfig& c) { return c.*member; };
    e.set = [member](ExperimentConfig& c, const std::string& v) { c.*member = trim(v); };
  } else if constexpr (std::is_same_v<T, std::vector<double>>) {
    e.get = [member](const ExperimentConfig& c) { return format_list(c.*member); };
    e.set = [member, key](ExperimentConfig& c, const std::string& v) { c.*member = parse_list(key, v); };
  } else {
    e.get = [member](const ExperimentConfig& c) { return std::to_string(c.*member); };
    e.set = [member, key](ExperimentConfig& c, const std::string& v) { c.*member = parse_int<T>(key, v); };
  }
  return e;
}

const std::vector<Entry>& entries() {
  using C = ExperimentConfig;
  static const std::vector<Entry> table = {
      make_entry("seed", &C::seed),
      make_entry("n_x", &C::n_x),
      make_entry("x_upper", &C::x_upper),
      make_entry("u_min", &C::u_min),
      make_entry("u_max", &C::u_max),
      make_entry("f_min", &C::f_min),
      make_entry("f_max", &C::f_max),
      make_entry("t_start", &C::t_start),
      make_entry("t_end", &C::t_end),
      make_entry("nu", &C::nu),
      make_entry("epsilon", &C::epsilon),
      make_entry("lambda", &C::lambda),
      make_entry("dt", &C::dt),
      make_entry("picard_tol", &C::picard_tol),
      make_entry("picard_max_iters", &C::picard_max_iters),
      make_entry("u0_amplitude", &C::u0_amplitude),
      make_entry("u0_offset", &C::u0_offset),
      make_entry("u0_wavenumber", &C::u0_wavenumber),
      make_entry("control_lo", &C::control_lo),
      make_entry("control_hi", &C::control_hi),
      make_entry("action_dim", &C::action_dim),
      make_entry("gamma", &C::gamma),
      make_entry("actor_lr", &C::actor_lr),
      make_entry("critic_lr", &C::critic_lr),
      make_entry("layer1_size", &C::layer1_size),
      make_entry("layer2_size", &C::layer2_size),
      make_entry("tau", &C::tau),
      make_entry("buffer_size", &C::buffer_size),
      make_entry("batch_size", &C::batch_size),
      make_entry("warmup", &C::warmup),
      make_entry("reward_scale", &C::reward_scale),
      make_entry("q_max", &C::q_max),
      make_entry("exploration", &C::exploration),
      make_entry("noise_sigma", &C::noise_sigma),
      make_entry("noise_decay", &C::noise_decay),
      make_entry("noise_floor", &C::noise_floor),
      make_entry("ou_theta", &C::ou_theta),
      make_entry("episodes", &C::episodes),
      make_entry("eval_episodes", &C::eval_episodes),
      make_entry("snapshot_times", &C::snapshot_times),
      make_entry("feedback_gains", &C::feedback_gains),
      make_entry("tune_episodes", &C::tune_episodes),
      make_entry("sweep_k", &C::sweep_k),
      make_entry("profile_time", &C::profile_time),
      make_entry("profile_runs", &C::profile_runs),
      make_entry("workers", &C::workers),
      make_entry("svg", &C::svg),
      make_entry("transition_log", &C::transition_log),
  };
  return table;
}

const Entry& find_entry(const std::string& key) {
  for (const auto& e : entries())
    if (e.key == key) return e;
  throw ConfigError({"unknown key '" + key + "'"});
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& e : entries()) k.push_back(e.key);
    return k;
  }();
  return keys;
}

void set_config_value(ExperimentConfig& config, const std::string& key, const std::string& value) {
  find_entry(key).set(config, value);
}

std::string get_config_value(const ExperimentConfig& config, const std::string& key) {
  return find_entry(key).get(config);
}

void validate(const ExperimentConfig& c) {
  std::vector<std::string> p;
  auto check = [&p](bool ok, const std::string& msg) {
    if (!ok) p.push_back(msg);
  };
  auto finite = [](double v) { return std::isfinite(v); };

  check(c.n_x >= 4, "n_x: must be >= 4 (at least 3 distinct periodic nodes)");
  check(finite(c.x_upper) && c.x_upper > 0.0, "x_upper: must be > 0");
  check(finite(c.u_min) && finite(c.u_max) && c.u_min < c.u_max, "u_min/u_max: need u_min < u_max");
  check(finite(c.f_min) && finite(c.f_max) && c.f_min < c.f_max, "f_min/f_max: need f_min < f_max");
  check(finite(c.t_start) && finite(c.t_end) && c.t_end > c.t_start, "t_start/t_end: need t_end > t_start");
  check(finite(c.nu) && c.nu > 0.0, "nu: must be > 0");
  check(finite(c.epsilon) && c.epsilon >= 0.0, "epsilon: must be >= 0");
  check(finite(c.lambda) && c.lambda >= 0.0, "lambda: must be >= 0");
  check(finite(c.dt) && c.dt > 0.0, "dt: must be > 0");
  if (c.dt > 0.0 && c.t_end > c.t_start) {
    try {
      step_count(c.t_end - c.t_start, c.dt);
    } catch (const std::invalid_argument&) {
      p.push_back("dt: episode length t_end - t_start must be a whole multiple of dt");
    }
  }
  check(c.picard_tol > 0.0, "picard_tol: must be > 0");
  check(c.picard_max_iters >= 1, "picard_max_iters: must be >= 1");
  check(finite(c.u0_amplitude) && finite(c.u0_offset), "u0_amplitude/u0_offset: must be finite");
  check(c.u0_wavenumber >= 0, "u0_wavenumber: must be >= 0");
  check(c.control_lo >= 0.0 && c.control_hi <= c.x_upper && c.control_lo < c.control_hi,
        "control_lo/control_hi: need 0 <= control_lo < control_hi <= x_upper");
  if (c.n_x >= 4 && c.x_upper > 0.0 && c.control_lo < c.control_hi)
    check(measure(c.grid(), {c.control_lo, c.control_hi}) > 0.0, "control_lo/control_hi: no grid node inside");
  check(c.action_dim >= 1 && c.action_dim <= c.n_x - 1, "action_dim: must be in [1, n_x - 1]");
  check(c.gamma >= 0.0 && c.gamma <= 1.0, "gamma: must be in [0, 1]");
  check(finite(c.actor_lr) && c.actor_lr > 0.0, "actor_lr: must be > 0");
  check(finite(c.critic_lr) && c.critic_lr > 0.0, "critic_lr: must be > 0");
  check(c.layer1_size >= 1, "layer1_size: must be >= 1");
  check(c.layer2_size >= 1, "layer2_size: must be >= 1");
  check(c.tau >= 0.0 && c.tau <= 1.0, "tau: must be in [0, 1]");
  check(c.buffer_size >= 1, "buffer_size: must be >= 1");
  check(c.batch_size >= 1 && c.batch_size <= c.buffer_size, "batch_size: must be in [1, buffer_size]");
  check(c.warmup >= 0, "warmup: must be >= 0");
  check(finite(c.reward_scale) && c.reward_scale > 0.0, "reward_scale: must be > 0");
  check(!std::isnan(c.q_max), "q_max: must not be NaN");
  check(c.exploration == "gaussian" || c.exploration == "ou", "exploration: must be 'gaussian' or 'ou'");
  check(c.noise_sigma >= 0.0, "noise_sigma: must be >= 0");
  check(c.noise_decay > 0.0 && c.noise_decay <= 1.0, "noise_decay: must be in (0, 1]");
  check(c.noise_floor >= 0.0, "noise_floor: must be >= 0");
  check(c.ou_theta > 0.0 && c.ou_theta <= 1.0, "ou_theta: must be in (0, 1]");
  check(c.episodes >= 0, "episodes: must be >= 0");
  check(c.eval_episodes >= 1, "eval_episodes: must be >= 1");
  check(!c.snapshot_times.empty(), "snapshot_times: must not be empty");
  for (double t : c.snapshot_times)
    check(t >= c.t_start && t <= c.t_end, "snapshot_times: " + format_double(t) + " outside [t_start, t_end]");
  check(!c.feedback_gains.empty(), "feedback_gains: must not be empty");
  for (double g : c.feedback_gains) check(finite(g) && g >= 0.0, "feedback_gains: gains must be >= 0");
  check(c.tune_episodes >= 1, "tune_episodes: must be >= 1");
  check(!c.sweep_k.empty(), "sweep_k: must not be empty");
  for (double k : c.sweep_k)
    check(k >= 1.0 && k <= c.n_x - 1 && std::floor(k) == k, "sweep_k: entries must be integers in [1, n_x - 1]");
  check(c.profile_time >= c.t_start && c.profile_time <= c.t_end, "profile_time: must be in [t_start, t_end]");
  check(c.profile_runs >= 1, "profile_runs: must be >= 1");
  check(c.workers >= 0, "workers: must be >= 0");
  if (!p.empty()) throw ConfigError(std::move(p));
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig config;
  std::stringstream ss(text);
  std::string line;
  std::vector<std::string> problems;
  int line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      problems.push_back("line " + std::to_string(line_no) + ": expected 'key = value'");
      continue;
    }
    try {
      set_config_value(config, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const ConfigError& e) {
      for (const auto& msg : e.problems()) problems.push_back("line " + std::to_string(line_no) + ": " + msg);
    }
  }
  if (!problems.empty()) throw ConfigError(std::move(problems));
  return config;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({"cannot read config file '" + path + "'"});
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

std::string serialize_config(const ExperimentConfig& config) {
  std::string out;
  for (const auto& e : entries()) out += e.key + " = " + e.get(config) + "\n";
  return out;
}

void apply_env_overrides(ExperimentConfig& config, const std::map<std::string, std::string>& environment,
                         const std::string& prefix) {
  std::vector<std::string> problems;
  for (const auto& key : config_keys()) {
    std::string name = prefix + key;
    std::transform(name.begin(), name.end(), name.begin(), [](unsigned char ch) { return std::toupper(ch); });
    const auto it = environment.find(name);
    if (it == environment.end()) continue;
    try {
      set_config_value(config, key, it->second);
    } catch (const ConfigError& e) {
      for (const auto& msg : e.problems()) problems.push_back(name + ": " + msg);
    }
  }
  if (!problems.empty()) throw ConfigError(std::move(problems));
}

std::map<std::string, std::string> process_environment() {
  std::map<std::string, std::string> out;
  for (char** e = environ; e && *e; ++e) {
    const std::string entry(*e);
    const auto eq = entry.find('=');
    if (eq != std::string::npos) out.emplace(entry.substr(0, eq), entry.substr(eq + 1));
  }
  return out;
}

std::string config_hash(const ExperimentConfig& config) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char ch : serialize_config(config)) {
    h ^= ch;
    h *= 0x100000001B3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace sbe
