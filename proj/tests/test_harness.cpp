#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "sbe/baselines.hpp"
#include "sbe/config.hpp"
#include "sbe/experiments.hpp"

using namespace sbe;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines_of(const fs::path& p) {
  std::vector<std::string> out;
  std::ifstream in(p);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("sbe_harness_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

ExperimentConfig tiny() {
  ExperimentConfig c;
  c.t_end = 0.2;
  c.snapshot_times = {0.0, 0.1, 0.2};
  c.eval_episodes = 4;
  c.profile_time = 0.1;
  c.profile_runs = 3;
  c.episodes = 2;
  c.layer1_size = 16;
  c.layer2_size = 12;
  c.batch_size = 8;
  c.warmup = 16;
  c.buffer_size = 1000;
  c.tune_episodes = 2;
  c.feedback_gains = {0.5, 2.0};
  c.sweep_k = {2, 3};
  c.workers = 2;
  return c;
}

int run_ctl(const std::string& args) {
  const char* ctl = std::getenv("SBE_CTL");
  REQUIRE_MESSAGE(ctl != nullptr, "SBE_CTL must point at the sbe_ctl binary");
  const int status = std::system((std::string(ctl) + " " + args + " > /dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("config defaults") {
  const ExperimentConfig c;
  CHECK_NOTHROW(validate(c));
  CHECK(c.grid().n_points() == 150);
  const EnvConfig env = c.env();
  CHECK(env.steps_per_episode() == 200);
  CHECK(env.lambda == 0.2);
  const auto a = c.agent();
  CHECK(a.actor_lr == 2.5e-5);
  CHECK(a.critic_lr == 2.5e-4);
  CHECK(a.hidden1 == 400);
  CHECK(a.hidden2 == 300);
  CHECK(a.tau == 0.1);
  CHECK(a.buffer_capacity == 1'000'000);
  CHECK(a.state_dim == 150);
}

TEST_CASE("config round trip") {
  ExperimentConfig c = tiny();
  c.nu = 1.0;
  c.epsilon = 0.1234567890123;
  c.exploration = "ou";
  c.svg = true;
  const std::string text = serialize_config(c);
  const ExperimentConfig back = parse_config(text);
  CHECK(serialize_config(back) == text);
  CHECK(config_hash(back) == config_hash(c));
  CHECK(back.epsilon == c.epsilon);
  for (const auto& key : config_keys()) CHECK(get_config_value(back, key) == get_config_value(c, key));

  const ExperimentConfig parsed = parse_config("# comment\n  nu = 10   # trailing\n\nsweep_k = 4, 7\n");
  CHECK(parsed.nu == 10.0);
  CHECK(parsed.sweep_k == std::vector<double>{4, 7});
  CHECK(config_hash(parsed) != config_hash(ExperimentConfig{}));
  CHECK(config_hash(ExperimentConfig{}).size() == 16);
}

TEST_CASE("config errors name the offending fields") {
  CHECK_THROWS_AS(parse_config("no_such_key = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("nu = abc\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("nu\n"), ConfigError);
  ExperimentConfig c;
  c.nu = -1.0;
  c.tau = 2.0;
  c.dt = 0.03;
  try {
    validate(c);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    REQUIRE(e.problems().size() == 3);
    CHECK(e.problems()[0].rfind("nu:", 0) == 0);
    CHECK(e.problems()[1].rfind("dt:", 0) == 0);
    CHECK(e.problems()[2].rfind("tau:", 0) == 0);
  }
}

TEST_CASE("environment overrides") {
  ExperimentConfig c;
  apply_env_overrides(c, {{"SBE_NU", "1"}, {"SBE_EVAL_EPISODES", "7"}, {"OTHER", "x"}, {"SBE_UNKNOWN_THING", "3"}});
  CHECK(c.nu == 1.0);
  CHECK(c.eval_episodes == 7);
}

TEST_CASE("return summaries") {
  const auto one = summarize({-3.0});
  CHECK(one.degenerate);
  CHECK(one.ci_half == 0.0);
  CHECK(one.mean == -3.0);

  const auto s = summarize({1.0, 2.0, 3.0, 4.0});
  CHECK(s.mean == 2.5);
  CHECK(s.stddev == doctest::Approx(std::sqrt(5.0 / 3.0)));
  CHECK(s.ci_half == doctest::Approx(1.645 * std::sqrt(5.0 / 3.0) / 2.0));
  CHECK_FALSE(s.degenerate);
  CHECK(s.ci_low() == doctest::Approx(2.5 - s.ci_half));
}

TEST_CASE("evaluation does not depend on the worker count") {
  const EnvConfig env = tiny().env();
  const Policy p = baselines::make_feedback(baselines::feedback_for(env, 1.0));
  const auto a = evaluate_policy(env, p, 6, 3, "fb", 1);
  const auto b = evaluate_policy(env, p, 6, 3, "fb", 3);
  REQUIRE(a.size() == 6);
  for (std::size_t i = 0; i < 6; ++i) {
    CHECK(a[i].seed == evaluation_seed(3, i));
    CHECK(a[i].undiscounted_return == b[i].undiscounted_return);
    CHECK(std::abs(a[i].undiscounted_return + a[i].state_cost + a[i].action_cost) < 1e-9);
  }
}

TEST_CASE("run_free") {
  ExperimentConfig c;
  c.epsilon = 0.0;
  const fs::path out = scratch("free");
  const auto files = run_free(c, out);
  REQUIRE(files.snapshot_files.size() == 4);
  for (const auto& f : files.snapshot_files) {
    const auto lines = lines_of(f);
    REQUIRE(lines.size() == 152);
    CHECK(lines[0] == "# " + provenance(c));
    CHECK(lines[1] == "t,x,u");
  }
  const auto energy = lines_of(files.energy_file);
  CHECK(energy[1] == "t,energy,momentum,max_gradient");
  double prev = INFINITY;
  for (std::size_t i = 2; i < energy.size(); ++i) {
    std::stringstream row(energy[i]);
    std::string t, e;
    std::getline(row, t, ',');
    std::getline(row, e, ',');
    CHECK(std::stod(e) <= prev);
    prev = std::stod(e);
  }
  CHECK(energy.size() == 2 + 201);

  const fs::path again = scratch("free2");
  run_free(c, again);
  for (const auto& f : files.snapshot_files) CHECK(slurp(f) == slurp(again / f.filename()));
  CHECK(slurp(files.energy_file) == slurp(again / "free_energy.csv"));
}

TEST_CASE("run_compare") {
  ExperimentConfig c = tiny();
  const fs::path out = scratch("compare");
  const auto rows = run_compare(c, std::vector<std::string>{"uncontrolled", "feedback:1", "uncontrolled"}, out);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].summary.mean == rows[2].summary.mean);
  CHECK(rows[0].summary.ci_half == rows[2].summary.ci_half);
  CHECK(rows[0].deviation_at_profile == rows[2].deviation_at_profile);
  CHECK(rows[1].deviation_at_profile < rows[0].deviation_at_profile);
  CHECK(rows[1].policy == "feedback(gain=1)");
  CHECK(fs::exists(out / "eval_1_feedback_gain_1_.csv"));

  const auto compare = lines_of(out / "compare.csv");
  REQUIRE(compare.size() == 5);
  CHECK(compare[0] == "# " + provenance(c));
  CHECK(compare[1] == "policy,n,mean_return,stddev,ci_low,ci_high,ci_half_width,deviation_at_profile_time,degenerate_ci");
  CHECK(lines_of(out / "profiles.csv").size() == 2 + 3 * 150);

  // the same noise realisation for every policy: episode seeds match
  CHECK(lines_of(out / "eval_0_uncontrolled.csv") == lines_of(out / "eval_2_uncontrolled.csv"));

  c.eval_episodes = 1;
  c.profile_runs = 1;
  const auto single = run_compare(c, std::vector<std::string>{"uncontrolled"}, scratch("compare1"));
  CHECK(single[0].summary.degenerate);
  CHECK(single[0].summary.ci_half == 0.0);
  CHECK(lines_of(fs::temp_directory_path() / "sbe_harness_compare1" / "compare.csv")[2].ends_with(",true"));

  try {
    run_compare(c, std::vector<std::string>{"agent:/nonexistent/agent.ckpt"}, scratch("compare2"));
    FAIL("expected an error");
  } catch (const std::exception& e) {
    CHECK(std::string(e.what()).find("/nonexistent/agent.ckpt") != std::string::npos);
  }
  CHECK_THROWS(make_policy("bogus", c));
  CHECK_THROWS(make_policy("feedback:abc", c));
}

TEST_CASE("transition log") {
  ExperimentConfig c = tiny();
  c.transition_log = true;
  c.eval_episodes = 2;
  const fs::path out = scratch("tlog");
  run_compare(c, std::vector<std::string>{"feedback:1"}, out);
  const auto lines = lines_of(out / "transitions_0_feedback_gain_1_.csv");
  REQUIRE(lines.size() == 2 + 2 * 20);
  CHECK(lines[1] == "episode,step,t,reward,a0,a1,a2,a3");
  CHECK(lines[2].rfind("0,1,0.01,", 0) == 0);
  CHECK(lines.back().rfind("1,20,0.2", 0) == 0);
}

TEST_CASE("run_train and the trained policy") {
  ExperimentConfig c = tiny();
  const fs::path out = scratch("train");
  const auto result = run_train(c, out);
  CHECK(result.history.size() == 2);
  CHECK(fs::exists(result.checkpoint));
  CHECK(lines_of(out / "train_history.csv")[1] == "episode,return,critic_loss,actor_objective,noise_scale");
  CHECK(lines_of(out / "train_history.csv").size() == 4);
  const auto rows = run_compare(c, std::vector<std::string>{"agent:" + result.checkpoint.string()}, scratch("train_cmp"));
  CHECK(rows[0].summary.mean == doctest::Approx(result.evaluation.mean).epsilon(1e-12));

  c.episodes = 0;
  const auto untrained = run_train(c, scratch("train0"));
  CHECK(untrained.history.empty());
  CHECK(fs::exists(untrained.checkpoint));
}

TEST_CASE("run_sweep_k") {
  const fs::path out = scratch("sweep");
  const auto rows = run_sweep_k(tiny(), out);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].action_dim == 2);
  CHECK(rows[1].action_dim == 3);
  const auto lines = lines_of(out / "sweep_k.csv");
  REQUIRE(lines.size() == 4);
  CHECK(lines[1] == "action_dim,episodes,n,mean_return,ci_low,ci_high,ci_half_width,improves_on_previous");
}

TEST_CASE("command line") {
  const fs::path out = scratch("cli");
  CHECK(run_ctl("free --t_end 0.2 --profile_time 0.1 --snapshot_times 0,0.2 -q -o " + (out / "a").string()) == 0);
  CHECK(run_ctl("free --t_end 0.2 --profile_time 0.1 --snapshot_times 0,0.2 -q -o " + (out / "b").string()) == 0);
  CHECK(slurp(out / "a" / "free_snapshot_1.csv") == slurp(out / "b" / "free_snapshot_1.csv"));
  CHECK(slurp(out / "a" / "free_energy.csv") == slurp(out / "b" / "free_energy.csv"));

  CHECK(run_ctl("free --nu -1 -q -o " + (out / "c").string()) == 2);
  CHECK(run_ctl("compare -q -p agent:/nonexistent.ckpt -o " + (out / "d").string()) == 1);
  CHECK(run_ctl("-q") != 0);

  // precedence: file < environment < flag
  {
    std::ofstream cfg(out / "run.cfg");
    cfg << "t_end = 0.2\nsnapshot_times = 0, 0.2\nprofile_time = 0.1\nnu = 0.5\nseed = 5\n";
  }
  setenv("SBE_NU", "0.25", 1);
  CHECK(run_ctl("free -q -c " + (out / "run.cfg").string() + " -o " + (out / "e").string()) == 0);
  CHECK(run_ctl("free -q -c " + (out / "run.cfg").string() + " --nu 0.125 -o " + (out / "f").string()) == 0);
  unsetenv("SBE_NU");
  const ExperimentConfig e = load_config((out / "e" / "config.txt").string());
  const ExperimentConfig f = load_config((out / "f" / "config.txt").string());
  CHECK(e.nu == 0.25);
  CHECK(e.seed == 5);
  CHECK(f.nu == 0.125);
}
