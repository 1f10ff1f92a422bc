#include "sbe/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <stdexcept>

#include "sbe/baselines.hpp"
#include "sbe/csv.hpp"
#include "sbe/report.hpp"

namespace sbe {

namespace fs = std::filesystem;

std::string provenance(const ExperimentConfig& config) {
  return "config_hash=" + config_hash(config) + " seed=" + std::to_string(config.seed);
}

namespace {

std::string fmt(double v) { return format_double(v); }

void prepare(const ExperimentConfig& config, const fs::path& out_dir) {
  validate(config);
  fs::create_directories(out_dir);
  std::ofstream(out_dir / "config.txt") << serialize_config(config);
}

std::string sanitize(const std::string& name) {
  std::string out;
  for (char c : name) out += std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-' ? c : '_';
  return out;
}

double max_gradient(const Field& u) {
  const Grid& g = u.grid();
  double m = 0.0;
  for (std::size_t i = 0; i < g.n_points(); ++i) m = std::max(m, std::abs(u[g.next(i)] - u[i]) / g.dx());
  return m;
}

std::size_t workers_of(const ExperimentConfig& c) { return static_cast<std::size_t>(c.workers); }

}  // namespace

FreeRunOutput run_free(const ExperimentConfig& config, const fs::path& out_dir) {
  prepare(config, out_dir);
  const SbeConfig sbe_cfg = config.sbe();
  const Field u0 = config.env().u0.sample(sbe_cfg.grid);
  const double duration = config.t_end - config.t_start;
  const auto all = run_free_evolution(u0, sbe_cfg, duration, derive_seed(config.seed, stream::kSolverNoise));

  FreeRunOutput out;
  const std::string prov = provenance(config);
  for (std::size_t s = 0; s < config.snapshot_times.size(); ++s) {
    const double t = config.snapshot_times[s];
    const auto k = static_cast<std::size_t>(std::llround((t - config.t_start) / config.dt));
    const Field& u = all.at(k).u;
    const fs::path path = out_dir / ("free_snapshot_" + std::to_string(s) + ".csv");
    CsvWriter csv(path, prov, {"t", "x", "u"});
    const double tk = config.t_start + static_cast<double>(k) * config.dt;
    for (std::size_t i = 0; i < u.size(); ++i) csv.row({fmt(tk), fmt(u.grid().x(i)), fmt(u[i])});
    out.snapshot_files.push_back(path);
  }

  out.energy_file = out_dir / "free_energy.csv";
  CsvWriter energy(out.energy_file, prov, {"t", "energy", "momentum", "max_gradient"});
  for (const auto& snap : all)
    energy.row({fmt(config.t_start + snap.t), fmt(l2_sq(snap.u)), fmt(integrate(snap.u)), fmt(max_gradient(snap.u))});

  if (config.svg) {
    std::vector<Series> series;
    for (std::size_t s = 0; s < config.snapshot_times.size(); ++s) {
      const auto k = static_cast<std::size_t>(std::llround((config.snapshot_times[s] - config.t_start) / config.dt));
      Series line{"t=" + fmt(config.snapshot_times[s]), {}, {}};
      for (std::size_t i = 0; i < all[k].u.size(); ++i) {
        line.x.push_back(all[k].u.grid().x(i));
        line.y.push_back(all[k].u[i]);
      }
      series.push_back(std::move(line));
    }
    write_svg_lines(out_dir / "free_snapshots.svg", "Free evolution", "x", "u", series);
  }
  return out;
}

void write_evaluation_csv(const fs::path& path, const std::string& prov, const std::vector<EpisodeResult>& results) {
  CsvWriter csv(path, prov, {"episode", "seed", "policy", "return", "discounted_return", "state_cost", "action_cost"});
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& r = results[i];
    csv.row({std::to_string(i), std::to_string(r.seed), r.policy, fmt(r.undiscounted_return),
             fmt(r.discounted_return), fmt(r.state_cost), fmt(r.action_cost)});
  }
}

namespace {

Policy agent_policy(std::shared_ptr<const ddpg::Agent> agent) {
  return [agent](const Field& s) { return agent->act(s); };
}

void write_history(const fs::path& path, const std::string& prov, const ddpg::TrainingHistory& history) {
  CsvWriter csv(path, prov, {"episode", "return", "critic_loss", "actor_objective", "noise_scale"});
  for (const auto& h : history)
    csv.row({std::to_string(h.episode), fmt(h.undiscounted_return), fmt(h.critic_loss), fmt(h.actor_objective),
             fmt(h.noise_scale)});
}

struct TrainedAgent {
  std::shared_ptr<ddpg::Agent> agent;
  ddpg::TrainingHistory history;
};

TrainedAgent train_agent(const ExperimentConfig& config, std::ostream* log, const std::string& tag) {
  auto agent = std::make_shared<ddpg::Agent>(config.agent(), derive_seed(config.seed, stream::kInit));
  Environment env(config.env());
  const std::size_t every = std::max<std::size_t>(1, static_cast<std::size_t>(config.episodes) / 20);
  auto history = ddpg::train(*agent, env, static_cast<std::size_t>(config.episodes), config.seed,
                             [&](const ddpg::EpisodeStats& s) {
                               if (log && (s.episode + 1) % every == 0)
                                 *log << tag << "episode " << s.episode + 1 << "/" << config.episodes
                                      << " return " << fmt(s.undiscounted_return) << " critic_loss "
                                      << fmt(s.critic_loss) << " noise " << fmt(s.noise_scale) << '\n';
                             });
  return {std::move(agent), std::move(history)};
}

}  // namespace

TrainOutput run_train(const ExperimentConfig& config, const fs::path& out_dir, std::ostream* log) {
  prepare(config, out_dir);
  const std::string prov = provenance(config);
  TrainedAgent trained = train_agent(config, log, "");

  TrainOutput out;
  out.history = std::move(trained.history);
  out.checkpoint = out_dir / "agent.ckpt";
  trained.agent->save(out.checkpoint.string());
  write_history(out_dir / "train_history.csv", prov, out.history);

  const auto results = evaluate_policy(config.env(), agent_policy(trained.agent),
                                       static_cast<std::size_t>(config.eval_episodes), config.seed, "agent",
                                       workers_of(config));
  write_evaluation_csv(out_dir / "train_eval.csv", prov, results);
  out.evaluation = summarize_returns(results);

  if (config.svg && !out.history.empty()) {
    Series s{"episode return", {}, {}};
    for (const auto& h : out.history) {
      s.x.push_back(static_cast<double>(h.episode));
      s.y.push_back(h.undiscounted_return);
    }
    write_svg_lines(out_dir / "train_history.svg", "Training returns", "episode", "return", {s});
  }
  if (log)
    *log << "evaluation over " << out.evaluation.n << " greedy episodes: mean return " << fmt(out.evaluation.mean)
         << " (90% CI " << fmt(out.evaluation.ci_low()) << " .. " << fmt(out.evaluation.ci_high()) << ")\n";
  return out;
}

NamedPolicy make_policy(const std::string& spec, const ExperimentConfig& config) {
  const EnvConfig env = config.env();
  if (spec == "uncontrolled") return {"uncontrolled", baselines::make_uncontrolled(env.action_dim), nullptr};
  if (spec == "feedback") {
    const auto tuned = baselines::tune_gain(env, config.feedback_gains, static_cast<std::size_t>(config.tune_episodes),
                                            derive_seed(config.seed, "gain-tuning"), workers_of(config));
    return {"feedback(gain=" + fmt(tuned.gain) + ")", baselines::make_feedback(baselines::feedback_for(env, tuned.gain)),
            nullptr};
  }
  if (spec.rfind("feedback:", 0) == 0) {
    const std::string g = spec.substr(9);
    double gain = 0.0;
    try {
      std::size_t used = 0;
      gain = std::stod(g, &used);
      if (used != g.size()) throw std::invalid_argument(g);
    } catch (const std::exception&) {
      throw std::invalid_argument("bad feedback gain in policy spec '" + spec + "'");
    }
    return {"feedback(gain=" + fmt(gain) + ")", baselines::make_feedback(baselines::feedback_for(env, gain)), nullptr};
  }
  if (spec.rfind("agent:", 0) == 0) {
    const std::string path = spec.substr(6);
    if (!fs::exists(path)) throw std::runtime_error("missing checkpoint: " + path);
    auto agent = std::make_shared<const ddpg::Agent>(ddpg::Agent::load(path, config.agent()));
    return {"agent(" + fs::path(path).filename().string() + ")", agent_policy(agent), agent};
  }
  throw std::invalid_argument("unknown policy spec '" + spec + "'");
}

std::vector<ComparisonRow> run_compare(const ExperimentConfig& config, const std::vector<std::string>& specs,
                                       const fs::path& out_dir, std::ostream* log) {
  if (specs.empty()) throw std::invalid_argument("compare: at least one policy is required");
  validate(config);
  std::vector<NamedPolicy> policies;
  for (const auto& s : specs) policies.push_back(make_policy(s, config));
  return run_compare(config, policies, out_dir, log);
}

std::vector<ComparisonRow> run_compare(const ExperimentConfig& config, const std::vector<NamedPolicy>& policies,
                                       const fs::path& out_dir, std::ostream* log) {
  if (policies.empty()) throw std::invalid_argument("compare: at least one policy is required");
  prepare(config, out_dir);
  const std::string prov = provenance(config);
  const EnvConfig env_cfg = config.env();
  const Grid grid = env_cfg.sbe.grid;
  const auto n_eval = static_cast<std::size_t>(config.eval_episodes);
  const auto n_profile = std::min(n_eval, static_cast<std::size_t>(config.profile_runs));
  const auto profile_step = static_cast<std::size_t>(std::llround((config.profile_time - config.t_start) / config.dt));

  std::vector<ComparisonRow> rows;
  CsvWriter compare(out_dir / "compare.csv", prov,
                    {"policy", "n", "mean_return", "stddev", "ci_low", "ci_high", "ci_half_width",
                     "deviation_at_profile_time", "degenerate_ci"});
  CsvWriter profiles(out_dir / "profiles.csv", prov, {"policy", "t", "x", "u_mean", "u_ci_half", "f_mean", "f_ci_half"});
  std::vector<Bar> bars;

  for (std::size_t p = 0; p < policies.size(); ++p) {
    const auto& np = policies[p];
    std::vector<EpisodeResult> results(n_eval);
    std::vector<Field> u_at(n_profile, Field(grid)), f_at(n_profile, Field(grid));
    std::vector<std::vector<std::vector<std::string>>> log_rows(config.transition_log ? n_eval : 0);
    parallel_for(n_eval, workers_of(config), [&](std::size_t i) {
      Environment env(env_cfg);
      if (i < n_profile && profile_step == 0) u_at[i] = env_cfg.u0.sample(grid);
      const TransitionObserver observer = [&, i](const Transition& tr, double t) {
        if (i < n_profile && env.steps_taken() == profile_step) {
          u_at[i] = tr.next_state;
          f_at[i] = expand_action(tr.action, grid, env_cfg.f_min, env_cfg.f_max);
        }
        if (config.transition_log) {
          std::vector<std::string> row{std::to_string(i), std::to_string(env.steps_taken()), fmt(t), fmt(tr.reward)};
          for (double a : tr.action) row.push_back(fmt(a));
          log_rows[i].push_back(std::move(row));
        }
      };
      results[i] = run_episode(env, np.policy, evaluation_seed(config.seed, i), np.name, observer);
    });
    if (config.transition_log) {
      std::vector<std::string> columns{"episode", "step", "t", "reward"};
      for (std::size_t j = 0; j < env_cfg.action_dim; ++j) columns.push_back("a" + std::to_string(j));
      CsvWriter tlog(out_dir / ("transitions_" + std::to_string(p) + "_" + sanitize(np.name) + ".csv"), prov, columns);
      for (const auto& episode : log_rows)
        for (const auto& row : episode) tlog.row(row);
    }

    ComparisonRow row{np.name, summarize_returns(results), 0.0};
    for (const auto& u : u_at) {
      const double ubar = spatial_mean(u);
      Field dev = u;
      dev += -ubar;
      row.deviation_at_profile += l2_sq(dev) / static_cast<double>(n_profile);
    }
    const auto& s = row.summary;
    compare.row({np.name, std::to_string(s.n), fmt(s.mean), fmt(s.stddev), fmt(s.ci_low()), fmt(s.ci_high()),
                 fmt(s.ci_half), fmt(row.deviation_at_profile), s.degenerate ? "true" : "false"});
    write_evaluation_csv(out_dir / ("eval_" + std::to_string(p) + "_" + sanitize(np.name) + ".csv"), prov, results);

    for (std::size_t i = 0; i < grid.n_points(); ++i) {
      std::vector<double> us, fs_;
      for (std::size_t r = 0; r < n_profile; ++r) {
        us.push_back(u_at[r][i]);
        fs_.push_back(f_at[r][i]);
      }
      const auto su = summarize(us), sf = summarize(fs_);
      profiles.row({np.name, fmt(config.profile_time), fmt(grid.x(i)), fmt(su.mean), fmt(su.ci_half), fmt(sf.mean),
                    fmt(sf.ci_half)});
    }
    bars.push_back({np.name, s.mean, s.ci_low(), s.ci_high()});
    if (log)
      *log << np.name << ": mean return " << fmt(s.mean) << " (90% CI " << fmt(s.ci_low()) << " .. "
           << fmt(s.ci_high()) << (s.degenerate ? ", degenerate: n = 1" : "") << ")\n";
    rows.push_back(std::move(row));
  }
  if (config.svg) write_svg_bars(out_dir / "compare.svg", "Average return", "return", bars);
  return rows;
}

std::vector<SweepRow> run_sweep_k(const ExperimentConfig& config, const fs::path& out_dir, std::ostream* log) {
  prepare(config, out_dir);
  const std::string prov = provenance(config);
  std::vector<SweepRow> rows;
  CsvWriter csv(out_dir / "sweep_k.csv", prov,
                {"action_dim", "episodes", "n", "mean_return", "ci_low", "ci_high", "ci_half_width",
                 "improves_on_previous"});
  std::vector<Bar> bars;
  for (double kd : config.sweep_k) {
    ExperimentConfig c = config;
    c.action_dim = static_cast<int>(kd);
    const std::string k = std::to_string(c.action_dim);
    TrainedAgent trained = train_agent(c, log, "[k=" + k + "] ");
    const fs::path ckpt = out_dir / ("agent_k" + k + ".ckpt");
    trained.agent->save(ckpt.string());
    write_history(out_dir / ("train_history_k" + k + ".csv"), prov, trained.history);
    const auto results = evaluate_policy(c.env(), agent_policy(trained.agent),
                                         static_cast<std::size_t>(c.eval_episodes), c.seed, "agent_k" + k,
                                         workers_of(c));
    write_evaluation_csv(out_dir / ("sweep_eval_k" + k + ".csv"), prov, results);
    SweepRow row{static_cast<std::size_t>(c.action_dim), summarize_returns(results), ckpt};
    const std::string improves =
        rows.empty() ? "" : (row.summary.mean > rows.back().summary.mean ? "true" : "false");
    const auto& s = row.summary;
    csv.row({k, std::to_string(c.episodes), std::to_string(s.n), fmt(s.mean), fmt(s.ci_low()), fmt(s.ci_high()),
             fmt(s.ci_half), improves});
    bars.push_back({"k=" + k, s.mean, s.ci_low(), s.ci_high()});
    if (log) *log << "k=" << k << ": mean return " << fmt(s.mean) << " +/- " << fmt(s.ci_half) << '\n';
    rows.push_back(std::move(row));
  }
  if (log) {
    bool monotone = true;
    for (std::size_t i = 1; i < rows.size(); ++i) monotone &= rows[i].summary.mean > rows[i - 1].summary.mean;
    *log << "monotone improvement with action dimension: " << (monotone ? "yes" : "no") << '\n';
  }
  if (config.svg) write_svg_bars(out_dir / "sweep_k.svg", "Average return by action dimension", "return", bars);
  return rows;
}

}  // namespace sbe
