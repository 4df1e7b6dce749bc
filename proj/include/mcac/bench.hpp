#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "mcac/actor_critic.hpp"
#include "mcac/critic_store.hpp"
#include "mcac/error.hpp"
#include "mcac/gridworld.hpp"
#include "mcac/multi_critic.hpp"
#include "mcac/oracle.hpp"

namespace mcac {

struct ExperimentConfig {
  bool run_ac = true;
  bool run_mcac = true;
  std::uint64_t runs = 100;
  std::uint64_t episodes = 100;
  std::uint64_t base_seed = 1;      // run r uses seed base_seed + r
  double gamma = 0.95;
  std::uint64_t max_steps_per_episode = 10'000;
  Schedule value_schedule = default_two_timescale().fast;
  TwoTimescale mcac_rates = default_two_timescale();
  Schedule policy_schedule = default_two_timescale().slow;
  TdSign td_sign = TdSign::Prose;
  CriticRewardSource reward_source = CriticRewardSource::CurrentEnv;
  unsigned parallel_runs = 1;
};

/// Loads key = value overrides onto the built-in defaults.
inline ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config file " + path.string());
  ExperimentConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string where = path.filename().string() + ":" + std::to_string(lineno);
    std::string t = detail::trim(line);
    if (auto hash = t.find('#'); hash != std::string::npos)
      t = detail::trim(t.substr(0, hash));
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw DataError(where + ": expected key = value");
    const std::string key = detail::trim(t.substr(0, eq));
    const std::string value = detail::trim(t.substr(eq + 1));
    if (key == "format") {
      if (value != "1") throw DataError(where + ": unsupported format");
    } else if (key == "runs") {
      cfg.runs = std::stoull(value);
    } else if (key == "episodes") {
      cfg.episodes = std::stoull(value);
    } else if (key == "base-seed") {
      cfg.base_seed = std::stoull(value);
    } else if (key == "gamma") {
      cfg.gamma = detail::parse_double(value, where);
    } else if (key == "max-steps") {
      cfg.max_steps_per_episode = std::stoull(value);
    } else if (key == "algorithms") {
      cfg.run_ac = value.find("ac") != std::string::npos;
      cfg.run_mcac = value.find("mcac") != std::string::npos;
    } else if (key == "td-sign") {
      if (value == "prose") cfg.td_sign = TdSign::Prose;
      else if (value == "algorithm1") cfg.td_sign = TdSign::Algorithm1;
      else throw DataError(where + ": td-sign must be prose or algorithm1");
    } else if (key == "critic-reward-source") {
      if (value == "current-env") cfg.reward_source = CriticRewardSource::CurrentEnv;
      else if (value == "per-critic-tables")
        cfg.reward_source = CriticRewardSource::PerCriticTables;
      else throw DataError(where + ": unknown critic-reward-source");
    } else if (key == "fast-rate-scale") {
      cfg.mcac_rates.fast.scale = cfg.value_schedule.scale =
          detail::parse_double(value, where);
    } else if (key == "fast-rate-exponent") {
      cfg.mcac_rates.fast.exponent = cfg.value_schedule.exponent =
          detail::parse_double(value, where);
    } else if (key == "fast-rate-offset") {
      cfg.mcac_rates.fast.offset = cfg.value_schedule.offset =
          detail::parse_double(value, where);
    } else if (key == "slow-rate-scale") {
      cfg.mcac_rates.slow.scale = cfg.policy_schedule.scale =
          detail::parse_double(value, where);
    } else if (key == "slow-rate-offset") {
      cfg.mcac_rates.slow.offset = cfg.policy_schedule.offset =
          detail::parse_double(value, where);
    } else if (key == "parallel-runs") {
      cfg.parallel_runs = static_cast<unsigned>(std::stoul(value));
    } else {
      throw DataError(where + ": unknown config key '" + key + "'");
    }
  }
  return cfg;
}

/// Trains a baseline critic on every pre-trained scenario and packages
/// the converged values as artifacts. Pre-training always runs on the
/// dedicated cold-policy rate pair (see pretrain_two_timescale): the
/// deployment schedules in `cfg` optimize time-to-autonomy, which leaves
/// rarely visited states with stale values — poison for a reused critic.
inline std::vector<CriticArtifact> pretrain_artifacts(
    const ScenarioSet& set, const ExperimentConfig& cfg,
    std::uint64_t episodes, const std::string& created_at = "") {
  if (set.pretrained.empty())
    throw DataError("no pre-trained scenarios in the set");
  std::vector<CriticArtifact> artifacts;
  for (const auto& sc : set.pretrained) {
    const Mdp mdp = compile(sc, cfg.gamma);
    AcConfig ac;
    ac.gamma = cfg.gamma;
    ac.value_schedule = pretrain_two_timescale().fast;
    ac.policy_schedule = pretrain_two_timescale().slow;
    ac.episodes = episodes;
    ac.max_steps_per_episode = cfg.max_steps_per_episode;
    ac.seed = cfg.base_seed;
    const AcResult res = train(mdp, sc.state_index(sc.start), ac);
    CriticArtifact artifact;
    artifact.scenario_name = sc.name;
    artifact.scenario_digest = scenario_digest(sc);
    artifact.state_count = mdp.num_states;
    artifact.gamma = cfg.gamma;
    artifact.values = res.values;
    artifact.training_episodes = episodes;
    artifact.seed = cfg.base_seed;
    artifact.created_at = created_at;
    artifacts.push_back(std::move(artifact));
  }
  return artifacts;
}

/// One training run's worth of raw data.
struct RunRecord {
  std::string algorithm;   // "ac" or "mcac"
  std::string deployment;
  std::uint64_t run = 0;
  std::uint64_t seed = 0;
  double wall_seconds = 0.0;
  std::uint64_t truncations = 0;
  std::vector<double> rewards;        // per episode
  std::vector<std::uint64_t> steps;   // per episode
};

struct RawResults {
  std::uint64_t episodes = 0;
  std::vector<std::string> deployments;  // in scenario-file order
  std::vector<RunRecord> runs;
};

/// Runs the configured algorithms on every deployment in the set. The
/// bank artifacts back MCAC; pass an empty vector when MCAC is disabled.
inline RawResults run_experiment(const ScenarioSet& set,
                                 const std::vector<CriticArtifact>& artifacts,
                                 const ExperimentConfig& cfg) {
  if (cfg.runs == 0) throw DataError("run_experiment: runs must be >= 1");
  if (set.deployments.empty()) throw DataError("scenario set has no deployments");
  if (cfg.run_mcac && artifacts.empty())
    throw DataError("MCAC requested but no critic bank given");

  RawResults results;
  results.episodes = cfg.episodes;

  for (const auto& deployment : set.deployments) {
    results.deployments.push_back(deployment.name);
    const Mdp mdp = compile(deployment, cfg.gamma);
    const std::size_t start = deployment.state_index(deployment.start);
    CriticBank bank;
    if (cfg.run_mcac)
      bank = assemble_bank(artifacts, deployment, cfg.gamma, set.pretrained);

    for (const char* algorithm : {"ac", "mcac"}) {
      const bool is_mcac = std::string(algorithm) == "mcac";
      if (is_mcac ? !cfg.run_mcac : !cfg.run_ac) continue;

      std::vector<RunRecord> records(cfg.runs);
      auto run_one = [&](std::uint64_t r) {
        RunRecord rec;
        rec.algorithm = algorithm;
        rec.deployment = deployment.name;
        rec.run = r;
        rec.seed = cfg.base_seed + r;
        if (is_mcac) {
          McacConfig mc;
          mc.gamma = cfg.gamma;
          mc.rates = cfg.mcac_rates;
          mc.episodes = cfg.episodes;
          mc.max_steps_per_episode = cfg.max_steps_per_episode;
          mc.seed = rec.seed;
          mc.td_sign = cfg.td_sign;
          mc.reward_source = cfg.reward_source;
          mc.record_weight_trace = false;
          const McacResult res = train_mcac(mdp, start, bank, mc);
          rec.wall_seconds = res.wall_seconds;
          rec.truncations = res.curves.truncation_count;
          rec.rewards = res.curves.reward;
          rec.steps = res.curves.steps;
        } else {
          AcConfig ac;
          ac.gamma = cfg.gamma;
          ac.value_schedule = cfg.value_schedule;
          ac.policy_schedule = cfg.policy_schedule;
          ac.episodes = cfg.episodes;
          ac.max_steps_per_episode = cfg.max_steps_per_episode;
          ac.seed = rec.seed;
          ac.td_sign = cfg.td_sign;
          const AcResult res = train(mdp, start, ac);
          rec.wall_seconds = res.wall_seconds;
          rec.truncations = res.curves.truncation_count;
          rec.rewards = res.curves.reward;
          rec.steps = res.curves.steps;
        }
        records[r] = std::move(rec);
      };

      if (cfg.parallel_runs > 1) {
        std::atomic<std::uint64_t> next{0};
        const unsigned workers =
            std::min<std::uint64_t>(cfg.parallel_runs, cfg.runs);
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) {
          pool.emplace_back([&] {
            for (std::uint64_t r = next.fetch_add(1); r < cfg.runs;
                 r = next.fetch_add(1))
              run_one(r);
          });
        }
        for (auto& th : pool) th.join();
      } else {
        for (std::uint64_t r = 0; r < cfg.runs; ++r) run_one(r);
      }
      for (auto& rec : records) results.runs.push_back(std::move(rec));
    }
  }
  return results;
}

// ---------------------------------------------------------------------------
// Metrics and speedups
// ---------------------------------------------------------------------------

/// Episodes to convergence per the averaged-curve definition: the AC
/// count is the earliest episode achieving the maximum of AC's averaged
/// reward curve; the MCAC count is the earliest episode whose averaged
/// reward meets or exceeds that maximum (nullopt if never reached).
/// Both counts are 1-based.
inline std::pair<std::uint64_t, std::optional<std::uint64_t>>
episodes_to_convergence(std::span<const double> ac_avg,
                        std::span<const double> mcac_avg) {
  if (ac_avg.empty() || ac_avg.size() != mcac_avg.size())
    throw DataError("episodes_to_convergence: curve length mismatch");
  const double peak = *std::max_element(ac_avg.begin(), ac_avg.end());
  std::uint64_t e_ac = 1;
  for (std::size_t e = 0; e < ac_avg.size(); ++e) {
    if (ac_avg[e] >= peak) {
      e_ac = e + 1;
      break;
    }
  }
  std::optional<std::uint64_t> e_mcac;
  for (std::size_t e = 0; e < mcac_avg.size(); ++e) {
    if (mcac_avg[e] >= peak) {
      e_mcac = e + 1;
      break;
    }
  }
  return {e_ac, e_mcac};
}

/// The total-speedup identity of the report generator.
inline double combine_speedups(double su1, double su2) { return su1 * su2; }

struct DeploymentSummary {
  std::string deployment;
  double avg_reward_ac = 0.0, avg_reward_mcac = 0.0;    // final episode
  double avg_steps_ac = 0.0, avg_steps_mcac = 0.0;      // final episode
  double avg_runtime_ac = 0.0, avg_runtime_mcac = 0.0;  // seconds, unrounded
  std::uint64_t episodes_ac = 0;
  std::optional<std::uint64_t> episodes_mcac;
  double su1 = 0.0;
  std::optional<double> su2;
  std::optional<double> total_su;
};

struct CurvePoint {
  double mean_reward = 0.0, var_reward = 0.0;
  double mean_steps = 0.0, var_steps = 0.0;
};

struct SpeedupReport {
  std::vector<DeploymentSummary> rows;
  double mean_total_su = 0.0;  // over deployments where SU2 exists
  // mean and variance bands per episode, keyed (deployment, algorithm)
  std::map<std::pair<std::string, std::string>, std::vector<CurvePoint>> curves;
};

namespace detail {

struct Aggregate {
  std::vector<double> mean_reward, var_reward, mean_steps, var_steps;
  double mean_runtime = 0.0;
  std::uint64_t count = 0;
};

inline Aggregate aggregate_runs(const RawResults& results,
                                const std::string& deployment,
                                const std::string& algorithm) {
  Aggregate agg;
  const std::size_t episodes = results.episodes;
  agg.mean_reward.assign(episodes, 0.0);
  agg.var_reward.assign(episodes, 0.0);
  agg.mean_steps.assign(episodes, 0.0);
  agg.var_steps.assign(episodes, 0.0);
  for (const auto& rec : results.runs) {
    if (rec.deployment != deployment || rec.algorithm != algorithm) continue;
    ++agg.count;
    agg.mean_runtime += rec.wall_seconds;
    for (std::size_t e = 0; e < episodes; ++e) {
      agg.mean_reward[e] += rec.rewards[e];
      agg.var_reward[e] += rec.rewards[e] * rec.rewards[e];
      agg.mean_steps[e] += static_cast<double>(rec.steps[e]);
      agg.var_steps[e] += static_cast<double>(rec.steps[e]) * rec.steps[e];
    }
  }
  if (agg.count == 0) return agg;
  const double n = static_cast<double>(agg.count);
  agg.mean_runtime /= n;
  for (std::size_t e = 0; e < episodes; ++e) {
    agg.mean_reward[e] /= n;
    agg.mean_steps[e] /= n;
    // population variance; clamp the tiny negative residue of the
    // E[x^2] - E[x]^2 form
    agg.var_reward[e] =
        std::max(0.0, agg.var_reward[e] / n - agg.mean_reward[e] * agg.mean_reward[e]);
    agg.var_steps[e] =
        std::max(0.0, agg.var_steps[e] / n - agg.mean_steps[e] * agg.mean_steps[e]);
  }
  return agg;
}

}  // namespace detail

inline SpeedupReport speedups(const RawResults& results) {
  SpeedupReport report;
  std::vector<double> total_sus;
  for (const auto& deployment : results.deployments) {
    const auto ac = detail::aggregate_runs(results, deployment, "ac");
    const auto mc = detail::aggregate_runs(results, deployment, "mcac");
    DeploymentSummary row;
    row.deployment = deployment;
    const std::size_t last = results.episodes - 1;
    if (ac.count) {
      row.avg_reward_ac = ac.mean_reward[last];
      row.avg_steps_ac = ac.mean_steps[last];
      row.avg_runtime_ac = ac.mean_runtime;
      report.curves[{deployment, "ac"}].resize(results.episodes);
      for (std::size_t e = 0; e < results.episodes; ++e)
        report.curves[{deployment, "ac"}][e] = {ac.mean_reward[e], ac.var_reward[e],
                                                ac.mean_steps[e], ac.var_steps[e]};
    }
    if (mc.count) {
      row.avg_reward_mcac = mc.mean_reward[last];
      row.avg_steps_mcac = mc.mean_steps[last];
      row.avg_runtime_mcac = mc.mean_runtime;
      report.curves[{deployment, "mcac"}].resize(results.episodes);
      for (std::size_t e = 0; e < results.episodes; ++e)
        report.curves[{deployment, "mcac"}][e] = {mc.mean_reward[e], mc.var_reward[e],
                                                  mc.mean_steps[e], mc.var_steps[e]};
    }
    if (ac.count && mc.count) {
      const auto [e_ac, e_mcac] =
          episodes_to_convergence(ac.mean_reward, mc.mean_reward);
      row.episodes_ac = e_ac;
      row.episodes_mcac = e_mcac;
      row.su1 = ac.mean_runtime / mc.mean_runtime;  // unrounded runtimes
      if (e_mcac) {
        row.su2 = static_cast<double>(e_ac) / static_cast<double>(*e_mcac);
        row.total_su = combine_speedups(row.su1, *row.su2);
        total_sus.push_back(*row.total_su);
      }
    }
    report.rows.push_back(std::move(row));
  }
  if (!total_sus.empty()) {
    for (double su : total_sus) report.mean_total_su += su;
    report.mean_total_su /= static_cast<double>(total_sus.size());
  }
  return report;
}

// ---------------------------------------------------------------------------
// File formats: plain delimited text with header rows. results.csv holds
// one row per run per episode; runs.csv one row per run (runtimes and
// truncation counts); summary.csv mirrors the comparison-table columns;
// curves_<deployment>_<algorithm>.csv hold mean and variance per episode.
// ---------------------------------------------------------------------------

inline void save_raw_results(const RawResults& results,
                             const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "results.csv");
    if (!out) throw DataError("cannot write " + (dir / "results.csv").string());
    out << "algorithm,deployment,run,episode,reward,steps\n";
    for (const auto& rec : results.runs)
      for (std::size_t e = 0; e < rec.rewards.size(); ++e)
        out << rec.algorithm << "," << rec.deployment << "," << rec.run << ","
            << e + 1 << "," << detail::format_double(rec.rewards[e]) << ","
            << rec.steps[e] << "\n";
  }
  {
    std::ofstream out(dir / "runs.csv");
    out << "algorithm,deployment,run,seed,wall_seconds,truncations\n";
    for (const auto& rec : results.runs)
      out << rec.algorithm << "," << rec.deployment << "," << rec.run << ","
          << rec.seed << "," << detail::format_double(rec.wall_seconds) << ","
          << rec.truncations << "\n";
  }
}

namespace detail {

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(field);
  return out;
}

}  // namespace detail

inline RawResults load_raw_results(const std::filesystem::path& dir) {
  RawResults results;
  std::map<std::pair<std::string, std::string>, std::size_t> index;
  auto record_for = [&](const std::string& alg, const std::string& dep,
                        std::uint64_t run) -> RunRecord& {
    const auto key = std::make_pair(alg, dep + "#" + std::to_string(run));
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, results.runs.size()).first;
      results.runs.push_back({alg, dep, run, 0, 0.0, 0, {}, {}});
      if (std::find(results.deployments.begin(), results.deployments.end(),
                    dep) == results.deployments.end())
        results.deployments.push_back(dep);
    }
    return results.runs[it->second];
  };

  std::ifstream in(dir / "results.csv");
  if (!in) throw DataError("cannot open " + (dir / "results.csv").string());
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = detail::split_csv(line);
    if (f.size() != 6) throw DataError("results.csv: malformed row '" + line + "'");
    RunRecord& rec = record_for(f[0], f[1], std::stoull(f[2]));
    rec.rewards.push_back(std::stod(f[4]));
    rec.steps.push_back(std::stoull(f[5]));
    results.episodes = std::max<std::uint64_t>(results.episodes, std::stoull(f[3]));
  }

  std::ifstream runs_in(dir / "runs.csv");
  if (!runs_in) throw DataError("cannot open " + (dir / "runs.csv").string());
  std::getline(runs_in, line);
  while (std::getline(runs_in, line)) {
    if (line.empty()) continue;
    const auto f = detail::split_csv(line);
    if (f.size() != 6) throw DataError("runs.csv: malformed row '" + line + "'");
    RunRecord& rec = record_for(f[0], f[1], std::stoull(f[2]));
    rec.seed = std::stoull(f[3]);
    rec.wall_seconds = std::stod(f[4]);
    rec.truncations = std::stoull(f[5]);
  }
  return results;
}

inline void emit_reports(const SpeedupReport& report,
                         const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "summary.csv");
    if (!out) throw DataError("cannot write " + (dir / "summary.csv").string());
    out << "deployment,avg_reward_ac,avg_reward_mcac,avg_steps_ac,avg_steps_mcac,"
           "avg_runtime_ac,avg_runtime_mcac,su1,episodes_ac,episodes_mcac,su2,"
           "total_su\n";
    auto opt_u = [](const std::optional<std::uint64_t>& v) {
      return v ? std::to_string(*v) : std::string("not-reached");
    };
    auto opt_d = [](const std::optional<double>& v) {
      return v ? detail::format_double(*v) : std::string("not-reached");
    };
    for (const auto& row : report.rows) {
      out << row.deployment << "," << detail::format_double(row.avg_reward_ac)
          << "," << detail::format_double(row.avg_reward_mcac) << ","
          << detail::format_double(row.avg_steps_ac) << ","
          << detail::format_double(row.avg_steps_mcac) << ","
          << detail::format_double(row.avg_runtime_ac) << ","
          << detail::format_double(row.avg_runtime_mcac) << ","
          << detail::format_double(row.su1) << "," << row.episodes_ac << ","
          << opt_u(row.episodes_mcac) << "," << opt_d(row.su2) << ","
          << opt_d(row.total_su) << "\n";
    }
    out << "mean,,,,,,,,,,," << detail::format_double(report.mean_total_su)
        << "\n";
    out << "# su1 is machine-relative (wall-clock ratio); su2 is machine-independent\n";
  }
  for (const auto& [key, points] : report.curves) {
    std::ofstream out(dir / ("curves_" + key.first + "_" + key.second + ".csv"));
    out << "episode,mean_reward,var_reward,mean_steps,var_steps\n";
    for (std::size_t e = 0; e < points.size(); ++e)
      out << e + 1 << "," << detail::format_double(points[e].mean_reward) << ","
          << detail::format_double(points[e].var_reward) << ","
          << detail::format_double(points[e].mean_steps) << ","
          << detail::format_double(points[e].var_steps) << "\n";
  }
}

}  // namespace mcac
