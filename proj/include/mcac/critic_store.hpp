#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "mcac/error.hpp"
#include "mcac/gridworld.hpp"
#include "mcac/multi_critic.hpp"

namespace mcac {

/// One persisted converged critic, with enough provenance to reject
/// artifacts that do not belong to the scenario they claim.
struct CriticArtifact {
  std::string scenario_name;
  std::uint64_t scenario_digest = 0;
  std::size_t state_count = 0;
  double gamma = 0.0;
  std::vector<double> values;
  std::uint64_t training_episodes = 0;
  std::uint64_t seed = 0;
  std::string created_at;  // informational only, excluded from comparisons
};

/// FNV-1a over a canonical text rendering of the scenario's content.
inline std::uint64_t scenario_digest(const GridScenario& sc) {
  std::ostringstream canon;
  canon << sc.side << "|" << sc.start.x << "," << sc.start.y << "|" << sc.goal.x
        << "," << sc.goal.y << "|" << detail::format_double(sc.p_stay) << "|"
        << detail::format_double(sc.goal_reward) << "|"
        << detail::format_double(sc.step_reward) << "|";
  for (Cell c : sc.obstacles) canon << c.x << "," << c.y << ";";
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (char ch : canon.str()) {
    h ^= static_cast<unsigned char>(ch);
    h *= 0x100000001b3ull;
  }
  return h;
}

namespace detail {

inline std::string hexfloat(double d) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", d);
  return buf;
}

inline double parse_hexfloat(const std::string& s, const std::string& where) {
  char* end = nullptr;
  const double d = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0')
    throw DataError(where + ": malformed float '" + s + "'");
  return d;
}

}  // namespace detail

/// Writes the artifact atomically (temp file + rename). Values are stored
/// as hex floats, so the round trip is bit-exact.
inline void save_critic(const CriticArtifact& artifact,
                        const std::filesystem::path& path) {
  if (artifact.values.size() != artifact.state_count)
    throw DataError("save_critic: values length " +
                    std::to_string(artifact.values.size()) +
                    " does not match state count " +
                    std::to_string(artifact.state_count));
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw DataError("cannot write critic artifact " + path.string());
    out << "critic-format = 1\n";
    out << "scenario = " << artifact.scenario_name << "\n";
    char digest[32];
    std::snprintf(digest, sizeof digest, "%016llx",
                  static_cast<unsigned long long>(artifact.scenario_digest));
    out << "digest = " << digest << "\n";
    out << "states = " << artifact.state_count << "\n";
    out << "gamma = " << detail::hexfloat(artifact.gamma) << "\n";
    out << "episodes = " << artifact.training_episodes << "\n";
    out << "seed = " << artifact.seed << "\n";
    out << "created-at = " << artifact.created_at << "\n";
    out << "values =\n";
    for (double v : artifact.values) out << detail::hexfloat(v) << "\n";
  }
  std::filesystem::rename(tmp, path);
}

inline CriticArtifact load_critic(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open critic artifact " + path.string());
  const std::string where = path.filename().string();

  CriticArtifact artifact;
  bool format_seen = false;
  bool in_values = false;
  std::string line;
  while (std::getline(in, line)) {
    const std::string t = detail::trim(line);
    if (t.empty()) continue;
    if (in_values) {
      artifact.values.push_back(detail::parse_hexfloat(t, where));
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw DataError(where + ": expected key = value");
    const std::string key = detail::trim(t.substr(0, eq));
    const std::string value = detail::trim(t.substr(eq + 1));
    if (key == "critic-format") {
      if (value != "1")
        throw DataError(where + ": unsupported critic-format '" + value + "'");
      format_seen = true;
    } else if (key == "scenario") {
      artifact.scenario_name = value;
    } else if (key == "digest") {
      artifact.scenario_digest = std::stoull(value, nullptr, 16);
    } else if (key == "states") {
      artifact.state_count = std::stoull(value);
    } else if (key == "gamma") {
      artifact.gamma = detail::parse_hexfloat(value, where);
    } else if (key == "episodes") {
      artifact.training_episodes = std::stoull(value);
    } else if (key == "seed") {
      artifact.seed = std::stoull(value);
    } else if (key == "created-at") {
      artifact.created_at = value;
    } else if (key == "values") {
      in_values = true;
    } else {
      throw DataError(where + ": unknown key '" + key + "'");
    }
  }
  if (!format_seen) throw DataError(where + ": missing 'critic-format = 1'");
  if (artifact.values.size() != artifact.state_count)
    throw DataError(where + ": " + std::to_string(artifact.values.size()) +
                    " values for state count " +
                    std::to_string(artifact.state_count));
  return artifact;
}

/// Assembles an ordered bank from artifacts; weight index i always refers
/// to the i-th artifact. When the pre-trained scenarios are supplied the
/// artifact digests are verified against them and per-critic reward
/// tables are compiled from their layouts.
inline CriticBank assemble_bank(
    const std::vector<CriticArtifact>& artifacts,
    const GridScenario& deployment, double gamma,
    const std::vector<GridScenario>& pretrained_scenarios = {}) {
  if (artifacts.empty()) throw DataError("assemble_bank: no artifacts");
  const std::size_t states =
      static_cast<std::size_t>(deployment.side) * deployment.side;
  CriticBank bank;
  bank.state_count = states;
  for (const auto& artifact : artifacts) {
    if (artifact.state_count != states)
      throw DataError("artifact '" + artifact.scenario_name + "' has " +
                      std::to_string(artifact.state_count) +
                      " states; deployment '" + deployment.name + "' has " +
                      std::to_string(states));
    if (artifact.gamma != gamma)
      throw DataError("artifact '" + artifact.scenario_name +
                      "' was trained with gamma " +
                      detail::format_double(artifact.gamma) +
                      ", expected " + detail::format_double(gamma));
    if (!pretrained_scenarios.empty()) {
      const GridScenario* sc = nullptr;
      for (const auto& cand : pretrained_scenarios)
        if (cand.name == artifact.scenario_name) sc = &cand;
      if (!sc)
        throw DataError("artifact '" + artifact.scenario_name +
                        "' matches no pre-trained scenario");
      if (scenario_digest(*sc) != artifact.scenario_digest)
        throw DataError("artifact '" + artifact.scenario_name +
                        "' digest does not match the scenario layout");
      bank.reward_tables.push_back(compile(*sc, gamma).reward);
    }
    bank.critics.push_back(artifact.values);
    bank.scenario_names.push_back(artifact.scenario_name);
  }
  return bank;
}

}  // namespace mcac
