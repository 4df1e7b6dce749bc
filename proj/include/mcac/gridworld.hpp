#pragma once

#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "mcac/error.hpp"
#include "mcac/mdp.hpp"

namespace mcac {

struct Cell {
  int x = 0;
  int y = 0;
  friend bool operator==(const Cell&, const Cell&) = default;
  friend auto operator<=>(const Cell&, const Cell&) = default;
};

/// Declarative grid layout. State index is y*side + x; actions are
/// up (y-1), down (y+1), left (x-1), right (x+1), clamped at edges.
struct GridScenario {
  std::string name;
  int side = 5;
  Cell start{0, 0};
  Cell goal{4, 4};
  std::set<Cell> obstacles;
  double p_stay = 0.75;
  double goal_reward = 100.0;
  double step_reward = -1.0;

  std::size_t state_index(Cell c) const {
    return static_cast<std::size_t>(c.y) * side + c.x;
  }
  bool in_bounds(Cell c) const {
    return c.x >= 0 && c.x < side && c.y >= 0 && c.y < side;
  }

  /// Throws DataError on any invariant violation.
  void check() const {
    auto where = name.empty() ? std::string("scenario") : "scenario '" + name + "'";
    if (side <= 0) throw DataError(where + ": side must be positive");
    if (!in_bounds(start) || !in_bounds(goal))
      throw DataError(where + ": start/goal outside the grid");
    if (start == goal) throw DataError(where + ": start equals goal");
    for (Cell c : obstacles) {
      if (!in_bounds(c))
        throw DataError(where + ": obstacle (" + std::to_string(c.x) + "," +
                        std::to_string(c.y) + ") outside the grid");
    }
    if (obstacles.contains(start))
      throw DataError(where + ": start is inside an obstacle");
    if (obstacles.contains(goal))
      throw DataError(where + ": goal is inside an obstacle");
    if (p_stay < 0.0 || p_stay > 1.0)
      throw DataError(where + ": p_stay outside [0,1]");
  }
};

struct ScenarioSet {
  std::vector<GridScenario> pretrained;
  std::vector<GridScenario> deployments;
  double gamma = 0.95;

  const GridScenario* find(const std::string& name) const {
    for (const auto& s : pretrained)
      if (s.name == name) return &s;
    for (const auto& s : deployments)
      if (s.name == name) return &s;
    return nullptr;
  }
};

namespace detail {
inline Cell apply_action(const GridScenario& sc, Cell c, std::size_t action) {
  Cell t = c;
  switch (action) {
    case 0: t.y -= 1; break;
    case 1: t.y += 1; break;
    case 2: t.x -= 1; break;
    case 3: t.x += 1; break;
  }
  return sc.in_bounds(t) ? t : c;  // edge clamp: position unchanged
}
}  // namespace detail

/// Compiles a scenario into a validated Mdp with |S| = side^2 and four
/// actions. Non-obstacle moves are deterministic; an action taken from an
/// obstacle cell keeps the agent in place with probability p_stay. Any
/// transition entering the goal pays goal_reward; the goal is absorbing.
inline Mdp compile(const GridScenario& sc, double gamma = 0.95) {
  sc.check();
  const std::size_t n = static_cast<std::size_t>(sc.side) * sc.side;
  Mdp mdp = Mdp::zeros(n, 4, gamma);
  const std::size_t goal = sc.state_index(sc.goal);
  mdp.terminal[goal] = true;

  for (int y = 0; y < sc.side; ++y) {
    for (int x = 0; x < sc.side; ++x) {
      const Cell c{x, y};
      const std::size_t s = sc.state_index(c);
      for (std::size_t a = 0; a < 4; ++a) {
        if (s == goal) {
          mdp.p(s, a, s) = 1.0;  // absorbing; never sampled
          continue;
        }
        const std::size_t target = sc.state_index(detail::apply_action(sc, c, a));
        if (sc.obstacles.contains(c)) {
          mdp.p(s, a, s) += sc.p_stay;
          mdp.p(s, a, target) += 1.0 - sc.p_stay;
        } else {
          mdp.p(s, a, target) = 1.0;
        }
        for (std::size_t s2 = 0; s2 < n; ++s2)
          mdp.r(s, a, s2) = s2 == goal ? sc.goal_reward : sc.step_reward;
      }
    }
  }
  return mdp;
}

/// Obstacle-set union of compatible scenarios. All other fields are
/// inherited; start and goal must survive the union obstacle-free.
inline GridScenario union_scenarios(std::span<const GridScenario> scenarios,
                                    const std::string& name) {
  if (scenarios.empty())
    throw DataError("union: no scenarios given");
  GridScenario out = scenarios.front();
  out.name = name;
  for (const auto& sc : scenarios.subspan(1)) {
    if (sc.side != out.side || sc.start != out.start || sc.goal != out.goal ||
        sc.p_stay != out.p_stay || sc.goal_reward != out.goal_reward ||
        sc.step_reward != out.step_reward)
      throw DataError("union: scenario '" + sc.name +
                      "' incompatible with '" + scenarios.front().name + "'");
    out.obstacles.insert(sc.obstacles.begin(), sc.obstacles.end());
  }
  if (out.obstacles.contains(out.start))
    throw DataError("union '" + name + "': start swallowed by obstacles");
  if (out.obstacles.contains(out.goal))
    throw DataError("union '" + name + "': goal swallowed by obstacles");
  return out;
}

// ---------------------------------------------------------------------------
// Scenario file format (format = 1): key = value header lines followed by
// [pretrained NAME] / [deployment NAME] sections. Obstacles are x,y pairs
// separated by whitespace; deployments may instead give `union-of = names`.
// ---------------------------------------------------------------------------

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline Cell parse_cell(const std::string& tok, const std::string& where) {
  const auto comma = tok.find(',');
  if (comma == std::string::npos)
    throw DataError(where + ": expected x,y pair, got '" + tok + "'");
  try {
    return {std::stoi(tok.substr(0, comma)), std::stoi(tok.substr(comma + 1))};
  } catch (const std::exception&) {
    throw DataError(where + ": malformed coordinate '" + tok + "'");
  }
}

inline double parse_double(const std::string& v, const std::string& where) {
  try {
    std::size_t pos = 0;
    double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw DataError(where + ": malformed number '" + v + "'");
  }
}

inline std::string format_double(double d) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", d);
  return buf;
}

}  // namespace detail

inline ScenarioSet load_scenario_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open scenario file " + path.string());

  GridScenario defaults;  // header fields, inherited by every section
  ScenarioSet set;
  bool format_seen = false;

  struct Section {
    bool deployment = false;
    GridScenario scenario;
    std::vector<std::string> union_of;
    bool has_obstacles = false;
    int line = 0;
  };
  std::vector<Section> sections;

  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string where = path.filename().string() + ":" + std::to_string(lineno);
    std::string t = detail::trim(line);
    if (auto hash = t.find('#'); hash != std::string::npos)
      t = detail::trim(t.substr(0, hash));
    if (t.empty()) continue;

    if (t.front() == '[') {
      if (t.back() != ']') throw DataError(where + ": unterminated section header");
      std::istringstream hdr(t.substr(1, t.size() - 2));
      std::string kind, name;
      hdr >> kind >> name;
      if ((kind != "pretrained" && kind != "deployment") || name.empty())
        throw DataError(where + ": expected [pretrained NAME] or [deployment NAME]");
      Section sec;
      sec.deployment = kind == "deployment";
      sec.scenario = defaults;
      sec.scenario.name = name;
      sec.line = lineno;
      sections.push_back(std::move(sec));
      continue;
    }

    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw DataError(where + ": expected key = value");
    const std::string key = detail::trim(t.substr(0, eq));
    const std::string value = detail::trim(t.substr(eq + 1));

    if (sections.empty()) {
      if (key == "format") {
        if (value != "1") throw DataError(where + ": unsupported format '" + value + "'");
        format_seen = true;
      } else if (key == "side") {
        defaults.side = static_cast<int>(detail::parse_double(value, where));
      } else if (key == "start") {
        defaults.start = detail::parse_cell(value, where);
      } else if (key == "goal") {
        defaults.goal = detail::parse_cell(value, where);
      } else if (key == "p-stay") {
        defaults.p_stay = detail::parse_double(value, where);
      } else if (key == "goal-reward") {
        defaults.goal_reward = detail::parse_double(value, where);
      } else if (key == "step-reward") {
        defaults.step_reward = detail::parse_double(value, where);
      } else if (key == "gamma") {
        set.gamma = detail::parse_double(value, where);
      } else {
        throw DataError(where + ": unknown header key '" + key + "'");
      }
    } else {
      Section& sec = sections.back();
      if (key == "obstacles") {
        std::istringstream toks(value);
        std::string tok;
        while (toks >> tok) sec.scenario.obstacles.insert(detail::parse_cell(tok, where));
        sec.has_obstacles = true;
      } else if (key == "union-of") {
        if (!sec.deployment)
          throw DataError(where + ": union-of is only valid in deployment sections");
        std::istringstream toks(value);
        std::string tok;
        while (toks >> tok) sec.union_of.push_back(tok);
      } else {
        throw DataError(where + ": unknown section key '" + key + "'");
      }
    }
  }
  if (!format_seen)
    throw DataError(path.filename().string() + ": missing mandatory 'format = 1'");

  // Pretrained sections first, then deployments (which may reference them).
  for (const auto& sec : sections) {
    if (sec.deployment) continue;
    sec.scenario.check();
    set.pretrained.push_back(sec.scenario);
  }
  for (const auto& sec : sections) {
    if (!sec.deployment) continue;
    const std::string where =
        path.filename().string() + ":" + std::to_string(sec.line);
    if (!sec.union_of.empty()) {
      if (sec.has_obstacles)
        throw DataError(where + ": deployment '" + sec.scenario.name +
                        "' has both obstacles and union-of");
      std::vector<GridScenario> parts;
      for (const auto& ref : sec.union_of) {
        const GridScenario* p = nullptr;
        for (const auto& s : set.pretrained)
          if (s.name == ref) p = &s;
        if (!p)
          throw DataError(where + ": union-of references unknown pretrained scenario '" +
                          ref + "'");
        parts.push_back(*p);
      }
      set.deployments.push_back(union_scenarios(parts, sec.scenario.name));
    } else {
      sec.scenario.check();
      set.deployments.push_back(sec.scenario);
    }
  }
  return set;
}

inline void save_scenario_file(const ScenarioSet& set,
                               const std::filesystem::path& path) {
  if (set.pretrained.empty() && set.deployments.empty())
    throw DataError("save_scenario_file: empty scenario set");
  const GridScenario& ref =
      set.pretrained.empty() ? set.deployments.front() : set.pretrained.front();
  std::ofstream out(path);
  if (!out) throw DataError("cannot write scenario file " + path.string());
  out << "format = 1\n";
  out << "side = " << ref.side << "\n";
  out << "start = " << ref.start.x << "," << ref.start.y << "\n";
  out << "goal = " << ref.goal.x << "," << ref.goal.y << "\n";
  out << "p-stay = " << detail::format_double(ref.p_stay) << "\n";
  out << "goal-reward = " << detail::format_double(ref.goal_reward) << "\n";
  out << "step-reward = " << detail::format_double(ref.step_reward) << "\n";
  out << "gamma = " << detail::format_double(set.gamma) << "\n";
  auto dump = [&out](const GridScenario& sc, const char* kind) {
    out << "\n[" << kind << " " << sc.name << "]\n";
    out << "obstacles =";
    for (Cell c : sc.obstacles) out << " " << c.x << "," << c.y;
    out << "\n";
  };
  for (const auto& sc : set.pretrained) dump(sc, "pretrained");
  for (const auto& sc : set.deployments) dump(sc, "deployment");
}

}  // namespace mcac
