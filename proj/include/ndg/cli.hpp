// Command-line configuration: file loading, flag precedence, validation.
#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ndg/core.hpp"
#include "ndg/experiments.hpp"
#include "ndg/planner.hpp"

namespace ndg {

/// Configuration error tied to one configuration key.
class KeyError : public ConfigError {
 public:
  KeyError(std::string key, const std::string& message)
      : ConfigError(key + ": " + message), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

struct CliConfig {
  std::string subcommand;
  GameConfig game;
  int test_id = 0;
  std::vector<double> grid;  // empty: default 11-point grid
  int replications = 30;
  std::string out;           // empty: ./out/<subcommand or test<k>>/
  TieBreak tie_break = TieBreak::Smallest;
  bool force = false;
  std::string agent_a = "mdp-uniform";
  std::string agent_b = "mdp-uniform";
  double sigma_a = 3.0;
  double sigma_b = 1.0;
  int pretrain_rounds = 30;
  std::string prior_a;  // learner checkpoint for a learning player
  std::string prior_b;
};

inline std::string trim(const std::string& s) {
  auto b = std::find_if_not(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
  auto e = std::find_if_not(s.rbegin(), s.rend(), [](unsigned char c) { return std::isspace(c); });
  return b < e.base() ? std::string(b, e.base()) : std::string();
}

/// Parses "start:step:stop" or a comma-separated list of weights.
inline std::vector<double> parse_grid(const std::string& text) {
  auto num = [&](const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(trim(s), &used);
    } catch (const std::exception&) {
      throw KeyError("grid", "cannot parse '" + s + "'");
    }
    if (used != trim(s).size()) throw KeyError("grid", "cannot parse '" + s + "'");
    return v;
  };
  std::vector<double> out;
  if (text.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
    if (parts.size() != 3) throw KeyError("grid", "expected start:step:stop");
    const double start = num(parts[0]);
    const double step = num(parts[1]);
    const double stop = num(parts[2]);
    if (!(step > 0.0) || stop < start) throw KeyError("grid", "empty range");
    const long n = std::lround((stop - start) / step);
    if (std::abs(start + n * step - stop) > 1e-9) throw KeyError("grid", "step does not reach stop");
    // start + i (stop - start) / n keeps 0:0.1:1 identical to i/10.
    for (long i = 0; i <= n; ++i) out.push_back(n == 0 ? start : start + i * (stop - start) / n);
  } else {
    std::stringstream ss(text);
    for (std::string p; std::getline(ss, p, ',');) out.push_back(num(p));
  }
  if (out.empty()) throw KeyError("grid", "no values");
  for (double w : out)
    if (!(w >= 0.0 && w <= 1.0)) throw KeyError("grid", "weight outside [0,1]");
  return out;
}

inline TieBreak parse_tie_break(const std::string& s) {
  if (s == "smallest") return TieBreak::Smallest;
  if (s == "random") return TieBreak::Random;
  throw KeyError("tie_break", "expected 'smallest' or 'random', got '" + s + "'");
}

inline AgentKind parse_agent_kind(const std::string& key, const std::string& s) {
  if (s == "heuristic") return AgentKind::Heuristic;
  if (s == "mdp-uniform") return AgentKind::MdpUniform;
  if (s == "mdp-heuristic") return AgentKind::MdpHeuristic;
  if (s == "learning-uniform") return AgentKind::MdpLearningUniform;
  if (s == "learning-pretrained") return AgentKind::MdpLearningPretrained;
  throw KeyError(key,
                 "expected one of heuristic, mdp-uniform, mdp-heuristic, learning-uniform, "
                 "learning-pretrained; got '" + s + "'");
}

namespace detail {

template <typename T>
T convert(const std::string& key, const std::string& value) {
  std::istringstream in(value);
  T v{};
  if (!(in >> v) || !(in >> std::ws).eof()) throw KeyError(key, "cannot parse '" + value + "'");
  return v;
}

inline bool convert_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw KeyError(key, "expected a boolean, got '" + value + "'");
}

}  // namespace detail

/// Applies one textual key/value pair. Unknown keys are rejected.
inline void set_config_value(CliConfig& cfg, const std::string& key, const std::string& value) {
  using detail::convert;
  if (key == "q") cfg.game.q = convert<int>(key, value);
  else if (key == "rounds") cfg.game.rounds = convert<int>(key, value);
  else if (key == "horizon") cfg.game.horizon = convert<int>(key, value);
  else if (key == "initial_demand") cfg.game.initial_demand = convert<int>(key, value);
  else if (key == "omega_a") cfg.game.omega_a = convert<double>(key, value);
  else if (key == "omega_b") cfg.game.omega_b = convert<double>(key, value);
  else if (key == "seed") cfg.game.seed = convert<std::uint64_t>(key, value);
  else if (key == "replications") cfg.replications = convert<int>(key, value);
  else if (key == "id") cfg.test_id = convert<int>(key, value);
  else if (key == "grid") cfg.grid = parse_grid(value);
  else if (key == "tie_break") cfg.tie_break = parse_tie_break(value);
  else if (key == "out") cfg.out = value;
  else if (key == "force") cfg.force = detail::convert_bool(key, value);
  else if (key == "agent_a") cfg.agent_a = value;
  else if (key == "agent_b") cfg.agent_b = value;
  else if (key == "sigma_a") cfg.sigma_a = convert<double>(key, value);
  else if (key == "sigma_b") cfg.sigma_b = convert<double>(key, value);
  else if (key == "pretrain_rounds") cfg.pretrain_rounds = convert<int>(key, value);
  else if (key == "prior_a") cfg.prior_a = value;
  else if (key == "prior_b") cfg.prior_b = value;
  else throw KeyError(key, "unknown configuration key");
}

/// Parses configuration text: a JSON object or flat "key = value" lines with
/// '#' comments. Values are applied on top of `cfg`.
inline void parse_config_text(CliConfig& cfg, const std::string& text) {
  const std::string body = trim(text);
  if (!body.empty() && body.front() == '{') {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(body);
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    for (const auto& [key, v] : j.items()) {
      if (v.is_string()) set_config_value(cfg, key, v.get<std::string>());
      else if (v.is_array() && key == "grid") {
        std::string joined;
        for (const auto& x : v) {
          if (!x.is_number()) throw KeyError(key, "grid entries must be numbers");
          if (!joined.empty()) joined += ',';
          joined += format_double(x.get<double>());
        }
        set_config_value(cfg, key, joined);
      } else if (v.is_number_integer() || v.is_number_unsigned()) {
        set_config_value(cfg, key, v.dump());
      } else if (v.is_number_float()) {
        set_config_value(cfg, key, format_double(v.get<double>()));
      } else if (v.is_boolean()) {
        set_config_value(cfg, key, v.get<bool>() ? "true" : "false");
      } else {
        throw KeyError(key, "unsupported value type");
      }
    }
    return;
  }
  std::istringstream in(text);
  int lineno = 0;
  for (std::string line; std::getline(in, line);) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    set_config_value(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
}

inline CliConfig load_config(const std::string& path, CliConfig base = {}) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  parse_config_text(base, ss.str());
  return base;
}

/// Checks every invariant, naming the offending key.
inline void validate_config(const CliConfig& cfg) {
  const auto& g = cfg.game;
  if (g.q < 2) throw KeyError("q", "must be >= 2");
  if (g.rounds < 1) throw KeyError("rounds", "must be >= 1");
  if (g.horizon < 1) throw KeyError("horizon", "must be >= 1");
  if (g.initial_demand < 1 || g.initial_demand > g.q - 1)
    throw KeyError("initial_demand", "must lie in 1..q-1");
  if (!(g.omega_a >= 0.0 && g.omega_a <= 1.0)) throw KeyError("omega_a", "must lie in [0,1]");
  if (!(g.omega_b >= 0.0 && g.omega_b <= 1.0)) throw KeyError("omega_b", "must lie in [0,1]");
  if (cfg.replications < 1) throw KeyError("replications", "must be >= 1");
  if (cfg.pretrain_rounds < 0) throw KeyError("pretrain_rounds", "must be >= 0");
  if (!(cfg.sigma_a > 0.0)) throw KeyError("sigma_a", "must be > 0");
  if (!(cfg.sigma_b > 0.0)) throw KeyError("sigma_b", "must be > 0");
  parse_agent_kind("agent_a", cfg.agent_a);
  parse_agent_kind("agent_b", cfg.agent_b);
  for (double w : cfg.grid)
    if (!(w >= 0.0 && w <= 1.0)) throw KeyError("grid", "weight outside [0,1]");
}

/// TestSpec for `test`/`sweep`: the standard experiment with the game
/// settings, grid, replications and tie-break taken from `cfg`.
inline TestSpec spec_from_config(const CliConfig& cfg) {
  TestSpec spec;
  try {
    spec = make_test_spec(cfg.test_id);
  } catch (const ConfigError& e) {
    throw KeyError("id", e.what());
  }
  spec.base = cfg.game;
  spec.replications = cfg.replications;
  spec.tie_break = cfg.tie_break;
  spec.pretrain_rounds = cfg.pretrain_rounds;
  if (!cfg.grid.empty()) {
    const bool two_dimensional = spec.grid_b.size() > 1;
    spec.grid_a = cfg.grid;
    if (two_dimensional) spec.grid_b = cfg.grid;
  }
  if (spec.grid_b.size() == 1) spec.grid_b = {cfg.game.omega_b};
  return spec;
}

}  // namespace ndg
