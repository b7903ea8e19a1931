// ndg: command-line driver for single games, experiment sweeps, pretraining
// and the built-in self-checks.
//
// Exit codes: 0 success, 1 self-check failure, 2 configuration error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ndg/cli.hpp"
#include "ndg/engine.hpp"
#include "ndg/experiments.hpp"
#include "ndg/opponent.hpp"
#include "ndg/planner.hpp"
#include "ndg/validation.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitConfig = 2;

/// Refuses to clobber existing outputs unless --force was given.
void prepare_outputs(const fs::path& dir, const std::vector<std::string>& files, bool force) {
  fs::create_directories(dir);
  for (const auto& f : files)
    if (fs::exists(dir / f) && !force)
      throw ndg::KeyError("out", (dir / f).string() + " exists (use --force to overwrite)");
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ndg::ConfigError("cannot write " + path.string());
  return out;
}

ndg::DirichletLearner load_learner(const std::string& key, const std::string& path, int q) {
  std::ifstream in(path);
  if (!in) throw ndg::KeyError(key, "cannot open '" + path + "'");
  ndg::DirichletLearner l;
  try {
    l = ndg::read_learner(in);
  } catch (const ndg::InputError& e) {
    throw ndg::KeyError(key, e.what());
  }
  if (l.q() != q) throw ndg::KeyError(key, "learner was saved for a different q");
  return l;
}

void print_summary(const ndg::SweepSummary& s) {
  std::printf("%-6s %10s %10s %10s %9s\n", "", "profit_a", "profit_b", "total", "success%");
  auto row = [](const char* name, const ndg::MetricRow& m) {
    std::printf("%-6s %10.2f %10.2f %10.2f %9.2f\n", name, m.profit_a, m.profit_b, m.total,
                m.success_pct);
  };
  row("min", s.min);
  row("mean", s.mean);
  row("max", s.max);
}

int cmd_run(const ndg::CliConfig& cfg) {
  const fs::path dir = cfg.out.empty() ? fs::path("out") / "run" : fs::path(cfg.out);
  prepare_outputs(dir, {"game.csv", "summary.csv"}, cfg.force);

  ndg::TestSpec spec;
  spec.agent_a = {ndg::parse_agent_kind("agent_a", cfg.agent_a), cfg.sigma_a};
  spec.agent_b = {ndg::parse_agent_kind("agent_b", cfg.agent_b), cfg.sigma_b};
  spec.base = cfg.game;
  spec.tie_break = cfg.tie_break;
  spec.pretrain_rounds = cfg.pretrain_rounds;
  spec.grid_a = {cfg.game.omega_a};
  spec.grid_b = {cfg.game.omega_b};
  spec.replications = 1;
  spec.validate();

  ndg::GameLog log;
  if (cfg.prior_a.empty() && cfg.prior_b.empty()) {
    log = ndg::play_cell(spec, cfg.game.omega_a, cfg.game.omega_b, cfg.game.seed);
  } else {
    // Checkpointed priors replace the pretraining phase.
    auto build = [&](const ndg::AgentSpec& a, ndg::Role role, const std::string& key,
                     const std::string& path) -> ndg::Player {
      if (path.empty()) {
        if (a.kind == ndg::AgentKind::MdpLearningPretrained)
          throw ndg::KeyError(key, "learning-pretrained needs prior files for both players");
        return ndg::make_player(a, role, cfg.game, cfg.tie_break);
      }
      if (a.kind != ndg::AgentKind::MdpLearningUniform &&
          a.kind != ndg::AgentKind::MdpLearningPretrained)
        throw ndg::KeyError(key, "a prior file needs a learning player");
      const auto learner = load_learner(key, path, cfg.game.q);
      return ndg::MdpAgent(role, cfg.game.omega(role), cfg.game.horizon, learner, cfg.tie_break);
    };
    ndg::Player a = build(spec.agent_a, ndg::Role::A, "prior_a", cfg.prior_a);
    ndg::Player b = build(spec.agent_b, ndg::Role::B, "prior_b", cfg.prior_b);
    log = ndg::run_game(cfg.game, a, b, ndg::RngPlan{cfg.game.seed});
  }

  {
    auto out = open_output(dir / "game.csv");
    ndg::write_game_csv(out, log);
  }
  {
    auto out = open_output(dir / "summary.csv");
    ndg::write_game_summary_csv(out, log);
  }
  std::printf("A %ld  B %ld  total %ld  success %.2f%%  -> %s\n", log.cum_profit_a,
              log.cum_profit_b, log.total(), log.success_rate_pct, dir.string().c_str());
  return kExitOk;
}

int cmd_test(const ndg::CliConfig& cfg, const char* kind) {
  if (cfg.test_id == 0) throw ndg::KeyError("id", "a test id (1..5) is required");
  const ndg::TestSpec spec = ndg::spec_from_config(cfg);
  const std::string stem = "test" + std::to_string(spec.id);
  const fs::path dir = cfg.out.empty() ? fs::path("out") / (kind + std::to_string(spec.id))
                                       : fs::path(cfg.out);
  prepare_outputs(dir, {stem + "_cells.csv", stem + "_summary.csv"}, cfg.force);

  const auto summary = ndg::run_test(spec, {cfg.game.seed, 0});
  {
    auto out = open_output(dir / (stem + "_cells.csv"));
    ndg::write_cells_csv(out, summary);
  }
  {
    auto out = open_output(dir / (stem + "_summary.csv"));
    ndg::write_summary_csv(out, summary);
  }
  std::printf("Test %d: %zu cells x %d replications -> %s\n", spec.id, summary.cells.size(),
              spec.replications, dir.string().c_str());
  print_summary(summary);
  return kExitOk;
}

int cmd_pretrain(const ndg::CliConfig& cfg) {
  const fs::path dir = cfg.out.empty() ? fs::path("out") / "pretrain" : fs::path(cfg.out);
  prepare_outputs(dir, {"learner_a.txt", "learner_b.txt", "pretrain_game.csv"}, cfg.force);
  const auto& g = cfg.game;
  auto result = ndg::pretrain(
      g,
      ndg::MdpAgent(ndg::Role::A, g.omega_a, g.horizon, ndg::make_prior(ndg::UniformPrior{}, g.q),
                    cfg.tie_break),
      ndg::MdpAgent(ndg::Role::B, g.omega_b, g.horizon, ndg::make_prior(ndg::UniformPrior{}, g.q),
                    cfg.tie_break),
      cfg.pretrain_rounds, ndg::RngPlan{g.seed});
  {
    auto out = open_output(dir / "learner_a.txt");
    ndg::write_learner(out, result.learner_a);
  }
  {
    auto out = open_output(dir / "learner_b.txt");
    ndg::write_learner(out, result.learner_b);
  }
  {
    auto out = open_output(dir / "pretrain_game.csv");
    ndg::write_game_csv(out, result.log);
  }
  std::printf("pretrained %d rounds -> %s\n", cfg.pretrain_rounds, dir.string().c_str());
  return kExitOk;
}

int cmd_validate() {
  bool ok = true;
  for (const auto& r : ndg::run_self_checks()) {
    std::printf("[%s] %-20s %s\n", r.passed ? "PASS" : "FAIL", r.name.c_str(), r.detail.c_str());
    ok = ok && r.passed;
  }
  return ok ? kExitOk : kExitValidation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Repeated Nash demand game simulator"};
  app.require_subcommand(1);

  std::string config_path;
  // Every flag maps onto one configuration key; only flags actually given
  // override the config file.
  struct Flag {
    const char* name;
    const char* key;
    const char* help;
  };
  const std::vector<Flag> flags = {
      {"--q", "q", "Amount to split per round"},
      {"--rounds", "rounds", "Rounds per game (the preset round counts)"},
      {"--horizon", "horizon", "Planning horizon"},
      {"--initial-demand", "initial_demand", "Preset demand of both players in round 1"},
      {"--omega-a", "omega_a", "Weight of player A"},
      {"--omega-b", "omega_b", "Weight of player B"},
      {"--seed", "seed", "Master seed"},
      {"--replications", "replications", "Replications per grid cell"},
      {"--grid", "grid", "Weight grid: start:step:stop or a comma list"},
      {"--tie-break", "tie_break", "smallest | random"},
      {"--out", "out", "Output directory"},
      {"--id", "id", "Experiment id 1..5"},
      {"--agent-a", "agent_a", "Player A kind (run)"},
      {"--agent-b", "agent_b", "Player B kind (run)"},
      {"--sigma-a", "sigma_a", "Heuristic sigma of player A's kind"},
      {"--sigma-b", "sigma_b", "Heuristic sigma of player B's kind"},
      {"--pretrain-rounds", "pretrain_rounds", "Rounds of the pretraining phase"},
      {"--prior-a", "prior_a", "Learner checkpoint for player A (run)"},
      {"--prior-b", "prior_b", "Learner checkpoint for player B (run)"},
  };
  std::map<std::string, std::string> given;
  bool force = false;

  auto* run = app.add_subcommand("run", "Play one game and write the per-round CSV");
  auto* test = app.add_subcommand("test", "Run one of the five standard experiments");
  auto* sweep = app.add_subcommand("sweep", "Run a standard experiment over a custom grid");
  auto* pre = app.add_subcommand("pretrain", "Pretrain two learners and save them");
  auto* validate = app.add_subcommand("validate", "Run the built-in oracle checks");

  for (auto* sub : {run, test, sweep, pre, validate}) {
    sub->add_option("--config", config_path, "Config file (JSON or key = value)");
    for (const auto& f : flags) sub->add_option(f.name, given[f.key], f.help);
    sub->add_flag("--force", force, "Overwrite existing output files");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    auto* active = app.get_subcommands().front();
    ndg::CliConfig cfg;
    if (!config_path.empty()) cfg = ndg::load_config(config_path, cfg);
    for (const auto& f : flags)
      if (active->count(f.name) > 0) ndg::set_config_value(cfg, f.key, given[f.key]);
    if (force) cfg.force = true;
    cfg.subcommand = active->get_name();
    ndg::validate_config(cfg);

    if (cfg.subcommand == "run") return cmd_run(cfg);
    if (cfg.subcommand == "test") return cmd_test(cfg, "test");
    if (cfg.subcommand == "sweep") return cmd_test(cfg, "sweep");
    if (cfg.subcommand == "pretrain") return cmd_pretrain(cfg);
    return cmd_validate();
  } catch (const ndg::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ndg::InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
}
