// Declarative experiment configurations and omega-grid sweeps.
#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "ndg/core.hpp"
#include "ndg/engine.hpp"
#include "ndg/opponent.hpp"
#include "ndg/planner.hpp"

namespace ndg {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class AgentKind {
  Heuristic,            // samples from the heuristic model with `sigma`
  MdpUniform,           // plans against a fixed uniform model
  MdpHeuristic,         // plans against a fixed heuristic-shaped model with `sigma`
  MdpLearningUniform,   // learns from a uniform Dirichlet prior
  MdpLearningPretrained // learns from a prior warmed up in a training game
};

struct AgentSpec {
  AgentKind kind = AgentKind::MdpUniform;
  double sigma = 1.0;

  bool is_mdp() const { return kind != AgentKind::Heuristic; }
  bool is_stochastic() const { return kind == AgentKind::Heuristic; }
};

inline std::vector<double> default_omega_grid() {
  std::vector<double> g;
  for (int i = 0; i <= 10; ++i) g.push_back(i / 10.0);
  return g;
}

struct TestSpec {
  int id = 0;
  AgentSpec agent_a;
  AgentSpec agent_b;
  std::vector<double> grid_a = default_omega_grid();
  /// A single entry when B's weight plays no role (heuristic B).
  std::vector<double> grid_b = {0.0};
  int replications = 30;
  GameConfig base;
  TieBreak tie_break = TieBreak::Smallest;
  int pretrain_rounds = 30;

  std::size_t num_cells() const { return grid_a.size() * grid_b.size(); }

  /// True if a game's outcome can depend on the seed.
  bool is_stochastic() const {
    return agent_a.is_stochastic() || agent_b.is_stochastic() || tie_break == TieBreak::Random;
  }

  void validate() const {
    if (id < 0) throw ConfigError("test id must be non-negative");
    if (grid_a.empty() || grid_b.empty()) throw ConfigError("omega grid is empty");
    for (double w : grid_a)
      if (!(w >= 0.0 && w <= 1.0)) throw ConfigError("omega grid value outside [0,1]");
    for (double w : grid_b)
      if (!(w >= 0.0 && w <= 1.0)) throw ConfigError("omega grid value outside [0,1]");
    if (replications < 1) throw ConfigError("replications must be >= 1");
    if (pretrain_rounds < 0) throw ConfigError("pretrain_rounds must be >= 0");
    for (const auto* a : {&agent_a, &agent_b})
      if ((a->kind == AgentKind::Heuristic || a->kind == AgentKind::MdpHeuristic) &&
          !(a->sigma > 0.0))
        throw ConfigError("sigma must be > 0");
    const bool pre_a = agent_a.kind == AgentKind::MdpLearningPretrained;
    const bool pre_b = agent_b.kind == AgentKind::MdpLearningPretrained;
    if (pre_a != pre_b) throw ConfigError("pretrained priors need two learning MDP players");
    try {
      base.validate();
    } catch (const InputError& e) {
      throw ConfigError(e.what());
    }
  }
};

/// The five standard experiments with the common settings q=10, 60 rounds,
/// horizon 10, a0=3 and the 11-point weight grid.
inline TestSpec make_test_spec(int id) {
  TestSpec t;
  t.id = id;
  switch (id) {
    case 1:
      t.agent_a = {AgentKind::MdpHeuristic, 3.0};
      t.agent_b = {AgentKind::Heuristic, 1.0};
      break;
    case 2:
      t.agent_a = {AgentKind::MdpLearningUniform, 0.0};
      t.agent_b = {AgentKind::Heuristic, 1.0};
      break;
    case 3:
      t.agent_a = {AgentKind::MdpUniform, 0.0};
      t.agent_b = {AgentKind::MdpUniform, 0.0};
      t.grid_b = default_omega_grid();
      break;
    case 4:
      t.agent_a = {AgentKind::MdpLearningUniform, 0.0};
      t.agent_b = {AgentKind::MdpLearningUniform, 0.0};
      t.grid_b = default_omega_grid();
      break;
    case 5:
      t.agent_a = {AgentKind::MdpLearningPretrained, 0.0};
      t.agent_b = {AgentKind::MdpLearningPretrained, 0.0};
      t.grid_b = default_omega_grid();
      break;
    default:
      throw ConfigError("unknown test id " + std::to_string(id) + " (expected 1..5)");
  }
  return t;
}

/// Builds one player. `prior` is only used by the pretrained kind.
inline Player make_player(const AgentSpec& spec, Role role, const GameConfig& cfg,
                          TieBreak tie_break, const DirichletLearner* prior = nullptr) {
  const double omega = cfg.omega(role);
  const Role opp = other(role);
  switch (spec.kind) {
    case AgentKind::Heuristic:
      return HeuristicAgent(role, HeuristicModel{spec.sigma, cfg.q});
    case AgentKind::MdpUniform:
      return MdpAgent(role, omega, cfg.horizon, uniform_table(cfg.q), tie_break);
    case AgentKind::MdpHeuristic:
      return MdpAgent(role, omega, cfg.horizon,
                      heuristic_table(HeuristicModel{spec.sigma, cfg.q}, opp), tie_break);
    case AgentKind::MdpLearningUniform:
      return MdpAgent(role, omega, cfg.horizon, make_prior(UniformPrior{}, cfg.q), tie_break);
    case AgentKind::MdpLearningPretrained:
      if (prior == nullptr) throw ConfigError("pretrained player built without a prior");
      return MdpAgent(role, omega, cfg.horizon, *prior, tie_break);
  }
  throw ConfigError("unknown agent kind");
}

/// Seed of replication r; shared by all cells so grid cells see common
/// random numbers.
inline std::uint64_t replication_seed(std::uint64_t master_seed, int replication) {
  return derive_seed(master_seed, 0x1000u + static_cast<std::uint64_t>(replication));
}

/// Plays one evaluation game of `spec` at the given weights, including the
/// pretraining phase when the spec asks for it.
inline GameLog play_cell(const TestSpec& spec, double omega_a, double omega_b,
                         std::uint64_t seed) {
  GameConfig cfg = spec.base;
  cfg.omega_a = omega_a;
  cfg.omega_b = omega_b;
  cfg.seed = seed;
  const RngPlan rng{seed};

  if (spec.agent_a.kind == AgentKind::MdpLearningPretrained) {
    auto trained =
        pretrain(cfg,
                 MdpAgent(Role::A, omega_a, cfg.horizon, make_prior(UniformPrior{}, cfg.q),
                          spec.tie_break),
                 MdpAgent(Role::B, omega_b, cfg.horizon, make_prior(UniformPrior{}, cfg.q),
                          spec.tie_break),
                 spec.pretrain_rounds, rng);
    Player a = make_player(spec.agent_a, Role::A, cfg, spec.tie_break, &trained.learner_a);
    Player b = make_player(spec.agent_b, Role::B, cfg, spec.tie_break, &trained.learner_b);
    return run_game(cfg, a, b, rng);
  }
  Player a = make_player(spec.agent_a, Role::A, cfg, spec.tie_break);
  Player b = make_player(spec.agent_b, Role::B, cfg, spec.tie_break);
  return run_game(cfg, a, b, rng);
}

// ---------------------------------------------------------------------------
// Results

struct GameMetrics {
  long profit_a = 0;
  long profit_b = 0;
  int compatible_rounds = 0;
  int rounds = 0;

  long total() const { return profit_a + profit_b; }
  double success_pct() const { return rounds == 0 ? 0.0 : 100.0 * compatible_rounds / rounds; }

  static GameMetrics of(const GameLog& log) {
    return {log.cum_profit_a, log.cum_profit_b, log.compatible_rounds(),
            static_cast<int>(log.records.size())};
  }
};

/// Profit of A, profit of B, total, success rate in percent.
struct MetricRow {
  double profit_a = 0.0;
  double profit_b = 0.0;
  double total = 0.0;
  double success_pct = 0.0;

  friend bool operator==(const MetricRow&, const MetricRow&) = default;
};

struct CellResult {
  double omega_a = 0.0;
  double omega_b = 0.0;
  std::vector<GameMetrics> replications;

  /// Replication mean. Sums are taken over integers, so the result does not
  /// depend on replication order.
  MetricRow mean() const {
    long pa = 0;
    long pb = 0;
    long compatible = 0;
    long rounds = 0;
    for (const auto& m : replications) {
      pa += m.profit_a;
      pb += m.profit_b;
      compatible += m.compatible_rounds;
      rounds += m.rounds;
    }
    const double n = static_cast<double>(replications.size());
    return {pa / n, pb / n, (pa + pb) / n, rounds == 0 ? 0.0 : 100.0 * compatible / rounds};
  }

  MetricRow min() const { return extreme(true); }
  MetricRow max() const { return extreme(false); }

 private:
  MetricRow extreme(bool lowest) const {
    const double init = lowest ? std::numeric_limits<double>::infinity()
                               : -std::numeric_limits<double>::infinity();
    MetricRow r{init, init, init, init};
    auto pick = [lowest](double& acc, double v) { acc = lowest ? std::min(acc, v) : std::max(acc, v); };
    for (const auto& m : replications) {
      pick(r.profit_a, static_cast<double>(m.profit_a));
      pick(r.profit_b, static_cast<double>(m.profit_b));
      pick(r.total, static_cast<double>(m.total()));
      pick(r.success_pct, m.success_pct());
    }
    return r;
  }
};

/// Min, mean and max over grid cells of the replication-averaged metrics.
/// Every column is reduced on its own: the total row is not the sum of the
/// per-player rows.
struct SweepSummary {
  int test_id = 0;
  std::vector<CellResult> cells;
  MetricRow min;
  MetricRow mean;
  MetricRow max;

  /// Mean success rate over the grid, one value per replication.
  std::vector<double> replication_success_means() const {
    if (cells.empty()) return {};
    std::vector<double> out(cells.front().replications.size(), 0.0);
    for (const auto& c : cells)
      for (std::size_t r = 0; r < out.size(); ++r) out[r] += c.replications[r].success_pct();
    for (double& v : out) v /= static_cast<double>(cells.size());
    return out;
  }
};

inline SweepSummary aggregate(std::vector<CellResult> cells, int test_id = 0) {
  if (cells.empty()) throw InputError("aggregate: no cells");
  SweepSummary s;
  s.test_id = test_id;
  const double inf = std::numeric_limits<double>::infinity();
  s.min = {inf, inf, inf, inf};
  s.max = {-inf, -inf, -inf, -inf};
  for (const auto& c : cells) {
    const MetricRow m = c.mean();
    s.min = {std::min(s.min.profit_a, m.profit_a), std::min(s.min.profit_b, m.profit_b),
             std::min(s.min.total, m.total), std::min(s.min.success_pct, m.success_pct)};
    s.max = {std::max(s.max.profit_a, m.profit_a), std::max(s.max.profit_b, m.profit_b),
             std::max(s.max.total, m.total), std::max(s.max.success_pct, m.success_pct)};
    s.mean.profit_a += m.profit_a;
    s.mean.profit_b += m.profit_b;
    s.mean.total += m.total;
    s.mean.success_pct += m.success_pct;
  }
  const double n = static_cast<double>(cells.size());
  s.mean = {s.mean.profit_a / n, s.mean.profit_b / n, s.mean.total / n, s.mean.success_pct / n};
  s.cells = std::move(cells);
  return s;
}

/// Worker count: NDG_THREADS if set and positive, else the hardware count.
inline unsigned worker_count() {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("NDG_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) n = static_cast<unsigned>(v);
  }
  return n;
}

struct SweepOptions {
  std::uint64_t master_seed = 0;
  unsigned threads = 0;  // 0: worker_count()
};

/// Runs every (cell, replication) pair of `spec`. Work items write into
/// preassigned slots, so the result is independent of scheduling.
inline SweepSummary run_test(const TestSpec& spec, SweepOptions options = {}) {
  spec.validate();
  const std::size_t reps = static_cast<std::size_t>(spec.replications);
  std::vector<CellResult> cells;
  cells.reserve(spec.num_cells());
  for (double wa : spec.grid_a)
    for (double wb : spec.grid_b)
      cells.push_back({wa, wb, std::vector<GameMetrics>(reps)});

  const std::size_t items = cells.size() * reps;
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < items; i = next++) {
      auto& cell = cells[i / reps];
      const int r = static_cast<int>(i % reps);
      cell.replications[static_cast<std::size_t>(r)] = GameMetrics::of(
          play_cell(spec, cell.omega_a, cell.omega_b, replication_seed(options.master_seed, r)));
    }
  };

  const unsigned threads = std::min<std::size_t>(
      options.threads == 0 ? worker_count() : options.threads, std::max<std::size_t>(items, 1));
  if (threads <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work);
  }
  return aggregate(std::move(cells), spec.id);
}

// ---------------------------------------------------------------------------
// CSV

inline constexpr const char* kCellsCsvHeader =
    "omega_a,omega_b,replications,"
    "mean_profit_a,min_profit_a,max_profit_a,"
    "mean_profit_b,min_profit_b,max_profit_b,"
    "mean_total,min_total,max_total,"
    "mean_success_pct,min_success_pct,max_success_pct";

inline void write_cells_csv(std::ostream& out, const SweepSummary& s) {
  out << kCellsCsvHeader << '\n';
  for (const auto& c : s.cells) {
    const MetricRow mean = c.mean();
    const MetricRow lo = c.min();
    const MetricRow hi = c.max();
    out << format_double(c.omega_a) << ',' << format_double(c.omega_b) << ','
        << c.replications.size();
    for (auto [m, l, h] : {std::tuple{mean.profit_a, lo.profit_a, hi.profit_a},
                           std::tuple{mean.profit_b, lo.profit_b, hi.profit_b},
                           std::tuple{mean.total, lo.total, hi.total},
                           std::tuple{mean.success_pct, lo.success_pct, hi.success_pct}})
      out << ',' << format_double(m) << ',' << format_double(l) << ',' << format_double(h);
    out << '\n';
  }
}

/// One parsed row of a cells CSV.
struct CellRow {
  double omega_a = 0.0;
  double omega_b = 0.0;
  int replications = 0;
  MetricRow mean;
  MetricRow min;
  MetricRow max;
};

inline std::vector<CellRow> read_cells_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kCellsCsvHeader) throw InputError("cells csv: bad header");
  std::vector<CellRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto f = detail::split_csv(line);
    if (f.size() != 15) throw InputError("cells csv: expected 15 fields");
    auto d = [&](std::size_t i) { return detail::parse_field<double>(f[i], "cell value"); };
    CellRow r;
    r.omega_a = d(0);
    r.omega_b = d(1);
    r.replications = detail::parse_field<int>(f[2], "replications");
    r.mean = {d(3), d(6), d(9), d(12)};
    r.min = {d(4), d(7), d(10), d(13)};
    r.max = {d(5), d(8), d(11), d(14)};
    rows.push_back(r);
  }
  return rows;
}

inline constexpr const char* kSummaryCsvHeader = "row,profit_a,profit_b,total,success_rate_pct";

/// Table-style summary with two decimals.
inline void write_summary_csv(std::ostream& out, const SweepSummary& s) {
  out << kSummaryCsvHeader << '\n';
  auto row = [&](const char* name, const MetricRow& m) {
    out << name << ',' << format_fixed2(m.profit_a) << ',' << format_fixed2(m.profit_b) << ','
        << format_fixed2(m.total) << ',' << format_fixed2(m.success_pct) << '\n';
  };
  row("min", s.min);
  row("mean", s.mean);
  row("max", s.max);
}

}  // namespace ndg
