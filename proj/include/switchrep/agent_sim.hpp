#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "switchrep/game.hpp"
#include "switchrep/graph.hpp"
#include "switchrep/rng.hpp"
#include "switchrep/schedule.hpp"

namespace switchrep {

enum class InitMode : std::uint8_t {
  BernoulliDensity,  // each node cooperates independently with probability x0
  ExactCount,        // exactly floor(x0*n) cooperators placed uniformly
};

/// Agent population on a regular graph with cached accumulated payoffs and
/// cached cooperator / CC-edge counts (updated incrementally on flips).
class Population {
 public:
  Population(RegularGraph graph, const PayoffMatrix& matrix);

  void assign_strategies(double x0, InitMode mode, Xoshiro256pp& rng);
  void set_all(Strategy s);

  const RegularGraph& graph() const { return graph_; }
  Strategy strategy(int v) const { return strategies_[v]; }
  double payoff(int v) const { return payoffs_[v]; }
  std::int64_t cooperator_count() const { return cooperators_; }

  double cooperator_fraction() const {
    return static_cast<double>(cooperators_) / graph_.node_count();
  }

  // Measured x_{C|C} = 2 * (#CC edges) / (k * #C); zero when no cooperators.
  double measured_pair_correlation() const;

  void set_strategy(int v, Strategy s);  // incremental cache update

  // Full cache rebuild, used by tests to cross-check incremental updates.
  void rebuild_cache();

 private:
  RegularGraph graph_;
  PayoffMatrix matrix_;
  std::vector<Strategy> strategies_;
  std::vector<double> payoffs_;
  std::int64_t cooperators_ = 0;
  std::int64_t cc_edges_ = 0;
};

// Exact Fermi adoption probability 1 / (1 + exp(-omega * payoff_diff)).
double fermi_adoption_probability(double payoff_diff, double omega);

// One pairwise-comparison event: a uniform focal node considers a uniform
// neighbor and adopts its strategy with the Fermi probability in accumulated
// payoffs. Same-strategy picks are no-ops.
void pc_update_event(Population& pop, const GameParams& p, Xoshiro256pp& rng);

// One imitation event: the focal node adopts C with probability
// (sum of C-neighbor fitness) / (sum of neighbor fitness + own fitness),
// D with the complementary neighbor-weighted probability, and otherwise keeps
// its strategy. Throws NegativeFitness if any involved fitness is negative.
void im_update_event(Population& pop, const GameParams& p, Xoshiro256pp& rng);

struct SimulationSpec {
  GameParams params;
  SwitchSchedule schedule;   // pc/im rules only
  double x0 = 0.5;
  double t_end = 25.0;
  double sample_dt = 1.0;
  InitMode init = InitMode::BernoulliDensity;
};

struct TimeSeriesSample {
  double t;
  double x_c;
  double x_cc_given_c;
};

// ceil(n * t_end) asynchronous update events, n events per unit of model
// time; event e occurs at t = e/n and uses the rule active at that instant,
// so switching instants are honored to within one event. The graph, the
// initial strategies and the dynamics all draw from one stream seeded with
// `seed`. Samples are taken on the q*sample_dt grid (state at that instant,
// before any event scheduled exactly there).
std::vector<TimeSeriesSample> run_switched_simulation(const SimulationSpec& spec,
                                                      std::uint64_t seed);

struct EnsembleStats {
  std::vector<double> times;
  std::vector<double> mean_x, std_x;      // population std over replicates
  std::vector<double> mean_xcc, std_xcc;
  int runs = 0;
  std::uint64_t base_seed = 0;
  std::string rng_name;
};

// Independent replicates with seeds base_seed + i, aggregated in replicate
// order so the result is bit-identical for any worker count. max_threads = 0
// means hardware concurrency.
EnsembleStats run_ensemble(const SimulationSpec& spec, int runs,
                           std::uint64_t base_seed, int max_threads = 0);

}  // namespace switchrep
