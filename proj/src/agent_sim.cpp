#include "switchrep/agent_sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <thread>
#include <utility>

#include "switchrep/errors.hpp"

namespace switchrep {

Population::Population(RegularGraph graph, const PayoffMatrix& matrix)
    : graph_(std::move(graph)),
      matrix_(matrix),
      strategies_(graph_.node_count(), Strategy::Defect),
      payoffs_(graph_.node_count(), 0.0) {
  rebuild_cache();
}

void Population::assign_strategies(double x0, InitMode mode, Xoshiro256pp& rng) {
  if (!(x0 >= 0.0 && x0 <= 1.0)) throw InvalidParams("x0 must lie in [0,1]");
  const int n = graph_.node_count();
  if (mode == InitMode::BernoulliDensity) {
    for (int v = 0; v < n; ++v)
      strategies_[v] = rng.next_double() < x0 ? Strategy::Cooperate : Strategy::Defect;
  } else {
    const int target = static_cast<int>(std::floor(x0 * n));
    std::fill(strategies_.begin(), strategies_.end(), Strategy::Defect);
    // uniform placement: partial Fisher-Yates over node labels
    std::vector<std::int32_t> order(n);
    for (int v = 0; v < n; ++v) order[v] = v;
    for (int i = 0; i < target; ++i) {
      const int j = i + static_cast<int>(rng.next_below(n - i));
      std::swap(order[i], order[j]);
      strategies_[order[i]] = Strategy::Cooperate;
    }
  }
  rebuild_cache();
}

void Population::set_all(Strategy s) {
  std::fill(strategies_.begin(), strategies_.end(), s);
  rebuild_cache();
}

void Population::rebuild_cache() {
  const int n = graph_.node_count();
  cooperators_ = 0;
  cc_edges_ = 0;
  for (int v = 0; v < n; ++v) {
    payoffs_[v] = 0.0;
    for (std::int32_t u : graph_.neighbors(v)) {
      payoffs_[v] += pair_payoff(strategies_[v], strategies_[u], matrix_);
      if (strategies_[v] == Strategy::Cooperate && strategies_[u] == Strategy::Cooperate &&
          v < u)
        ++cc_edges_;
    }
    if (strategies_[v] == Strategy::Cooperate) ++cooperators_;
  }
}

double Population::measured_pair_correlation() const {
  if (cooperators_ == 0) return 0.0;
  return 2.0 * static_cast<double>(cc_edges_) /
         (static_cast<double>(graph_.degree()) * static_cast<double>(cooperators_));
}

void Population::set_strategy(int v, Strategy s) {
  const Strategy old = strategies_[v];
  if (old == s) return;
  strategies_[v] = s;
  cooperators_ += s == Strategy::Cooperate ? 1 : -1;
  double own = 0.0;
  for (std::int32_t u : graph_.neighbors(v)) {
    payoffs_[u] += pair_payoff(strategies_[u], s, matrix_) -
                   pair_payoff(strategies_[u], old, matrix_);
    own += pair_payoff(s, strategies_[u], matrix_);
    if (strategies_[u] == Strategy::Cooperate)
      cc_edges_ += s == Strategy::Cooperate ? 1 : -1;
  }
  payoffs_[v] = own;
}

double fermi_adoption_probability(double payoff_diff, double omega) {
  return 1.0 / (1.0 + std::exp(-omega * payoff_diff));
}

void pc_update_event(Population& pop, const GameParams& p, Xoshiro256pp& rng) {
  const int n = pop.graph().node_count();
  const int focal = static_cast<int>(rng.next_below(n));
  const auto neigh = pop.graph().neighbors(focal);
  const int model = neigh[rng.next_below(neigh.size())];
  if (pop.strategy(model) == pop.strategy(focal)) return;
  const double prob =
      fermi_adoption_probability(pop.payoff(model) - pop.payoff(focal), p.omega);
  if (rng.next_double() < prob) pop.set_strategy(focal, pop.strategy(model));
}

void im_update_event(Population& pop, const GameParams& p, Xoshiro256pp& rng) {
  const int n = pop.graph().node_count();
  const int focal = static_cast<int>(rng.next_below(n));
  double coop_weight = 0.0;
  double defect_weight = 0.0;
  for (std::int32_t u : pop.graph().neighbors(focal)) {
    const double g = fitness(pop.payoff(u), p.omega);
    if (g < 0.0) throw NegativeFitness("imitation weights need nonnegative fitness");
    (pop.strategy(u) == Strategy::Cooperate ? coop_weight : defect_weight) += g;
  }
  const double own = fitness(pop.payoff(focal), p.omega);
  if (own < 0.0) throw NegativeFitness("imitation weights need nonnegative fitness");
  const double total = coop_weight + defect_weight + own;
  const double draw = rng.next_double() * total;
  if (draw < coop_weight) {
    pop.set_strategy(focal, Strategy::Cooperate);
  } else if (draw < coop_weight + defect_weight) {
    pop.set_strategy(focal, Strategy::Defect);
  }
  // otherwise the focal keeps its strategy
}

namespace {

// Most negative accumulated payoff under the donation matrix is -k*c (a
// cooperator among defectors); imitation needs its fitness nonnegative.
void check_im_feasible(const GameParams& p) {
  if (fitness(-static_cast<double>(p.degree) * p.cost, p.omega) < 0.0)
    throw NegativeFitness(
        "imitation updating infeasible: 1 - omega + omega*(-k*c) < 0");
}

std::uint64_t events_before(double time, int n) {
  // events strictly before `time`, one event per 1/n of model time
  return static_cast<std::uint64_t>(
      std::ceil(time * static_cast<double>(n) - 1e-9));
}

}  // namespace

std::vector<TimeSeriesSample> run_switched_simulation(const SimulationSpec& spec,
                                                      std::uint64_t seed) {
  spec.params.validate(/*require_population=*/true);
  spec.schedule.validate();
  if (!(spec.t_end > 0.0)) throw InvalidParams("t_end must be positive");
  if (!(spec.sample_dt > 0.0)) throw InvalidParams("sample_dt must be positive");
  bool has_im = false;
  for (const auto& rule : spec.schedule.rules) {
    if (rule.kind == RuleKind::Custom)
      throw InvalidParams("agent simulation needs pc/im rules");
    has_im |= rule.kind == RuleKind::Imitation;
  }
  if (has_im) check_im_feasible(spec.params);

  const int n = spec.params.pop_size;
  Xoshiro256pp rng(seed);
  const PayoffMatrix matrix = PayoffMatrix::from_params(spec.params);
  Population pop(RegularGraph::random(n, spec.params.degree, rng), matrix);
  pop.assign_strategies(spec.x0, spec.init, rng);

  const std::uint64_t total_events = events_before(spec.t_end, n);
  std::vector<TimeSeriesSample> samples;
  std::size_t next_sample = 0;
  auto sample_time = [&](std::size_t q) { return static_cast<double>(q) * spec.sample_dt; };
  auto record_through = [&](std::uint64_t event_index) {
    while (sample_time(next_sample) <= spec.t_end + 1e-12) {
      if (events_before(sample_time(next_sample), n) > event_index) break;
      samples.push_back({sample_time(next_sample), pop.cooperator_fraction(),
                         pop.measured_pair_correlation()});
      ++next_sample;
    }
  };

  // walk the schedule segments and map them onto event index ranges
  std::uint64_t event = 0;
  record_through(0);
  std::uint64_t cycle = 0;
  std::size_t window = 0;
  const std::size_t m = spec.schedule.size();
  while (event < total_events) {
    const double seg_end = static_cast<double>(cycle) * spec.schedule.period +
                           spec.schedule.window_end(window);
    const std::uint64_t seg_last = std::min(total_events, events_before(seg_end, n));
    const RuleKind kind = spec.schedule.rules[window].kind;
    while (event < seg_last) {
      if (kind == RuleKind::PairwiseComparison)
        pc_update_event(pop, spec.params, rng);
      else
        im_update_event(pop, spec.params, rng);
      ++event;
      record_through(event);
    }
    if (++window == m) {
      window = 0;
      ++cycle;
    }
  }
  return samples;
}

EnsembleStats run_ensemble(const SimulationSpec& spec, int runs,
                           std::uint64_t base_seed, int max_threads) {
  if (runs < 1) throw InvalidParams("ensemble needs at least one run");
  std::vector<std::vector<TimeSeriesSample>> results(runs);

  unsigned workers = max_threads > 0 ? static_cast<unsigned>(max_threads)
                                     : std::thread::hardware_concurrency();
  if (workers == 0) workers = 1;
  workers = std::min<unsigned>(workers, static_cast<unsigned>(runs));

  if (workers <= 1) {
    for (int r = 0; r < runs; ++r)
      results[r] = run_switched_simulation(spec, base_seed + static_cast<std::uint64_t>(r));
  } else {
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto work = [&]() {
      for (;;) {
        const int r = next.fetch_add(1);
        if (r >= runs) return;
        try {
          results[r] =
              run_switched_simulation(spec, base_seed + static_cast<std::uint64_t>(r));
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          return;
        }
      }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned i = 0; i < workers; ++i) pool.emplace_back(work);
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
  }

  // aggregate in replicate order: bit-identical for any worker count
  EnsembleStats stats;
  stats.runs = runs;
  stats.base_seed = base_seed;
  stats.rng_name = Xoshiro256pp::kName;
  const std::size_t points = results[0].size();
  stats.times.reserve(points);
  for (const auto& s : results[0]) stats.times.push_back(s.t);
  stats.mean_x.assign(points, 0.0);
  stats.std_x.assign(points, 0.0);
  stats.mean_xcc.assign(points, 0.0);
  stats.std_xcc.assign(points, 0.0);
  std::vector<double> sq_x(points, 0.0), sq_xcc(points, 0.0);
  for (int r = 0; r < runs; ++r) {
    if (results[r].size() != points)
      throw std::logic_error("replicates produced mismatched sample grids");
    for (std::size_t i = 0; i < points; ++i) {
      stats.mean_x[i] += results[r][i].x_c;
      sq_x[i] += results[r][i].x_c * results[r][i].x_c;
      stats.mean_xcc[i] += results[r][i].x_cc_given_c;
      sq_xcc[i] += results[r][i].x_cc_given_c * results[r][i].x_cc_given_c;
    }
  }
  for (std::size_t i = 0; i < points; ++i) {
    stats.mean_x[i] /= runs;
    stats.mean_xcc[i] /= runs;
    stats.std_x[i] = std::sqrt(std::max(0.0, sq_x[i] / runs - stats.mean_x[i] * stats.mean_x[i]));
    stats.std_xcc[i] =
        std::sqrt(std::max(0.0, sq_xcc[i] / runs - stats.mean_xcc[i] * stats.mean_xcc[i]));
  }
  return stats;
}

}  // namespace switchrep
