#pragma once

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "switchrep/errors.hpp"
#include "switchrep/game.hpp"

namespace switchrep {

/// Periodic activation schedule: rules[i] is active on
/// [theta*T + t_i, theta*T + t_{i+1}) with t_0 = 0 and t_m = T, for every
/// cycle theta. `instants` holds the interior switching instants t_1..t_{m-1}.
struct SwitchSchedule {
  std::vector<UpdateRule> rules;
  std::vector<double> instants;
  double period = 0.0;

  std::size_t size() const { return rules.size(); }

  // Window start/end within the base period, i in [0, m).
  double window_start(std::size_t i) const { return i == 0 ? 0.0 : instants[i - 1]; }
  double window_end(std::size_t i) const {
    return i + 1 == rules.size() ? period : instants[i];
  }

  // Periodic drift sum S = sum_i alpha_i * (t_i - t_{i-1}); its sign decides
  // the asymptotics of the switched replicator system.
  double drift_sum() const;

  // Throws InvalidParams unless m >= 1, T > 0 and
  // 0 < t_1 < ... < t_{m-1} < T.
  void validate() const;
};

/// Active rule window for a time query: the signal is right-continuous, so a
/// query exactly at a switching instant returns the incoming rule.
struct ActiveWindow {
  std::size_t rule_index;  // 0-based index into schedule.rules
  double begin;            // theta*T + t_i
  double end;              // theta*T + t_{i+1}
  std::uint64_t cycle;     // theta
};

ActiveWindow signal_at(const SwitchSchedule& s, double t);

// Accumulated log-odds exponent Lambda(t) = integral of the active coefficient
// from 0 to t, so that x(t) = 1 / (1 + ((1-x0)/x0) * exp(-Lambda(t))).
// Continuous in t; advances by exactly drift_sum() per period.
double lambda_exponent(const SwitchSchedule& s, double t);

// Exact trajectory of the switched replicator equation. x0 in {0,1} is an
// equilibrium and is returned unchanged. Overflow-safe for large |Lambda|.
double trajectory_at(const SwitchSchedule& s, double x0, double t);

enum class StablePoint { FullCooperation, FullDefection, Neutral };

struct Classification {
  double s_value = 0.0;
  StablePoint stable_point = StablePoint::Neutral;
};

// sign(S) > 0 -> full cooperation is asymptotically stable; < 0 -> full
// defection; S == 0 -> neutral (exact periodic orbit, outside the sign
// dichotomy of the stability theorems).
Classification classify(const SwitchSchedule& s);

const char* stable_point_name(StablePoint p);

// Unique switching instant where S changes sign for a two-rule schedule:
// p = alpha2*T / (alpha2 - alpha1). Throws DegenerateSchedule when
// alpha1 == alpha2. Meaningful as a switching instant only when 0 < p < T.
double critical_instant_two_rules(double alpha1, double alpha2, double period);

// Samples x(theta*T + t_v) for theta = 0..theta_max; strictly monotone with
// the sign of S for x0 in (0,1).
std::vector<double> boundary_sequence(const SwitchSchedule& s, double x0,
                                      std::size_t v, std::size_t theta_max);

// All m! activation orderings of the given rules.
std::vector<std::vector<UpdateRule>> enumerate_activation_sequences(
    const std::vector<UpdateRule>& rules);

// Smallest theta with |x(theta*T) - limit| < tol, computed by inverting the
// logistic rather than stepping. Requires x0 in (0,1), tol in (0, 0.5) and
// S != 0 (throws DegenerateSchedule on a neutral schedule).
std::uint64_t convergence_cycle(const SwitchSchedule& s, double x0, double tol);

// Grid-sampled variant of the switched-logistic RK4 below: steps land
// exactly on the q*sample_dt grid (plus t_end when off the grid) and those
// points are returned.
std::vector<std::pair<double, double>> integrate_switched_logistic_grid(
    const SwitchSchedule& s, double x0, double t_end, double step, double sample_dt);

/// Classical RK4 on dx/dt = alpha_{sigma(t)} x (1-x) with a fixed nominal
/// step. Integration is segmented on the exact switching instants
/// theta*T + t_i, so no step ever straddles a coefficient jump; the observer
/// is invoked at t = 0 and after every accepted step.
template <class Observer>
void integrate_switched_logistic(const SwitchSchedule& s, double x0,
                                 double t_end, double step, Observer&& observe) {
  s.validate();
  if (step <= 0.0) throw InvalidParams("integration step must be positive");
  if (!(x0 >= 0.0 && x0 <= 1.0)) throw InvalidParams("x0 must lie in [0,1]");

  double t = 0.0;
  double x = x0;
  observe(t, x);

  const std::size_t m = s.size();
  std::uint64_t cycle = 0;
  std::size_t window = 0;
  while (t < t_end) {
    const double seg_begin =
        static_cast<double>(cycle) * s.period + s.window_start(window);
    const double seg_end = std::min(
        static_cast<double>(cycle) * s.period + s.window_end(window), t_end);
    const double alpha = s.rules[window].alpha;
    std::uint64_t j = 0;
    while (t < seg_end) {
      const double t_next = std::min(seg_begin + static_cast<double>(++j) * step, seg_end);
      const double h = t_next - t;
      const double k1 = alpha * x * (1.0 - x);
      const double x2 = x + 0.5 * h * k1;
      const double k2 = alpha * x2 * (1.0 - x2);
      const double x3 = x + 0.5 * h * k2;
      const double k3 = alpha * x3 * (1.0 - x3);
      const double x4 = x + h * k3;
      const double k4 = alpha * x4 * (1.0 - x4);
      x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      t = t_next;
      observe(t, x);
    }
    if (++window == m) {
      window = 0;
      ++cycle;
    }
  }
}

}  // namespace switchrep
