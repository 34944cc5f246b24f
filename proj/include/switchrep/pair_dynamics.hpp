#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "switchrep/errors.hpp"
#include "switchrep/game.hpp"
#include "switchrep/schedule.hpp"

namespace switchrep {

/// Point of the pair-approximation phase plane: the cooperator fraction x_C
/// and the conditional pair probability x_{C|C}.
struct PairState {
  double x_c = 0.5;
  double x_cc_given_c = 0.5;

  // Throws InvalidParams unless both components lie in [0,1] and the derived
  // conditional x_{C|D} = x_C(1-x_{C|C})/(1-x_C) stays within [0,1].
  void validate() const;
};

/// All pair/conditional frequencies derived from (x_C, x_{C|C}).
struct PairFrequencies {
  double x_d;          // 1 - x_C
  double x_d_given_c;  // 1 - x_{C|C}
  double x_c_given_d;  // x_C (1 - x_{C|C}) / (1 - x_C)
  double x_d_given_d;  // 1 - x_{C|D}
  double x_cc;         // x_C x_{C|C}
  double x_cd;         // x_C (1 - x_{C|C}), equal to x_DC
  double x_dd;         // 1 - 2 x_C + x_C x_{C|C}
};

// Throws SingularState when x_C = 1 (conditionals on D are undefined there).
PairFrequencies closure(const PairState& state);

struct PairDerivative {
  double dx_c = 0.0;
  double dx_cc_given_c = 0.0;
};

// Leading-order pair-approximation vector field of pairwise-comparison
// updating:
//   dx_C/dt    = omega/2 * x_C (1-x_{C|C}) [ (k-1) b q - k c - b ]
//   dx_{C|C}/dt = (1-x_{C|C})/k * [ 1 - (k-1) q ]
// with q = (x_{C|C}-x_C)/(1-x_C). At x_C -> 1 the field tends to zero along
// admissible states; states within 1e-12 of x_C = 1 with x_{C|C} >= x_C
// return the limit value, anything else there throws SingularState.
PairDerivative field_pc(const PairState& state, const GameParams& p);

// Leading-order vector field of imitation updating:
//   dx_C/dt = omega * k x_C (1-x_{C|C}) / (k+1)^2 *
//             { -2(kc+b) + (k-1) b q [ 2 + (k-1) w ] - k (k-1) c w }
//   dx_{C|C}/dt = 2 (1-x_{C|C})/(k+1) * [ 1 - (k-1) q ]
// with q as above and w = (1-2x_C+x_{C|C})/(1-x_C). Substituting the slow
// manifold for x_{C|C} reduces dx_C/dt to the imitation replicator
// coefficient times x_C (1-x_C); the unit and acceptance suites gate on that
// identity.
PairDerivative field_im(const PairState& state, const GameParams& p);

// Dispatch by rule kind (Custom rules have no pair-approximation field).
PairDerivative field_for(RuleKind kind, const PairState& state, const GameParams& p);

// Slow manifold x_{C|C} = 1/(k-1) + (k-2)/(k-1) * x_C on which the fast pair
// correlation is at rest.
double slow_manifold(double x_c, int degree);

struct PairSample {
  double t;
  PairState state;
};

struct PairIntegrationResult {
  std::vector<PairSample> samples;
  double max_clamp = 0.0;  // largest [0,1]-box clamp applied after any step
};

namespace detail {

PairDerivative pair_rk4_step(RuleKind kind, const PairState& y, double h,
                             const GameParams& p);

}  // namespace detail

/// Fixed-step RK4 for the switched pair system. Steps are segmented so that
/// every switching instant theta*T + t_i is hit exactly; after each step the
/// state is clamped to the unit box and the clamp magnitude recorded. Throws
/// StepTooLarge if a single step moves a component by more than 0.1.
/// The observer is called as observe(t, state, max_clamp_so_far) at t = 0 and
/// after every accepted step.
template <class Observer>
double integrate_switched_pair_observe(const PairState& initial,
                                       const SwitchSchedule& schedule,
                                       const GameParams& params, double t_end,
                                       double step, Observer&& observe) {
  schedule.validate();
  params.validate();
  initial.validate();
  if (step <= 0.0) throw InvalidParams("integration step must be positive");
  for (const auto& rule : schedule.rules)
    if (rule.kind == RuleKind::Custom)
      throw InvalidParams("pair-approximation integration needs pc/im rules");

  double t = 0.0;
  PairState y = initial;
  double max_clamp = 0.0;
  observe(t, y, max_clamp);

  const std::size_t m = schedule.size();
  std::uint64_t cycle = 0;
  std::size_t window = 0;
  while (t < t_end) {
    const double seg_begin = static_cast<double>(cycle) * schedule.period +
                             schedule.window_start(window);
    const double seg_end =
        std::min(static_cast<double>(cycle) * schedule.period +
                     schedule.window_end(window),
                 t_end);
    const RuleKind kind = schedule.rules[window].kind;
    std::uint64_t j = 0;
    while (t < seg_end) {
      const double t_next =
          std::min(seg_begin + static_cast<double>(++j) * step, seg_end);
      const double h = t_next - t;
      const PairDerivative d = detail::pair_rk4_step(kind, y, h, params);
      if (std::abs(h * d.dx_c) > 0.1 || std::abs(h * d.dx_cc_given_c) > 0.1)
        throw StepTooLarge("pair integration step moved a component by more than 0.1");
      double xc = y.x_c + h * d.dx_c;
      double xcc = y.x_cc_given_c + h * d.dx_cc_given_c;
      const double cxc = std::clamp(xc, 0.0, 1.0);
      const double cxcc = std::clamp(xcc, 0.0, 1.0);
      max_clamp = std::max({max_clamp, std::abs(cxc - xc), std::abs(cxcc - xcc)});
      y = PairState{cxc, cxcc};
      t = t_next;
      observe(t, y, max_clamp);
    }
    if (++window == m) {
      window = 0;
      ++cycle;
    }
  }
  return max_clamp;
}

// Sampled variant: records the state on the uniform grid q*sample_dt
// (plus t_end when it is off the grid).
PairIntegrationResult integrate_switched_pair(const PairState& initial,
                                              const SwitchSchedule& schedule,
                                              const GameParams& params,
                                              double t_end, double step,
                                              double sample_dt);

}  // namespace switchrep
