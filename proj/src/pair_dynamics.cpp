#include "switchrep/pair_dynamics.hpp"

#include <algorithm>
#include <cmath>

namespace switchrep {

namespace {

constexpr double kBoundaryEps = 1e-12;

}  // namespace

void PairState::validate() const {
  if (!(x_c >= 0.0 && x_c <= 1.0) || !(x_cc_given_c >= 0.0 && x_cc_given_c <= 1.0))
    throw InvalidParams("pair state components must lie in [0,1]");
  // derived x_{C|D} must not exceed 1: x_C (1 - x_{C|C}) <= 1 - x_C
  if (x_c * (1.0 - x_cc_given_c) > (1.0 - x_c) + 1e-12)
    throw InvalidParams("pair state implies x_{C|D} > 1");
}

PairFrequencies closure(const PairState& state) {
  const double x = state.x_c;
  const double u = state.x_cc_given_c;
  if (1.0 - x < kBoundaryEps)
    throw SingularState("conditionals on defectors are undefined at x_C = 1");
  PairFrequencies f;
  f.x_d = 1.0 - x;
  f.x_d_given_c = 1.0 - u;
  f.x_cd = x * (1.0 - u);
  f.x_c_given_d = f.x_cd / f.x_d;
  f.x_d_given_d = 1.0 - f.x_c_given_d;
  f.x_cc = x * u;
  f.x_dd = 1.0 - 2.0 * x + x * u;
  return f;
}

namespace {

// Shared singular-edge handling: near x_C = 1 the factor (x_{C|C}-x_C)/(1-x_C)
// is bounded only for admissible states (x_{C|C} >= x_C); those return the
// boundary limit, anything else is singular.
bool boundary_limit(const PairState& s, PairDerivative* out) {
  if (1.0 - s.x_c < kBoundaryEps) {
    if (s.x_cc_given_c >= s.x_c) {
      *out = PairDerivative{0.0, 0.0};
      return true;
    }
    throw SingularState("pair-approximation field is singular at x_C = 1");
  }
  return false;
}

}  // namespace

PairDerivative field_pc(const PairState& state, const GameParams& p) {
  PairDerivative d;
  if (boundary_limit(state, &d)) return d;
  const double k = p.degree;
  const double x = state.x_c;
  const double u = state.x_cc_given_c;
  const double q = (u - x) / (1.0 - x);
  d.dx_c = p.omega * 0.5 * x * (1.0 - u) *
           ((k - 1.0) * p.benefit * q - k * p.cost - p.benefit);
  d.dx_cc_given_c = (1.0 - u) / k * (1.0 - (k - 1.0) * q);
  return d;
}

PairDerivative field_im(const PairState& state, const GameParams& p) {
  PairDerivative d;
  if (boundary_limit(state, &d)) return d;
  const double k = p.degree;
  const double x = state.x_c;
  const double u = state.x_cc_given_c;
  const double q = (u - x) / (1.0 - x);
  const double w = (1.0 - 2.0 * x + u) / (1.0 - x);
  const double brace = -2.0 * (k * p.cost + p.benefit) +
                       (k - 1.0) * p.benefit * q * (2.0 + (k - 1.0) * w) -
                       k * (k - 1.0) * p.cost * w;
  d.dx_c = p.omega * k * x * (1.0 - u) / ((k + 1.0) * (k + 1.0)) * brace;
  d.dx_cc_given_c = 2.0 * (1.0 - u) / (k + 1.0) * (1.0 - (k - 1.0) * q);
  return d;
}

PairDerivative field_for(RuleKind kind, const PairState& state, const GameParams& p) {
  switch (kind) {
    case RuleKind::PairwiseComparison: return field_pc(state, p);
    case RuleKind::Imitation: return field_im(state, p);
    default:
      throw InvalidParams("custom rules have no pair-approximation field");
  }
}

double slow_manifold(double x_c, int degree) {
  if (degree <= 2) throw InvalidParams("slow manifold needs degree > 2");
  const double k = degree;
  return 1.0 / (k - 1.0) + (k - 2.0) / (k - 1.0) * x_c;
}

namespace detail {

PairDerivative pair_rk4_step(RuleKind kind, const PairState& y, double h,
                             const GameParams& p) {
  auto clamped = [](double xc, double xcc) {
    return PairState{std::clamp(xc, 0.0, 1.0), std::clamp(xcc, 0.0, 1.0)};
  };
  const PairDerivative k1 = field_for(kind, y, p);
  const PairDerivative k2 = field_for(
      kind, clamped(y.x_c + 0.5 * h * k1.dx_c, y.x_cc_given_c + 0.5 * h * k1.dx_cc_given_c), p);
  const PairDerivative k3 = field_for(
      kind, clamped(y.x_c + 0.5 * h * k2.dx_c, y.x_cc_given_c + 0.5 * h * k2.dx_cc_given_c), p);
  const PairDerivative k4 = field_for(
      kind, clamped(y.x_c + h * k3.dx_c, y.x_cc_given_c + h * k3.dx_cc_given_c), p);
  return PairDerivative{
      (k1.dx_c + 2.0 * k2.dx_c + 2.0 * k3.dx_c + k4.dx_c) / 6.0,
      (k1.dx_cc_given_c + 2.0 * k2.dx_cc_given_c + 2.0 * k3.dx_cc_given_c +
       k4.dx_cc_given_c) /
          6.0};
}

}  // namespace detail

PairIntegrationResult integrate_switched_pair(const PairState& initial,
                                              const SwitchSchedule& schedule,
                                              const GameParams& params,
                                              double t_end, double step,
                                              double sample_dt) {
  schedule.validate();
  params.validate();
  initial.validate();
  if (step <= 0.0) throw InvalidParams("integration step must be positive");
  if (sample_dt <= 0.0) throw InvalidParams("sample interval must be positive");
  for (const auto& rule : schedule.rules)
    if (rule.kind == RuleKind::Custom)
      throw InvalidParams("pair-approximation integration needs pc/im rules");

  PairIntegrationResult result;
  std::size_t next_sample = 0;
  auto due = [&](std::size_t q) { return static_cast<double>(q) * sample_dt; };
  // steps are trimmed to land exactly on due sample times, so a due time
  // <= t can only be the current t
  auto record_due = [&](double t, const PairState& s) {
    while (due(next_sample) <= t && due(next_sample) <= t_end) {
      result.samples.push_back({due(next_sample), s});
      ++next_sample;
    }
  };

  double t = 0.0;
  PairState y = initial;
  record_due(0.0, y);
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
      double t_next = seg_begin + static_cast<double>(++j) * step;
      while (t_next <= t) t_next = seg_begin + static_cast<double>(++j) * step;
      t_next = std::min(t_next, seg_end);
      if (due(next_sample) > t && due(next_sample) < t_next) {
        t_next = due(next_sample);
        j = static_cast<std::uint64_t>(std::floor((t_next - seg_begin) / step));
      }
      const double h = t_next - t;
      const PairDerivative d = detail::pair_rk4_step(kind, y, h, params);
      if (std::abs(h * d.dx_c) > 0.1 || std::abs(h * d.dx_cc_given_c) > 0.1)
        throw StepTooLarge("pair integration step moved a component by more than 0.1");
      const double xc = y.x_c + h * d.dx_c;
      const double xcc = y.x_cc_given_c + h * d.dx_cc_given_c;
      const double cxc = std::clamp(xc, 0.0, 1.0);
      const double cxcc = std::clamp(xcc, 0.0, 1.0);
      result.max_clamp = std::max(
          {result.max_clamp, std::abs(cxc - xc), std::abs(cxcc - xcc)});
      y = PairState{cxc, cxcc};
      t = t_next;
      record_due(t, y);
    }
    if (++window == m) {
      window = 0;
      ++cycle;
    }
  }
  // t_end off the sample grid: record the final state as well
  if (result.samples.empty() || result.samples.back().t < t_end)
    result.samples.push_back({t_end, y});
  return result;
}

}  // namespace switchrep
