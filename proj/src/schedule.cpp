#include "switchrep/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace switchrep {

void SwitchSchedule::validate() const {
  if (rules.empty()) throw InvalidParams("schedule needs at least one rule");
  if (!(period > 0.0)) throw InvalidParams("schedule period must be positive");
  if (instants.size() + 1 != rules.size())
    throw InvalidParams("schedule needs exactly m-1 interior switching instants for m rules");
  double prev = 0.0;
  for (double t : instants) {
    if (!(t > prev))
      throw InvalidParams("switching instants must satisfy 0 < t_1 < ... < t_{m-1}");
    prev = t;
  }
  if (!(prev < period))
    throw InvalidParams("the last switching instant must lie strictly before the period");
}

double SwitchSchedule::drift_sum() const {
  double s = 0.0;
  for (std::size_t i = 0; i < rules.size(); ++i)
    s += rules[i].alpha * (window_end(i) - window_start(i));
  return s;
}

ActiveWindow signal_at(const SwitchSchedule& s, double t) {
  s.validate();
  if (!(t >= 0.0)) throw InvalidParams("signal queries need t >= 0");
  const double T = s.period;
  double cycle = std::floor(t / T);
  double local = t - cycle * T;
  if (local >= T) {  // rounding guard at the upper period edge
    local -= T;
    cycle += 1.0;
  }
  if (local < 0.0) local = 0.0;
  // right-continuous: the active window is the first with local < t_{i+1}
  std::size_t i = 0;
  while (i + 1 < s.size() && local >= s.instants[i]) ++i;
  return ActiveWindow{i, cycle * T + s.window_start(i), cycle * T + s.window_end(i),
                      static_cast<std::uint64_t>(cycle)};
}

double lambda_exponent(const SwitchSchedule& s, double t) {
  const ActiveWindow w = signal_at(s, t);
  double prefix = 0.0;
  for (std::size_t l = 0; l < w.rule_index; ++l)
    prefix += s.rules[l].alpha * (s.window_end(l) - s.window_start(l));
  return static_cast<double>(w.cycle) * s.drift_sum() + prefix +
         s.rules[w.rule_index].alpha * (t - w.begin);
}

double trajectory_at(const SwitchSchedule& s, double x0, double t) {
  if (!(x0 >= 0.0 && x0 <= 1.0)) throw InvalidParams("x0 must lie in [0,1]");
  if (x0 == 0.0 || x0 == 1.0) return x0;  // boundary equilibria
  const double lam = lambda_exponent(s, t);
  const double r = (1.0 - x0) / x0;
  // exp is evaluated on the non-positive side only, so no overflow
  if (lam >= 0.0) return 1.0 / (1.0 + r * std::exp(-lam));
  const double e = std::exp(lam);
  return e / (e + r);
}

Classification classify(const SwitchSchedule& s) {
  s.validate();
  const double sum = s.drift_sum();
  Classification c;
  c.s_value = sum;
  c.stable_point = sum > 0.0   ? StablePoint::FullCooperation
                   : sum < 0.0 ? StablePoint::FullDefection
                               : StablePoint::Neutral;
  return c;
}

const char* stable_point_name(StablePoint p) {
  switch (p) {
    case StablePoint::FullCooperation: return "FullCooperation";
    case StablePoint::FullDefection: return "FullDefection";
    default: return "Neutral";
  }
}

double critical_instant_two_rules(double alpha1, double alpha2, double period) {
  if (!(period > 0.0)) throw InvalidParams("period must be positive");
  if (alpha1 == alpha2)
    throw DegenerateSchedule("equal coefficients: the drift sum never changes sign in t1");
  return alpha2 * period / (alpha2 - alpha1);
}

std::vector<double> boundary_sequence(const SwitchSchedule& s, double x0,
                                      std::size_t v, std::size_t theta_max) {
  s.validate();
  if (v >= s.size()) throw InvalidParams("boundary index v must lie in {0,...,m-1}");
  const double t_v = s.window_start(v);
  std::vector<double> out;
  out.reserve(theta_max + 1);
  for (std::size_t theta = 0; theta <= theta_max; ++theta)
    out.push_back(trajectory_at(s, x0, static_cast<double>(theta) * s.period + t_v));
  return out;
}

std::vector<std::vector<UpdateRule>> enumerate_activation_sequences(
    const std::vector<UpdateRule>& rules) {
  if (rules.empty()) throw InvalidParams("need at least one rule");
  std::vector<std::size_t> idx(rules.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::vector<std::vector<UpdateRule>> out;
  do {
    std::vector<UpdateRule> seq;
    seq.reserve(rules.size());
    for (std::size_t i : idx) seq.push_back(rules[i]);
    out.push_back(std::move(seq));
  } while (std::next_permutation(idx.begin(), idx.end()));
  return out;
}

std::vector<std::pair<double, double>> integrate_switched_logistic_grid(
    const SwitchSchedule& s, double x0, double t_end, double step, double sample_dt) {
  s.validate();
  if (step <= 0.0) throw InvalidParams("integration step must be positive");
  if (sample_dt <= 0.0) throw InvalidParams("sample interval must be positive");
  if (!(x0 >= 0.0 && x0 <= 1.0)) throw InvalidParams("x0 must lie in [0,1]");

  std::vector<std::pair<double, double>> out;
  std::size_t next_sample = 0;
  auto due = [&](std::size_t q) { return static_cast<double>(q) * sample_dt; };
  auto record_due = [&](double t, double x) {
    while (due(next_sample) <= t && due(next_sample) <= t_end) {
      out.push_back({due(next_sample), x});
      ++next_sample;
    }
  };

  double t = 0.0;
  double x = x0;
  record_due(0.0, x);
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
      double t_next = seg_begin + static_cast<double>(++j) * step;
      while (t_next <= t) t_next = seg_begin + static_cast<double>(++j) * step;
      t_next = std::min(t_next, seg_end);
      if (due(next_sample) > t && due(next_sample) < t_next) {
        t_next = due(next_sample);
        j = static_cast<std::uint64_t>(std::floor((t_next - seg_begin) / step));
      }
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
      record_due(t, x);
    }
    if (++window == m) {
      window = 0;
      ++cycle;
    }
  }
  if (out.empty() || out.back().first < t_end) out.push_back({t_end, x});
  return out;
}

std::uint64_t convergence_cycle(const SwitchSchedule& s, double x0, double tol) {
  s.validate();
  if (!(x0 > 0.0 && x0 < 1.0))
    throw InvalidParams("convergence queries need an interior x0");
  if (!(tol > 0.0 && tol < 0.5)) throw InvalidParams("tolerance must lie in (0, 0.5)");
  const double sum = s.drift_sum();
  if (sum == 0.0)
    throw DegenerateSchedule("neutral schedule: the trajectory is periodic, not convergent");
  const double r = (1.0 - x0) / x0;
  // S > 0: 1 - x(theta T) < tol  <=>  theta S > log(r (1-tol)/tol)
  // S < 0:     x(theta T) < tol  <=>  theta|S| > log((1-tol)/(tol r))
  const double needed = sum > 0.0 ? std::log(r * (1.0 - tol) / tol)
                                  : std::log((1.0 - tol) / (tol * r));
  double guess = std::ceil(needed / std::abs(sum));
  if (guess < 0.0) guess = 0.0;
  const double limit = sum > 0.0 ? 1.0 : 0.0;
  auto within = [&](double theta) {
    return std::abs(trajectory_at(s, x0, theta * s.period) - limit) < tol;
  };
  // the closed-form bound is exact up to rounding; settle the edge locally
  while (!within(guess)) guess += 1.0;
  while (guess > 0.0 && within(guess - 1.0)) guess -= 1.0;
  return static_cast<std::uint64_t>(guess);
}

}  // namespace switchrep
