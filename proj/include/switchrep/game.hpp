#pragma once

#include <cstdint>
#include <span>
#include <string_view>

namespace switchrep {

enum class Strategy : std::uint8_t { Defect = 0, Cooperate = 1 };

/// Model parameters of the networked donation game.
///
/// omega is the selection strength (the replicator coefficients below are
/// first-order weak-selection expressions, so they are quantitative only for
/// omega well below 1), degree is the regular-network degree k, benefit/cost
/// are the donation payoff entries, pop_size the agent count (agent engine
/// only; 0 means unset).
struct GameParams {
  double omega = 0.01;
  int degree = 4;
  double benefit = 2.0;
  double cost = 0.2;
  int pop_size = 0;

  // Throws InvalidParams unless k > 2, 0 < c < b, 0 <= omega <= 1.
  // With require_population also demands n > k and n*k even.
  void validate(bool require_population = false) const;
};

/// Donation-game payoff matrix: rows are the focal strategy.
struct PayoffMatrix {
  double cc;  // C vs C: b - c
  double cd;  // C vs D: -c
  double dc;  // D vs C: b
  double dd;  // D vs D: 0

  static PayoffMatrix from_params(const GameParams& p) {
    return {p.benefit - p.cost, -p.cost, p.benefit, 0.0};
  }
};

inline double pair_payoff(Strategy self, Strategy other, const PayoffMatrix& m) {
  if (self == Strategy::Cooperate)
    return other == Strategy::Cooperate ? m.cc : m.cd;
  return other == Strategy::Cooperate ? m.dc : m.dd;
}

// Accumulated payoff of a player against its whole neighborhood.
double accumulated_payoff(Strategy self, std::span<const Strategy> neighbors,
                          const PayoffMatrix& matrix);

// Fitness (reproductive rate) 1 - omega + omega * payoff.
inline double fitness(double payoff, double omega) {
  return 1.0 - omega + omega * payoff;
}

// Replicator coefficient of pairwise-comparison updating on a k-regular
// network: -omega*k*(k-2)*c / (2*(k-1)). Strictly negative for omega > 0.
double coefficient_pc(const GameParams& p);

// Replicator coefficient of imitation updating:
// omega*k^2*(k-2)*(b-(k+2)c) / ((k+1)^2*(k-1)). Positive iff b > (k+2)c.
double coefficient_im(const GameParams& p);

enum class RuleKind : std::uint8_t { PairwiseComparison, Imitation, Custom };

/// A strategy update rule together with its replicator coefficient.
struct UpdateRule {
  RuleKind kind = RuleKind::Custom;
  double alpha = 0.0;

  static UpdateRule pairwise_comparison(const GameParams& p) {
    return {RuleKind::PairwiseComparison, coefficient_pc(p)};
  }
  static UpdateRule imitation(const GameParams& p) {
    return {RuleKind::Imitation, coefficient_im(p)};
  }
  static UpdateRule custom(double alpha) { return {RuleKind::Custom, alpha}; }

  std::string_view name() const {
    switch (kind) {
      case RuleKind::PairwiseComparison: return "pc";
      case RuleKind::Imitation: return "im";
      default: return "custom";
    }
  }
};

}  // namespace switchrep
