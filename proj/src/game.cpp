#include "switchrep/game.hpp"

#include <cmath>
#include <string>

#include "switchrep/errors.hpp"

namespace switchrep {

void GameParams::validate(bool require_population) const {
  if (degree <= 2)
    throw InvalidParams("degree must be an integer greater than 2, got " +
                        std::to_string(degree));
  if (!(cost > 0.0) || !(cost < benefit))
    throw InvalidParams("payoff entries must satisfy 0 < cost < benefit");
  if (!(omega >= 0.0) || !(omega <= 1.0))
    throw InvalidParams("selection strength must lie in [0, 1]");
  if (require_population) {
    if (pop_size <= degree)
      throw InvalidParams("population size must exceed the degree");
    if ((static_cast<long long>(pop_size) * degree) % 2 != 0)
      throw InvalidParams("population size times degree must be even");
  }
}

double accumulated_payoff(Strategy self, std::span<const Strategy> neighbors,
                          const PayoffMatrix& matrix) {
  double total = 0.0;
  for (Strategy other : neighbors) total += pair_payoff(self, other, matrix);
  return total;
}

double coefficient_pc(const GameParams& p) {
  p.validate();
  const double k = p.degree;
  return -p.omega * k * (k - 2.0) * p.cost / (2.0 * (k - 1.0));
}

double coefficient_im(const GameParams& p) {
  p.validate();
  const double k = p.degree;
  return p.omega * k * k * (k - 2.0) * (p.benefit - (k + 2.0) * p.cost) /
         ((k + 1.0) * (k + 1.0) * (k - 1.0));
}

}  // namespace switchrep
