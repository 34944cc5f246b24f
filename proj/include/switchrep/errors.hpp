#pragma once

#include <stdexcept>
#include <string>

namespace switchrep {

// Parameter or schedule fails a documented validity constraint.
class InvalidParams : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A pair-approximation quantity is undefined at the queried state (x_C = 1).
class SingularState : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Two-rule threshold is undefined because both coefficients coincide.
class DegenerateSchedule : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A fixed integration step moved a state component by more than the sanity bound.
class StepTooLarge : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Imitation updating needs nonnegative fitness weights; the parameter set allows
// 1 - omega + omega*pi < 0.
class NegativeFitness : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Random regular graph construction exhausted its retry budget.
class GraphGenerationFailed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace switchrep
