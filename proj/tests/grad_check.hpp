#pragma once

// Central-difference gradient verification for tape-built scalar losses.
// Shared by the unit tests and the acceptance battery.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "romforge/autodiff.hpp"

namespace gradcheck {

// Rebuilds the loss twice per perturbed coordinate of every leaf and
// returns the worst relative l2 error between analytic and numerical
// gradients over the leaves.  The builder must be a pure function of the
// leaf values (batchnorm running statistics may drift; training-mode
// outputs do not depend on them).
inline double max_rel_error(
    const std::function<romforge::Var(romforge::Tape&)>& build_loss,
    std::vector<romforge::Var> leaves, double h = 1e-6) {
  using romforge::Tape;
  using romforge::Var;
  {
    Tape tape;
    Var loss = build_loss(tape);
    for (Var& p : leaves) p.zero_grad();
    tape.backward(loss);
  }
  double worst = 0.0;
  for (Var& p : leaves) {
    std::vector<double> fd(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double keep = p.value()[i];
      p.value()[i] = keep + h;
      Tape tp;
      const double up = build_loss(tp).value()[0];
      p.value()[i] = keep - h;
      Tape tm;
      const double dn = build_loss(tm).value()[0];
      p.value()[i] = keep;
      fd[i] = (up - dn) / (2.0 * h);
    }
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double d = p.grad()[i] - fd[i];
      num += d * d;
      den += fd[i] * fd[i];
    }
    worst = std::max(worst, std::sqrt(num) / std::max(std::sqrt(den), 1e-12));
  }
  return worst;
}

}  // namespace gradcheck
