#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <vector>

#include "romforge/array.hpp"
#include "romforge/rng.hpp"

namespace romforge {

// One tensor on the tape: value and gradient buffers share a shape.
struct Slot {
  std::vector<std::size_t> shape;
  std::vector<double> value;
  std::vector<double> grad;
};

// Shared handle to a Slot.  Parameters are long-lived leaves; intermediate
// results are created by ops and die with the tape.
class Var {
 public:
  Var() = default;
  explicit Var(std::shared_ptr<Slot> s) : slot_(std::move(s)) {}

  static Var leaf(std::vector<std::size_t> shape, std::vector<double> value);
  static Var zeros_like(std::vector<std::size_t> shape);

  bool valid() const { return slot_ != nullptr; }
  const std::vector<std::size_t>& shape() const { return slot_->shape; }
  std::size_t size() const { return slot_->value.size(); }
  std::vector<double>& value() { return slot_->value; }
  const std::vector<double>& value() const { return slot_->value; }
  std::vector<double>& grad() { return slot_->grad; }
  const std::vector<double>& grad() const { return slot_->grad; }
  void zero_grad() { std::fill(slot_->grad.begin(), slot_->grad.end(), 0.0); }
  std::shared_ptr<Slot> slot() const { return slot_; }

 private:
  std::shared_ptr<Slot> slot_;
};

// Dynamic tape: ops append backward closures in execution order and
// backward() replays them in reverse.  One tape per training step.
class Tape {
 public:
  Var create(std::vector<std::size_t> shape);
  void record(std::function<void()> backward_fn);
  // Seeds d(loss)/d(loss) = 1 and runs all closures in reverse order.
  // The loss must be scalar (size 1).
  void backward(Var& loss);
  void clear();
  std::size_t n_nodes() const { return nodes_.size(); }

 private:
  std::vector<std::function<void()>> nodes_;
};

enum class Act { relu, elu, identity };

Var add(Tape& t, const Var& a, const Var& b);
Var sub(Tape& t, const Var& a, const Var& b);
Var scale(Tape& t, const Var& a, double c);
Var activation(Tape& t, Act kind, const Var& x);

// Sum over every entry of (a - b)^2; the workhorse for squared losses.
Var sum_sq_diff(Tape& t, const Var& a, const Var& b);

// Copy with a new per-sample shape; leading batch dim is preserved.
Var reshape(Tape& t, const Var& x, const std::vector<std::size_t>& sample_shape);

// (B, N, F) -> (B, F*N), feature j contiguous at [j*N, (j+1)*N).
Var flatten_feature_major(Tape& t, const Var& x);
// Inverse of the above.
Var unflatten_feature_major(Tape& t, const Var& x, std::size_t n_nodes,
                            std::size_t n_features);

// (B, n_seg*in_len) -> (B, n_seg*out_len), each segment zero-padded or
// truncated at its tail.
Var resize_segments(Tape& t, const Var& x, std::size_t n_seg,
                    std::size_t in_len, std::size_t out_len);

// Standard Adam with bias correction over a fixed parameter list.
struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

class Adam {
 public:
  Adam(std::vector<Var> params, AdamConfig cfg);
  void step();  // consumes current grads; throws divergence_error on NaN
  std::size_t steps_taken() const { return t_; }

 private:
  std::vector<Var> params_;
  std::vector<std::vector<double>> m_, v_;
  AdamConfig cfg_;
  std::size_t t_ = 0;
};

// Uniform Glorot fill on an existing leaf, biases left to the caller.
void glorot_fill(Var& w, std::size_t fan_in, std::size_t fan_out,
                 Xoshiro256ss& rng);

}  // namespace romforge
