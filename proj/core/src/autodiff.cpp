#include "romforge/autodiff.hpp"

#include <algorithm>
#include <cmath>

#include "romforge/errors.hpp"

namespace romforge {

Var Var::leaf(std::vector<std::size_t> shape, std::vector<double> value) {
  const std::size_t n = Array::count(shape);
  if (value.size() != n) throw shape_error("Var::leaf: value length mismatch");
  auto s = std::make_shared<Slot>();
  s->shape = std::move(shape);
  s->value = std::move(value);
  s->grad.assign(n, 0.0);
  return Var(std::move(s));
}

Var Var::zeros_like(std::vector<std::size_t> shape) {
  const std::size_t n = Array::count(shape);
  return leaf(std::move(shape), std::vector<double>(n, 0.0));
}

Var Tape::create(std::vector<std::size_t> shape) {
  return Var::zeros_like(std::move(shape));
}

void Tape::record(std::function<void()> backward_fn) {
  nodes_.push_back(std::move(backward_fn));
}

void Tape::backward(Var& loss) {
  if (loss.size() != 1) throw shape_error("backward: loss must be scalar");
  loss.grad()[0] = 1.0;
  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) (*it)();
}

void Tape::clear() { nodes_.clear(); }

namespace {

void require_same_shape(const Var& a, const Var& b, const char* op) {
  if (a.shape() != b.shape()) throw shape_error(std::string(op) + ": shape mismatch");
}

}  // namespace

Var add(Tape& t, const Var& a, const Var& b) {
  require_same_shape(a, b, "add");
  Var y = t.create(a.shape());
  for (std::size_t i = 0; i < y.size(); ++i)
    y.value()[i] = a.value()[i] + b.value()[i];
  t.record([as = a.slot(), bs = b.slot(), ys = y.slot()] {
    for (std::size_t i = 0; i < ys->grad.size(); ++i) {
      as->grad[i] += ys->grad[i];
      bs->grad[i] += ys->grad[i];
    }
  });
  return y;
}

Var sub(Tape& t, const Var& a, const Var& b) {
  require_same_shape(a, b, "sub");
  Var y = t.create(a.shape());
  for (std::size_t i = 0; i < y.size(); ++i)
    y.value()[i] = a.value()[i] - b.value()[i];
  t.record([as = a.slot(), bs = b.slot(), ys = y.slot()] {
    for (std::size_t i = 0; i < ys->grad.size(); ++i) {
      as->grad[i] += ys->grad[i];
      bs->grad[i] -= ys->grad[i];
    }
  });
  return y;
}

Var scale(Tape& t, const Var& a, double c) {
  Var y = t.create(a.shape());
  for (std::size_t i = 0; i < y.size(); ++i) y.value()[i] = c * a.value()[i];
  t.record([as = a.slot(), ys = y.slot(), c] {
    for (std::size_t i = 0; i < ys->grad.size(); ++i)
      as->grad[i] += c * ys->grad[i];
  });
  return y;
}

Var activation(Tape& t, Act kind, const Var& x) {
  if (kind == Act::identity) {
    Var y = t.create(x.shape());
    y.value() = x.value();
    t.record([xs = x.slot(), ys = y.slot()] {
      for (std::size_t i = 0; i < ys->grad.size(); ++i) xs->grad[i] += ys->grad[i];
    });
    return y;
  }
  Var y = t.create(x.shape());
  if (kind == Act::relu) {
    for (std::size_t i = 0; i < y.size(); ++i)
      y.value()[i] = x.value()[i] > 0.0 ? x.value()[i] : 0.0;
    t.record([xs = x.slot(), ys = y.slot()] {
      for (std::size_t i = 0; i < ys->grad.size(); ++i)
        if (xs->value[i] > 0.0) xs->grad[i] += ys->grad[i];
    });
  } else {  // ELU with alpha = 1
    for (std::size_t i = 0; i < y.size(); ++i) {
      const double v = x.value()[i];
      y.value()[i] = v > 0.0 ? v : std::expm1(v);
    }
    t.record([xs = x.slot(), ys = y.slot()] {
      for (std::size_t i = 0; i < ys->grad.size(); ++i) {
        const double v = xs->value[i];
        xs->grad[i] += ys->grad[i] * (v > 0.0 ? 1.0 : std::exp(v));
      }
    });
  }
  return y;
}

Var sum_sq_diff(Tape& t, const Var& a, const Var& b) {
  require_same_shape(a, b, "sum_sq_diff");
  Var y = t.create({1});
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a.value()[i] - b.value()[i];
    acc += d * d;
  }
  y.value()[0] = acc;
  t.record([as = a.slot(), bs = b.slot(), ys = y.slot()] {
    const double g = ys->grad[0];
    for (std::size_t i = 0; i < as->value.size(); ++i) {
      const double d = 2.0 * (as->value[i] - bs->value[i]) * g;
      as->grad[i] += d;
      bs->grad[i] -= d;
    }
  });
  return y;
}

namespace {

// Copy-through op with an index permutation: y[i] = x[perm[i]].
Var permuted_copy(Tape& t, const Var& x, std::vector<std::size_t> shape,
                  std::vector<std::size_t> perm) {
  Var y = t.create(std::move(shape));
  for (std::size_t i = 0; i < perm.size(); ++i) y.value()[i] = x.value()[perm[i]];
  t.record([xs = x.slot(), ys = y.slot(), perm = std::move(perm)] {
    for (std::size_t i = 0; i < perm.size(); ++i)
      xs->grad[perm[i]] += ys->grad[i];
  });
  return y;
}

}  // namespace

Var reshape(Tape& t, const Var& x, const std::vector<std::size_t>& sample_shape) {
  if (x.shape().empty()) throw shape_error("reshape: missing batch dim");
  const std::size_t batch = x.shape()[0];
  std::vector<std::size_t> shape{batch};
  shape.insert(shape.end(), sample_shape.begin(), sample_shape.end());
  if (Array::count(shape) != x.size())
    throw shape_error("reshape: element count mismatch");
  Var y = t.create(shape);
  y.value() = x.value();
  t.record([xs = x.slot(), ys = y.slot()] {
    for (std::size_t i = 0; i < ys->grad.size(); ++i) xs->grad[i] += ys->grad[i];
  });
  return y;
}

Var flatten_feature_major(Tape& t, const Var& x) {
  if (x.shape().size() != 3) throw shape_error("flatten: expect (B,N,F)");
  const std::size_t batch = x.shape()[0], n = x.shape()[1], f = x.shape()[2];
  std::vector<std::size_t> perm(batch * n * f);
  std::size_t o = 0;
  for (std::size_t s = 0; s < batch; ++s)
    for (std::size_t j = 0; j < f; ++j)
      for (std::size_t i = 0; i < n; ++i) perm[o++] = (s * n + i) * f + j;
  return permuted_copy(t, x, {batch, f * n}, std::move(perm));
}

Var unflatten_feature_major(Tape& t, const Var& x, std::size_t n_nodes,
                            std::size_t n_features) {
  if (x.shape().size() != 2 || x.shape()[1] != n_nodes * n_features)
    throw shape_error("unflatten: expect (B, F*N)");
  const std::size_t batch = x.shape()[0];
  std::vector<std::size_t> perm(batch * n_nodes * n_features);
  std::size_t o = 0;
  for (std::size_t s = 0; s < batch; ++s)
    for (std::size_t i = 0; i < n_nodes; ++i)
      for (std::size_t j = 0; j < n_features; ++j)
        perm[o++] = (s * n_features + j) * n_nodes + i;
  return permuted_copy(t, x, {batch, n_nodes, n_features}, std::move(perm));
}

Var resize_segments(Tape& t, const Var& x, std::size_t n_seg,
                    std::size_t in_len, std::size_t out_len) {
  if (x.shape().size() != 2 || x.shape()[1] != n_seg * in_len)
    throw shape_error("resize_segments: expect (B, n_seg*in_len)");
  const std::size_t batch = x.shape()[0];
  Var y = t.create({batch, n_seg * out_len});
  const std::size_t keep = std::min(in_len, out_len);
  for (std::size_t s = 0; s < batch; ++s)
    for (std::size_t g = 0; g < n_seg; ++g) {
      const double* src = x.value().data() + (s * n_seg + g) * in_len;
      double* dst = y.value().data() + (s * n_seg + g) * out_len;
      std::copy(src, src + keep, dst);
    }
  t.record([xs = x.slot(), ys = y.slot(), batch, n_seg, in_len, out_len, keep] {
    for (std::size_t s = 0; s < batch; ++s)
      for (std::size_t g = 0; g < n_seg; ++g) {
        double* src = xs->grad.data() + (s * n_seg + g) * in_len;
        const double* dst = ys->grad.data() + (s * n_seg + g) * out_len;
        for (std::size_t i = 0; i < keep; ++i) src[i] += dst[i];
      }
  });
  return y;
}

Adam::Adam(std::vector<Var> params, AdamConfig cfg)
    : params_(std::move(params)), cfg_(cfg) {
  m_.reserve(params_.size());
  v_.reserve(params_.size());
  for (const Var& p : params_) {
    m_.emplace_back(p.size(), 0.0);
    v_.emplace_back(p.size(), 0.0);
  }
}

void Adam::step() {
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, double(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, double(t_));
  for (std::size_t k = 0; k < params_.size(); ++k) {
    auto& p = params_[k].value();
    const auto& g = params_[k].grad();
    auto& m = m_[k];
    auto& v = v_[k];
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (std::isnan(g[i])) throw divergence_error("adam: NaN gradient");
      m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g[i];
      v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g[i] * g[i];
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      p[i] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
    }
  }
}

void glorot_fill(Var& w, std::size_t fan_in, std::size_t fan_out,
                 Xoshiro256ss& rng) {
  const double bound = std::sqrt(6.0 / double(fan_in + fan_out));
  for (double& v : w.value()) v = rng.uniform(-bound, bound);
}

}  // namespace romforge
