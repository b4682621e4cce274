#include <algorithm>
#include <cmath>

#include "romforge/errors.hpp"
#include "romforge/network.hpp"

namespace romforge {

ConvGeom ConvGeom::make(std::size_t c_in, std::size_t c_out, std::size_t h_in,
                        std::size_t w_in, std::size_t kh, std::size_t kw,
                        std::size_t stride, bool same) {
  if (c_in == 0 || c_out == 0 || h_in == 0 || w_in == 0 || kh == 0 || kw == 0)
    throw shape_error("conv: zero dimension");
  if (stride == 0) throw shape_error("conv: stride must be >= 1");
  ConvGeom g{c_in, c_out, h_in, w_in, kh, kw, stride, same};
  if (same) {
    if (kh % 2 == 0 || kw % 2 == 0)
      throw shape_error("conv: SAME padding requires odd kernel dims");
    g.h_out = (h_in + stride - 1) / stride;
    g.w_out = (w_in + stride - 1) / stride;
    const std::size_t need_h = (g.h_out - 1) * stride + kh;
    const std::size_t need_w = (g.w_out - 1) * stride + kw;
    g.pad_h = need_h > h_in ? (need_h - h_in) / 2 : 0;
    g.pad_w = need_w > w_in ? (need_w - w_in) / 2 : 0;
  } else {
    if (h_in < kh || w_in < kw)
      throw shape_error("conv: kernel larger than VALID input");
    g.h_out = 1 + (h_in - kh) / stride;
    g.w_out = 1 + (w_in - kw) / stride;
  }
  return g;
}

namespace {

// Enumerates every (output, input, kernel) offset triple of the reference
// convolution y^a_b = sum_{gamma,delta} x_{(s*a+gamma, s*b+delta)}
// w_{(L-1-gamma, M-1-delta)}, padded input coordinates mapped back to the
// unpadded array and out-of-range taps skipped.  Offsets are per-sample.
template <class F>
void for_each_conv_pair(const ConvGeom& g, F&& fn) {
  for (std::size_t co = 0; co < g.c_out; ++co)
    for (std::size_t ci = 0; ci < g.c_in; ++ci)
      for (std::size_t a = 0; a < g.h_out; ++a)
        for (std::size_t b = 0; b < g.w_out; ++b) {
          const std::size_t y_off = (co * g.h_out + a) * g.w_out + b;
          for (std::size_t gam = 0; gam < g.kh; ++gam) {
            const long r = long(a * g.stride + gam) - long(g.pad_h);
            if (r < 0 || r >= long(g.h_in)) continue;
            for (std::size_t del = 0; del < g.kw; ++del) {
              const long c = long(b * g.stride + del) - long(g.pad_w);
              if (c < 0 || c >= long(g.w_in)) continue;
              const std::size_t x_off =
                  (ci * g.h_in + std::size_t(r)) * g.w_in + std::size_t(c);
              const std::size_t k_off =
                  ((co * g.c_in + ci) * g.kh + (g.kh - 1 - gam)) * g.kw +
                  (g.kw - 1 - del);
              fn(y_off, x_off, k_off);
            }
          }
        }
}

void check_batched_shape(const Var& x, const std::vector<std::size_t>& rest,
                         const char* op) {
  if (x.shape().size() != rest.size() + 1)
    throw shape_error(std::string(op) + ": rank mismatch");
  for (std::size_t i = 0; i < rest.size(); ++i)
    if (x.shape()[i + 1] != rest[i])
      throw shape_error(std::string(op) + ": dimension mismatch");
}

}  // namespace

Var dense_forward(Tape& t, const DenseLayer& l, const Var& x) {
  const std::size_t out = l.w.shape()[0], in = l.w.shape()[1];
  check_batched_shape(x, {in}, "dense");
  const std::size_t batch = x.shape()[0];
  Var y = t.create({batch, out});
  const double* wv = l.w.value().data();
  const double* bv = l.b.value().data();
  for (std::size_t s = 0; s < batch; ++s) {
    const double* xs = x.value().data() + s * in;
    double* ys = y.value().data() + s * out;
    for (std::size_t o = 0; o < out; ++o) {
      const double* wo = wv + o * in;
      double acc = bv[o];
      for (std::size_t i = 0; i < in; ++i) acc += wo[i] * xs[i];
      ys[o] = acc;
    }
  }
  t.record([xs = x.slot(), ys = y.slot(), ws = l.w.slot(), bs = l.b.slot(),
            batch, in, out] {
    const double* wv = ws->value.data();
    for (std::size_t s = 0; s < batch; ++s) {
      const double* xv = xs->value.data() + s * in;
      const double* gy = ys->grad.data() + s * out;
      double* gx = xs->grad.data() + s * in;
      for (std::size_t o = 0; o < out; ++o) {
        const double g = gy[o];
        if (g == 0.0) continue;
        const double* wo = wv + o * in;
        double* gw = ws->grad.data() + o * in;
        for (std::size_t i = 0; i < in; ++i) {
          gx[i] += g * wo[i];
          gw[i] += g * xv[i];
        }
        bs->grad[o] += g;
      }
    }
  });
  return y;
}

Var conv2d_forward(Tape& t, const Conv2dLayer& l, const Var& x) {
  const ConvGeom& g = l.geom;
  const std::vector<std::size_t> in_shape =
      l.transposed ? std::vector<std::size_t>{g.c_out, g.h_out, g.w_out}
                   : std::vector<std::size_t>{g.c_in, g.h_in, g.w_in};
  const std::vector<std::size_t> out_shape =
      l.transposed ? std::vector<std::size_t>{g.c_in, g.h_in, g.w_in}
                   : std::vector<std::size_t>{g.c_out, g.h_out, g.w_out};
  check_batched_shape(x, in_shape, l.transposed ? "conv2d_t" : "conv2d");
  const std::size_t batch = x.shape()[0];
  const std::size_t in_sz = Array::count(in_shape);
  const std::size_t out_sz = Array::count(out_shape);

  Var y = t.create({batch, out_shape[0], out_shape[1], out_shape[2]});
  const double* kv = l.kernel.value().data();
  const double* bv = l.bias.value().data();
  const std::size_t ch_stride = out_shape[1] * out_shape[2];
  for (std::size_t s = 0; s < batch; ++s) {
    const double* xv = x.value().data() + s * in_sz;
    double* yv = y.value().data() + s * out_sz;
    for (std::size_t c = 0; c < out_shape[0]; ++c)
      std::fill(yv + c * ch_stride, yv + (c + 1) * ch_stride, bv[c]);
    if (!l.transposed) {
      for_each_conv_pair(g, [&](std::size_t yo, std::size_t xo, std::size_t ko) {
        yv[yo] += xv[xo] * kv[ko];
      });
    } else {
      for_each_conv_pair(g, [&](std::size_t yo, std::size_t xo, std::size_t ko) {
        yv[xo] += xv[yo] * kv[ko];
      });
    }
  }
  t.record([xs = x.slot(), ys = y.slot(), ks = l.kernel.slot(),
            bs = l.bias.slot(), g, transposed = l.transposed, batch, in_sz,
            out_sz, n_out_ch = out_shape[0], ch_stride] {
    const double* kv = ks->value.data();
    for (std::size_t s = 0; s < batch; ++s) {
      const double* xv = xs->value.data() + s * in_sz;
      double* gx = xs->grad.data() + s * in_sz;
      const double* gy = ys->grad.data() + s * out_sz;
      double* gk = ks->grad.data();
      if (!transposed) {
        for_each_conv_pair(g, [&](std::size_t yo, std::size_t xo, std::size_t ko) {
          gx[xo] += gy[yo] * kv[ko];
          gk[ko] += gy[yo] * xv[xo];
        });
      } else {
        for_each_conv_pair(g, [&](std::size_t yo, std::size_t xo, std::size_t ko) {
          gx[yo] += gy[xo] * kv[ko];
          gk[ko] += gy[xo] * xv[yo];
        });
      }
      for (std::size_t c = 0; c < n_out_ch; ++c) {
        double acc = 0.0;
        for (std::size_t i = 0; i < ch_stride; ++i)
          acc += gy[c * ch_stride + i];
        bs->grad[c] += acc;
      }
    }
  });
  return y;
}

namespace {

// y (n x f) += P x (n x f), CSR apply per feature column.
void prop_apply(const SparseProp& p, const double* x, double* y, std::size_t f) {
  for (std::size_t v = 0; v < p.n; ++v) {
    double* yv = y + v * f;
    for (std::size_t k = p.row_ptr[v]; k < p.row_ptr[v + 1]; ++k) {
      const double w = p.vals[k];
      const double* xu = x + p.cols[k] * f;
      for (std::size_t j = 0; j < f; ++j) yv[j] += w * xu[j];
    }
  }
}

}  // namespace

SparseProp propagation_csr(const Graph& g) {
  SparseProp p;
  p.n = g.n_nodes();
  p.row_ptr.assign(1, 0);
  std::vector<double> dinv(p.n);
  for (std::size_t v = 0; v < p.n; ++v) dinv[v] = 1.0 / std::sqrt(g.degree(v) + 1.0);
  for (std::size_t v = 0; v < p.n; ++v) {
    bool diag_done = false;
    for (std::size_t k = g.row_ptr()[v]; k < g.row_ptr()[v + 1]; ++k) {
      const std::size_t u = g.col_index()[k];
      if (!diag_done && u > v) {
        p.cols.push_back(v);
        p.vals.push_back(dinv[v] * dinv[v]);
        diag_done = true;
      }
      p.cols.push_back(u);
      p.vals.push_back(dinv[v] * g.weights()[k] * dinv[u]);
    }
    if (!diag_done) {
      p.cols.push_back(v);
      p.vals.push_back(dinv[v] * dinv[v]);
    }
    p.row_ptr.push_back(p.cols.size());
  }
  return p;
}

Var gcn2_forward(Tape& t, const Gcn2Layer& l, const SparseProp& p, const Var& x,
                 const Var& x0) {
  if (x.shape() != x0.shape()) throw shape_error("gcn2: x/x0 shape mismatch");
  const std::size_t f = l.w.shape()[0];
  check_batched_shape(x, {p.n, f}, "gcn2");
  const std::size_t batch = x.shape()[0];
  const std::size_t sample = p.n * f;

  // T = (1-beta) I + beta W.
  std::vector<double> tmat(f * f);
  for (std::size_t i = 0; i < f; ++i)
    for (std::size_t j = 0; j < f; ++j)
      tmat[i * f + j] =
          l.beta * l.w.value()[i * f + j] + (i == j ? 1.0 - l.beta : 0.0);

  auto mbuf = std::make_shared<std::vector<double>>(batch * sample, 0.0);
  Var y = t.create(x.shape());
  for (std::size_t s = 0; s < batch; ++s) {
    double* m = mbuf->data() + s * sample;
    prop_apply(p, x.value().data() + s * sample, m, f);
    const double* x0v = x0.value().data() + s * sample;
    for (std::size_t i = 0; i < sample; ++i)
      m[i] = (1.0 - l.alpha) * m[i] + l.alpha * x0v[i];
    double* yv = y.value().data() + s * sample;
    for (std::size_t v = 0; v < p.n; ++v)
      for (std::size_t j = 0; j < f; ++j) {
        double acc = 0.0;
        for (std::size_t i = 0; i < f; ++i) acc += m[v * f + i] * tmat[i * f + j];
        yv[v * f + j] = acc > 0.0 ? acc : 0.0;
      }
  }
  t.record([xs = x.slot(), x0s = x0.slot(), ys = y.slot(), ws = l.w.slot(),
            mbuf, tmat, p, alpha = l.alpha, beta = l.beta, batch, f, sample] {
    std::vector<double> dm(sample);
    std::vector<double> dz(sample);
    for (std::size_t s = 0; s < batch; ++s) {
      const double* m = mbuf->data() + s * sample;
      const double* yv = ys->value.data() + s * sample;
      const double* gy = ys->grad.data() + s * sample;
      for (std::size_t i = 0; i < sample; ++i)
        dz[i] = yv[i] > 0.0 ? gy[i] : 0.0;
      // dT accumulated straight into dW (scaled by beta); dm = dz T^T.
      for (std::size_t i = 0; i < f; ++i)
        for (std::size_t j = 0; j < f; ++j) {
          double acc = 0.0;
          for (std::size_t v = 0; v < p.n; ++v)
            acc += m[v * f + i] * dz[v * f + j];
          ws->grad[i * f + j] += beta * acc;
        }
      std::fill(dm.begin(), dm.end(), 0.0);
      for (std::size_t v = 0; v < p.n; ++v)
        for (std::size_t i = 0; i < f; ++i) {
          double acc = 0.0;
          for (std::size_t j = 0; j < f; ++j)
            acc += dz[v * f + j] * tmat[i * f + j];
          dm[v * f + i] = acc;
        }
      double* gx0 = x0s->grad.data() + s * sample;
      for (std::size_t i = 0; i < sample; ++i) gx0[i] += alpha * dm[i];
      // P is symmetric, so the adjoint of prop_apply is itself.
      std::vector<double> scaled(sample);
      for (std::size_t i = 0; i < sample; ++i) scaled[i] = (1.0 - alpha) * dm[i];
      prop_apply(p, scaled.data(), xs->grad.data() + s * sample, f);
    }
  });
  return y;
}

Var gcn1_forward(Tape& t, const Var& w, const SparseProp& p, const Var& x) {
  const std::size_t f = w.shape()[0];
  check_batched_shape(x, {p.n, f}, "gcn1");
  const std::size_t batch = x.shape()[0];
  const std::size_t sample = p.n * f;
  auto mbuf = std::make_shared<std::vector<double>>(batch * sample, 0.0);
  Var y = t.create(x.shape());
  for (std::size_t s = 0; s < batch; ++s) {
    double* m = mbuf->data() + s * sample;
    prop_apply(p, x.value().data() + s * sample, m, f);
    double* yv = y.value().data() + s * sample;
    for (std::size_t v = 0; v < p.n; ++v)
      for (std::size_t j = 0; j < f; ++j) {
        double acc = 0.0;
        for (std::size_t i = 0; i < f; ++i)
          acc += m[v * f + i] * w.value()[i * f + j];
        yv[v * f + j] = acc > 0.0 ? acc : 0.0;
      }
  }
  t.record([xs = x.slot(), ys = y.slot(), ws = w.slot(), mbuf, p, batch, f,
            sample] {
    std::vector<double> dm(sample);
    std::vector<double> dz(sample);
    for (std::size_t s = 0; s < batch; ++s) {
      const double* m = mbuf->data() + s * sample;
      const double* yv = ys->value.data() + s * sample;
      const double* gy = ys->grad.data() + s * sample;
      for (std::size_t i = 0; i < sample; ++i)
        dz[i] = yv[i] > 0.0 ? gy[i] : 0.0;
      for (std::size_t i = 0; i < f; ++i)
        for (std::size_t j = 0; j < f; ++j) {
          double acc = 0.0;
          for (std::size_t v = 0; v < p.n; ++v)
            acc += m[v * f + i] * dz[v * f + j];
          ws->grad[i * f + j] += acc;
        }
      std::fill(dm.begin(), dm.end(), 0.0);
      for (std::size_t v = 0; v < p.n; ++v)
        for (std::size_t i = 0; i < f; ++i) {
          double acc = 0.0;
          for (std::size_t j = 0; j < f; ++j)
            acc += dz[v * f + j] * ws->value[i * f + j];
          dm[v * f + i] = acc;
        }
      prop_apply(p, dm.data(), xs->grad.data() + s * sample, f);
    }
  });
  return y;
}

Var batchnorm_forward(Tape& t, BatchNormLayer& l, const Var& x, bool training) {
  const std::size_t f = l.gamma.size();
  check_batched_shape(x, {f}, "batchnorm");
  const std::size_t batch = x.shape()[0];
  Var y = t.create(x.shape());

  if (training) {
    if (batch < 2) throw config_error("batchnorm: train mode needs batch >= 2");
    auto mean = std::make_shared<std::vector<double>>(f, 0.0);
    auto inv_std = std::make_shared<std::vector<double>>(f, 0.0);
    std::vector<double> var(f, 0.0);
    for (std::size_t s = 0; s < batch; ++s)
      for (std::size_t j = 0; j < f; ++j) (*mean)[j] += x.value()[s * f + j];
    for (std::size_t j = 0; j < f; ++j) (*mean)[j] /= double(batch);
    for (std::size_t s = 0; s < batch; ++s)
      for (std::size_t j = 0; j < f; ++j) {
        const double d = x.value()[s * f + j] - (*mean)[j];
        var[j] += d * d;
      }
    for (std::size_t j = 0; j < f; ++j) {
      var[j] /= double(batch);
      (*inv_std)[j] = 1.0 / std::sqrt(var[j] + l.eps);
      l.running_mean[j] = (1.0 - l.momentum) * l.running_mean[j] + l.momentum * (*mean)[j];
      l.running_var[j] = (1.0 - l.momentum) * l.running_var[j] + l.momentum * var[j];
    }
    for (std::size_t s = 0; s < batch; ++s)
      for (std::size_t j = 0; j < f; ++j) {
        const double xh = (x.value()[s * f + j] - (*mean)[j]) * (*inv_std)[j];
        y.value()[s * f + j] = l.gamma.value()[j] * xh + l.beta.value()[j];
      }
    t.record([xs = x.slot(), ys = y.slot(), gs = l.gamma.slot(),
              bs = l.beta.slot(), mean, inv_std, batch, f] {
      const double inv_b = 1.0 / double(batch);
      for (std::size_t j = 0; j < f; ++j) {
        const double mu = (*mean)[j], is = (*inv_std)[j];
        const double gamma = gs->value[j];
        double sum_dy = 0.0, sum_dy_xh = 0.0, sum_dxh_xc = 0.0;
        for (std::size_t s = 0; s < batch; ++s) {
          const double dy = ys->grad[s * f + j];
          const double xc = xs->value[s * f + j] - mu;
          sum_dy += dy;
          sum_dy_xh += dy * xc * is;
          sum_dxh_xc += dy * gamma * xc;
        }
        gs->grad[j] += sum_dy_xh;
        bs->grad[j] += sum_dy;
        const double dvar = sum_dxh_xc * (-0.5) * is * is * is;
        double dmean = -sum_dy * gamma * is;
        // The mean also moves the centered values; with exact arithmetic
        // the correction sums to zero but it is kept for gradient fidelity.
        double sum_xc = 0.0;
        for (std::size_t s = 0; s < batch; ++s)
          sum_xc += xs->value[s * f + j] - mu;
        dmean += dvar * (-2.0) * inv_b * sum_xc;
        for (std::size_t s = 0; s < batch; ++s) {
          const double dy = ys->grad[s * f + j];
          const double xc = xs->value[s * f + j] - mu;
          xs->grad[s * f + j] +=
              dy * gamma * is + dvar * 2.0 * xc * inv_b + dmean * inv_b;
        }
      }
    });
    return y;
  }

  auto rinv = std::make_shared<std::vector<double>>(f);
  for (std::size_t j = 0; j < f; ++j)
    (*rinv)[j] = 1.0 / std::sqrt(l.running_var[j] + l.eps);
  auto rmean = std::make_shared<std::vector<double>>(l.running_mean);
  for (std::size_t s = 0; s < batch; ++s)
    for (std::size_t j = 0; j < f; ++j) {
      const double xh = (x.value()[s * f + j] - (*rmean)[j]) * (*rinv)[j];
      y.value()[s * f + j] = l.gamma.value()[j] * xh + l.beta.value()[j];
    }
  t.record([xs = x.slot(), ys = y.slot(), gs = l.gamma.slot(),
            bs = l.beta.slot(), rinv, rmean, batch, f] {
    for (std::size_t s = 0; s < batch; ++s)
      for (std::size_t j = 0; j < f; ++j) {
        const double dy = ys->grad[s * f + j];
        const double xh = (xs->value[s * f + j] - (*rmean)[j]) * (*rinv)[j];
        xs->grad[s * f + j] += dy * gs->value[j] * (*rinv)[j];
        gs->grad[j] += dy * xh;
        bs->grad[j] += dy;
      }
  });
  return y;
}

DenseLayer make_dense(std::size_t in, std::size_t out, Xoshiro256ss& rng) {
  DenseLayer l{Var::zeros_like({out, in}), Var::zeros_like({out})};
  glorot_fill(l.w, in, out, rng);
  return l;
}

Conv2dLayer make_conv(std::size_t c_in, std::size_t c_out, std::size_t h_in,
                      std::size_t w_in, std::size_t k, std::size_t stride,
                      bool same, Xoshiro256ss& rng) {
  Conv2dLayer l;
  l.geom = ConvGeom::make(c_in, c_out, h_in, w_in, k, k, stride, same);
  l.kernel = Var::zeros_like({c_out, c_in, k, k});
  l.bias = Var::zeros_like({c_out});
  l.transposed = false;
  glorot_fill(l.kernel, c_in * k * k, c_out * k * k, rng);
  return l;
}

Conv2dLayer make_transposed_conv(std::size_t c_in, std::size_t c_out,
                                 std::size_t h_in, std::size_t w_in,
                                 std::size_t k, std::size_t stride,
                                 Xoshiro256ss& rng) {
  Conv2dLayer l;
  // Reference conv runs (c_out, stride*h, stride*w) -> (c_in, h, w); this
  // layer computes its adjoint, so output spatial dims are stride*input.
  l.geom = ConvGeom::make(c_out, c_in, stride * h_in, stride * w_in, k, k,
                          stride, true);
  if (l.geom.h_out != h_in || l.geom.w_out != w_in)
    throw shape_error("transposed conv: geometry does not invert");
  l.kernel = Var::zeros_like({c_in, c_out, k, k});
  l.bias = Var::zeros_like({c_out});
  l.transposed = true;
  glorot_fill(l.kernel, c_in * k * k, c_out * k * k, rng);
  return l;
}

Gcn2Layer make_gcn2(std::size_t n_features, double alpha, double beta,
                    Xoshiro256ss& rng) {
  Gcn2Layer l;
  l.w = Var::zeros_like({n_features, n_features});
  l.alpha = alpha;
  l.beta = beta;
  glorot_fill(l.w, n_features, n_features, rng);
  return l;
}

BatchNormLayer make_batchnorm(std::size_t features) {
  BatchNormLayer l;
  l.gamma = Var::leaf({features}, std::vector<double>(features, 1.0));
  l.beta = Var::zeros_like({features});
  l.running_mean.assign(features, 0.0);
  l.running_var.assign(features, 1.0);
  return l;
}

}  // namespace romforge
