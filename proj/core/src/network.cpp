#include <algorithm>

#include "romforge/errors.hpp"
#include "romforge/network.hpp"

namespace romforge {

Var Network::forward(Tape& t, const Var& x, bool training) {
  Var cur = x;
  Var anchor;
  bool prev_gcn = false;
  for (Layer& l : layers) {
    if (auto* g = std::get_if<Gcn2Layer>(&l)) {
      if (!prop) throw config_error("network: GCN2 layer without graph operator");
      if (!prev_gcn) anchor = cur;
      cur = gcn2_forward(t, *g, *prop, cur, anchor);
      prev_gcn = true;
      continue;
    }
    prev_gcn = false;
    if (auto* d = std::get_if<DenseLayer>(&l)) {
      cur = dense_forward(t, *d, cur);
    } else if (auto* a = std::get_if<ActivationLayer>(&l)) {
      cur = activation(t, a->kind, cur);
    } else if (auto* c = std::get_if<Conv2dLayer>(&l)) {
      cur = conv2d_forward(t, *c, cur);
    } else if (auto* bn = std::get_if<BatchNormLayer>(&l)) {
      cur = batchnorm_forward(t, *bn, cur, training);
    } else if (std::get_if<FlattenLayer>(&l)) {
      cur = flatten_feature_major(t, cur);
    } else if (auto* u = std::get_if<UnflattenLayer>(&l)) {
      cur = unflatten_feature_major(t, cur, u->n_nodes, u->n_features);
    } else if (auto* r = std::get_if<ResizeSegmentsLayer>(&l)) {
      cur = resize_segments(t, cur, r->n_seg, r->in_len, r->out_len);
    } else if (auto* rs = std::get_if<ReshapeLayer>(&l)) {
      cur = reshape(t, cur, rs->sample_shape);
    }
  }
  return cur;
}

std::vector<Var> Network::parameters() const {
  std::vector<Var> out;
  for (const Layer& l : layers) {
    if (auto* d = std::get_if<DenseLayer>(&l)) {
      out.push_back(d->w);
      out.push_back(d->b);
    } else if (auto* c = std::get_if<Conv2dLayer>(&l)) {
      out.push_back(c->kernel);
      out.push_back(c->bias);
    } else if (auto* g = std::get_if<Gcn2Layer>(&l)) {
      out.push_back(g->w);
    } else if (auto* bn = std::get_if<BatchNormLayer>(&l)) {
      out.push_back(bn->gamma);
      out.push_back(bn->beta);
    }
  }
  return out;
}

std::size_t Network::parameter_count() const {
  std::size_t n = 0;
  for (const Var& p : parameters()) n += p.size();
  return n;
}

std::vector<std::vector<double>> Network::save_state() const {
  std::vector<std::vector<double>> state;
  for (const Layer& l : layers) {
    if (auto* d = std::get_if<DenseLayer>(&l)) {
      state.push_back(d->w.value());
      state.push_back(d->b.value());
    } else if (auto* c = std::get_if<Conv2dLayer>(&l)) {
      state.push_back(c->kernel.value());
      state.push_back(c->bias.value());
    } else if (auto* g = std::get_if<Gcn2Layer>(&l)) {
      state.push_back(g->w.value());
    } else if (auto* bn = std::get_if<BatchNormLayer>(&l)) {
      state.push_back(bn->gamma.value());
      state.push_back(bn->beta.value());
      state.push_back(bn->running_mean);
      state.push_back(bn->running_var);
    }
  }
  return state;
}

void Network::load_state(const std::vector<std::vector<double>>& state) {
  std::size_t i = 0;
  auto take = [&](std::vector<double>& dst) {
    if (i >= state.size() || state[i].size() != dst.size())
      throw shape_error("network state mismatch");
    dst = state[i++];
  };
  for (Layer& l : layers) {
    if (auto* d = std::get_if<DenseLayer>(&l)) {
      take(d->w.value());
      take(d->b.value());
    } else if (auto* c = std::get_if<Conv2dLayer>(&l)) {
      take(c->kernel.value());
      take(c->bias.value());
    } else if (auto* g = std::get_if<Gcn2Layer>(&l)) {
      take(g->w.value());
    } else if (auto* bn = std::get_if<BatchNormLayer>(&l)) {
      take(bn->gamma.value());
      take(bn->beta.value());
      take(bn->running_mean);
      take(bn->running_var);
    }
  }
  if (i != state.size()) throw shape_error("network state has extra blobs");
}

}  // namespace romforge
