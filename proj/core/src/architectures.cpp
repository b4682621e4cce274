#include "romforge/architectures.hpp"

#include <cmath>

#include "romforge/errors.hpp"

namespace romforge {

std::string arch_name(ArchKind k) {
  switch (k) {
    case ArchKind::fcnn: return "fcnn";
    case ArchKind::cnn: return "cnn";
    case ArchKind::gcnn: return "gcnn";
  }
  throw config_error("unknown architecture kind");
}

ArchKind arch_from_name(const std::string& name) {
  if (name == "fcnn") return ArchKind::fcnn;
  if (name == "cnn") return ArchKind::cnn;
  if (name == "gcnn") return ArchKind::gcnn;
  throw config_error("unknown architecture: " + name);
}

void ArchitectureSpec::validate() const {
  if (latent < 1) throw config_error("architecture: latent dim must be >= 1");
  if (n_nodes < 1 || n_features < 1)
    throw config_error("architecture: sample dims must be >= 1");
  if (n_params < 1) throw config_error("architecture: n_params must be >= 1");
  if (predictor_layers() < 2)
    throw config_error("architecture: predictor needs >= 2 layers");
  if (kind == ArchKind::gcnn) {
    if (!graph) throw config_error("architecture: GCNN requires a graph");
    if (graph->n_nodes() != n_nodes)
      throw config_error("architecture: graph node count != n_nodes");
    if (depth < 1) throw config_error("architecture: GCNN depth must be >= 1");
  }
}

std::size_t fcnn_hidden_width(std::size_t flat_size) {
  if (flat_size == 256) return 64;
  const auto w = std::size_t(std::llround(double(flat_size) / 10.0));
  return w < 1 ? 1 : w;
}

std::size_t cnn_square_exponent(std::size_t feature_len) {
  std::size_t m = 0, p = 1;
  while (p < feature_len) {
    p *= 4;
    ++m;
  }
  return m;
}

namespace {

Network build_predictor(const ArchitectureSpec& spec, Xoshiro256ss& rng) {
  Network net;
  const std::size_t layers = spec.predictor_layers();
  const std::size_t width = 50;
  const Act final_act =
      spec.kind == ArchKind::gcnn ? Act::identity : Act::elu;
  std::size_t in = spec.n_params;
  for (std::size_t l = 0; l + 1 < layers; ++l) {
    net.layers.push_back(make_dense(in, width, rng));
    net.layers.push_back(ActivationLayer{Act::elu});
    in = width;
  }
  net.layers.push_back(make_dense(in, spec.latent, rng));
  if (final_act != Act::identity)
    net.layers.push_back(ActivationLayer{final_act});
  return net;
}

void build_fcnn(const ArchitectureSpec& spec, Xoshiro256ss& rng,
                Network& encoder, Network& decoder) {
  const std::size_t flat = spec.n_nodes * spec.n_features;
  const std::size_t hidden = fcnn_hidden_width(flat);

  encoder.layers.push_back(FlattenLayer{});
  encoder.layers.push_back(make_dense(flat, hidden, rng));
  encoder.layers.push_back(ActivationLayer{Act::elu});
  encoder.layers.push_back(make_batchnorm(hidden));
  encoder.layers.push_back(make_dense(hidden, spec.latent, rng));
  encoder.layers.push_back(ActivationLayer{Act::elu});

  decoder.layers.push_back(make_dense(spec.latent, hidden, rng));
  decoder.layers.push_back(ActivationLayer{Act::elu});
  decoder.layers.push_back(make_batchnorm(hidden));
  decoder.layers.push_back(make_dense(hidden, flat, rng));
  decoder.layers.push_back(ActivationLayer{Act::elu});
  decoder.layers.push_back(UnflattenLayer{spec.n_nodes, spec.n_features});
}

void build_cnn(const ArchitectureSpec& spec, Xoshiro256ss& rng,
               Network& encoder, Network& decoder) {
  const std::size_t n_f = spec.n_features;
  const std::size_t m = cnn_square_exponent(spec.n_nodes);
  const std::size_t padded = std::size_t(1) << (2 * m);
  const std::size_t side = std::size_t(1) << m;

  // Channel/stride schedules as printed for the 16x16 case; larger squares
  // halve down to 4x4 with channels growing fourfold per layer.
  std::vector<std::size_t> channels{n_f};
  std::vector<std::size_t> strides;
  if (m == 4) {
    for (std::size_t c : {8, 16, 32, 64}) channels.push_back(c * n_f);
    strides = {1, 2, 2, 2};
  } else {
    if (m < 3) throw config_error("cnn: sample too small for the conv stack");
    std::size_t c = n_f;
    for (std::size_t l = 0; l + 2 < m; ++l) {
      c *= 4;
      channels.push_back(c);
      strides.push_back(2);
    }
  }
  const std::size_t n_conv = strides.size();

  encoder.layers.push_back(FlattenLayer{});
  encoder.layers.push_back(ResizeSegmentsLayer{n_f, spec.n_nodes, padded});
  encoder.layers.push_back(ReshapeLayer{{n_f, side, side}});
  std::size_t h = side;
  for (std::size_t l = 0; l < n_conv; ++l) {
    encoder.layers.push_back(
        make_conv(channels[l], channels[l + 1], h, h, 5, strides[l], true, rng));
    encoder.layers.push_back(ActivationLayer{Act::elu});
    h = (h + strides[l] - 1) / strides[l];
  }
  const std::size_t flat = channels.back() * h * h;
  encoder.layers.push_back(ReshapeLayer{{flat}});
  encoder.layers.push_back(make_dense(flat, spec.latent, rng));
  encoder.layers.push_back(ActivationLayer{Act::elu});

  decoder.layers.push_back(make_dense(spec.latent, flat, rng));
  decoder.layers.push_back(ActivationLayer{Act::elu});
  decoder.layers.push_back(ReshapeLayer{{channels.back(), h, h}});
  // Transposed stack as printed: the 16x16 table keeps the widest channel
  // count for one extra layer, the generic table divides by four each step.
  std::vector<std::size_t> tc_out;
  for (std::size_t l = n_conv - 1; l >= 1; --l) tc_out.push_back(channels[l]);
  tc_out.push_back(n_f);
  if (m == 4) {
    tc_out.insert(tc_out.begin(), channels.back());
    tc_out.pop_back();
    tc_out.back() = n_f;
  }
  std::vector<std::size_t> tc_stride(strides.rbegin(), strides.rend());
  std::size_t cur_c = channels.back();
  for (std::size_t l = 0; l < n_conv; ++l) {
    decoder.layers.push_back(
        make_transposed_conv(cur_c, tc_out[l], h, h, 5, tc_stride[l], rng));
    decoder.layers.push_back(ActivationLayer{Act::elu});
    h *= tc_stride[l];
    cur_c = tc_out[l];
  }
  decoder.layers.push_back(ReshapeLayer{{n_f * padded}});
  decoder.layers.push_back(ResizeSegmentsLayer{n_f, padded, spec.n_nodes});
  decoder.layers.push_back(UnflattenLayer{spec.n_nodes, spec.n_features});
}

void build_gcnn(const ArchitectureSpec& spec, Xoshiro256ss& rng,
                Network& encoder, Network& decoder) {
  constexpr double alpha = 0.2;
  constexpr double theta = 1.5;
  const std::size_t n_f = spec.n_features;
  const std::size_t flat = spec.n_nodes * n_f;
  auto prop = std::make_shared<SparseProp>(propagation_csr(*spec.graph));
  encoder.prop = prop;
  decoder.prop = prop;

  for (std::size_t l = 1; l <= spec.depth; ++l) {
    const double beta = std::log(1.0 + theta / double(l));
    encoder.layers.push_back(make_gcn2(n_f, alpha, beta, rng));
  }
  encoder.layers.push_back(FlattenLayer{});
  encoder.layers.push_back(make_dense(flat, spec.latent, rng));

  decoder.layers.push_back(make_dense(spec.latent, flat, rng));
  decoder.layers.push_back(UnflattenLayer{spec.n_nodes, n_f});
  for (std::size_t l = 1; l <= spec.depth; ++l) {
    const double beta = std::log(1.0 + theta / double(spec.depth + l));
    decoder.layers.push_back(make_gcn2(n_f, alpha, beta, rng));
  }
}

}  // namespace

RomNetworks build_architecture(const ArchitectureSpec& spec, std::uint64_t seed) {
  spec.validate();
  Xoshiro256ss rng(seed);
  RomNetworks nets;
  nets.spec = spec;
  switch (spec.kind) {
    case ArchKind::fcnn:
      build_fcnn(spec, rng, nets.encoder, nets.decoder);
      break;
    case ArchKind::cnn:
      build_cnn(spec, rng, nets.encoder, nets.decoder);
      break;
    case ArchKind::gcnn:
      build_gcnn(spec, rng, nets.encoder, nets.decoder);
      break;
  }
  nets.predictor = build_predictor(spec, rng);
  return nets;
}

}  // namespace romforge
