#include <doctest.h>

#include <cmath>
#include <memory>
#include <vector>

#include "romforge/architectures.hpp"
#include "romforge/errors.hpp"
#include "test_support.hpp"

using namespace romforge;

namespace {

struct ConvRow {
  std::size_t in_c, in_h, out_c, out_h, stride;
  bool transposed;
};

std::vector<ConvRow> conv_rows(const Network& net) {
  std::vector<ConvRow> rows;
  for (const Layer& l : net.layers)
    if (const auto* c = std::get_if<Conv2dLayer>(&l)) {
      ConvRow r;
      r.stride = c->geom.stride;
      r.transposed = c->transposed;
      r.in_c = c->in_channels();
      r.out_c = c->out_channels();
      if (c->transposed) {
        r.in_h = c->geom.h_out;
        r.out_h = c->geom.h_in;
      } else {
        r.in_h = c->geom.h_in;
        r.out_h = c->geom.h_out;
      }
      rows.push_back(r);
    }
  return rows;
}

template <typename T>
std::size_t count_layers(const Network& net) {
  std::size_t n = 0;
  for (const Layer& l : net.layers)
    if (std::holds_alternative<T>(l)) ++n;
  return n;
}

Var random_input(const ArchitectureSpec& spec, std::size_t batch,
                 Xoshiro256ss& rng) {
  std::vector<double> data(batch * spec.n_nodes * spec.n_features);
  for (double& v : data) v = rng.uniform(0.0, 1.0);
  return Var::leaf({batch, spec.n_nodes, spec.n_features}, std::move(data));
}

}  // namespace

TEST_CASE("hidden width rule for the dense autoencoder") {
  CHECK(fcnn_hidden_width(256) == 64);
  CHECK(fcnn_hidden_width(2145) == 215);  // round(214.5) away from zero
  CHECK(fcnn_hidden_width(100) == 10);
  CHECK(fcnn_hidden_width(16) == 2);
}

TEST_CASE("square reshape exponent") {
  CHECK(cnn_square_exponent(256) == 4);
  CHECK(cnn_square_exponent(2145) == 6);
  CHECK(cnn_square_exponent(17) == 3);
  CHECK(cnn_square_exponent(1) == 0);
  CHECK(cnn_square_exponent(64) == 3);
}

TEST_CASE("fcnn parameter count on the reference problem") {
  ArchitectureSpec spec;
  spec.kind = ArchKind::fcnn;
  spec.latent = 10;
  spec.n_nodes = 256;
  RomNetworks nets = build_architecture(spec, 1);
  // Encoder: 256*64+64 dense, 2*64 batchnorm, 64*10+10 dense.
  CHECK(nets.encoder.parameter_count() == 17226);
  // Decoder: 10*64+64, 2*64, 64*256+256.
  CHECK(nets.decoder.parameter_count() == 17472);
  // Predictor: 3->50->50->50->10 dense chain.
  CHECK(nets.predictor.parameter_count() == 5810);
  CHECK(nets.encoder.parameter_count() + nets.decoder.parameter_count() +
            nets.predictor.parameter_count() ==
        40508);
}

TEST_CASE("fcnn layer sequence and shapes") {
  ArchitectureSpec spec;
  spec.kind = ArchKind::fcnn;
  spec.latent = 10;
  spec.n_nodes = 256;
  RomNetworks nets = build_architecture(spec, 3);

  REQUIRE(nets.encoder.layers.size() == 6);
  CHECK(std::holds_alternative<FlattenLayer>(nets.encoder.layers[0]));
  CHECK(std::holds_alternative<DenseLayer>(nets.encoder.layers[1]));
  CHECK(std::holds_alternative<ActivationLayer>(nets.encoder.layers[2]));
  CHECK(std::holds_alternative<BatchNormLayer>(nets.encoder.layers[3]));
  CHECK(std::holds_alternative<DenseLayer>(nets.encoder.layers[4]));
  CHECK(std::holds_alternative<ActivationLayer>(nets.encoder.layers[5]));
  CHECK(std::get<ActivationLayer>(nets.encoder.layers[2]).kind == Act::elu);

  REQUIRE(nets.decoder.layers.size() == 6);
  CHECK(std::holds_alternative<DenseLayer>(nets.decoder.layers[0]));
  CHECK(std::holds_alternative<UnflattenLayer>(nets.decoder.layers[5]));

  // Predictor ends with an elu activation for the dense architecture.
  CHECK(std::holds_alternative<ActivationLayer>(nets.predictor.layers.back()));
  CHECK(count_layers<DenseLayer>(nets.predictor) == 4);

  Xoshiro256ss rng(9);
  Tape t;
  Var x = random_input(spec, 4, rng);
  Var z = nets.encoder.forward(t, x, true);
  CHECK(z.shape() == std::vector<std::size_t>{4, 10});
  Var back = nets.decoder.forward(t, z, true);
  CHECK(back.shape() == std::vector<std::size_t>{4, 256, 1});
  Var p = Var::leaf({4, 3}, std::vector<double>(12, 0.5));
  Var zp = nets.predictor.forward(t, p, true);
  CHECK(zp.shape() == std::vector<std::size_t>{4, 10});
}

TEST_CASE("cnn conv chains on the 256-node problem") {
  ArchitectureSpec spec;
  spec.kind = ArchKind::cnn;
  spec.latent = 10;
  spec.n_nodes = 256;
  RomNetworks nets = build_architecture(spec, 5);

  const std::vector<ConvRow> enc = conv_rows(nets.encoder);
  REQUIRE(enc.size() == 4);
  const ConvRow enc_want[4] = {{1, 16, 8, 16, 1, false},
                               {8, 16, 16, 8, 2, false},
                               {16, 8, 32, 4, 2, false},
                               {32, 4, 64, 2, 2, false}};
  for (int i = 0; i < 4; ++i) {
    CHECK(enc[i].in_c == enc_want[i].in_c);
    CHECK(enc[i].in_h == enc_want[i].in_h);
    CHECK(enc[i].out_c == enc_want[i].out_c);
    CHECK(enc[i].out_h == enc_want[i].out_h);
    CHECK(enc[i].stride == enc_want[i].stride);
    CHECK_FALSE(enc[i].transposed);
  }

  const std::vector<ConvRow> dec = conv_rows(nets.decoder);
  REQUIRE(dec.size() == 4);
  const ConvRow dec_want[4] = {{64, 2, 64, 4, 2, true},
                               {64, 4, 32, 8, 2, true},
                               {32, 8, 16, 16, 2, true},
                               {16, 16, 1, 16, 1, true}};
  for (int i = 0; i < 4; ++i) {
    CHECK(dec[i].in_c == dec_want[i].in_c);
    CHECK(dec[i].in_h == dec_want[i].in_h);
    CHECK(dec[i].out_c == dec_want[i].out_c);
    CHECK(dec[i].out_h == dec_want[i].out_h);
    CHECK(dec[i].stride == dec_want[i].stride);
    CHECK(dec[i].transposed);
  }

  Xoshiro256ss rng(2);
  Tape t;
  Var x = random_input(spec, 2, rng);
  Var z = nets.encoder.forward(t, x, true);
  CHECK(z.shape() == std::vector<std::size_t>{2, 10});
  Var back = nets.decoder.forward(t, z, true);
  CHECK(back.shape() == std::vector<std::size_t>{2, 256, 1});
}

TEST_CASE("cnn conv chains on a 2145-node problem") {
  ArchitectureSpec spec;
  spec.kind = ArchKind::cnn;
  spec.latent = 10;
  spec.n_nodes = 2145;
  RomNetworks nets = build_architecture(spec, 5);

  const std::vector<ConvRow> enc = conv_rows(nets.encoder);
  REQUIRE(enc.size() == 4);
  const ConvRow enc_want[4] = {{1, 64, 4, 32, 2, false},
                               {4, 32, 16, 16, 2, false},
                               {16, 16, 64, 8, 2, false},
                               {64, 8, 256, 4, 2, false}};
  for (int i = 0; i < 4; ++i) {
    CHECK(enc[i].in_c == enc_want[i].in_c);
    CHECK(enc[i].in_h == enc_want[i].in_h);
    CHECK(enc[i].out_c == enc_want[i].out_c);
    CHECK(enc[i].out_h == enc_want[i].out_h);
    CHECK(enc[i].stride == 2);
  }

  const std::vector<ConvRow> dec = conv_rows(nets.decoder);
  REQUIRE(dec.size() == 4);
  const ConvRow dec_want[4] = {{256, 4, 64, 8, 2, true},
                               {64, 8, 16, 16, 2, true},
                               {16, 16, 4, 32, 2, true},
                               {4, 32, 1, 64, 2, true}};
  for (int i = 0; i < 4; ++i) {
    CHECK(dec[i].in_c == dec_want[i].in_c);
    CHECK(dec[i].out_c == dec_want[i].out_c);
    CHECK(dec[i].out_h == dec_want[i].out_h);
  }

  Xoshiro256ss rng(4);
  Tape t;
  Var x = random_input(spec, 2, rng);
  Var z = nets.encoder.forward(t, x, true);
  CHECK(z.shape() == std::vector<std::size_t>{2, 10});
  Var back = nets.decoder.forward(t, z, true);
  CHECK(back.shape() == std::vector<std::size_t>{2, 2145, 1});
}

TEST_CASE("gcnn structure, betas, and parameter count") {
  ArchitectureSpec spec;
  spec.kind = ArchKind::gcnn;
  spec.latent = 32;
  spec.n_nodes = 256;
  spec.graph = std::make_shared<Graph>(path_graph(256));
  RomNetworks nets = build_architecture(spec, 1);

  CHECK(nets.encoder.parameter_count() + nets.decoder.parameter_count() +
            nets.predictor.parameter_count() ==
        33812);

  // Encoder: four graph layers, flatten, dense; no trailing activation.
  REQUIRE(nets.encoder.layers.size() == 6);
  for (int l = 0; l < 4; ++l) {
    const auto& g = std::get<Gcn2Layer>(nets.encoder.layers[l]);
    CHECK(g.alpha == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(g.beta ==
          doctest::Approx(std::log(1.0 + 1.5 / double(l + 1))).epsilon(1e-14));
  }
  CHECK(std::get<Gcn2Layer>(nets.encoder.layers[0]).beta ==
        doctest::Approx(0.9162907318741551).epsilon(1e-12));
  CHECK(std::holds_alternative<FlattenLayer>(nets.encoder.layers[4]));
  CHECK(std::holds_alternative<DenseLayer>(nets.encoder.layers[5]));

  // Decoder: dense, unflatten, then four graph layers with shifted betas.
  REQUIRE(nets.decoder.layers.size() == 6);
  CHECK(std::holds_alternative<DenseLayer>(nets.decoder.layers[0]));
  CHECK(std::holds_alternative<UnflattenLayer>(nets.decoder.layers[1]));
  for (int l = 0; l < 4; ++l) {
    const auto& g = std::get<Gcn2Layer>(nets.decoder.layers[2 + l]);
    CHECK(g.beta ==
          doctest::Approx(std::log(1.0 + 1.5 / double(4 + l + 1))).epsilon(1e-14));
  }

  // Predictor: eight dense layers, identity tail.
  CHECK(count_layers<DenseLayer>(nets.predictor) == 8);
  CHECK(std::holds_alternative<DenseLayer>(nets.predictor.layers.back()));

  Xoshiro256ss rng(6);
  Tape t;
  Var x = random_input(spec, 2, rng);
  Var z = nets.encoder.forward(t, x, true);
  CHECK(z.shape() == std::vector<std::size_t>{2, 32});
  Var back = nets.decoder.forward(t, z, true);
  CHECK(back.shape() == std::vector<std::size_t>{2, 256, 1});
}

TEST_CASE("architecture validation") {
  ArchitectureSpec spec;
  spec.kind = ArchKind::gcnn;
  spec.graph = nullptr;
  CHECK_THROWS_AS(spec.validate(), config_error);

  spec = ArchitectureSpec{};
  spec.latent = 0;
  CHECK_THROWS_AS(spec.validate(), config_error);

  spec = ArchitectureSpec{};
  spec.n_nodes = 0;
  CHECK_THROWS_AS(spec.validate(), config_error);
}

TEST_CASE("arch names round trip") {
  for (ArchKind k : {ArchKind::fcnn, ArchKind::cnn, ArchKind::gcnn})
    CHECK(arch_from_name(arch_name(k)) == k);
  CHECK_THROWS_AS(arch_from_name("mlp"), config_error);
}

TEST_CASE("model checkpoints restore bit-identical networks") {
  testsupport::TempDir tmp;
  Xoshiro256ss rng(12);

  const auto roundtrip = [&](ArchitectureSpec spec, const char* name) {
    RomNetworks nets = build_architecture(spec, 21);
    const std::string path = tmp.file(name);
    save_model(nets, path);
    RomNetworks back = load_model(path);
    CHECK(back.spec.kind == spec.kind);
    CHECK(back.spec.latent == spec.latent);
    CHECK(back.spec.n_nodes == spec.n_nodes);
    CHECK(back.encoder.save_state() == nets.encoder.save_state());
    CHECK(back.decoder.save_state() == nets.decoder.save_state());
    CHECK(back.predictor.save_state() == nets.predictor.save_state());

    Tape t;
    Var x = random_input(spec, 2, rng);
    Var y1 = nets.encoder.forward(t, x, false);
    Var y2 = back.encoder.forward(t, x, false);
    CHECK(y1.value() == y2.value());
  };

  ArchitectureSpec fc;
  fc.kind = ArchKind::fcnn;
  fc.latent = 3;
  fc.n_nodes = 16;
  roundtrip(fc, "fc.mdl");

  ArchitectureSpec cn;
  cn.kind = ArchKind::cnn;
  cn.latent = 3;
  cn.n_nodes = 64;
  roundtrip(cn, "cn.mdl");

  ArchitectureSpec gc;
  gc.kind = ArchKind::gcnn;
  gc.latent = 3;
  gc.n_nodes = 20;
  gc.graph = std::make_shared<Graph>(path_graph(20));
  roundtrip(gc, "gc.mdl");

  // The graph itself must survive: propagation values equal.
  RomNetworks gnets = build_architecture(gc, 31);
  save_model(gnets, tmp.file("g2.mdl"));
  RomNetworks gback = load_model(tmp.file("g2.mdl"));
  REQUIRE(gback.encoder.prop != nullptr);
  CHECK(gback.encoder.prop->vals == gnets.encoder.prop->vals);
  CHECK(gback.encoder.prop->cols == gnets.encoder.prop->cols);

  CHECK_THROWS_AS(load_model(tmp.file("missing.mdl")), io_error);
}
