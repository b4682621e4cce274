#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "romforge/architectures.hpp"
#include "romforge/errors.hpp"

namespace romforge {

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_layer_line(std::ostream& out, const Layer& l) {
  if (auto* d = std::get_if<DenseLayer>(&l)) {
    out << "dense " << d->w.shape()[0] << " " << d->w.shape()[1] << "\n";
  } else if (auto* a = std::get_if<ActivationLayer>(&l)) {
    out << "act "
        << (a->kind == Act::relu ? "relu"
                                 : a->kind == Act::elu ? "elu" : "identity")
        << "\n";
  } else if (auto* c = std::get_if<Conv2dLayer>(&l)) {
    const ConvGeom& g = c->geom;
    out << "conv " << (c->transposed ? 1 : 0) << " " << g.c_out << " " << g.c_in
        << " " << g.h_in << " " << g.w_in << " " << g.kh << " " << g.kw << " "
        << g.stride << " " << (g.same ? 1 : 0) << "\n";
  } else if (auto* gc = std::get_if<Gcn2Layer>(&l)) {
    out << "gcn2 " << gc->w.shape()[0] << " " << fmt_double(gc->alpha) << " "
        << fmt_double(gc->beta) << "\n";
  } else if (auto* bn = std::get_if<BatchNormLayer>(&l)) {
    out << "bn " << bn->gamma.size() << " " << fmt_double(bn->momentum) << " "
        << fmt_double(bn->eps) << "\n";
  } else if (std::get_if<FlattenLayer>(&l)) {
    out << "flatten\n";
  } else if (auto* u = std::get_if<UnflattenLayer>(&l)) {
    out << "unflatten " << u->n_nodes << " " << u->n_features << "\n";
  } else if (auto* r = std::get_if<ResizeSegmentsLayer>(&l)) {
    out << "resize " << r->n_seg << " " << r->in_len << " " << r->out_len << "\n";
  } else if (auto* rs = std::get_if<ReshapeLayer>(&l)) {
    out << "reshape " << rs->sample_shape.size();
    for (std::size_t d : rs->sample_shape) out << " " << d;
    out << "\n";
  } else {
    throw io_error("checkpoint: unknown layer kind");
  }
}

Layer read_layer_line(const std::string& line) {
  std::istringstream in(line);
  std::string kind;
  in >> kind;
  if (kind == "dense") {
    std::size_t out_d, in_d;
    in >> out_d >> in_d;
    return DenseLayer{Var::zeros_like({out_d, in_d}), Var::zeros_like({out_d})};
  }
  if (kind == "act") {
    std::string a;
    in >> a;
    const Act k = a == "relu" ? Act::relu : a == "elu" ? Act::elu : Act::identity;
    return ActivationLayer{k};
  }
  if (kind == "conv") {
    int transposed, same;
    std::size_t co, ci, h, w, kh, kw, stride;
    in >> transposed >> co >> ci >> h >> w >> kh >> kw >> stride >> same;
    Conv2dLayer l;
    l.geom = ConvGeom::make(ci, co, h, w, kh, kw, stride, same != 0);
    l.kernel = Var::zeros_like({co, ci, kh, kw});
    l.transposed = transposed != 0;
    l.bias = Var::zeros_like({l.transposed ? ci : co});
    return l;
  }
  if (kind == "gcn2") {
    std::size_t f;
    double alpha, beta;
    in >> f >> alpha >> beta;
    Gcn2Layer l;
    l.w = Var::zeros_like({f, f});
    l.alpha = alpha;
    l.beta = beta;
    return l;
  }
  if (kind == "bn") {
    std::size_t f;
    double momentum, eps;
    in >> f >> momentum >> eps;
    BatchNormLayer l = make_batchnorm(f);
    l.momentum = momentum;
    l.eps = eps;
    return l;
  }
  if (kind == "flatten") return FlattenLayer{};
  if (kind == "unflatten") {
    std::size_t n, f;
    in >> n >> f;
    return UnflattenLayer{n, f};
  }
  if (kind == "resize") {
    std::size_t s, i, o;
    in >> s >> i >> o;
    return ResizeSegmentsLayer{s, i, o};
  }
  if (kind == "reshape") {
    std::size_t k;
    in >> k;
    ReshapeLayer l;
    l.sample_shape.resize(k);
    for (std::size_t i = 0; i < k; ++i) in >> l.sample_shape[i];
    return l;
  }
  throw io_error("checkpoint: bad layer line: " + line);
}

void put_f64(std::ostream& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(bits >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 8);
}

double get_f64(std::istream& in) {
  unsigned char b[8];
  in.read(reinterpret_cast<char*>(b), 8);
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= std::uint64_t(b[i]) << (8 * i);
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

void write_network(std::ostream& out, const std::string& name, const Network& n) {
  out << "network " << name << " " << n.layers.size() << "\n";
  for (const Layer& l : n.layers) write_layer_line(out, l);
}

Network read_network(std::istream& in, const std::string& want) {
  std::string line;
  if (!std::getline(in, line)) throw io_error("checkpoint: truncated manifest");
  std::istringstream hs(line);
  std::string tag, name;
  std::size_t count;
  hs >> tag >> name >> count;
  if (tag != "network" || name != want)
    throw io_error("checkpoint: expected network " + want);
  Network net;
  for (std::size_t i = 0; i < count; ++i) {
    if (!std::getline(in, line)) throw io_error("checkpoint: truncated layers");
    net.layers.push_back(read_layer_line(line));
  }
  return net;
}

}  // namespace

void save_model(const RomNetworks& nets, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot write model file: " + path);
  out << "MDL1\n";
  out << "arch " << arch_name(nets.spec.kind) << "\n";
  out << "latent " << nets.spec.latent << "\n";
  out << "nodes " << nets.spec.n_nodes << "\n";
  out << "features " << nets.spec.n_features << "\n";
  out << "depth " << nets.spec.depth << "\n";
  out << "prediction_depth " << nets.spec.predictor_layers() << "\n";
  out << "n_params " << nets.spec.n_params << "\n";
  if (nets.spec.graph) {
    const Graph& g = *nets.spec.graph;
    out << "graph " << g.n_edges() << "\n";
    for (std::size_t v = 0; v < g.n_nodes(); ++v)
      for (std::size_t k = g.row_ptr()[v]; k < g.row_ptr()[v + 1]; ++k)
        if (v < g.col_index()[k])
          out << "e " << v << " " << g.col_index()[k] << " "
              << fmt_double(g.weights()[k]) << "\n";
  } else {
    out << "graph 0\n";
  }
  write_network(out, "encoder", nets.encoder);
  write_network(out, "decoder", nets.decoder);
  write_network(out, "predictor", nets.predictor);
  out << "blobs\n";
  for (const Network* n : {&nets.encoder, &nets.decoder, &nets.predictor})
    for (const auto& blob : n->save_state())
      for (double v : blob) put_f64(out, v);
  if (!out) throw io_error("failed writing model file: " + path);
}

RomNetworks load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open model file: " + path);
  std::string line;
  if (!std::getline(in, line) || line != "MDL1")
    throw io_error("bad model magic in " + path);

  RomNetworks nets;
  auto expect_kv = [&](const char* key) -> std::string {
    if (!std::getline(in, line)) throw io_error("checkpoint: truncated header");
    std::istringstream ls(line);
    std::string k, v;
    ls >> k >> v;
    if (k != key) throw io_error(std::string("checkpoint: expected key ") + key);
    return v;
  };
  nets.spec.kind = arch_from_name(expect_kv("arch"));
  nets.spec.latent = std::stoull(expect_kv("latent"));
  nets.spec.n_nodes = std::stoull(expect_kv("nodes"));
  nets.spec.n_features = std::stoull(expect_kv("features"));
  nets.spec.depth = std::stoull(expect_kv("depth"));
  nets.spec.prediction_depth = std::stoull(expect_kv("prediction_depth"));
  nets.spec.n_params = std::stoull(expect_kv("n_params"));

  const std::size_t n_edges = std::stoull(expect_kv("graph"));
  if (n_edges > 0 || nets.spec.kind == ArchKind::gcnn) {
    std::vector<std::array<double, 3>> edges;
    for (std::size_t i = 0; i < n_edges; ++i) {
      if (!std::getline(in, line)) throw io_error("checkpoint: truncated graph");
      std::istringstream es(line);
      std::string tag;
      double a, b, w;
      es >> tag >> a >> b >> w;
      if (tag != "e") throw io_error("checkpoint: bad edge line");
      edges.push_back({a, b, w});
    }
    nets.spec.graph = std::make_shared<Graph>(
        Graph::from_edges(nets.spec.n_nodes, edges));
  }

  nets.encoder = read_network(in, "encoder");
  nets.decoder = read_network(in, "decoder");
  nets.predictor = read_network(in, "predictor");
  if (!std::getline(in, line) || line != "blobs")
    throw io_error("checkpoint: missing blob section");

  if (nets.spec.graph) {
    auto prop = std::make_shared<SparseProp>(propagation_csr(*nets.spec.graph));
    nets.encoder.prop = prop;
    nets.decoder.prop = prop;
  }

  for (Network* n : {&nets.encoder, &nets.decoder, &nets.predictor}) {
    auto state = n->save_state();  // correct shapes, zero-filled
    for (auto& blob : state)
      for (double& v : blob) v = get_f64(in);
    if (!in) throw io_error("checkpoint: truncated blobs in " + path);
    n->load_state(state);
  }
  return nets;
}

}  // namespace romforge
