#pragma once

#include <cstddef>
#include <memory>
#include <variant>
#include <vector>

#include "romforge/autodiff.hpp"
#include "romforge/graph.hpp"

namespace romforge {

// Geometry of a reference (non-transposed) convolution.  Transposed layers
// reuse the same geometry with input/output roles swapped, which makes the
// pair exact adjoints of one another by construction.
struct ConvGeom {
  std::size_t c_in = 0, c_out = 0;
  std::size_t h_in = 0, w_in = 0;
  std::size_t kh = 0, kw = 0;
  std::size_t stride = 1;
  bool same = true;
  std::size_t h_out = 0, w_out = 0;  // derived
  std::size_t pad_h = 0, pad_w = 0;  // low-side padding (derived)

  static ConvGeom make(std::size_t c_in, std::size_t c_out, std::size_t h_in,
                       std::size_t w_in, std::size_t kh, std::size_t kw,
                       std::size_t stride, bool same);
};

// Propagation operator (D+I)^{-1/2}(A+I)(D+I)^{-1/2} in CSR form.
struct SparseProp {
  std::size_t n = 0;
  std::vector<std::size_t> row_ptr, cols;
  std::vector<double> vals;
};

SparseProp propagation_csr(const Graph& g);

struct DenseLayer {
  Var w;  // (out, in)
  Var b;  // (out)
};

struct ActivationLayer {
  Act kind;
};

struct Conv2dLayer {
  Var kernel;  // (geom.c_out, geom.c_in, kh, kw), reference orientation
  Var bias;    // per layer-output channel
  ConvGeom geom;
  bool transposed = false;

  std::size_t in_channels() const { return transposed ? geom.c_out : geom.c_in; }
  std::size_t out_channels() const { return transposed ? geom.c_in : geom.c_out; }
};

struct Gcn2Layer {
  Var w;  // (n_f, n_f)
  double alpha = 0.2;
  double beta = 0.0;
};

struct BatchNormLayer {
  Var gamma, beta;  // (features)
  std::vector<double> running_mean, running_var;
  double momentum = 0.1;
  double eps = 1e-5;
};

struct FlattenLayer {};  // (B,N,F) -> (B,F*N), feature-major

struct UnflattenLayer {
  std::size_t n_nodes = 0, n_features = 0;
};

struct ResizeSegmentsLayer {
  std::size_t n_seg = 1, in_len = 0, out_len = 0;
};

struct ReshapeLayer {
  std::vector<std::size_t> sample_shape;
};

using Layer = std::variant<DenseLayer, ActivationLayer, Conv2dLayer, Gcn2Layer,
                           BatchNormLayer, FlattenLayer, UnflattenLayer,
                           ResizeSegmentsLayer, ReshapeLayer>;

// Layer forward ops.  All inputs carry a leading batch dimension.
Var dense_forward(Tape& t, const DenseLayer& l, const Var& x);
Var conv2d_forward(Tape& t, const Conv2dLayer& l, const Var& x);
Var gcn2_forward(Tape& t, const Gcn2Layer& l, const SparseProp& p, const Var& x,
                 const Var& x0);
// sigma(P x W) with sigma = ReLU; the plain first-order graph convolution.
Var gcn1_forward(Tape& t, const Var& w, const SparseProp& p, const Var& x);
Var batchnorm_forward(Tape& t, BatchNormLayer& l, const Var& x, bool training);

// Layer factories (Glorot-uniform weights, zero biases).
DenseLayer make_dense(std::size_t in, std::size_t out, Xoshiro256ss& rng);
Conv2dLayer make_conv(std::size_t c_in, std::size_t c_out, std::size_t h_in,
                      std::size_t w_in, std::size_t k, std::size_t stride,
                      bool same, Xoshiro256ss& rng);
// Transposed layer mapping (c_in, h, w) -> (c_out, stride*h, stride*w).
Conv2dLayer make_transposed_conv(std::size_t c_in, std::size_t c_out,
                                 std::size_t h_in, std::size_t w_in,
                                 std::size_t k, std::size_t stride,
                                 Xoshiro256ss& rng);
Gcn2Layer make_gcn2(std::size_t n_features, double alpha, double beta,
                    Xoshiro256ss& rng);
BatchNormLayer make_batchnorm(std::size_t features);

// A feed-forward stack.  GCN2 runs use the first input of each contiguous
// run as the residual anchor x0.
class Network {
 public:
  std::vector<Layer> layers;
  std::shared_ptr<SparseProp> prop;  // required iff GCN2 layers present

  Var forward(Tape& t, const Var& x, bool training);

  // Trainable parameters in layer order.
  std::vector<Var> parameters() const;
  std::size_t parameter_count() const;

  // Full mutable state: parameters plus batchnorm running statistics,
  // in layer order.  Used for best-checkpoint restore and serialization.
  std::vector<std::vector<double>> save_state() const;
  void load_state(const std::vector<std::vector<double>>& state);
};

}  // namespace romforge
