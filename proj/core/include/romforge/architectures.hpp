#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "romforge/graph.hpp"
#include "romforge/network.hpp"

namespace romforge {

enum class ArchKind { fcnn, cnn, gcnn };

std::string arch_name(ArchKind k);
ArchKind arch_from_name(const std::string& name);

struct ArchitectureSpec {
  ArchKind kind = ArchKind::fcnn;
  std::size_t latent = 10;           // n
  std::size_t n_nodes = 256;         // N
  std::size_t n_features = 1;        // n_f
  std::size_t depth = 4;             // graph-conv layers per stack (GCNN)
  std::size_t prediction_depth = 0;  // 0 = default (8 for GCNN, else 4)
  std::size_t n_params = 3;          // predictor input dim (t plus mu)
  std::shared_ptr<const Graph> graph;  // required for GCNN

  void validate() const;
  std::size_t predictor_layers() const {
    if (prediction_depth) return prediction_depth;
    return kind == ArchKind::gcnn ? 8 : 4;
  }
};

// Encoder maps (B,N,n_f) to (B,n); decoder inverts the shape; the predictor
// maps (B,n_params) to (B,n) and stands in for the latent trajectory.
struct RomNetworks {
  ArchitectureSpec spec;
  Network encoder, decoder, predictor;
};

RomNetworks build_architecture(const ArchitectureSpec& spec, std::uint64_t seed);

// Width of the hidden fully connected layer in the plain autoencoder:
// 64 when the flattened sample has 256 entries, otherwise round(size/10).
std::size_t fcnn_hidden_width(std::size_t flat_size);

// Smallest m with 4^m >= flat feature length (square reshape exponent).
std::size_t cnn_square_exponent(std::size_t feature_len);

// Model checkpoint: plain-text manifest (architecture and layer list,
// graph edges inline when present) followed by raw little-endian f64
// parameter blobs in manifest order.
void save_model(const RomNetworks& nets, const std::string& path);
RomNetworks load_model(const std::string& path);

}  // namespace romforge
