#include "romforge/pod.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "romforge/errors.hpp"

namespace romforge {

std::vector<double> inflow_initial_state(double mu1, std::size_t len) {
  std::vector<double> w(len, 1.0);
  if (len > 0) w[0] = mu1;
  return w;
}

std::vector<double> pod_center(const PodBasis& basis, const double* params,
                               std::size_t n_params) {
  if (basis.centering == Centering::none)
    return std::vector<double>(basis.state_len(), 0.0);
  if (n_params < 2)
    throw shape_error("pod_center: need (t, mu1, ...) parameter row");
  return inflow_initial_state(params[1], basis.state_len());
}

PodBasis pod_fit(const SnapshotSet& train, std::size_t n, Centering centering) {
  train.validate();
  const std::size_t len = train.sample_size();
  const std::size_t n_s = train.n_samples();
  if (n_s == 0) throw config_error("pod_fit: empty training set");
  if (n < 1 || n > std::min(len, n_s))
    throw config_error("pod_fit: n must be in [1, min(state_len, n_samples)]");
  if (centering == Centering::trajectory_ic && train.n_features() != 1)
    throw config_error("pod_fit: trajectory centering expects one feature");

  // Snapshot matrix with one centered sample per column.
  DenseMatrix snap(len, n_s);
  PodBasis proto;
  proto.centering = centering;
  proto.u_n = DenseMatrix(len, 0);
  for (std::size_t s = 0; s < n_s; ++s) {
    const std::vector<double> c =
        centering == Centering::none
            ? std::vector<double>(len, 0.0)
            : inflow_initial_state(train.params.at(s, 1), len);
    const double* x = train.sample(s);
    for (std::size_t i = 0; i < len; ++i) snap.at(i, s) = x[i] - c[i];
  }
  const ThinSvd svd = thin_svd(snap);

  PodBasis basis;
  basis.centering = centering;
  basis.u_n = DenseMatrix(len, n);
  basis.singular_values.assign(svd.s.begin(), svd.s.begin() + n);
  for (std::size_t i = 0; i < len; ++i)
    for (std::size_t j = 0; j < n; ++j) basis.u_n.at(i, j) = svd.u.at(i, j);
  return basis;
}

void pod_compress_sample(const PodBasis& basis, const double* params,
                         std::size_t n_params, const double* x, double* out) {
  const std::size_t len = basis.state_len();
  const std::vector<double> c = pod_center(basis, params, n_params);
  std::vector<double> centered(len);
  for (std::size_t i = 0; i < len; ++i) centered[i] = x[i] - c[i];
  const std::vector<double> z = matvec_transposed(basis.u_n, centered);
  const std::vector<double> back = matvec(basis.u_n, z);
  for (std::size_t i = 0; i < len; ++i) out[i] = c[i] + back[i];
}

SnapshotSet pod_compress(const PodBasis& basis, const SnapshotSet& set) {
  set.validate();
  if (set.sample_size() != basis.state_len())
    throw shape_error("pod_compress: sample length != basis rows");
  SnapshotSet out = set;
  for (std::size_t s = 0; s < set.n_samples(); ++s)
    pod_compress_sample(basis, set.params.row(s), set.params.cols(),
                        set.sample(s), out.sample(s));
  return out;
}

namespace {

void put_u64(std::ostream& out, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t get_u64(std::istream& in) {
  unsigned char b[8];
  in.read(reinterpret_cast<char*>(b), 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= std::uint64_t(b[i]) << (8 * i);
  return v;
}

void put_f64(std::ostream& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  put_u64(out, bits);
}

double get_f64(std::istream& in) {
  const std::uint64_t bits = get_u64(in);
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

}  // namespace

void save_pod(const PodBasis& basis, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot write basis file: " + path);
  out.write("POD1", 4);
  put_u64(out, basis.state_len());
  put_u64(out, basis.n());
  put_u64(out, basis.centering == Centering::trajectory_ic ? 1 : 0);
  for (double v : basis.singular_values) put_f64(out, v);
  for (std::size_t i = 0; i < basis.u_n.rows(); ++i)
    for (std::size_t j = 0; j < basis.u_n.cols(); ++j)
      put_f64(out, basis.u_n.at(i, j));
  if (!out) throw io_error("failed writing basis file: " + path);
}

PodBasis load_pod(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open basis file: " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "POD1", 4) != 0)
    throw io_error("bad basis magic in " + path);
  const std::size_t len = get_u64(in);
  const std::size_t n = get_u64(in);
  const std::uint64_t mode = get_u64(in);
  PodBasis basis;
  basis.centering = mode == 1 ? Centering::trajectory_ic : Centering::none;
  basis.singular_values.resize(n);
  for (double& v : basis.singular_values) v = get_f64(in);
  basis.u_n = DenseMatrix(len, n);
  for (std::size_t i = 0; i < len; ++i)
    for (std::size_t j = 0; j < n; ++j) basis.u_n.at(i, j) = get_f64(in);
  if (!in) throw io_error("truncated basis file: " + path);
  return basis;
}

}  // namespace romforge
