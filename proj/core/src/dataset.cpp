#include "romforge/dataset.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "romforge/errors.hpp"

namespace romforge {

void SnapshotSet::validate() const {
  if (snaps.ndim() != 3) throw shape_error("snapshot array must be 3-d");
  if (params.rows() != snaps.shape[0])
    throw shape_error("params rows != snapshot sample count");
}

NormStats fit_normalizer(const SnapshotSet& train) {
  train.validate();
  if (train.n_samples() == 0) throw config_error("fit_normalizer: empty set");
  NormStats st;
  const std::size_t np = train.params.cols();
  st.m_min.assign(np, 0.0);
  st.m_max.assign(np, 0.0);
  for (std::size_t j = 0; j < np; ++j) {
    double lo = train.params.at(0, j), hi = lo;
    for (std::size_t s = 1; s < train.params.rows(); ++s) {
      lo = std::min(lo, train.params.at(s, j));
      hi = std::max(hi, train.params.at(s, j));
    }
    st.m_min[j] = lo;
    st.m_max[j] = hi;
  }
  const std::size_t ns = train.sample_size();
  st.s_min.assign(train.sample(0), train.sample(0) + ns);
  st.s_max = st.s_min;
  for (std::size_t s = 1; s < train.n_samples(); ++s) {
    const double* x = train.sample(s);
    for (std::size_t i = 0; i < ns; ++i) {
      st.s_min[i] = std::min(st.s_min[i], x[i]);
      st.s_max[i] = std::max(st.s_max[i], x[i]);
    }
  }
  return st;
}

void normalize_sample(double* x, std::size_t n, const std::vector<double>& lo,
                      const std::vector<double>& hi) {
  if (lo.size() != n || hi.size() != n)
    throw shape_error("normalize_sample: stats length mismatch");
  for (std::size_t i = 0; i < n; ++i) {
    const double span = hi[i] - lo[i];
    x[i] = span == 0.0 ? 0.0 : (x[i] - lo[i]) / span;
  }
}

void denormalize_sample(double* x, std::size_t n, const std::vector<double>& lo,
                        const std::vector<double>& hi) {
  if (lo.size() != n || hi.size() != n)
    throw shape_error("denormalize_sample: stats length mismatch");
  for (std::size_t i = 0; i < n; ++i) x[i] = x[i] * (hi[i] - lo[i]) + lo[i];
}

SnapshotSet normalize(const SnapshotSet& x, const NormStats& stats) {
  x.validate();
  SnapshotSet y = x;
  for (std::size_t s = 0; s < y.params.rows(); ++s)
    normalize_sample(y.params.row(s), y.params.cols(), stats.m_min, stats.m_max);
  for (std::size_t s = 0; s < y.n_samples(); ++s)
    normalize_sample(y.sample(s), y.sample_size(), stats.s_min, stats.s_max);
  return y;
}

SnapshotSet denormalize(const SnapshotSet& x, const NormStats& stats) {
  x.validate();
  SnapshotSet y = x;
  for (std::size_t s = 0; s < y.params.rows(); ++s)
    denormalize_sample(y.params.row(s), y.params.cols(), stats.m_min, stats.m_max);
  for (std::size_t s = 0; s < y.n_samples(); ++s)
    denormalize_sample(y.sample(s), y.sample_size(), stats.s_min, stats.s_max);
  return y;
}

std::vector<Batch> shuffle_batches(const SnapshotSet& set, std::size_t n_b,
                                   Xoshiro256ss& rng) {
  set.validate();
  if (n_b == 0) throw config_error("shuffle_batches: batch size must be >= 1");
  std::vector<std::size_t> order(set.n_samples());
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);

  std::vector<Batch> out;
  const std::size_t np = set.params.cols();
  const std::size_t ns = set.sample_size();
  for (std::size_t start = 0; start < order.size(); start += n_b) {
    const std::size_t count = std::min(n_b, order.size() - start);
    Batch b{DenseMatrix(count, np),
            Array::zeros({count, set.n_nodes(), set.n_features()})};
    for (std::size_t r = 0; r < count; ++r) {
      const std::size_t src = order[start + r];
      std::copy(set.params.row(src), set.params.row(src) + np, b.params.row(r));
      std::copy(set.sample(src), set.sample(src) + ns,
                b.snaps.data.data() + r * ns);
    }
    out.push_back(std::move(b));
  }
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

void put_f64_block(std::ostream& out, const double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    std::uint64_t bits;
    std::memcpy(&bits, &x[i], 8);
    put_u64(out, bits);
  }
}

void get_f64_block(std::istream& in, double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint64_t bits = get_u64(in);
    std::memcpy(&x[i], &bits, 8);
  }
}

}  // namespace

void write_snapshots(const SnapshotSet& set, const std::string& path) {
  set.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot write snapshot file: " + path);
  out.write("SNP1", 4);
  put_u64(out, set.n_samples());
  put_u64(out, set.n_nodes());
  put_u64(out, set.n_features());
  put_u64(out, set.params.cols());
  put_f64_block(out, set.params.data().data(),
                set.params.rows() * set.params.cols());
  put_f64_block(out, set.snaps.data.data(), set.snaps.size());
  if (!out) throw io_error("failed writing snapshot file: " + path);
}

SnapshotSet read_snapshots(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open snapshot file: " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "SNP1", 4) != 0)
    throw io_error("bad snapshot magic in " + path);
  const std::size_t n_samples = get_u64(in);
  const std::size_t n_nodes = get_u64(in);
  const std::size_t n_features = get_u64(in);
  const std::size_t n_params = get_u64(in);
  if (!in) throw io_error("truncated snapshot header in " + path);
  SnapshotSet set{DenseMatrix(n_samples, n_params),
                  Array::zeros({n_samples, n_nodes, n_features})};
  get_f64_block(in, set.params.data().data(), n_samples * n_params);
  get_f64_block(in, set.snaps.data.data(), set.snaps.size());
  if (!in) throw io_error("truncated snapshot body in " + path);
  return set;
}

void write_snapshots_csv(const SnapshotSet& set, const std::string& path) {
  set.validate();
  std::ofstream out(path);
  if (!out) throw io_error("cannot write csv: " + path);
  const std::size_t np = set.params.cols(), ns = set.sample_size();
  for (std::size_t j = 0; j < np; ++j) out << (j ? ",p" : "p") << j;
  for (std::size_t j = 0; j < ns; ++j) out << ",x" << j;
  out << "\n";
  char buf[40];
  for (std::size_t s = 0; s < set.n_samples(); ++s) {
    for (std::size_t j = 0; j < np; ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", set.params.at(s, j));
      out << (j ? "," : "") << buf;
    }
    const double* x = set.sample(s);
    for (std::size_t j = 0; j < ns; ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", x[j]);
      out << "," << buf;
    }
    out << "\n";
  }
  if (!out) throw io_error("failed writing csv: " + path);
}

SnapshotSet read_snapshots_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open csv: " + path);
  std::string header;
  if (!std::getline(in, header)) throw io_error("empty csv: " + path);
  std::size_t np = 0, total = 0;
  {
    std::stringstream hs(header);
    std::string cell;
    while (std::getline(hs, cell, ',')) {
      if (!cell.empty() && cell[0] == 'p') ++np;
      ++total;
    }
  }
  if (np == 0 || total <= np) throw io_error("csv header must list p*/x* columns");
  const std::size_t ns = total - np;
  std::vector<double> pvals, xvals;
  std::string line;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ls(line);
    std::string cell;
    std::size_t col = 0;
    while (std::getline(ls, cell, ',')) {
      const double v = std::stod(cell);
      (col < np ? pvals : xvals).push_back(v);
      ++col;
    }
    if (col != total) throw io_error("csv row width mismatch in " + path);
    ++rows;
  }
  SnapshotSet set{DenseMatrix(rows, np, std::move(pvals)),
                  Array({rows, ns, 1}, std::move(xvals))};
  return set;
}

std::vector<std::vector<double>> shared_parameters(const SnapshotSet& a,
                                                   const SnapshotSet& b) {
  auto mu_rows = [](const SnapshotSet& s) {
    std::set<std::vector<double>> rows;
    for (std::size_t r = 0; r < s.params.rows(); ++r) {
      std::vector<double> mu;
      for (std::size_t c = 1; c < s.params.cols(); ++c) mu.push_back(s.params.at(r, c));
      rows.insert(mu);
    }
    return rows;
  };
  const auto ra = mu_rows(a), rb = mu_rows(b);
  std::vector<std::vector<double>> shared;
  for (const auto& mu : ra)
    if (rb.count(mu)) shared.push_back(mu);
  return shared;
}

}  // namespace romforge
