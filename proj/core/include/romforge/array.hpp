#pragma once

#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <vector>

#include "romforge/errors.hpp"

namespace romforge {

// Plain n-dimensional value: shape plus row-major doubles.  Shared by the
// dataset and autodiff layers; no view semantics, copies are deep.
struct Array {
  std::vector<std::size_t> shape;
  std::vector<double> data;

  Array() = default;
  Array(std::vector<std::size_t> s, std::vector<double> d)
      : shape(std::move(s)), data(std::move(d)) {
    if (data.size() != count(shape))
      throw shape_error("Array: data length does not match shape");
  }

  static std::size_t count(const std::vector<std::size_t>& s) {
    std::size_t n = 1;
    for (auto d : s) n *= d;
    return n;
  }

  static Array zeros(std::vector<std::size_t> s) {
    const std::size_t n = count(s);
    return Array(std::move(s), std::vector<double>(n, 0.0));
  }

  std::size_t size() const { return data.size(); }
  std::size_t ndim() const { return shape.size(); }

  double& operator[](std::size_t i) { return data[i]; }
  double operator[](std::size_t i) const { return data[i]; }

  void fill(double v) { std::fill(data.begin(), data.end(), v); }

  bool same_shape(const Array& other) const { return shape == other.shape; }
};

}  // namespace romforge
