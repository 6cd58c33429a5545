#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "step/error.hpp"

namespace step {

// Dense row-major float32 matrix. All kernels below accumulate sequentially
// over the inner dimension in float, so results are bit-stable for a given
// input regardless of build flags that preserve FP semantics.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<float> data;

  Matrix() = default;
  Matrix(int r, int c, float fill = 0.0f)
      : rows(r), cols(c), data(static_cast<size_t>(r) * c, fill) {}

  float& at(int r, int c) { return data[static_cast<size_t>(r) * cols + c]; }
  float at(int r, int c) const { return data[static_cast<size_t>(r) * cols + c]; }
  float* row(int r) { return data.data() + static_cast<size_t>(r) * cols; }
  const float* row(int r) const { return data.data() + static_cast<size_t>(r) * cols; }

  static Matrix identity(int n) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) m.at(i, i) = 1.0f;
    return m;
  }
};

// Exact multiply-accumulate tally; the FLOPs-model oracle (FLOPs = 2 * MACs).
// Only matmul feeds it.
struct MacCounter {
  uint64_t macs = 0;
  void add(uint64_t n) { macs += n; }
};

inline Matrix matmul(const Matrix& a, const Matrix& b, MacCounter* counter = nullptr) {
  if (a.cols != b.rows)
    throw ShapeError("matmul: " + std::to_string(a.rows) + "x" + std::to_string(a.cols) +
                     " * " + std::to_string(b.rows) + "x" + std::to_string(b.cols));
  Matrix c(a.rows, b.cols);
  for (int i = 0; i < a.rows; ++i) {
    float* crow = c.row(i);
    for (int k = 0; k < a.cols; ++k) {
      const float aik = a.at(i, k);
      const float* brow = b.row(k);
      for (int j = 0; j < b.cols; ++j) crow[j] += aik * brow[j];
    }
  }
  if (counter)
    counter->add(static_cast<uint64_t>(a.rows) * static_cast<uint64_t>(a.cols) *
                 static_cast<uint64_t>(b.cols));
  return c;
}

inline Matrix transpose(const Matrix& m) {
  Matrix t(m.cols, m.rows);
  for (int r = 0; r < m.rows; ++r)
    for (int c = 0; c < m.cols; ++c) t.at(c, r) = m.at(r, c);
  return t;
}

// Row-wise softmax with max subtraction. -inf entries come out as exact
// zeros; a row with no finite entry degenerates to uniform.
inline Matrix softmax_rows(const Matrix& m) {
  Matrix out(m.rows, m.cols);
  for (int r = 0; r < m.rows; ++r) {
    const float* src = m.row(r);
    float* dst = out.row(r);
    float mx = -std::numeric_limits<float>::infinity();
    for (int c = 0; c < m.cols; ++c) mx = std::max(mx, src[c]);
    if (!(mx > -std::numeric_limits<float>::infinity())) {
      const float u = 1.0f / static_cast<float>(m.cols);
      for (int c = 0; c < m.cols; ++c) dst[c] = u;
      continue;
    }
    float sum = 0.0f;
    for (int c = 0; c < m.cols; ++c) {
      const float e = std::exp(src[c] - mx);
      dst[c] = e;
      sum += e;
    }
    for (int c = 0; c < m.cols; ++c) dst[c] /= sum;
  }
  return out;
}

// Pre-affine normalization uses the population variance with epsilon 1e-5.
inline Matrix layer_norm(const Matrix& m, const Matrix& gain, const Matrix& bias) {
  if (m.cols < 2) throw ShapeError("layer_norm: needs at least 2 columns");
  if (gain.rows != 1 || gain.cols != m.cols || bias.rows != 1 || bias.cols != m.cols)
    throw ShapeError("layer_norm: gain/bias must be 1x" + std::to_string(m.cols));
  constexpr float kEps = 1e-5f;
  Matrix out(m.rows, m.cols);
  for (int r = 0; r < m.rows; ++r) {
    const float* src = m.row(r);
    float* dst = out.row(r);
    float mean = 0.0f;
    for (int c = 0; c < m.cols; ++c) mean += src[c];
    mean /= static_cast<float>(m.cols);
    float var = 0.0f;
    for (int c = 0; c < m.cols; ++c) {
      const float d = src[c] - mean;
      var += d * d;
    }
    var /= static_cast<float>(m.cols);
    const float inv = 1.0f / std::sqrt(var + kEps);
    for (int c = 0; c < m.cols; ++c)
      dst[c] = (src[c] - mean) * inv * gain.data[c] + bias.data[c];
  }
  return out;
}

// tanh approximation of GELU.
inline Matrix gelu(const Matrix& m) {
  Matrix out(m.rows, m.cols);
  for (size_t i = 0; i < m.data.size(); ++i) {
    const float x = m.data[i];
    out.data[i] =
        0.5f * x * (1.0f + std::tanh(0.7978845608f * (x + 0.044715f * x * x * x)));
  }
  return out;
}

inline Matrix add_row_broadcast(const Matrix& m, const Matrix& row) {
  if (row.rows != 1 || row.cols != m.cols)
    throw ShapeError("add_row_broadcast: row must be 1x" + std::to_string(m.cols));
  Matrix out = m;
  for (int r = 0; r < m.rows; ++r) {
    float* dst = out.row(r);
    for (int c = 0; c < m.cols; ++c) dst[c] += row.data[c];
  }
  return out;
}

inline Matrix add(const Matrix& a, const Matrix& b) {
  if (a.rows != b.rows || a.cols != b.cols) throw ShapeError("add: shape mismatch");
  Matrix out = a;
  for (size_t i = 0; i < out.data.size(); ++i) out.data[i] += b.data[i];
  return out;
}

// x * w + b with the matmul counted.
inline Matrix linear(const Matrix& x, const Matrix& w, const Matrix& b,
                     MacCounter* counter = nullptr) {
  return add_row_broadcast(matmul(x, w, counter), b);
}

}  // namespace step
