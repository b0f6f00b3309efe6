#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "ama/errors.hpp"

namespace ama {

// Dense row-major float32 matrix.
struct Matrix2D {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<float> data;

  Matrix2D() = default;
  Matrix2D(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0f) {}

  float& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  float operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  const float* row(std::size_t r) const { return data.data() + r * cols; }
  float* row(std::size_t r) { return data.data() + r * cols; }

  std::size_t size() const { return rows * cols; }
};

inline Matrix2D transpose(const Matrix2D& m) {
  Matrix2D out(m.cols, m.rows);
  for (std::size_t r = 0; r < m.rows; ++r)
    for (std::size_t c = 0; c < m.cols; ++c) out(c, r) = m(r, c);
  return out;
}

inline bool all_finite(const Matrix2D& m) {
  for (float v : m.data)
    if (!std::isfinite(v)) return false;
  return true;
}

using BoolMask = std::vector<std::uint8_t>;

// Channels x time feature map with a per-step validity mask.
// Invariant: columns with mask == 0 are all zero.
struct MaskedSequence {
  Matrix2D feat;  // C x T
  BoolMask mask;  // length T, 1 = valid

  std::size_t channels() const { return feat.rows; }
  std::size_t length() const { return feat.cols; }
};

inline void zero_invalid_columns(MaskedSequence& s) {
  for (std::size_t t = 0; t < s.length(); ++t) {
    if (s.mask[t]) continue;
    for (std::size_t c = 0; c < s.channels(); ++c) s.feat(c, t) = 0.0f;
  }
}

inline MaskedSequence make_all_valid(Matrix2D m) {
  MaskedSequence s;
  s.mask.assign(m.cols, 1);
  s.feat = std::move(m);
  return s;
}

}  // namespace ama
