#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "ama/errors.hpp"
#include "ama/matrix.hpp"

// Deterministic float32 kernels. Dot products and reductions accumulate in
// double so results are bit-identical across runs and thread counts.

namespace ama {

// 1D convolution weights, layout [out_ch][in_ch][tap]. Correlation
// convention (no kernel flip), as usual for learned convolutions.
struct Conv1dKernel {
  std::size_t out_ch = 0;
  std::size_t in_ch = 0;
  std::size_t ksize = 1;
  std::vector<float> w;  // out_ch * in_ch * ksize
  std::vector<float> b;  // out_ch

  float wat(std::size_t o, std::size_t i, std::size_t t) const {
    return w[(o * in_ch + i) * ksize + t];
  }
};

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
inline double relu(double x) { return x > 0.0 ? x : 0.0; }

inline Matrix2D sigmoid(const Matrix2D& m) {
  Matrix2D out(m.rows, m.cols);
  for (std::size_t i = 0; i < m.data.size(); ++i)
    out.data[i] = static_cast<float>(sigmoid(static_cast<double>(m.data[i])));
  return out;
}

inline Matrix2D relu(const Matrix2D& m) {
  Matrix2D out(m.rows, m.cols);
  for (std::size_t i = 0; i < m.data.size(); ++i)
    out.data[i] = m.data[i] > 0.0f ? m.data[i] : 0.0f;
  return out;
}

// Masked "same" convolution. Zero padding at the borders; invalid input
// columns contribute zero; output mask is the stride-subsampled input mask
// and invalid output columns are zeroed. Output length is ceil(T / stride).
inline MaskedSequence masked_conv1d(const MaskedSequence& x, const Conv1dKernel& k,
                                    std::size_t stride) {
  if (k.ksize % 2 == 0) throw ConfigError("masked_conv1d: kernel size must be odd");
  if (k.in_ch != x.channels())
    throw ConfigError("masked_conv1d: input has " + std::to_string(x.channels()) +
                      " channels, kernel expects " + std::to_string(k.in_ch));
  if (stride != 1 && stride != 2) throw ConfigError("masked_conv1d: stride must be 1 or 2");
  if (k.w.size() != k.out_ch * k.in_ch * k.ksize || k.b.size() != k.out_ch)
    throw ConfigError("masked_conv1d: weight/bias size mismatch");
  for (float v : k.w)
    if (!std::isfinite(v)) throw DataError("masked_conv1d: non-finite weight");
  for (float v : k.b)
    if (!std::isfinite(v)) throw DataError("masked_conv1d: non-finite bias");

  const std::size_t t_in = x.length();
  const std::size_t t_out = (t_in + stride - 1) / stride;
  const std::size_t half = k.ksize / 2;

  MaskedSequence out;
  out.feat = Matrix2D(k.out_ch, t_out);
  out.mask.assign(t_out, 0);
  for (std::size_t j = 0; j < t_out; ++j) out.mask[j] = x.mask[j * stride];

  for (std::size_t oc = 0; oc < k.out_ch; ++oc) {
    for (std::size_t j = 0; j < t_out; ++j) {
      if (!out.mask[j]) continue;
      const std::ptrdiff_t center = static_cast<std::ptrdiff_t>(j * stride);
      double acc = static_cast<double>(k.b[oc]);
      for (std::size_t ic = 0; ic < k.in_ch; ++ic) {
        const float* xrow = x.feat.row(ic);
        const float* wrow = &k.w[(oc * k.in_ch + ic) * k.ksize];
        for (std::size_t d = 0; d < k.ksize; ++d) {
          const std::ptrdiff_t i = center + static_cast<std::ptrdiff_t>(d) -
                                   static_cast<std::ptrdiff_t>(half);
          if (i < 0 || i >= static_cast<std::ptrdiff_t>(t_in)) continue;
          if (!x.mask[static_cast<std::size_t>(i)]) continue;
          acc += static_cast<double>(wrow[d]) * static_cast<double>(xrow[i]);
        }
      }
      out.feat(oc, j) = static_cast<float>(acc);
    }
  }
  return out;
}

// Per-time-step normalization across channels followed by a per-channel
// affine transform. Population variance (divide by C).
inline Matrix2D layer_norm(const Matrix2D& x, const std::vector<float>& gamma,
                           const std::vector<float>& beta, double eps = 1e-5) {
  if (x.rows == 0) throw ConfigError("layer_norm: zero channels");
  if (gamma.size() != x.rows || beta.size() != x.rows)
    throw ConfigError("layer_norm: gamma/beta length must equal channel count");
  if (!(eps >= 0.0) || !std::isfinite(eps)) throw ConfigError("layer_norm: eps must be >= 0");

  Matrix2D out(x.rows, x.cols);
  const double c = static_cast<double>(x.rows);
  for (std::size_t t = 0; t < x.cols; ++t) {
    double sum = 0.0, sumsq = 0.0;
    for (std::size_t ch = 0; ch < x.rows; ++ch) {
      const double v = static_cast<double>(x(ch, t));
      sum += v;
      sumsq += v * v;
    }
    const double mean = sum / c;
    const double var = std::max(0.0, sumsq / c - mean * mean);
    const double inv = 1.0 / std::sqrt(var + eps);
    for (std::size_t ch = 0; ch < x.rows; ++ch) {
      const double v = (static_cast<double>(x(ch, t)) - mean) * inv;
      out(ch, t) = static_cast<float>(v * gamma[ch] + beta[ch]);
    }
  }
  return out;
}

// Layer norm on a masked sequence; invalid columns stay zero.
inline MaskedSequence layer_norm_masked(const MaskedSequence& x, const std::vector<float>& gamma,
                                        const std::vector<float>& beta, double eps = 1e-5) {
  MaskedSequence out;
  out.feat = layer_norm(x.feat, gamma, beta, eps);
  out.mask = x.mask;
  zero_invalid_columns(out);
  return out;
}

// Stride-1 max pooling with -inf padding; temporal length is preserved.
inline Matrix2D max_pool1d_same(const Matrix2D& x, std::size_t k) {
  if (k % 2 == 0) throw ConfigError("max_pool1d_same: kernel size must be odd");
  const std::ptrdiff_t half = static_cast<std::ptrdiff_t>(k / 2);
  Matrix2D out(x.rows, x.cols);
  for (std::size_t ch = 0; ch < x.rows; ++ch) {
    const float* xrow = x.row(ch);
    for (std::size_t t = 0; t < x.cols; ++t) {
      float best = -std::numeric_limits<float>::infinity();
      const std::ptrdiff_t lo = static_cast<std::ptrdiff_t>(t) - half;
      const std::ptrdiff_t hi = static_cast<std::ptrdiff_t>(t) + half;
      for (std::ptrdiff_t i = std::max<std::ptrdiff_t>(lo, 0);
           i <= std::min<std::ptrdiff_t>(hi, static_cast<std::ptrdiff_t>(x.cols) - 1); ++i)
        best = std::max(best, xrow[i]);
      out(ch, t) = best;
    }
  }
  return out;
}

// Mask-aware variant: invalid columns are treated as -inf (like padding), so
// valid outputs never depend on what sits beyond the valid range.
inline MaskedSequence max_pool1d_same_masked(const MaskedSequence& x, std::size_t k) {
  if (k % 2 == 0) throw ConfigError("max_pool1d_same: kernel size must be odd");
  const std::ptrdiff_t half = static_cast<std::ptrdiff_t>(k / 2);
  MaskedSequence out;
  out.feat = Matrix2D(x.channels(), x.length());
  out.mask = x.mask;
  for (std::size_t ch = 0; ch < x.channels(); ++ch) {
    const float* xrow = x.feat.row(ch);
    for (std::size_t t = 0; t < x.length(); ++t) {
      if (!x.mask[t]) continue;
      float best = -std::numeric_limits<float>::infinity();
      const std::ptrdiff_t lo = static_cast<std::ptrdiff_t>(t) - half;
      const std::ptrdiff_t hi = static_cast<std::ptrdiff_t>(t) + half;
      for (std::ptrdiff_t i = std::max<std::ptrdiff_t>(lo, 0);
           i <= std::min<std::ptrdiff_t>(hi, static_cast<std::ptrdiff_t>(x.length()) - 1); ++i) {
        if (!x.mask[static_cast<std::size_t>(i)]) continue;
        best = std::max(best, xrow[i]);
      }
      out.feat(ch, t) = best;
    }
  }
  return out;
}

// softmax(Q K^T / sqrt(D)) V with max-subtracted softmax. Q: Tq x D,
// K: Tk x D, V: Tk x Dv. Output Tq x Dv.
inline Matrix2D dense_attention(const Matrix2D& q, const Matrix2D& k, const Matrix2D& v) {
  if (q.cols == 0) throw ConfigError("dense_attention: zero feature dimension");
  if (k.cols != q.cols) throw ConfigError("dense_attention: Q/K dimension mismatch");
  if (v.rows != k.rows) throw ConfigError("dense_attention: K/V row mismatch");
  const double scale = 1.0 / std::sqrt(static_cast<double>(q.cols));

  Matrix2D out(q.rows, v.cols);
  std::vector<double> scores(k.rows);
  for (std::size_t i = 0; i < q.rows; ++i) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < k.rows; ++j) {
      double dot = 0.0;
      for (std::size_t d = 0; d < q.cols; ++d)
        dot += static_cast<double>(q(i, d)) * static_cast<double>(k(j, d));
      scores[j] = dot * scale;
      mx = std::max(mx, scores[j]);
    }
    double denom = 0.0;
    for (std::size_t j = 0; j < k.rows; ++j) {
      scores[j] = std::exp(scores[j] - mx);
      denom += scores[j];
    }
    for (std::size_t c = 0; c < v.cols; ++c) {
      double acc = 0.0;
      for (std::size_t j = 0; j < k.rows; ++j)
        acc += (scores[j] / denom) * static_cast<double>(v(j, c));
      out(i, c) = static_cast<float>(acc);
    }
  }
  return out;
}

// Diagnostics collected by windowed_attention, per time step.
struct AttnStats {
  std::vector<std::size_t> token_counts;  // attended keys per position
  std::vector<double> weight_sums;        // softmax row sums (1 for valid steps)
};

// Local self-attention over the columns of x (each column is one token,
// Q = K = V = x^T). Keys/values at position t are the valid positions within
// +-floor(window/2), with optional memory tokens (M x C) prepended to every
// position's key/value set. Invalid positions yield zero output.
inline MaskedSequence windowed_attention(const MaskedSequence& x, std::size_t window,
                                         const Matrix2D* memory = nullptr,
                                         AttnStats* stats = nullptr) {
  if (window % 2 == 0) throw ConfigError("windowed_attention: window must be odd");
  const std::size_t dim = x.channels();
  if (dim == 0) throw ConfigError("windowed_attention: zero feature dimension");
  const std::size_t mem_rows = memory ? memory->rows : 0;
  if (memory && memory->cols != dim)
    throw ConfigError("windowed_attention: memory dimension " + std::to_string(memory->cols) +
                      " does not match feature dimension " + std::to_string(dim));

  const std::size_t t_len = x.length();
  const std::ptrdiff_t half = static_cast<std::ptrdiff_t>(window / 2);
  const double scale = 1.0 / std::sqrt(static_cast<double>(dim));

  MaskedSequence out;
  out.feat = Matrix2D(dim, t_len);
  out.mask = x.mask;
  if (stats) {
    stats->token_counts.assign(t_len, 0);
    stats->weight_sums.assign(t_len, 0.0);
  }

  std::vector<double> scores;
  std::vector<std::size_t> keys;  // local key positions
  for (std::size_t t = 0; t < t_len; ++t) {
    if (!x.mask[t]) continue;
    keys.clear();
    const std::ptrdiff_t lo = static_cast<std::ptrdiff_t>(t) - half;
    const std::ptrdiff_t hi = static_cast<std::ptrdiff_t>(t) + half;
    for (std::ptrdiff_t s = std::max<std::ptrdiff_t>(lo, 0);
         s <= std::min<std::ptrdiff_t>(hi, static_cast<std::ptrdiff_t>(t_len) - 1); ++s)
      if (x.mask[static_cast<std::size_t>(s)]) keys.push_back(static_cast<std::size_t>(s));

    const std::size_t n_tok = mem_rows + keys.size();
    scores.resize(n_tok);
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t m = 0; m < mem_rows; ++m) {
      double dot = 0.0;
      for (std::size_t d = 0; d < dim; ++d)
        dot += static_cast<double>(x.feat(d, t)) * static_cast<double>((*memory)(m, d));
      scores[m] = dot * scale;
      mx = std::max(mx, scores[m]);
    }
    for (std::size_t j = 0; j < keys.size(); ++j) {
      double dot = 0.0;
      for (std::size_t d = 0; d < dim; ++d)
        dot += static_cast<double>(x.feat(d, t)) * static_cast<double>(x.feat(d, keys[j]));
      scores[mem_rows + j] = dot * scale;
      mx = std::max(mx, scores[mem_rows + j]);
    }
    double denom = 0.0;
    for (std::size_t j = 0; j < n_tok; ++j) {
      scores[j] = std::exp(scores[j] - mx);
      denom += scores[j];
    }
    double wsum = 0.0;
    for (std::size_t j = 0; j < n_tok; ++j) {
      scores[j] /= denom;
      wsum += scores[j];
    }
    for (std::size_t d = 0; d < dim; ++d) {
      double acc = 0.0;
      for (std::size_t m = 0; m < mem_rows; ++m) acc += scores[m] * static_cast<double>((*memory)(m, d));
      for (std::size_t j = 0; j < keys.size(); ++j)
        acc += scores[mem_rows + j] * static_cast<double>(x.feat(d, keys[j]));
      out.feat(d, t) = static_cast<float>(acc);
    }
    if (stats) {
      stats->token_counts[t] = n_tok;
      stats->weight_sums[t] = wsum;
    }
  }
  return out;
}

}  // namespace ama
