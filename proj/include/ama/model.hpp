#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "ama/config.hpp"
#include "ama/errors.hpp"
#include "ama/kernels.hpp"
#include "ama/matrix.hpp"
#include "ama/types.hpp"
#include "ama/weights.hpp"

// The AMA detector: stem, multi-level backbone, Identity/SPPF neck, point
// generator, and shared classification/regression heads. Everything here is
// a pure function of (input, config, weights).

namespace ama {

struct PyramidLevel {
  MaskedSequence seq;      // C x T_l
  std::size_t stride = 1;  // 2^level, in base-grid chunk units
};

// Temporal anchor point: location on the base grid, regression range in
// chunk units, and the stride of its level.
struct Point {
  double t = 0.0;
  double range_lo = 0.0;
  double range_hi = 0.0;
  double stride = 1.0;
};

struct LevelPrediction {
  Matrix2D cls_logits;  // T_l x num_classes
  Matrix2D offsets;     // T_l x 2, non-negative, in units of the level stride
  BoolMask mask;        // length T_l
};

struct RawPrediction {
  std::vector<LevelPrediction> levels;
};

struct ForwardResult {
  RawPrediction raw;
  std::vector<std::vector<Point>> points;  // per level
};

namespace detail {

inline MaskedSequence backbone_block(const MaskedSequence& x, const AmaConfig& cfg,
                                     const WeightBundle& w, std::size_t level) {
  const std::string p = "backbone.l" + std::to_string(level) + ".";
  MaskedSequence cur = x;
  if (cfg.backbone == BackboneKind::conv_transformer)
    cur = windowed_attention(cur, cfg.window);
  cur = masked_conv1d(cur, conv_from(w, p + "conv", cfg.channels, cfg.channels, 3), 2);
  cur = layer_norm_masked(cur, vec_from(w, p + "ln.gamma", cfg.channels),
                          vec_from(w, p + "ln.beta", cfg.channels));
  cur.feat = relu(cur.feat);
  return cur;
}

// Two-layer 1x1 conv head shared across levels. The final activation is
// relu for the regression head, none for the classification head.
inline Matrix2D head_forward(const MaskedSequence& x, const AmaConfig& cfg, const WeightBundle& w,
                             const std::string& prefix, std::size_t final_out, bool relu_final) {
  MaskedSequence h = masked_conv1d(x, conv_from(w, prefix + ".0", cfg.channels, cfg.channels, 1), 1);
  h.feat = relu(h.feat);
  h = masked_conv1d(h, conv_from(w, prefix + ".1", final_out, cfg.channels, 1), 1);
  if (relu_final) h.feat = relu(h.feat);
  return transpose(h.feat);  // T x final_out
}

}  // namespace detail

// Masked-input stem: used directly by tests that exercise padding behavior.
// x is the already transposed D x N matrix.
inline MaskedSequence embed_stem_masked(const Matrix2D& x, const BoolMask& mask,
                                        const AmaConfig& cfg, const WeightBundle& w) {
  if (x.rows != cfg.input_dim)
    throw ConfigError("embed_stem: feature dim " + std::to_string(x.rows) +
                      " does not match config input_dim " + std::to_string(cfg.input_dim));
  if (x.cols == 0) throw ConfigError("embed_stem: empty sequence");
  MaskedSequence s;
  s.feat = x;
  s.mask = mask;
  zero_invalid_columns(s);
  s = masked_conv1d(s, conv_from(w, "stem.conv", cfg.channels, cfg.input_dim, 1), 1);
  s = layer_norm_masked(s, vec_from(w, "stem.ln.gamma", cfg.channels),
                        vec_from(w, "stem.ln.beta", cfg.channels));
  return s;
}

// Transpose [N, D] -> [D, N], project to C channels, layer norm.
inline MaskedSequence embed_stem(const FeatureSequence& f, const AmaConfig& cfg,
                                 const WeightBundle& w) {
  if (f.n_chunks == 0) throw ConfigError("embed_stem: empty sequence");
  if (f.dim != cfg.input_dim)
    throw ConfigError("embed_stem: feature dim " + std::to_string(f.dim) +
                      " does not match config input_dim " + std::to_string(cfg.input_dim));
  Matrix2D x(f.dim, f.n_chunks);
  for (std::size_t n = 0; n < f.n_chunks; ++n)
    for (std::size_t d = 0; d < f.dim; ++d) x(d, n) = f.at(n, d);
  return embed_stem_masked(x, BoolMask(f.n_chunks, 1), cfg, w);
}

// Level 0 is the stem at stride 1; each further level halves the temporal
// length with a stride-2 masked conv block. The convTransformer backbone
// runs windowed attention on a level before downsampling it.
inline std::vector<PyramidLevel> build_pyramid(const MaskedSequence& stem, const AmaConfig& cfg,
                                               const WeightBundle& w) {
  const std::size_t min_len = std::size_t{1} << (cfg.num_levels - 1);
  if (stem.length() < min_len)
    throw ConfigError("build_pyramid: sequence too short for " + std::to_string(cfg.num_levels) +
                      " levels (need T >= " + std::to_string(min_len) + ", got " +
                      std::to_string(stem.length()) + ")");
  std::vector<PyramidLevel> levels;
  levels.push_back({stem, 1});
  MaskedSequence cur = stem;
  for (std::size_t l = 1; l < cfg.num_levels; ++l) {
    cur = detail::backbone_block(cur, cfg, w, l);
    levels.push_back({cur, std::size_t{1} << l});
  }
  return levels;
}

// Per-level layer norm, no fusion. Shapes unchanged.
inline std::vector<PyramidLevel> neck_identity(const std::vector<PyramidLevel>& levels,
                                               const AmaConfig& cfg, const WeightBundle& w) {
  std::vector<PyramidLevel> out;
  out.reserve(levels.size());
  for (std::size_t l = 0; l < levels.size(); ++l) {
    const std::string p = "neck.l" + std::to_string(l) + ".";
    PyramidLevel lvl;
    lvl.stride = levels[l].stride;
    lvl.seq = layer_norm_masked(levels[l].seq, vec_from(w, p + "ln.gamma", cfg.channels),
                                vec_from(w, p + "ln.beta", cfg.channels));
    out.push_back(std::move(lvl));
  }
  return out;
}

// SPPF: 1x1 conv C -> C/2, three chained stride-1 max pools, concat
// [x, y1, y2, y3] to 2C channels, 1x1 conv back to C, layer norm.
inline std::vector<PyramidLevel> neck_sppf(const std::vector<PyramidLevel>& levels,
                                           const AmaConfig& cfg, const WeightBundle& w) {
  if (cfg.channels % 2 != 0) throw ConfigError("neck_sppf: channels must be even");
  if (cfg.kernel_sppf % 2 == 0) throw ConfigError("neck_sppf: kernel_sppf must be odd");
  const std::size_t c = cfg.channels;
  const std::size_t half = c / 2;

  std::vector<PyramidLevel> out;
  out.reserve(levels.size());
  for (std::size_t l = 0; l < levels.size(); ++l) {
    const std::string p = "neck.l" + std::to_string(l) + ".";
    MaskedSequence x = masked_conv1d(levels[l].seq, conv_from(w, p + "reduce", half, c, 1), 1);
    MaskedSequence y1 = max_pool1d_same_masked(x, cfg.kernel_sppf);
    MaskedSequence y2 = max_pool1d_same_masked(y1, cfg.kernel_sppf);
    MaskedSequence y3 = max_pool1d_same_masked(y2, cfg.kernel_sppf);

    MaskedSequence cat;
    cat.mask = x.mask;
    cat.feat = Matrix2D(2 * c, x.length());
    const MaskedSequence* parts[4] = {&x, &y1, &y2, &y3};
    for (std::size_t part = 0; part < 4; ++part)
      for (std::size_t ch = 0; ch < half; ++ch)
        for (std::size_t t = 0; t < x.length(); ++t)
          cat.feat(part * half + ch, t) = parts[part]->feat(ch, t);

    MaskedSequence z = masked_conv1d(cat, conv_from(w, p + "expand", c, 2 * c, 1), 1);
    z = layer_norm_masked(z, vec_from(w, p + "ln.gamma", c), vec_from(w, p + "ln.beta", c));
    out.push_back({std::move(z), levels[l].stride});
  }
  return out;
}

// Dense anchor points: level l point i sits at t = i * 2^l on the base grid
// and carries that level's regression range and stride.
inline std::vector<std::vector<Point>> generate_points(const std::vector<PyramidLevel>& levels,
                                                       const AmaConfig& cfg) {
  if (cfg.reg_ranges.size() != levels.size())
    throw ConfigError("generate_points: reg_ranges must have one entry per level");
  std::vector<std::vector<Point>> out(levels.size());
  for (std::size_t l = 0; l < levels.size(); ++l) {
    const double stride = static_cast<double>(levels[l].stride);
    out[l].reserve(levels[l].seq.length());
    for (std::size_t i = 0; i < levels[l].seq.length(); ++i)
      out[l].push_back({static_cast<double>(i) * stride, cfg.reg_ranges[l].lo,
                        cfg.reg_ranges[l].hi, stride});
  }
  return out;
}

inline RawPrediction heads_forward(const std::vector<PyramidLevel>& levels, const AmaConfig& cfg,
                                   const WeightBundle& w) {
  RawPrediction raw;
  raw.levels.reserve(levels.size());
  for (const PyramidLevel& lvl : levels) {
    LevelPrediction pred;
    pred.cls_logits = detail::head_forward(lvl.seq, cfg, w, "cls_head",
                                           static_cast<std::size_t>(cfg.num_classes), false);
    pred.offsets = detail::head_forward(lvl.seq, cfg, w, "reg_head", 2, true);
    pred.mask = lvl.seq.mask;
    raw.levels.push_back(std::move(pred));
  }
  return raw;
}

// Full forward pass: backbone -> neck -> heads, plus the anchor points.
inline ForwardResult forward(const FeatureSequence& f, const AmaConfig& cfg,
                             const WeightBundle& w) {
  MaskedSequence stem = embed_stem(f, cfg, w);
  std::vector<PyramidLevel> pyr = build_pyramid(stem, cfg, w);
  std::vector<PyramidLevel> necked =
      cfg.neck == NeckKind::sppf ? neck_sppf(pyr, cfg, w) : neck_identity(pyr, cfg, w);
  ForwardResult res;
  res.points = generate_points(necked, cfg);
  res.raw = heads_forward(necked, cfg, w);
  return res;
}

}  // namespace ama
