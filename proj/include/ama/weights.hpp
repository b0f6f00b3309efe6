#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "ama/config.hpp"
#include "ama/errors.hpp"
#include "ama/kernels.hpp"

namespace ama {

struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<float> data;

  std::size_t elem_count() const {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    return n;
  }
};

inline std::string shape_to_string(const std::vector<std::size_t>& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

// Named tensors for one deterministic forward pass. std::map keeps
// iteration (and thus serialization) order stable.
struct WeightBundle {
  std::map<std::string, Tensor> tensors;

  bool has(const std::string& name) const { return tensors.count(name) > 0; }

  const Tensor& at(const std::string& name) const {
    auto it = tensors.find(name);
    if (it == tensors.end()) throw ConfigError("missing tensor '" + name + "'");
    return it->second;
  }

  const Tensor& require(const std::string& name, const std::vector<std::size_t>& shape) const {
    const Tensor& t = at(name);
    if (t.shape != shape)
      throw ConfigError("tensor '" + name + "' has shape " + shape_to_string(t.shape) +
                        ", expected " + shape_to_string(shape));
    return t;
  }
};

struct TensorSpec {
  std::string name;
  std::vector<std::size_t> shape;
};

// Every tensor name the model requires for the given configuration.
// Heads are shared across pyramid levels.
inline std::vector<TensorSpec> required_tensors(const AmaConfig& cfg) {
  const std::size_t c = cfg.channels;
  const std::size_t d = cfg.input_dim;
  const std::size_t k = static_cast<std::size_t>(cfg.num_classes);
  std::vector<TensorSpec> out;

  out.push_back({"stem.conv.w", {c, d, 1}});
  out.push_back({"stem.conv.b", {c}});
  out.push_back({"stem.ln.gamma", {c}});
  out.push_back({"stem.ln.beta", {c}});

  for (std::size_t l = 1; l < cfg.num_levels; ++l) {
    const std::string p = "backbone.l" + std::to_string(l) + ".";
    out.push_back({p + "conv.w", {c, c, 3}});
    out.push_back({p + "conv.b", {c}});
    out.push_back({p + "ln.gamma", {c}});
    out.push_back({p + "ln.beta", {c}});
  }

  for (std::size_t l = 0; l < cfg.num_levels; ++l) {
    const std::string p = "neck.l" + std::to_string(l) + ".";
    if (cfg.neck == NeckKind::sppf) {
      out.push_back({p + "reduce.w", {c / 2, c, 1}});
      out.push_back({p + "reduce.b", {c / 2}});
      out.push_back({p + "expand.w", {c, 2 * c, 1}});
      out.push_back({p + "expand.b", {c}});
    }
    out.push_back({p + "ln.gamma", {c}});
    out.push_back({p + "ln.beta", {c}});
  }

  out.push_back({"cls_head.0.w", {c, c, 1}});
  out.push_back({"cls_head.0.b", {c}});
  out.push_back({"cls_head.1.w", {k, c, 1}});
  out.push_back({"cls_head.1.b", {k}});
  out.push_back({"reg_head.0.w", {c, c, 1}});
  out.push_back({"reg_head.0.b", {c}});
  out.push_back({"reg_head.1.w", {2, c, 1}});
  out.push_back({"reg_head.1.b", {2}});
  return out;
}

// Presence, shape, and finiteness of everything the config needs.
// Extra tensors in the bundle are allowed and ignored.
inline void validate_weights(const WeightBundle& w, const AmaConfig& cfg) {
  for (const TensorSpec& spec : required_tensors(cfg)) {
    const Tensor& t = w.require(spec.name, spec.shape);
    for (float v : t.data)
      if (!std::isfinite(v)) throw DataError("tensor '" + spec.name + "' contains non-finite values");
    if (t.data.size() != t.elem_count())
      throw ConfigError("tensor '" + spec.name + "' data size does not match its shape");
  }
}

// View a pair of tensors "<prefix>.w"/"<prefix>.b" as convolution weights.
inline Conv1dKernel conv_from(const WeightBundle& w, const std::string& prefix,
                              std::size_t out_ch, std::size_t in_ch, std::size_t ksize) {
  const Tensor& wt = w.require(prefix + ".w", {out_ch, in_ch, ksize});
  const Tensor& bt = w.require(prefix + ".b", {out_ch});
  Conv1dKernel k;
  k.out_ch = out_ch;
  k.in_ch = in_ch;
  k.ksize = ksize;
  k.w = wt.data;
  k.b = bt.data;
  return k;
}

inline std::vector<float> vec_from(const WeightBundle& w, const std::string& name, std::size_t len) {
  return w.require(name, {len}).data;
}

}  // namespace ama
