#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "ama/errors.hpp"

namespace ama {

enum class BackboneKind { conv, conv_transformer };
enum class NeckKind { identity, sppf };

inline std::string to_string(BackboneKind k) {
  return k == BackboneKind::conv ? "conv" : "convTransformer";
}
inline std::string to_string(NeckKind k) { return k == NeckKind::identity ? "identity" : "sppf"; }

inline BackboneKind backbone_from_string(const std::string& s) {
  if (s == "conv") return BackboneKind::conv;
  if (s == "convTransformer") return BackboneKind::conv_transformer;
  throw ConfigError("unknown backbone kind '" + s + "' (expected conv or convTransformer)");
}
inline NeckKind neck_from_string(const std::string& s) {
  if (s == "identity") return NeckKind::identity;
  if (s == "sppf") return NeckKind::sppf;
  throw ConfigError("unknown neck kind '" + s + "' (expected identity or sppf)");
}

// Regression range of a pyramid level, in base-grid chunk units.
struct RegRange {
  double lo = 0.0;
  double hi = 0.0;
};

// Bounds follow the doubling scheme 0,4,8,16,... with the top level open
// up to 10000 chunks.
inline std::vector<RegRange> default_reg_ranges(std::size_t levels) {
  std::vector<RegRange> out;
  double lo = 0.0;
  double hi = 4.0;
  for (std::size_t l = 0; l < levels; ++l) {
    const double upper = (l + 1 == levels) ? 10000.0 : hi;
    out.push_back({lo, upper});
    lo = hi;
    hi *= 2.0;
  }
  return out;
}

struct AmaConfig {
  std::size_t input_dim = 768;  // 768 (ViT-Base) or 1408 (ViT-Giant)
  std::size_t channels = 256;
  std::size_t num_levels = 6;
  BackboneKind backbone = BackboneKind::conv;
  NeckKind neck = NeckKind::identity;
  std::size_t window = 9;       // attention window for convTransformer
  std::size_t kernel_sppf = 5;  // max-pool kernel in the SPPF neck
  int num_classes = 16;
  std::vector<RegRange> reg_ranges = default_reg_ranges(6);
  double feat_stride = 16.0;        // frames advanced per chunk
  std::size_t frames_per_chunk = 16;
  bool allow_custom_dim = false;    // permit input_dim outside {768, 1408}
};

inline void validate_config(const AmaConfig& cfg) {
  if (cfg.num_levels < 1) throw ConfigError("config: num_levels must be >= 1");
  if (cfg.channels < 1) throw ConfigError("config: channels must be >= 1");
  if (cfg.input_dim < 1) throw ConfigError("config: input_dim must be >= 1");
  if (!cfg.allow_custom_dim && cfg.input_dim != 768 && cfg.input_dim != 1408)
    throw ConfigError("config: input_dim must be 768 or 1408 unless allow_custom_dim is set");
  if (cfg.window % 2 == 0) throw ConfigError("config: window must be odd");
  if (cfg.kernel_sppf % 2 == 0) throw ConfigError("config: kernel_sppf must be odd");
  if (cfg.neck == NeckKind::sppf && cfg.channels % 2 != 0)
    throw ConfigError("config: channels must be even for the sppf neck");
  if (cfg.num_classes < 1) throw ConfigError("config: num_classes must be >= 1");
  if (cfg.reg_ranges.size() != cfg.num_levels)
    throw ConfigError("config: reg_ranges must have one entry per level (" +
                      std::to_string(cfg.num_levels) + " levels, " +
                      std::to_string(cfg.reg_ranges.size()) + " ranges)");
  for (std::size_t l = 0; l < cfg.reg_ranges.size(); ++l) {
    const auto& r = cfg.reg_ranges[l];
    if (!(r.lo < r.hi)) throw ConfigError("config: reg_range lo must be < hi");
    if (l > 0) {
      if (r.lo < cfg.reg_ranges[l - 1].hi)
        throw ConfigError("config: reg_ranges must be non-overlapping and increasing");
    }
  }
  if (cfg.reg_ranges.back().hi < 10000.0)
    throw ConfigError("config: top reg_range upper bound must be >= 10000");
  if (!(cfg.feat_stride > 0.0)) throw ConfigError("config: feat_stride must be positive");
  if (cfg.frames_per_chunk < 1) throw ConfigError("config: frames_per_chunk must be >= 1");
}

}  // namespace ama
