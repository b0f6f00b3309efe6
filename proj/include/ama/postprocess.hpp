#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <tuple>
#include <vector>

#include "ama/errors.hpp"
#include "ama/kernels.hpp"
#include "ama/model.hpp"

// Raw predictions -> timestamped detections:
// threshold -> top-k -> decode -> duration filter -> NMS -> seconds -> final
// filter. All tie rules are total, so the pipeline output is independent of
// input ordering.

namespace ama {

// Candidate (point, class) pair that survived the score threshold.
struct Candidate {
  double t = 0.0;       // base-grid location
  double stride = 1.0;  // level stride
  double off_l = 0.0;
  double off_r = 0.0;
  int label = 0;  // 1..num_classes
  double score = 0.0;
};

// Decoded segment in base-grid chunk units.
struct GridSegment {
  double left = 0.0;
  double right = 0.0;
  int label = 0;
  double score = 0.0;
};

// Final detection in seconds.
struct Detection {
  double t_start = 0.0;
  double t_end = 0.0;
  int label = 0;
  double score = 0.0;
};

struct PostprocessParams {
  double pre_nms_thresh = 0.2;
  std::size_t pre_nms_topk = 5000;
  double nms_iou = 0.5;
  double min_duration_chunks = 0.0;
  double min_score = 0.5;  // final filter, strict ">"
};

inline bool candidate_before(const Candidate& a, const Candidate& b) {
  return std::tie(b.score, a.t, a.label, a.stride) < std::tie(a.score, b.t, b.label, b.stride);
}

// Sigmoid scores; drop (point, class) pairs below the threshold; keep the
// global top-k by score with ties broken by earlier t, then lower label.
inline std::vector<Candidate> score_filter_topk(const RawPrediction& raw,
                                                const std::vector<std::vector<Point>>& points,
                                                double pre_nms_thresh = 0.2,
                                                std::size_t topk = 5000) {
  if (!(pre_nms_thresh >= 0.0 && pre_nms_thresh <= 1.0))
    throw ConfigError("score_filter_topk: threshold must be in [0,1]");
  if (raw.levels.size() != points.size())
    throw ConfigError("score_filter_topk: levels/points size mismatch");

  std::vector<Candidate> cands;
  for (std::size_t l = 0; l < raw.levels.size(); ++l) {
    const LevelPrediction& lvl = raw.levels[l];
    if (lvl.cls_logits.rows != points[l].size())
      throw ConfigError("score_filter_topk: logits/points length mismatch");
    for (std::size_t i = 0; i < points[l].size(); ++i) {
      if (!lvl.mask[i]) continue;
      for (std::size_t c = 0; c < lvl.cls_logits.cols; ++c) {
        const double score = sigmoid(static_cast<double>(lvl.cls_logits(i, c)));
        if (score < pre_nms_thresh) continue;
        Candidate cand;
        cand.t = points[l][i].t;
        cand.stride = points[l][i].stride;
        cand.off_l = static_cast<double>(lvl.offsets(i, 0));
        cand.off_r = static_cast<double>(lvl.offsets(i, 1));
        cand.label = static_cast<int>(c) + 1;
        cand.score = score;
        cands.push_back(cand);
      }
    }
  }
  std::sort(cands.begin(), cands.end(), candidate_before);
  if (cands.size() > topk) cands.resize(topk);
  return cands;
}

// left = t - offset_l * stride, right = t + offset_r * stride, clamped to
// [0, n_chunks].
inline std::vector<GridSegment> decode_segments(const std::vector<Candidate>& cands,
                                                double n_chunks) {
  std::vector<GridSegment> out;
  out.reserve(cands.size());
  for (const Candidate& c : cands) {
    GridSegment s;
    s.left = std::clamp(c.t - c.off_l * c.stride, 0.0, n_chunks);
    s.right = std::clamp(c.t + c.off_r * c.stride, 0.0, n_chunks);
    s.label = c.label;
    s.score = c.score;
    out.push_back(s);
  }
  return out;
}

inline std::vector<GridSegment> filter_min_duration(const std::vector<GridSegment>& segs,
                                                    double min_chunks) {
  if (!(min_chunks >= 0.0)) throw ConfigError("filter_min_duration: min_chunks must be >= 0");
  std::vector<GridSegment> out;
  out.reserve(segs.size());
  for (const GridSegment& s : segs)
    if (s.right - s.left >= min_chunks) out.push_back(s);
  return out;
}

inline double temporal_iou(double l1, double r1, double l2, double r2) {
  const double inter = std::max(0.0, std::min(r1, r2) - std::max(l1, l2));
  const double uni = (r1 - l1) + (r2 - l2) - inter;
  if (uni <= 0.0) return 0.0;
  return inter / uni;
}

inline bool segment_before(const GridSegment& a, const GridSegment& b) {
  return std::tie(b.score, a.left, a.label, a.right) < std::tie(a.score, b.left, b.label, b.right);
}

// Greedy per-class NMS. Within a class, segments are visited by descending
// score (ties: earlier left, then lower label); a segment is suppressed when
// its tIoU with any kept segment of the same class exceeds the threshold
// (tIoU equal to the threshold survives). The result is sorted globally by
// (score desc, left, label).
inline std::vector<GridSegment> nms_multiclass(const std::vector<GridSegment>& segs,
                                               double iou_thresh = 0.5) {
  if (!(iou_thresh > 0.0 && iou_thresh <= 1.0))
    throw ConfigError("nms_multiclass: iou threshold must be in (0,1]");

  std::map<int, std::vector<GridSegment>> by_class;
  for (const GridSegment& s : segs) by_class[s.label].push_back(s);

  std::vector<GridSegment> kept;
  for (auto& [label, group] : by_class) {
    std::sort(group.begin(), group.end(), segment_before);
    std::vector<GridSegment> cls_kept;
    for (const GridSegment& s : group) {
      bool suppressed = false;
      for (const GridSegment& k : cls_kept) {
        if (temporal_iou(s.left, s.right, k.left, k.right) > iou_thresh) {
          suppressed = true;
          break;
        }
      }
      if (!suppressed) cls_kept.push_back(s);
    }
    kept.insert(kept.end(), cls_kept.begin(), cls_kept.end());
  }
  std::sort(kept.begin(), kept.end(), segment_before);
  return kept;
}

// Feature-grid coordinates to seconds:
// (grid * feat_stride + 0.5 * n_frames) / fps.
inline std::vector<Detection> to_timestamps(const std::vector<GridSegment>& segs,
                                            double feat_stride, double n_frames, double fps) {
  if (!(fps > 0.0)) throw ConfigError("to_timestamps: fps must be positive");
  std::vector<Detection> out;
  out.reserve(segs.size());
  for (const GridSegment& s : segs) {
    Detection d;
    d.t_start = (s.left * feat_stride + 0.5 * n_frames) / fps;
    d.t_end = (s.right * feat_stride + 0.5 * n_frames) / fps;
    d.label = s.label;
    d.score = s.score;
    out.push_back(d);
  }
  return out;
}

// Keep detections whose score strictly exceeds min_score.
inline std::vector<Detection> final_filter(const std::vector<Detection>& dets, double min_score) {
  if (!(min_score >= 0.0 && min_score <= 1.0))
    throw ConfigError("final_filter: min_score must be in [0,1]");
  std::vector<Detection> out;
  out.reserve(dets.size());
  for (const Detection& d : dets)
    if (d.score > min_score) out.push_back(d);
  return out;
}

inline std::vector<Detection> run_pipeline(const RawPrediction& raw,
                                           const std::vector<std::vector<Point>>& points,
                                           double n_chunks, double feat_stride, double n_frames,
                                           double fps, const PostprocessParams& p = {}) {
  std::vector<Candidate> cands =
      score_filter_topk(raw, points, p.pre_nms_thresh, p.pre_nms_topk);
  std::vector<GridSegment> segs = decode_segments(cands, n_chunks);
  segs = filter_min_duration(segs, p.min_duration_chunks);
  segs = nms_multiclass(segs, p.nms_iou);
  std::vector<Detection> dets = to_timestamps(segs, feat_stride, n_frames, fps);
  return final_filter(dets, p.min_score);
}

}  // namespace ama
