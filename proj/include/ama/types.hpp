#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace ama {

// One video's chunk-level features: an n_chunks x dim float32 matrix plus
// the metadata needed to map chunk indices back to wall-clock seconds.
struct FeatureSequence {
  std::string video_id;
  std::size_t n_chunks = 0;
  std::size_t dim = 0;
  double fps = 30.0;
  std::size_t frames_per_chunk = 16;
  std::vector<float> data;  // n_chunks x dim, row-major

  float at(std::size_t chunk, std::size_t d) const { return data[chunk * dim + d]; }
  float& at(std::size_t chunk, std::size_t d) { return data[chunk * dim + d]; }
};

struct AnnSegment {
  int label = 0;  // 1..num_classes
  double start_s = 0.0;
  double end_s = 0.0;
};

struct VideoAnnotation {
  std::string video_id;
  double fps = 30.0;
  double duration_s = 0.0;
  std::vector<AnnSegment> segments;
};

struct AnnotationSet {
  std::vector<VideoAnnotation> videos;
};

// One output detection row: the JSONL/CSV prediction record.
struct PredictionRecord {
  std::string video_id;
  int label = 0;
  double t_start = 0.0;
  double t_end = 0.0;
  double score = 0.0;
};

}  // namespace ama
