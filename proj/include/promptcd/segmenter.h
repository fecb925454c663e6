#ifndef PROMPTCD_SEGMENTER_H_
#define PROMPTCD_SEGMENTER_H_

#include <span>
#include <string>
#include <vector>

#include "promptcd/grid.h"

namespace promptcd {

enum class Polarity { kBackground = 0, kForeground = 1 };

// Point in original post-change image coordinates.
struct PointPrompt {
  PixelPoint point;
  Polarity polarity = Polarity::kForeground;

  friend bool operator==(const PointPrompt&, const PointPrompt&) = default;
};

// Result of running the image encoder once. Reusable for any number of
// segment() calls on the same image.
struct ImageEmbedding {
  std::string backend_id;
  int source_width = 0;
  int source_height = 0;
  std::vector<int> shape;
  std::vector<float> payload;
};

struct SegmentationOutcome {
  BinaryMask mask;          // source image dimensions
  double confidence = 0.0;  // in [0, 1]
};

// Promptable segmentation backend: embed once, segment many.
//
// Implementations must give results that depend only on (embedding,
// prompts), and must tolerate concurrent segment() calls on one embedding.
class Segmenter {
 public:
  virtual ~Segmenter() = default;

  virtual std::string id() const = 0;
  virtual ImageEmbedding embed_image(const RgbImage& image) const = 0;
  virtual SegmentationOutcome segment(
      const ImageEmbedding& embedding,
      std::span<const PointPrompt> prompts) const = 0;
};

// Throws InputError if `prompts` is empty or any point is outside the
// embedding's source image.
void validate_prompts(const ImageEmbedding& embedding,
                      std::span<const PointPrompt> prompts);

double clamp_confidence(double value);

}  // namespace promptcd

#endif  // PROMPTCD_SEGMENTER_H_
