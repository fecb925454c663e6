#ifndef PROMPTCD_MOCK_SEGMENTER_H_
#define PROMPTCD_MOCK_SEGMENTER_H_

#include <cstdint>

#include "promptcd/mask_ops.h"
#include "promptcd/segmenter.h"

namespace promptcd {

// Post-change class map; pixels equal to target_class hold an object of
// interest.
struct GroundTruthSemanticMap {
  Grid<std::uint8_t> class_ids;
  int target_class = 1;
};

struct MockOptions {
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
};

// Oracle backend driven by a ground-truth class map.
//
//   confidence = clamp(valid / foreground + eps, 0, 1)
//
// where `valid` counts foreground prompts landing on target_class and eps is
// Gaussian(0, sigma) drawn from a stream keyed by (seed, prompt list), so the
// same prompts always receive the same noise. The mask is the union of the
// 8-connected target regions hit by a foreground prompt.
class MockSegmenter final : public Segmenter {
 public:
  MockSegmenter(GroundTruthSemanticMap truth, MockOptions options = {});

  std::string id() const override { return "mock"; }
  ImageEmbedding embed_image(const RgbImage& image) const override;
  SegmentationOutcome segment(
      const ImageEmbedding& embedding,
      std::span<const PointPrompt> prompts) const override;

  // Confidence before noise and clamping.
  double raw_confidence(std::span<const PointPrompt> prompts) const;

 private:
  GroundTruthSemanticMap truth_;
  MockOptions options_;
  LabeledMask target_regions_;
};

}  // namespace promptcd

#endif  // PROMPTCD_MOCK_SEGMENTER_H_
