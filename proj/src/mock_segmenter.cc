#include "promptcd/mock_segmenter.h"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "promptcd/errors.h"
#include "promptcd/rng.h"

namespace promptcd {

namespace {

BinaryMask target_mask(const GroundTruthSemanticMap& truth) {
  BinaryMask mask(truth.class_ids.width(), truth.class_ids.height(), 0);
  auto src = truth.class_ids.pixels();
  auto dst = mask.pixels();
  for (std::size_t i = 0; i < src.size(); ++i) {
    dst[i] = src[i] == truth.target_class;
  }
  return mask;
}

}  // namespace

MockSegmenter::MockSegmenter(GroundTruthSemanticMap truth, MockOptions options)
    : truth_(std::move(truth)), options_(options) {
  if (truth_.class_ids.empty()) {
    throw InputError("mock backend needs a non-empty semantic map");
  }
  if (options_.noise_sigma < 0.0 || !std::isfinite(options_.noise_sigma)) {
    throw InputError("mock noise sigma must be finite and >= 0");
  }
  target_regions_ =
      connected_components(target_mask(truth_), Connectivity::kEight);
}

ImageEmbedding MockSegmenter::embed_image(const RgbImage& image) const {
  if (!truth_.class_ids.same_shape(image)) {
    throw InputError("semantic map is " +
                     std::to_string(truth_.class_ids.width()) + "x" +
                     std::to_string(truth_.class_ids.height()) +
                     " but post-change image is " +
                     std::to_string(image.width()) + "x" +
                     std::to_string(image.height()));
  }
  return ImageEmbedding{id(), image.width(), image.height(), {}, {}};
}

double MockSegmenter::raw_confidence(
    std::span<const PointPrompt> prompts) const {
  int foreground = 0;
  int valid = 0;
  for (const PointPrompt& p : prompts) {
    if (p.polarity != Polarity::kForeground) continue;
    ++foreground;
    valid += truth_.class_ids.at(p.point) == truth_.target_class;
  }
  return foreground == 0 ? 0.0 : static_cast<double>(valid) / foreground;
}

SegmentationOutcome MockSegmenter::segment(
    const ImageEmbedding& embedding,
    std::span<const PointPrompt> prompts) const {
  validate_prompts(embedding, prompts);
  if (!truth_.class_ids.same_shape(embedding.source_width,
                                   embedding.source_height)) {
    throw BackendError("embedding does not belong to this mock backend");
  }

  double confidence = raw_confidence(prompts);
  if (options_.noise_sigma > 0.0) {
    std::uint64_t key = options_.seed;
    for (const PointPrompt& p : prompts) {
      key = combine_seed(key, (static_cast<std::uint64_t>(p.point.x) << 33) |
                                  (static_cast<std::uint64_t>(p.point.y) << 1) |
                                  static_cast<std::uint64_t>(p.polarity));
    }
    Rng rng(key);
    confidence += options_.noise_sigma * rng.gaussian();
  }

  std::vector<int> hit;
  for (const PointPrompt& p : prompts) {
    if (p.polarity != Polarity::kForeground) continue;
    const int region = target_regions_.at(p.point);
    if (region != 0) hit.push_back(region);
  }
  std::sort(hit.begin(), hit.end());
  hit.erase(std::unique(hit.begin(), hit.end()), hit.end());

  return {mask_of_labels(target_regions_, hit), clamp_confidence(confidence)};
}

}  // namespace promptcd
