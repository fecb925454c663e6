#include "promptcd/segmenter.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "promptcd/errors.h"

namespace promptcd {

void validate_prompts(const ImageEmbedding& embedding,
                      std::span<const PointPrompt> prompts) {
  if (prompts.empty()) throw InputError("segment() needs at least one prompt");
  for (const PointPrompt& p : prompts) {
    if (p.point.x < 0 || p.point.y < 0 ||
        p.point.x >= embedding.source_width ||
        p.point.y >= embedding.source_height) {
      throw InputError("prompt (" + std::to_string(p.point.x) + ", " +
                       std::to_string(p.point.y) + ") outside image");
    }
  }
}

double clamp_confidence(double value) {
  if (std::isnan(value)) return 0.0;
  return std::clamp(value, 0.0, 1.0);
}

}  // namespace promptcd
