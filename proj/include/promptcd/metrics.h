#ifndef PROMPTCD_METRICS_H_
#define PROMPTCD_METRICS_H_

#include <vector>

#include "promptcd/grid.h"
#include "promptcd/mask_ops.h"

namespace promptcd {

struct PixelMetrics {
  double iou = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Changed-pixel metrics. When both masks are empty every metric is 1;
// otherwise a zero denominator gives 0.
PixelMetrics score(const BinaryMask& predicted, const BinaryMask& reference);

// Objects of `labeled` with more than half of their pixels inside
// `reference`, ascending.
std::vector<int> reference_labels(const LabeledMask& labeled,
                                  const BinaryMask& reference);

// Order-insensitive comparison of label sets.
bool same_label_set(std::vector<int> a, std::vector<int> b);

}  // namespace promptcd

#endif  // PROMPTCD_METRICS_H_
