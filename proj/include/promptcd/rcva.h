#ifndef PROMPTCD_RCVA_H_
#define PROMPTCD_RCVA_H_

#include "promptcd/grid.h"

namespace promptcd {

// Per-pixel change magnitude, >= 0.
using MagnitudeMap = Grid<double>;

// Robust change vector analysis, neighborhood-search form:
//   d1(p) = min_q |pre(p) - post(q)|,  d2(p) = min_q |post(p) - pre(q)|
//   value(p) = min(d1, d2)
// with q over the window x window neighborhood of p clipped at the borders
// and |.| the Euclidean norm over RGB.
MagnitudeMap rcva_magnitude(const RgbImage& pre, const RgbImage& post,
                            int window = 3);

struct ThresholdResult {
  double threshold = 0.0;
  BinaryMask change_mask;  // value > threshold
};

// Otsu on a 256-bin histogram spanning [min, max]. A constant map yields
// threshold = that constant and an empty mask.
ThresholdResult otsu_threshold(const MagnitudeMap& map);

// Linear rescale of the map to the full 16-bit range (for inspection).
Grid<std::uint16_t> magnitude_to_u16(const MagnitudeMap& map);

}  // namespace promptcd

#endif  // PROMPTCD_RCVA_H_
