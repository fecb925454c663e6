#ifndef PROMPTCD_MASK_OPS_H_
#define PROMPTCD_MASK_OPS_H_

#include <cstdint>
#include <vector>

#include "promptcd/grid.h"

namespace promptcd {

enum class Connectivity { kFour = 4, kEight = 8 };

// Throws InputError for values other than 4 or 8.
Connectivity connectivity_from_int(int value);

// Connected-component labeling of a binary mask. Label 0 is background;
// objects are numbered 1..num_objects in raster-scan order of their first
// pixel.
struct LabeledMask {
  Grid<std::int32_t> labels;
  int num_objects = 0;

  int width() const { return labels.width(); }
  int height() const { return labels.height(); }
  int at(PixelPoint p) const { return labels.at(p); }
};

struct BoundingBox {
  int min_x = 0;
  int min_y = 0;
  int max_x = 0;  // inclusive
  int max_y = 0;  // inclusive

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

struct ObjectStats {
  int label = 0;
  std::int64_t area = 0;
  BoundingBox bbox;
  double centroid_x = 0.0;
  double centroid_y = 0.0;
};

LabeledMask connected_components(const BinaryMask& mask,
                                 Connectivity connectivity);

// One entry per label 1..N, ascending.
std::vector<ObjectStats> object_stats(const LabeledMask& labeled);

// City-block distance from each pixel of `label` to the nearest pixel outside
// it (two-pass chamfer, out-of-bounds counts as outside). Other pixels are 0.
Grid<std::int32_t> object_distance_transform(const LabeledMask& labeled,
                                             int label);

// Deterministic prompt points inside one object. The first point is the
// distance-transform peak (ties: raster order); the rest are drawn without
// replacement from the object's 4-interior pixels, or from all its pixels
// when the interior is too small. Returns min(k, area) distinct points.
std::vector<PixelPoint> interior_point_sample(const LabeledMask& labeled,
                                              int label, int k,
                                              std::uint64_t seed);

// Boolean mask of the pixels carrying any of `labels`.
BinaryMask mask_of_labels(const LabeledMask& labeled,
                          const std::vector<int>& labels);

}  // namespace promptcd

#endif  // PROMPTCD_MASK_OPS_H_
