#include "promptcd/mask_ops.h"

#include <algorithm>
#include <limits>
#include <numeric>
#include <string>

#include "promptcd/errors.h"
#include "promptcd/rng.h"

namespace promptcd {
namespace {

class DisjointSets {
 public:
  int make() {
    parent_.push_back(static_cast<int>(parent_.size()));
    return parent_.back();
  }

  int find(int x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  void join(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    // Keep the smaller provisional id as root.
    if (b < a) std::swap(a, b);
    parent_[b] = a;
  }

 private:
  std::vector<int> parent_;
};

void check_label(const LabeledMask& labeled, int label) {
  if (label < 1 || label > labeled.num_objects) {
    throw InputError("unknown object label " + std::to_string(label) +
                     " (mask has " + std::to_string(labeled.num_objects) +
                     " objects)");
  }
}

}  // namespace

Connectivity connectivity_from_int(int value) {
  if (value == 4) return Connectivity::kFour;
  if (value == 8) return Connectivity::kEight;
  throw InputError("connectivity must be 4 or 8, got " + std::to_string(value));
}

LabeledMask connected_components(const BinaryMask& mask,
                                 Connectivity connectivity) {
  const int w = mask.width();
  const int h = mask.height();
  Grid<std::int32_t> provisional(w, h, -1);
  DisjointSets sets;
  const bool diagonal = connectivity == Connectivity::kEight;

  // First pass: provisional labels from the already-visited neighbors
  // (west, north-west, north, north-east).
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!mask.at(x, y)) continue;
      int current = -1;
      auto visit = [&](int nx, int ny) {
        if (!mask.contains(nx, ny) || !mask.at(nx, ny)) return;
        const int other = provisional.at(nx, ny);
        if (current < 0) {
          current = other;
        } else {
          sets.join(current, other);
        }
      };
      visit(x - 1, y);
      visit(x, y - 1);
      if (diagonal) {
        visit(x - 1, y - 1);
        visit(x + 1, y - 1);
      }
      provisional.at(x, y) = current < 0 ? sets.make() : current;
    }
  }

  // Second pass: resolve roots and renumber by first raster encounter.
  LabeledMask out{Grid<std::int32_t>(w, h, 0), 0};
  std::vector<std::int32_t> final_id;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int p = provisional.at(x, y);
      if (p < 0) continue;
      const int root = sets.find(p);
      if (static_cast<std::size_t>(root) >= final_id.size()) {
        final_id.resize(root + 1, 0);
      }
      if (final_id[root] == 0) final_id[root] = ++out.num_objects;
      out.labels.at(x, y) = final_id[root];
    }
  }
  return out;
}

std::vector<ObjectStats> object_stats(const LabeledMask& labeled) {
  const int n = labeled.num_objects;
  std::vector<ObjectStats> stats(n);
  std::vector<double> sum_x(n, 0.0), sum_y(n, 0.0);
  for (int i = 0; i < n; ++i) {
    stats[i].label = i + 1;
    stats[i].bbox = {std::numeric_limits<int>::max(),
                     std::numeric_limits<int>::max(), -1, -1};
  }
  for (int y = 0; y < labeled.height(); ++y) {
    for (int x = 0; x < labeled.width(); ++x) {
      const int label = labeled.labels.at(x, y);
      if (label == 0) continue;
      ObjectStats& s = stats[label - 1];
      ++s.area;
      s.bbox.min_x = std::min(s.bbox.min_x, x);
      s.bbox.min_y = std::min(s.bbox.min_y, y);
      s.bbox.max_x = std::max(s.bbox.max_x, x);
      s.bbox.max_y = std::max(s.bbox.max_y, y);
      sum_x[label - 1] += x;
      sum_y[label - 1] += y;
    }
  }
  for (int i = 0; i < n; ++i) {
    const auto area = static_cast<double>(stats[i].area);
    stats[i].centroid_x = sum_x[i] / area;
    stats[i].centroid_y = sum_y[i] / area;
  }
  return stats;
}

Grid<std::int32_t> object_distance_transform(const LabeledMask& labeled,
                                             int label) {
  check_label(labeled, label);
  const int w = labeled.width();
  const int h = labeled.height();
  constexpr std::int32_t kFar = std::numeric_limits<std::int32_t>::max() / 2;
  Grid<std::int32_t> dist(w, h, 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (labeled.labels.at(x, y) == label) dist.at(x, y) = kFar;
    }
  }
  // Outside the image is treated as distance 0.
  auto get = [&](int x, int y) {
    return dist.contains(x, y) ? dist.at(x, y) : 0;
  };
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      auto& d = dist.at(x, y);
      if (d == 0) continue;
      d = std::min({d, get(x - 1, y) + 1, get(x, y - 1) + 1});
    }
  }
  for (int y = h - 1; y >= 0; --y) {
    for (int x = w - 1; x >= 0; --x) {
      auto& d = dist.at(x, y);
      if (d == 0) continue;
      d = std::min({d, get(x + 1, y) + 1, get(x, y + 1) + 1});
    }
  }
  return dist;
}

std::vector<PixelPoint> interior_point_sample(const LabeledMask& labeled,
                                              int label, int k,
                                              std::uint64_t seed) {
  check_label(labeled, label);
  if (k < 1) {
    throw InputError("points per object must be >= 1, got " +
                     std::to_string(k));
  }
  const Grid<std::int32_t> dist = object_distance_transform(labeled, label);

  PixelPoint peak{-1, -1};
  std::int32_t best = 0;
  std::vector<PixelPoint> pixels;
  std::vector<PixelPoint> interior;
  auto inside = [&](int x, int y) {
    return labeled.labels.contains(x, y) && labeled.labels.at(x, y) == label;
  };
  for (int y = 0; y < labeled.height(); ++y) {
    for (int x = 0; x < labeled.width(); ++x) {
      if (labeled.labels.at(x, y) != label) continue;
      if (dist.at(x, y) > best) {
        best = dist.at(x, y);
        peak = {x, y};
      }
      pixels.push_back({x, y});
      if (inside(x - 1, y) && inside(x + 1, y) && inside(x, y - 1) &&
          inside(x, y + 1)) {
        interior.push_back({x, y});
      }
    }
  }

  const std::size_t count = std::min<std::size_t>(k, pixels.size());
  std::vector<PixelPoint> out{peak};
  if (count == 1) return out;

  auto drop_peak = [&](std::vector<PixelPoint>& v) {
    v.erase(std::remove(v.begin(), v.end(), peak), v.end());
  };
  drop_peak(interior);
  std::vector<PixelPoint>& pool =
      interior.size() >= count - 1 ? interior : (drop_peak(pixels), pixels);

  // Partial Fisher-Yates.
  Rng rng(seed);
  for (std::size_t i = 0; i + 1 < count; ++i) {
    const std::size_t j = i + rng.below(pool.size() - i);
    std::swap(pool[i], pool[j]);
    out.push_back(pool[i]);
  }
  return out;
}

BinaryMask mask_of_labels(const LabeledMask& labeled,
                          const std::vector<int>& labels) {
  std::vector<std::uint8_t> selected(labeled.num_objects + 1, 0);
  for (int label : labels) {
    check_label(labeled, label);
    selected[label] = 1;
  }
  BinaryMask out(labeled.width(), labeled.height(), 0);
  auto src = labeled.labels.pixels();
  auto dst = out.pixels();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = selected[src[i]];
  return out;
}

}  // namespace promptcd
