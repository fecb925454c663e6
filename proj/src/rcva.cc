#include "promptcd/rcva.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "promptcd/errors.h"

namespace promptcd {
namespace {

constexpr int kBins = 256;

double distance(const Rgb& a, const Rgb& b) {
  const double dr = static_cast<double>(a.r) - b.r;
  const double dg = static_cast<double>(a.g) - b.g;
  const double db = static_cast<double>(a.b) - b.b;
  return std::sqrt(dr * dr + dg * dg + db * db);
}

}  // namespace

MagnitudeMap rcva_magnitude(const RgbImage& pre, const RgbImage& post,
                            int window) {
  if (!pre.same_shape(post)) {
    throw InputError("pre and post images differ in size");
  }
  if (window < 1 || window % 2 == 0) {
    throw InputError("RCVA window must be odd and >= 1, got " +
                     std::to_string(window));
  }
  const int r = window / 2;
  const int w = pre.width();
  const int h = pre.height();
  MagnitudeMap out(w, h, 0.0);
  for (int y = 0; y < h; ++y) {
    const int y0 = std::max(0, y - r), y1 = std::min(h - 1, y + r);
    for (int x = 0; x < w; ++x) {
      const int x0 = std::max(0, x - r), x1 = std::min(w - 1, x + r);
      double d1 = std::numeric_limits<double>::infinity();
      double d2 = d1;
      for (int qy = y0; qy <= y1; ++qy) {
        for (int qx = x0; qx <= x1; ++qx) {
          d1 = std::min(d1, distance(pre.at(x, y), post.at(qx, qy)));
          d2 = std::min(d2, distance(post.at(x, y), pre.at(qx, qy)));
        }
      }
      out.at(x, y) = std::min(d1, d2);
    }
  }
  return out;
}

ThresholdResult otsu_threshold(const MagnitudeMap& map) {
  const auto values = map.pixels();
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  ThresholdResult result{lo, BinaryMask(map.width(), map.height(), 0)};
  if (!(hi > lo)) return result;

  // Bin i covers (lo + i*width, lo + (i+1)*width]; the minimum goes to bin 0.
  const double width = (hi - lo) / kBins;
  std::array<std::int64_t, kBins> histogram{};
  for (double v : values) {
    const int bin = static_cast<int>(std::ceil((v - lo) / width)) - 1;
    ++histogram[std::clamp(bin, 0, kBins - 1)];
  }

  std::int64_t total_count = 0, total_sum = 0;
  for (int i = 0; i < kBins; ++i) {
    total_count += histogram[i];
    total_sum += histogram[i] * i;
  }
  std::int64_t n0 = 0, s0 = 0;
  double best_score = -1.0;
  int best_bin = 0;
  for (int t = 0; t < kBins - 1; ++t) {
    n0 += histogram[t];
    s0 += histogram[t] * t;
    const std::int64_t n1 = total_count - n0;
    const std::int64_t s1 = total_sum - s0;
    if (n0 == 0 || n1 == 0) continue;
    // n0 * n1 * (mean0 - mean1)^2, up to a constant factor.
    const double diff = static_cast<double>(s0) * static_cast<double>(n1) -
                        static_cast<double>(s1) * static_cast<double>(n0);
    const double score =
        diff * diff / (static_cast<double>(n0) * static_cast<double>(n1));
    if (score > best_score) {
      best_score = score;
      best_bin = t;
    }
  }

  result.threshold = lo + (best_bin + 1) * width;
  auto mask = result.change_mask.pixels();
  for (std::size_t i = 0; i < values.size(); ++i) {
    mask[i] = values[i] > result.threshold;
  }
  return result;
}

Grid<std::uint16_t> magnitude_to_u16(const MagnitudeMap& map) {
  const auto values = map.pixels();
  const double hi = *std::max_element(values.begin(), values.end());
  Grid<std::uint16_t> out(map.width(), map.height(), 0);
  if (hi <= 0.0) return out;
  auto dst = out.pixels();
  for (std::size_t i = 0; i < values.size(); ++i) {
    dst[i] = static_cast<std::uint16_t>(std::lround(values[i] / hi * 65535.0));
  }
  return out;
}

}  // namespace promptcd
