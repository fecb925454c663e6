#include "promptcd/metrics.h"

#include <algorithm>

#include "promptcd/errors.h"

namespace promptcd {

PixelMetrics score(const BinaryMask& predicted, const BinaryMask& reference) {
  if (!predicted.same_shape(reference)) {
    throw InputError("predicted and reference maps differ in size");
  }
  std::int64_t tp = 0, fp = 0, fn = 0;
  auto p = predicted.pixels();
  auto r = reference.pixels();
  for (std::size_t i = 0; i < p.size(); ++i) {
    const bool a = p[i] != 0;
    const bool b = r[i] != 0;
    tp += a && b;
    fp += a && !b;
    fn += !a && b;
  }
  PixelMetrics m;
  if (tp + fp + fn == 0) return {1.0, 1.0, 1.0, 1.0};
  m.iou = static_cast<double>(tp) / static_cast<double>(tp + fp + fn);
  m.precision = tp + fp == 0 ? 0.0 : static_cast<double>(tp) / (tp + fp);
  m.recall = tp + fn == 0 ? 0.0 : static_cast<double>(tp) / (tp + fn);
  m.f1 = m.precision + m.recall == 0.0
             ? 0.0
             : 2.0 * m.precision * m.recall / (m.precision + m.recall);
  return m;
}

std::vector<int> reference_labels(const LabeledMask& labeled,
                                  const BinaryMask& reference) {
  if (!labeled.labels.same_shape(reference)) {
    throw InputError("labeled mask and reference differ in size");
  }
  std::vector<std::int64_t> area(labeled.num_objects + 1, 0);
  std::vector<std::int64_t> hit(labeled.num_objects + 1, 0);
  auto labels = labeled.labels.pixels();
  auto ref = reference.pixels();
  for (std::size_t i = 0; i < labels.size(); ++i) {
    ++area[labels[i]];
    hit[labels[i]] += ref[i] != 0;
  }
  std::vector<int> out;
  for (int label = 1; label <= labeled.num_objects; ++label) {
    if (2 * hit[label] > area[label]) out.push_back(label);
  }
  return out;
}

bool same_label_set(std::vector<int> a, std::vector<int> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  return a == b;
}

}  // namespace promptcd
