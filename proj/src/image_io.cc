#include "promptcd/image_io.h"

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <string>
#include <vector>

#include "promptcd/errors.h"

namespace promptcd {
namespace {

cv::Mat read_png(const std::filesystem::path& path) {
  if (!std::filesystem::is_regular_file(path)) {
    throw InputError("missing file: " + path.string());
  }
  cv::Mat m = cv::imread(path.string(), cv::IMREAD_UNCHANGED);
  if (m.empty()) throw InputError("cannot decode image: " + path.string());
  if (m.depth() != CV_8U) {
    throw InputError("expected 8-bit image: " + path.string());
  }
  return m;
}

void write_png(const std::filesystem::path& path, const cv::Mat& m) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  // Fixed compression settings so output bytes only depend on pixels.
  const std::vector<int> params{cv::IMWRITE_PNG_COMPRESSION, 6,
                                cv::IMWRITE_PNG_STRATEGY,
                                cv::IMWRITE_PNG_STRATEGY_DEFAULT};
  bool ok = false;
  try {
    ok = cv::imwrite(path.string(), m, params);
  } catch (const cv::Exception& e) {
    throw InputError("cannot write " + path.string() + ": " + e.what());
  }
  if (!ok) throw InputError("cannot write " + path.string());
}

template <typename T>
cv::Mat wrap_gray(const Grid<T>& g, int type) {
  cv::Mat m(g.height(), g.width(), type);
  for (int y = 0; y < g.height(); ++y) {
    auto* row = m.ptr<T>(y);
    for (int x = 0; x < g.width(); ++x) row[x] = g.at(x, y);
  }
  return m;
}

}  // namespace

BinaryMask read_mask_png(const std::filesystem::path& path) {
  const cv::Mat m = read_png(path);
  BinaryMask out(m.cols, m.rows, 0);
  const int channels = m.channels();
  for (int y = 0; y < m.rows; ++y) {
    const auto* row = m.ptr<std::uint8_t>(y);
    for (int x = 0; x < m.cols; ++x) {
      bool on = false;
      for (int c = 0; c < channels; ++c) on |= row[x * channels + c] != 0;
      out.at(x, y) = on;
    }
  }
  return out;
}

void write_mask_png(const std::filesystem::path& path, const BinaryMask& mask) {
  cv::Mat m(mask.height(), mask.width(), CV_8UC1);
  for (int y = 0; y < mask.height(); ++y) {
    auto* row = m.ptr<std::uint8_t>(y);
    for (int x = 0; x < mask.width(); ++x) row[x] = mask.at(x, y) ? 255 : 0;
  }
  write_png(path, m);
}

RgbImage read_rgb_png(const std::filesystem::path& path) {
  const cv::Mat m = read_png(path);
  RgbImage out(m.cols, m.rows);
  const int channels = m.channels();
  for (int y = 0; y < m.rows; ++y) {
    const auto* row = m.ptr<std::uint8_t>(y);
    for (int x = 0; x < m.cols; ++x) {
      const auto* px = row + x * channels;
      if (channels >= 3) {
        // OpenCV stores BGR(A).
        out.at(x, y) = {px[2], px[1], px[0]};
      } else {
        out.at(x, y) = {px[0], px[0], px[0]};
      }
    }
  }
  return out;
}

void write_rgb_png(const std::filesystem::path& path, const RgbImage& image) {
  cv::Mat m(image.height(), image.width(), CV_8UC3);
  for (int y = 0; y < image.height(); ++y) {
    auto* row = m.ptr<std::uint8_t>(y);
    for (int x = 0; x < image.width(); ++x) {
      const Rgb& p = image.at(x, y);
      row[3 * x] = p.b;
      row[3 * x + 1] = p.g;
      row[3 * x + 2] = p.r;
    }
  }
  write_png(path, m);
}

Grid<std::uint8_t> read_gray_png(const std::filesystem::path& path) {
  const cv::Mat m = read_png(path);
  if (m.channels() != 1) {
    throw InputError("expected single-channel image: " + path.string());
  }
  Grid<std::uint8_t> out(m.cols, m.rows);
  for (int y = 0; y < m.rows; ++y) {
    const auto* row = m.ptr<std::uint8_t>(y);
    for (int x = 0; x < m.cols; ++x) out.at(x, y) = row[x];
  }
  return out;
}

void write_gray_png(const std::filesystem::path& path,
                    const Grid<std::uint8_t>& image) {
  write_png(path, wrap_gray(image, CV_8UC1));
}

void write_gray16_png(const std::filesystem::path& path,
                      const Grid<std::uint16_t>& image) {
  write_png(path, wrap_gray(image, CV_16UC1));
}

}  // namespace promptcd
