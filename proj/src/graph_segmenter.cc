#include "promptcd/graph_segmenter.h"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <opencv2/core.hpp>
#include <opencv2/dnn.hpp>
#include <opencv2/imgproc.hpp>
#include <string>

#include "promptcd/errors.h"

namespace promptcd {
namespace {

cv::dnn::Net load_net(const std::filesystem::path& path) {
  if (!std::filesystem::is_regular_file(path)) {
    throw BackendError("model file not found: " + path.string());
  }
  try {
    cv::dnn::Net net = cv::dnn::readNetFromONNX(path.string());
    if (net.empty()) throw BackendError("empty graph: " + path.string());
    net.setPreferableBackend(cv::dnn::DNN_BACKEND_OPENCV);
    net.setPreferableTarget(cv::dnn::DNN_TARGET_CPU);
    return net;
  } catch (const cv::Exception& e) {
    throw BackendError("cannot load " + path.string() + ": " + e.what());
  }
}

cv::Mat make_blob(std::initializer_list<int> shape, const float* data) {
  const std::vector<int> dims(shape);
  cv::Mat blob(static_cast<int>(dims.size()), dims.data(), CV_32F);
  std::copy(data, data + blob.total(), blob.ptr<float>());
  return blob;
}

}  // namespace

EncoderInput preprocess_for_encoder(const RgbImage& image) {
  const int w = image.width();
  const int h = image.height();
  EncoderInput out;
  out.scale = static_cast<double>(kModelInputSize) / std::max(w, h);
  out.resized_width = static_cast<int>(w * out.scale + 0.5);
  out.resized_height = static_cast<int>(h * out.scale + 0.5);

  cv::Mat src(h, w, CV_8UC3);
  for (int y = 0; y < h; ++y) {
    auto* row = src.ptr<std::uint8_t>(y);
    for (int x = 0; x < w; ++x) {
      const Rgb& p = image.at(x, y);
      row[3 * x] = p.r;
      row[3 * x + 1] = p.g;
      row[3 * x + 2] = p.b;
    }
  }
  cv::Mat resized;
  cv::resize(src, resized, cv::Size(out.resized_width, out.resized_height), 0,
             0, cv::INTER_LINEAR);

  constexpr std::size_t kPlane =
      static_cast<std::size_t>(kModelInputSize) * kModelInputSize;
  out.blob.assign(3 * kPlane, 0.0f);
  for (int y = 0; y < out.resized_height; ++y) {
    const auto* row = resized.ptr<std::uint8_t>(y);
    for (int x = 0; x < out.resized_width; ++x) {
      for (int c = 0; c < 3; ++c) {
        out.blob[c * kPlane + static_cast<std::size_t>(y) * kModelInputSize +
                 x] = (row[3 * x + c] - kPixelMean[c]) / kPixelStd[c];
      }
    }
  }
  return out;
}

DecoderPoints encode_points(std::span<const PointPrompt> prompts,
                            double scale) {
  DecoderPoints out;
  for (const PointPrompt& p : prompts) {
    out.coords.push_back(static_cast<float>(p.point.x * scale));
    out.coords.push_back(static_cast<float>(p.point.y * scale));
    out.labels.push_back(p.polarity == Polarity::kForeground ? 1.0f : 0.0f);
  }
  out.coords.push_back(0.0f);
  out.coords.push_back(0.0f);
  out.labels.push_back(-1.0f);
  return out;
}

struct GraphSegmenter::Impl {
  std::mutex mutex;
  cv::dnn::Net encoder;
  cv::dnn::Net decoder;
};

GraphSegmenter::GraphSegmenter(const std::filesystem::path& encoder_path,
                               const std::filesystem::path& decoder_path)
    : impl_(std::make_unique<Impl>()) {
  impl_->encoder = load_net(encoder_path);
  impl_->decoder = load_net(decoder_path);
}

GraphSegmenter::GraphSegmenter(const std::filesystem::path& model_dir)
    : GraphSegmenter(model_dir / "encoder.onnx", model_dir / "decoder.onnx") {}

GraphSegmenter::~GraphSegmenter() = default;

ImageEmbedding GraphSegmenter::embed_image(const RgbImage& image) const {
  const EncoderInput input = preprocess_for_encoder(image);
  cv::Mat blob = make_blob({1, 3, kModelInputSize, kModelInputSize},
                           input.blob.data());
  cv::Mat out;
  try {
    std::lock_guard lock(impl_->mutex);
    impl_->encoder.setInput(blob, "image");
    out = impl_->encoder.forward("image_embeddings").clone();
  } catch (const cv::Exception& e) {
    throw BackendError(std::string("encoder failed: ") + e.what());
  }
  constexpr std::size_t kExpected = static_cast<std::size_t>(
      kEmbeddingChannels * kEmbeddingSize * kEmbeddingSize);
  if (out.total() != kExpected || out.type() != CV_32F) {
    throw BackendError("encoder output has " + std::to_string(out.total()) +
                       " elements, expected [1, 256, 64, 64]");
  }
  ImageEmbedding embedding;
  embedding.backend_id = id();
  embedding.source_width = image.width();
  embedding.source_height = image.height();
  embedding.shape = {1, kEmbeddingChannels, kEmbeddingSize, kEmbeddingSize};
  embedding.payload.assign(out.ptr<float>(), out.ptr<float>() + out.total());
  return embedding;
}

SegmentationOutcome GraphSegmenter::segment(
    const ImageEmbedding& embedding,
    std::span<const PointPrompt> prompts) const {
  validate_prompts(embedding, prompts);
  if (embedding.backend_id != id() ||
      embedding.payload.size() !=
          static_cast<std::size_t>(kEmbeddingChannels * kEmbeddingSize *
                                   kEmbeddingSize)) {
    throw BackendError("embedding was not produced by the graph backend");
  }
  const int w = embedding.source_width;
  const int h = embedding.source_height;
  const double scale = static_cast<double>(kModelInputSize) / std::max(w, h);
  const int resized_w = static_cast<int>(w * scale + 0.5);
  const int resized_h = static_cast<int>(h * scale + 0.5);

  const DecoderPoints points = encode_points(prompts, scale);
  const int n = static_cast<int>(points.labels.size());
  const std::vector<float> mask_input(
      static_cast<std::size_t>(kLowResMaskSize) * kLowResMaskSize, 0.0f);
  const float has_mask = 0.0f;
  const float orig_size[2] = {static_cast<float>(h), static_cast<float>(w)};

  std::vector<cv::Mat> outs;
  try {
    std::lock_guard lock(impl_->mutex);
    cv::dnn::Net& net = impl_->decoder;
    net.setInput(make_blob({1, kEmbeddingChannels, kEmbeddingSize,
                            kEmbeddingSize},
                           embedding.payload.data()),
                 "image_embeddings");
    net.setInput(make_blob({1, n, 2}, points.coords.data()), "point_coords");
    net.setInput(make_blob({1, n}, points.labels.data()), "point_labels");
    net.setInput(make_blob({1, 1, kLowResMaskSize, kLowResMaskSize},
                           mask_input.data()),
                 "mask_input");
    net.setInput(make_blob({1}, &has_mask), "has_mask_input");
    net.setInput(make_blob({2}, orig_size), "orig_im_size");
    net.forward(outs, std::vector<cv::String>{"masks", "iou_predictions"});
  } catch (const cv::Exception& e) {
    throw BackendError(std::string("decoder failed: ") + e.what());
  }
  if (outs.size() != 2 || outs[0].dims != 4 || outs[0].type() != CV_32F ||
      outs[1].type() != CV_32F) {
    throw BackendError("decoder outputs do not match [1, M, H, W] / [1, M]");
  }
  const cv::Mat& masks = outs[0];
  const cv::Mat& scores = outs[1];
  const int candidates = masks.size[1];
  if (candidates < 1 || static_cast<int>(scores.total()) != candidates) {
    throw BackendError("decoder returned " + std::to_string(candidates) +
                       " masks but " + std::to_string(scores.total()) +
                       " scores");
  }

  const float* score = scores.ptr<float>();
  const int best = static_cast<int>(std::max_element(score, score + candidates) -
                                    score);
  const int mh = masks.size[2];
  const int mw = masks.size[3];
  cv::Mat logits(mh, mw, CV_32F,
                 const_cast<float*>(masks.ptr<float>()) +
                     static_cast<std::size_t>(best) * mh * mw);
  cv::Mat full;
  if (mh == h && mw == w) {
    full = logits;
  } else {
    // Low-resolution output in the padded model frame: upsample, strip the
    // padding, then map back to the source size.
    cv::Mat upsampled;
    cv::resize(logits, upsampled, cv::Size(kModelInputSize, kModelInputSize),
               0, 0, cv::INTER_LINEAR);
    cv::resize(upsampled(cv::Rect(0, 0, resized_w, resized_h)), full,
               cv::Size(w, h), 0, 0, cv::INTER_LINEAR);
  }

  SegmentationOutcome outcome{BinaryMask(w, h, 0),
                              clamp_confidence(score[best])};
  for (int y = 0; y < h; ++y) {
    const float* row = full.ptr<float>(y);
    for (int x = 0; x < w; ++x) outcome.mask.at(x, y) = row[x] > 0.0f;
  }
  return outcome;
}

}  // namespace promptcd
