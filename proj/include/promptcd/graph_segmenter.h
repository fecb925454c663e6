#ifndef PROMPTCD_GRAPH_SEGMENTER_H_
#define PROMPTCD_GRAPH_SEGMENTER_H_

#include <array>
#include <filesystem>
#include <memory>
#include <vector>

#include "promptcd/segmenter.h"

namespace promptcd {

// Tensor contract of the exported encoder/decoder pair.
inline constexpr int kModelInputSize = 1024;
inline constexpr int kEmbeddingChannels = 256;
inline constexpr int kEmbeddingSize = 64;
inline constexpr int kLowResMaskSize = 256;
inline constexpr std::array<float, 3> kPixelMean{123.675f, 116.28f, 103.53f};
inline constexpr std::array<float, 3> kPixelStd{58.395f, 57.12f, 57.375f};

struct EncoderInput {
  std::vector<float> blob;  // [1, 3, 1024, 1024], NCHW, RGB order
  double scale = 1.0;       // resized = original * scale
  int resized_width = 0;
  int resized_height = 0;
};

// Longest side to 1024 (bilinear), per-channel normalization, zero padding
// on the bottom/right.
EncoderInput preprocess_for_encoder(const RgbImage& image);

// Decoder point inputs: coordinates scaled into the resized frame plus the
// trailing (0, 0) / -1 padding point the exported decoder expects when no
// box prompt is given.
struct DecoderPoints {
  std::vector<float> coords;  // [1, L + 1, 2]
  std::vector<float> labels;  // [1, L + 1]
};
DecoderPoints encode_points(std::span<const PointPrompt> prompts, double scale);

// Segmenter over `encoder.onnx` / `decoder.onnx`, run with OpenCV's dnn
// module. Graph execution is serialized internally.
class GraphSegmenter final : public Segmenter {
 public:
  // Throws BackendError if either file is missing or fails to load.
  GraphSegmenter(const std::filesystem::path& encoder_path,
                 const std::filesystem::path& decoder_path);
  explicit GraphSegmenter(const std::filesystem::path& model_dir);
  ~GraphSegmenter() override;

  std::string id() const override { return "onnx"; }
  ImageEmbedding embed_image(const RgbImage& image) const override;
  SegmentationOutcome segment(
      const ImageEmbedding& embedding,
      std::span<const PointPrompt> prompts) const override;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace promptcd

#endif  // PROMPTCD_GRAPH_SEGMENTER_H_
