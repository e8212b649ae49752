#include "nnlrp/oversample.hpp"

#include <cmath>

#include "nnlrp/error.hpp"
#include "nnlrp/parallel.hpp"

namespace nnlrp {
namespace {

Tensor extractCrop(const Tensor& image, Index oy, Index ox, Index cropH,
                   Index cropW, bool mirror) {
  const Index c = image.extent(0);
  const Index w = image.extent(2);
  Tensor crop = Tensor::zeros({c, cropH, cropW});
  for (Index ch = 0; ch < c; ++ch) {
    const double* plane = image.data() + ch * image.extent(1) * w;
    double* out = crop.data() + ch * cropH * cropW;
    for (Index y = 0; y < cropH; ++y) {
      const double* row = plane + (oy + y) * w + ox;
      double* dst = out + y * cropW;
      if (mirror) {
        for (Index x = 0; x < cropW; ++x) dst[x] = row[cropW - 1 - x];
      } else {
        for (Index x = 0; x < cropW; ++x) dst[x] = row[x];
      }
    }
  }
  return crop;
}

}  // namespace

std::vector<Tensor> tenCrops(const Tensor& image, Index cropH, Index cropW) {
  require(image.rank() == 3, ErrorCode::kBadInput,
          "ten-crop needs a (C,H,W) image, got " +
              shapeToString(image.shape()));
  const Index h = image.extent(1);
  const Index w = image.extent(2);
  require(cropH >= 1 && cropW >= 1, ErrorCode::kBadInput,
          "crop extent must be positive");
  require(cropH <= h && cropW <= w, ErrorCode::kBadInput,
          "image " + shapeToString(image.shape()) +
              " is smaller than the " + std::to_string(cropH) + "x" +
              std::to_string(cropW) + " crop");

  const Index offH = h - cropH;
  const Index offW = w - cropW;
  const Index origins[5][2] = {{0, 0},
                               {0, offW},
                               {offH, 0},
                               {offH, offW},
                               {offH / 2, offW / 2}};
  std::vector<Tensor> crops;
  crops.reserve(10);
  for (int mirror = 0; mirror < 2; ++mirror) {
    for (const auto& origin : origins) {
      crops.push_back(extractCrop(image, origin[0], origin[1], cropH, cropW,
                                  mirror != 0));
    }
  }
  return crops;
}

OversampleResult predictOversampled(const NetworkGraph& net,
                                    const Tensor& image,
                                    double cropFraction) {
  require(cropFraction > 0.0 && cropFraction <= 1.0, ErrorCode::kBadInput,
          "crop fraction must be in (0, 1]");
  require(image.rank() == 3, ErrorCode::kBadInput,
          "oversampling needs a (C,H,W) image, got " +
              shapeToString(image.shape()));
  const Index cropH = static_cast<Index>(
      std::llround(cropFraction * static_cast<double>(image.extent(1))));
  const Index cropW = static_cast<Index>(
      std::llround(cropFraction * static_cast<double>(image.extent(2))));

  const Shape& want = net.inputShape();
  const Shape got = {image.extent(0), cropH, cropW};
  require(want == got, ErrorCode::kBadInput,
          "crop shape " + shapeToString(got) +
              " does not match the network input " + shapeToString(want) +
              " (the engine does not resample)");

  const std::vector<Tensor> crops = tenCrops(image, cropH, cropW);

  OversampleResult result;
  result.cropScores.assign(crops.size(), Tensor{});
  bool usedProbabilities = false;
  parallelFor(static_cast<Index>(crops.size()), [&](Index i) {
    const ForwardTrace trace = net.forward(crops[i]);
    result.cropScores[i] =
        trace.hasProbabilities ? trace.probabilities : trace.logits;
    if (i == 0) usedProbabilities = trace.hasProbabilities;
  });
  result.usedProbabilities = usedProbabilities;

  result.mean = Tensor::zeros(result.cropScores[0].shape());
  for (std::size_t k = 0; k < result.cropScores.size(); ++k) {
    const double n = static_cast<double>(k + 1);
    result.mean.array() +=
        (result.cropScores[k].array() - result.mean.array()) / n;
  }
  return result;
}

}  // namespace nnlrp
