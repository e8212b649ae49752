// Builds the demo model used by the README walkthrough: a 2-class 8x8
// "bright quadrant" task (class 0 lights the top-left quadrant, class 1 the
// bottom-right), trained from a fixed seed. Writes the trained model, two
// sample images as PPM, and one raw tensor fixture.

#include <cstdio>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "nnlrp/autodiff.hpp"
#include "nnlrp/graph.hpp"
#include "nnlrp/heatmap.hpp"
#include "nnlrp/layer.hpp"
#include "nnlrp/model_io.hpp"
#include "nnlrp/rng.hpp"

namespace {

using nnlrp::Index;
using nnlrp::Tensor;

constexpr Index kSide = 8;
constexpr Index kHalf = kSide / 2;

/// Byte image (3,8,8) with one quadrant bright. Returned values are integers
/// in [0,255] so the PPM file reproduces them exactly.
Tensor byteImage(std::mt19937_64& rng, Index label) {
  Tensor bytes = Tensor::zeros({3, kSide, kSide});
  const Index y0 = label == 0 ? 0 : kHalf;
  const Index x0 = label == 0 ? 0 : kHalf;
  for (Index c = 0; c < 3; ++c) {
    for (Index y = 0; y < kSide; ++y) {
      for (Index x = 0; x < kSide; ++x) {
        const bool bright =
            y >= y0 && y < y0 + kHalf && x >= x0 && x < x0 + kHalf;
        const double lo = bright ? 160.0 : 0.0;
        const double hi = bright ? 255.0 : 60.0;
        bytes(c, y, x) = std::floor(nnlrp::uniformRange(rng, lo, hi + 1.0));
      }
    }
  }
  return bytes;
}

Tensor preprocessed(const Tensor& bytes) {
  Tensor t = bytes;
  for (Index i = 0; i < t.size(); ++i) t.at(i) = bytes.at(i) / 255.0;
  return t;
}

nnlrp::RgbImage toImage(const Tensor& bytes) {
  nnlrp::RgbImage img;
  img.height = kSide;
  img.width = kSide;
  img.pixels.resize(static_cast<std::size_t>(3 * kSide * kSide));
  for (Index y = 0; y < kSide; ++y)
    for (Index x = 0; x < kSide; ++x)
      for (Index c = 0; c < 3; ++c)
        img.pixels[static_cast<std::size_t>((y * kSide + x) * 3 + c)] =
            static_cast<unsigned char>(bytes(c, y, x));
  return img;
}

nnlrp::NetworkGraph demoNet(std::mt19937_64& rng) {
  nnlrp::NetworkGraph net("bright-quadrant-demo", {3, kSide, kSide});
  nnlrp::ConvParams conv;
  conv.inChannels = 3;
  conv.outChannels = 4;
  conv.kernelH = 3;
  conv.kernelW = 3;
  conv.stride = 1;
  conv.pad = 1;
  net.add(nnlrp::LayerSpec::convolution(
      "conv1", conv,
      nnlrp::randomTensor(rng, {4, 3, 3, 3}, -0.25, 0.25),
      nnlrp::randomTensor(rng, {4}, -0.05, 0.05)));
  net.add(nnlrp::LayerSpec::relu("relu1"), {"conv1"});
  net.add(nnlrp::LayerSpec::maxPool("pool1", 2, 2), {"relu1"});
  net.add(nnlrp::LayerSpec::flatten("flat1"), {"pool1"});
  net.add(nnlrp::LayerSpec::innerProduct(
              "fc1", nnlrp::randomTensor(rng, {64, 2}, -0.25, 0.25),
              nnlrp::randomTensor(rng, {2}, -0.05, 0.05)),
          {"flat1"});
  net.add(nnlrp::LayerSpec::softmax("prob"), {"fc1"});
  return net;
}

}  // namespace

int main(int argc, char** argv) {
  const std::string outDir = argc > 1 ? argv[1] : "demo";
  std::error_code ec;
  std::filesystem::create_directories(outDir, ec);
  if (ec) {
    std::fprintf(stderr, "error: cannot create '%s': %s\n", outDir.c_str(),
                 ec.message().c_str());
    return 1;
  }
  const std::filesystem::path base(outDir);

  std::mt19937_64 rng(20250817);
  nnlrp::Dataset train;
  for (Index k = 0; k < 120; ++k) {
    const Index label = k % 2;
    train.push_back({preprocessed(byteImage(rng, label)), label});
  }

  nnlrp::NetworkGraph net = demoNet(rng);
  const nnlrp::TrainResult result = nnlrp::trainToy(net, train, 25, 0.1, 7);
  for (std::size_t e = 0; e < result.log.size(); ++e)
    std::printf("epoch %2zu: loss %.6f accuracy %.3f\n", e,
                result.log[e].meanLoss, result.log[e].accuracy);
  const double accuracy = nnlrp::evaluateAccuracy(result.net, train);
  std::printf("final training accuracy: %.3f\n", accuracy);

  nnlrp::saveModel(result.net, (base / "model.nnlrp").string());

  std::mt19937_64 sampleRng(42);
  const Tensor bytes0 = byteImage(sampleRng, 0);
  const Tensor bytes1 = byteImage(sampleRng, 1);
  nnlrp::writePpm(toImage(bytes0), (base / "sample0.ppm").string());
  nnlrp::writePpm(toImage(bytes1), (base / "sample1.ppm").string());
  nnlrp::writeTensorRaw(preprocessed(bytes0), (base / "sample0.bin").string());

  std::printf("wrote %s: model.nnlrp sample0.ppm sample1.ppm sample0.bin\n",
              outDir.c_str());
  return 0;
}
