#include "nnlrp/baselines.hpp"

#include "nnlrp/autodiff.hpp"
#include "nnlrp/error.hpp"
#include "nnlrp/lrp.hpp"
#include "nnlrp/parallel.hpp"

namespace nnlrp {

Tensor occlusionMap(const NetworkGraph& net, const Tensor& image,
                    Index targetIndex, const OcclusionConfig& cfg) {
  const ShapeReport& report = net.validate();
  require(image.rank() == 3, ErrorCode::kBadInput,
          "occlusion needs a (C,H,W) image, got " +
              shapeToString(image.shape()));
  require(targetIndex >= 0 && targetIndex < report.outputSize,
          ErrorCode::kBadTarget,
          "target " + std::to_string(targetIndex) + " out of range for " +
              std::to_string(report.outputSize) + " outputs");
  const Index c = image.extent(0);
  const Index h = image.extent(1);
  const Index w = image.extent(2);
  require(cfg.patchH >= 1 && cfg.patchW >= 1, ErrorCode::kBadParameter,
          "occlusion patch must be positive");
  require(cfg.stride >= 1, ErrorCode::kBadParameter,
          "occlusion stride must be positive");
  require(cfg.patchH <= h && cfg.patchW <= w, ErrorCode::kBadParameter,
          "occlusion patch " + std::to_string(cfg.patchH) + "x" +
              std::to_string(cfg.patchW) + " exceeds image " +
              shapeToString(image.shape()));

  const double baseline = net.forward(image).logits.at(targetIndex);
  const Index nY = (h - cfg.patchH) / cfg.stride + 1;
  const Index nX = (w - cfg.patchW) / cfg.stride + 1;

  std::vector<double> deltas(static_cast<std::size_t>(nY * nX), 0.0);
  parallelFor(nY * nX, [&](Index pi) {
    const Index py = (pi / nX) * cfg.stride;
    const Index px = (pi % nX) * cfg.stride;
    Tensor patched = image;
    for (Index ch = 0; ch < c; ++ch) {
      for (Index y = py; y < py + cfg.patchH; ++y) {
        for (Index x = px; x < px + cfg.patchW; ++x) {
          patched(ch, y, x) = cfg.fill;
        }
      }
    }
    deltas[static_cast<std::size_t>(pi)] =
        baseline - net.forward(patched).logits.at(targetIndex);
  });

  Tensor acc = Tensor::zeros({h, w});
  Tensor counts = Tensor::zeros({h, w});
  for (Index pi = 0; pi < nY * nX; ++pi) {
    const Index py = (pi / nX) * cfg.stride;
    const Index px = (pi % nX) * cfg.stride;
    const double delta = deltas[static_cast<std::size_t>(pi)];
    for (Index y = py; y < py + cfg.patchH; ++y) {
      for (Index x = px; x < px + cfg.patchW; ++x) {
        acc(y, x) += delta;
        counts(y, x) += 1.0;
      }
    }
  }
  Tensor grid = Tensor::zeros({h, w});
  for (Index i = 0; i < grid.size(); ++i) {
    if (counts.at(i) > 0.0) grid.at(i) = acc.at(i) / counts.at(i);
  }
  return grid;
}

Tensor sensitivityMap(const NetworkGraph& net, const Tensor& image,
                      Index targetIndex) {
  require(image.rank() == 3, ErrorCode::kBadInput,
          "sensitivity needs a (C,H,W) image, got " +
              shapeToString(image.shape()));
  Tensor gradient = inputGradient(net, image, targetIndex);
  gradient.array() = gradient.array().abs();
  return channelPool(gradient);
}

}  // namespace nnlrp
