#pragma once

#include <vector>

#include "nnlrp/graph.hpp"
#include "nnlrp/tensor.hpp"

namespace nnlrp {

struct OversampleResult {
  Tensor mean;
  std::vector<Tensor> cropScores;
  bool usedProbabilities = false;
};

/// The ten crops of an image: top-left, top-right, bottom-left, bottom-right,
/// center, then the same five mirrored horizontally.
std::vector<Tensor> tenCrops(const Tensor& image, Index cropH, Index cropW);

/// Ten-crop prediction: crop extent is round(cropFraction × image extent) and
/// must equal the network's input extent (the engine does not resample).
/// Scores are whatever the sink emits (probabilities when it is a Softmax);
/// the mean is a running mean, so a constant network averages exactly to its
/// constant.
OversampleResult predictOversampled(const NetworkGraph& net,
                                    const Tensor& image,
                                    double cropFraction = 0.875);

}  // namespace nnlrp
