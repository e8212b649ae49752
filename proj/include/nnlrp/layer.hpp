#pragma once

#include <string>
#include <vector>

#include "nnlrp/tensor.hpp"

namespace nnlrp {

enum class LayerKind {
  kConvolution,
  kInnerProduct,
  kRelu,
  kMaxPool,
  kAvgPool,
  kFlatten,
  kConcat,
  kSoftmax,
};

const char* layerKindName(LayerKind kind);
LayerKind layerKindFromName(const std::string& name);

struct ConvParams {
  Index inChannels = 0;
  Index outChannels = 0;
  Index kernelH = 0;
  Index kernelW = 0;
  Index stride = 1;
  Index pad = 0;
};

struct PoolParams {
  Index window = 0;
  Index stride = 1;
};

/// One typed node of the network. `weights`/`bias` are populated for
/// Convolution (out, in, kh, kw)/(out) and InnerProduct (in, out)/(out);
/// the other kinds carry no parameters.
struct LayerSpec {
  std::string name;
  LayerKind kind = LayerKind::kRelu;

  ConvParams conv;
  PoolParams pool;
  Index concatAxis = 0;

  Tensor weights;
  Tensor bias;

  bool hasParameters() const {
    return kind == LayerKind::kConvolution || kind == LayerKind::kInnerProduct;
  }

  static LayerSpec convolution(std::string name, const ConvParams& params,
                               Tensor weights, Tensor bias);
  static LayerSpec innerProduct(std::string name, Tensor weights, Tensor bias);
  static LayerSpec relu(std::string name);
  static LayerSpec maxPool(std::string name, Index window, Index stride);
  static LayerSpec avgPool(std::string name, Index window, Index stride);
  static LayerSpec flatten(std::string name);
  static LayerSpec concat(std::string name, Index axis);
  static LayerSpec softmax(std::string name);
};

/// Checks parameter-tensor consistency for one node (shapes vs. declared
/// channel counts, stride/kernel/pad ranges). Throws kBadParameter.
void validateLayerParams(const LayerSpec& layer);

/// Output shape of `layer` applied to inputs of the given shapes.
/// Throws kShapeConflict naming the layer on any inconsistency.
Shape layerOutputShape(const LayerSpec& layer, const std::vector<Shape>& inputs);

/// Deterministic forward kernel for one node.
Tensor layerForward(const LayerSpec& layer, const std::vector<Tensor>& inputs);

/// Receptive-field fan-in of one output neuron for flat redistribution:
/// in·kh·kw for convolutions (padding positions included), the full input
/// size for inner products.
Index layerFanIn(const LayerSpec& layer, const Shape& inputShape);

}  // namespace nnlrp
