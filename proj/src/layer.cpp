#include "nnlrp/layer.hpp"

#include <Eigen/Dense>

#include "nnlrp/error.hpp"

namespace nnlrp {
namespace {

using MatrixRM =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixCM = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic>;
using VectorX = Eigen::Matrix<double, Eigen::Dynamic, 1>;

void requireInputCount(const LayerSpec& layer, std::size_t got,
                       std::size_t want) {
  require(got == want, ErrorCode::kShapeConflict,
          "layer '" + layer.name + "' expects " + std::to_string(want) +
              " input(s), got " + std::to_string(got));
}

void requireRank(const LayerSpec& layer, const Shape& shape, Index rank) {
  require(static_cast<Index>(shape.size()) == rank, ErrorCode::kShapeConflict,
          "layer '" + layer.name + "' expects rank-" + std::to_string(rank) +
              " input, got shape " + shapeToString(shape));
}

Index convExtent(const LayerSpec& layer, Index in, Index kernel, Index stride,
                 Index pad) {
  const Index padded = in + 2 * pad;
  require(padded >= kernel, ErrorCode::kShapeConflict,
          "layer '" + layer.name + "' kernel " + std::to_string(kernel) +
              " exceeds padded extent " + std::to_string(padded));
  return (padded - kernel) / stride + 1;
}

Index poolExtent(const LayerSpec& layer, Index in, Index window,
                 Index stride) {
  require(in >= window, ErrorCode::kShapeConflict,
          "layer '" + layer.name + "' pool window " + std::to_string(window) +
              " exceeds input extent " + std::to_string(in));
  return (in - window) / stride + 1;
}

Tensor forwardConvolution(const LayerSpec& layer, const Tensor& input) {
  const ConvParams& p = layer.conv;
  const Index h = input.extent(1);
  const Index w = input.extent(2);
  const Index outH = convExtent(layer, h, p.kernelH, p.stride, p.pad);
  const Index outW = convExtent(layer, w, p.kernelW, p.stride, p.pad);
  const Index patch = p.inChannels * p.kernelH * p.kernelW;
  const Index columns = outH * outW;

  MatrixCM cols = MatrixCM::Zero(patch, columns);
  const double* in = input.data();
  for (Index oy = 0; oy < outH; ++oy) {
    for (Index ox = 0; ox < outW; ++ox) {
      const Index col = oy * outW + ox;
      Index row = 0;
      for (Index c = 0; c < p.inChannels; ++c) {
        const double* plane = in + c * h * w;
        for (Index ky = 0; ky < p.kernelH; ++ky) {
          const Index y = oy * p.stride + ky - p.pad;
          for (Index kx = 0; kx < p.kernelW; ++kx, ++row) {
            const Index x = ox * p.stride + kx - p.pad;
            if (y >= 0 && y < h && x >= 0 && x < w) {
              cols(row, col) = plane[y * w + x];
            }
          }
        }
      }
    }
  }

  Tensor output = Tensor::zeros({p.outChannels, outH, outW});
  Eigen::Map<const MatrixRM> weights(layer.weights.data(), p.outChannels,
                                     patch);
  Eigen::Map<const VectorX> bias(layer.bias.data(), p.outChannels);
  Eigen::Map<MatrixRM> result(output.data(), p.outChannels, columns);
  result.noalias() = weights * cols;
  result.colwise() += bias;
  return output;
}

Tensor forwardInnerProduct(const LayerSpec& layer, const Tensor& input) {
  const Index inSize = layer.weights.extent(0);
  const Index outSize = layer.weights.extent(1);
  Tensor output = Tensor::zeros({outSize});
  Eigen::Map<const MatrixRM> weights(layer.weights.data(), inSize, outSize);
  Eigen::Map<const VectorX> x(input.data(), inSize);
  Eigen::Map<const VectorX> bias(layer.bias.data(), outSize);
  Eigen::Map<VectorX> y(output.data(), outSize);
  y.noalias() = weights.transpose() * x;
  y += bias;
  return output;
}

Tensor forwardMaxPool(const LayerSpec& layer, const Tensor& input) {
  const PoolParams& p = layer.pool;
  const Index c = input.extent(0);
  const Index h = input.extent(1);
  const Index w = input.extent(2);
  const Index outH = poolExtent(layer, h, p.window, p.stride);
  const Index outW = poolExtent(layer, w, p.window, p.stride);
  Tensor output = Tensor::zeros({c, outH, outW});
  for (Index ch = 0; ch < c; ++ch) {
    const double* plane = input.data() + ch * h * w;
    double* out = output.data() + ch * outH * outW;
    for (Index oy = 0; oy < outH; ++oy) {
      for (Index ox = 0; ox < outW; ++ox) {
        double best = plane[(oy * p.stride) * w + ox * p.stride];
        for (Index ky = 0; ky < p.window; ++ky) {
          for (Index kx = 0; kx < p.window; ++kx) {
            const double v = plane[(oy * p.stride + ky) * w + ox * p.stride + kx];
            if (v > best) best = v;
          }
        }
        out[oy * outW + ox] = best;
      }
    }
  }
  return output;
}

Tensor forwardAvgPool(const LayerSpec& layer, const Tensor& input) {
  const PoolParams& p = layer.pool;
  const Index c = input.extent(0);
  const Index h = input.extent(1);
  const Index w = input.extent(2);
  const Index outH = poolExtent(layer, h, p.window, p.stride);
  const Index outW = poolExtent(layer, w, p.window, p.stride);
  const double norm = 1.0 / static_cast<double>(p.window * p.window);
  Tensor output = Tensor::zeros({c, outH, outW});
  for (Index ch = 0; ch < c; ++ch) {
    const double* plane = input.data() + ch * h * w;
    double* out = output.data() + ch * outH * outW;
    for (Index oy = 0; oy < outH; ++oy) {
      for (Index ox = 0; ox < outW; ++ox) {
        double acc = 0.0;
        for (Index ky = 0; ky < p.window; ++ky) {
          for (Index kx = 0; kx < p.window; ++kx) {
            acc += plane[(oy * p.stride + ky) * w + ox * p.stride + kx];
          }
        }
        out[oy * outW + ox] = acc * norm;
      }
    }
  }
  return output;
}

Tensor forwardConcat(const LayerSpec& layer, const std::vector<Tensor>& inputs) {
  const Shape outShape = layerOutputShape(layer, [&] {
    std::vector<Shape> shapes;
    shapes.reserve(inputs.size());
    for (const Tensor& t : inputs) shapes.push_back(t.shape());
    return shapes;
  }());
  const Index axis = layer.concatAxis;
  const Index rank = static_cast<Index>(outShape.size());
  Index outer = 1;
  for (Index d = 0; d < axis; ++d) outer *= outShape[d];
  Index inner = 1;
  for (Index d = axis + 1; d < rank; ++d) inner *= outShape[d];

  Tensor output = Tensor::zeros(outShape);
  double* out = output.data();
  Index axisOffset = 0;
  for (const Tensor& t : inputs) {
    const Index span = t.extent(axis) * inner;
    const double* in = t.data();
    for (Index o = 0; o < outer; ++o) {
      double* dst = out + o * outShape[axis] * inner + axisOffset * inner;
      const double* src = in + o * span;
      std::copy(src, src + span, dst);
    }
    axisOffset += t.extent(axis);
  }
  return output;
}

Tensor forwardSoftmax(const Tensor& input) {
  Tensor output = Tensor::zeros(input.shape());
  const auto& x = input.array();
  const double peak = x.maxCoeff();
  output.array() = (x - peak).exp();
  output.array() /= output.array().sum();
  return output;
}

}  // namespace

const char* layerKindName(LayerKind kind) {
  switch (kind) {
    case LayerKind::kConvolution: return "Convolution";
    case LayerKind::kInnerProduct: return "InnerProduct";
    case LayerKind::kRelu: return "ReLU";
    case LayerKind::kMaxPool: return "MaxPool";
    case LayerKind::kAvgPool: return "AvgPool";
    case LayerKind::kFlatten: return "Flatten";
    case LayerKind::kConcat: return "Concat";
    case LayerKind::kSoftmax: return "Softmax";
  }
  fail(ErrorCode::kBadParameter, "unknown layer kind");
}

LayerKind layerKindFromName(const std::string& name) {
  if (name == "Convolution") return LayerKind::kConvolution;
  if (name == "InnerProduct") return LayerKind::kInnerProduct;
  if (name == "ReLU") return LayerKind::kRelu;
  if (name == "MaxPool") return LayerKind::kMaxPool;
  if (name == "AvgPool") return LayerKind::kAvgPool;
  if (name == "Flatten") return LayerKind::kFlatten;
  if (name == "Concat") return LayerKind::kConcat;
  if (name == "Softmax") return LayerKind::kSoftmax;
  fail(ErrorCode::kBadParameter, "unknown layer kind '" + name + "'");
}

LayerSpec LayerSpec::convolution(std::string name, const ConvParams& params,
                                 Tensor weights, Tensor bias) {
  LayerSpec layer;
  layer.name = std::move(name);
  layer.kind = LayerKind::kConvolution;
  layer.conv = params;
  layer.weights = std::move(weights);
  layer.bias = std::move(bias);
  validateLayerParams(layer);
  return layer;
}

LayerSpec LayerSpec::innerProduct(std::string name, Tensor weights,
                                  Tensor bias) {
  LayerSpec layer;
  layer.name = std::move(name);
  layer.kind = LayerKind::kInnerProduct;
  layer.weights = std::move(weights);
  layer.bias = std::move(bias);
  validateLayerParams(layer);
  return layer;
}

LayerSpec LayerSpec::relu(std::string name) {
  LayerSpec layer;
  layer.name = std::move(name);
  layer.kind = LayerKind::kRelu;
  return layer;
}

LayerSpec LayerSpec::maxPool(std::string name, Index window, Index stride) {
  LayerSpec layer;
  layer.name = std::move(name);
  layer.kind = LayerKind::kMaxPool;
  layer.pool = {window, stride};
  validateLayerParams(layer);
  return layer;
}

LayerSpec LayerSpec::avgPool(std::string name, Index window, Index stride) {
  LayerSpec layer;
  layer.name = std::move(name);
  layer.kind = LayerKind::kAvgPool;
  layer.pool = {window, stride};
  validateLayerParams(layer);
  return layer;
}

LayerSpec LayerSpec::flatten(std::string name) {
  LayerSpec layer;
  layer.name = std::move(name);
  layer.kind = LayerKind::kFlatten;
  return layer;
}

LayerSpec LayerSpec::concat(std::string name, Index axis) {
  LayerSpec layer;
  layer.name = std::move(name);
  layer.kind = LayerKind::kConcat;
  layer.concatAxis = axis;
  validateLayerParams(layer);
  return layer;
}

LayerSpec LayerSpec::softmax(std::string name) {
  LayerSpec layer;
  layer.name = std::move(name);
  layer.kind = LayerKind::kSoftmax;
  return layer;
}

void validateLayerParams(const LayerSpec& layer) {
  switch (layer.kind) {
    case LayerKind::kConvolution: {
      const ConvParams& p = layer.conv;
      require(p.inChannels >= 1 && p.outChannels >= 1,
              ErrorCode::kBadParameter,
              "layer '" + layer.name + "' needs positive channel counts");
      require(p.kernelH >= 1 && p.kernelW >= 1, ErrorCode::kBadParameter,
              "layer '" + layer.name + "' needs a positive kernel");
      require(p.stride >= 1, ErrorCode::kBadParameter,
              "layer '" + layer.name + "' needs a positive stride");
      require(p.pad >= 0, ErrorCode::kBadParameter,
              "layer '" + layer.name + "' needs non-negative padding");
      const Shape wantW = {p.outChannels, p.inChannels, p.kernelH, p.kernelW};
      require(layer.weights.shape() == wantW, ErrorCode::kBadParameter,
              "layer '" + layer.name + "' weights " +
                  shapeToString(layer.weights.shape()) + " do not match " +
                  shapeToString(wantW));
      const Shape wantB = {p.outChannels};
      require(layer.bias.shape() == wantB, ErrorCode::kBadParameter,
              "layer '" + layer.name + "' bias " +
                  shapeToString(layer.bias.shape()) + " does not match " +
                  shapeToString(wantB));
      return;
    }
    case LayerKind::kInnerProduct: {
      require(layer.weights.rank() == 2, ErrorCode::kBadParameter,
              "layer '" + layer.name + "' weights must be rank 2, got " +
                  shapeToString(layer.weights.shape()));
      const Shape wantB = {layer.weights.extent(1)};
      require(layer.bias.shape() == wantB, ErrorCode::kBadParameter,
              "layer '" + layer.name + "' bias " +
                  shapeToString(layer.bias.shape()) + " does not match " +
                  shapeToString(wantB));
      return;
    }
    case LayerKind::kMaxPool:
    case LayerKind::kAvgPool: {
      require(layer.pool.window >= 1, ErrorCode::kBadParameter,
              "layer '" + layer.name + "' needs a positive pool window");
      require(layer.pool.stride >= 1, ErrorCode::kBadParameter,
              "layer '" + layer.name + "' needs a positive pool stride");
      return;
    }
    case LayerKind::kConcat:
      require(layer.concatAxis >= 0, ErrorCode::kBadParameter,
              "layer '" + layer.name + "' needs a non-negative concat axis");
      return;
    case LayerKind::kRelu:
    case LayerKind::kFlatten:
    case LayerKind::kSoftmax:
      return;
  }
}

Shape layerOutputShape(const LayerSpec& layer,
                       const std::vector<Shape>& inputs) {
  switch (layer.kind) {
    case LayerKind::kConvolution: {
      requireInputCount(layer, inputs.size(), 1);
      const Shape& in = inputs[0];
      requireRank(layer, in, 3);
      require(in[0] == layer.conv.inChannels, ErrorCode::kShapeConflict,
              "layer '" + layer.name + "' expects " +
                  std::to_string(layer.conv.inChannels) +
                  " input channels, got shape " + shapeToString(in));
      const Index outH =
          convExtent(layer, in[1], layer.conv.kernelH, layer.conv.stride,
                     layer.conv.pad);
      const Index outW =
          convExtent(layer, in[2], layer.conv.kernelW, layer.conv.stride,
                     layer.conv.pad);
      return {layer.conv.outChannels, outH, outW};
    }
    case LayerKind::kInnerProduct: {
      requireInputCount(layer, inputs.size(), 1);
      const Shape& in = inputs[0];
      requireRank(layer, in, 1);
      require(in[0] == layer.weights.extent(0), ErrorCode::kShapeConflict,
              "layer '" + layer.name + "' expects " +
                  std::to_string(layer.weights.extent(0)) +
                  " inputs, got shape " + shapeToString(in));
      return {layer.weights.extent(1)};
    }
    case LayerKind::kRelu:
      requireInputCount(layer, inputs.size(), 1);
      return inputs[0];
    case LayerKind::kMaxPool:
    case LayerKind::kAvgPool: {
      requireInputCount(layer, inputs.size(), 1);
      const Shape& in = inputs[0];
      requireRank(layer, in, 3);
      const Index outH =
          poolExtent(layer, in[1], layer.pool.window, layer.pool.stride);
      const Index outW =
          poolExtent(layer, in[2], layer.pool.window, layer.pool.stride);
      return {in[0], outH, outW};
    }
    case LayerKind::kFlatten:
      requireInputCount(layer, inputs.size(), 1);
      return {shapeSize(inputs[0])};
    case LayerKind::kConcat: {
      require(!inputs.empty(), ErrorCode::kShapeConflict,
              "layer '" + layer.name + "' needs at least one input");
      const Index axis = layer.concatAxis;
      const Shape& first = inputs[0];
      require(axis < static_cast<Index>(first.size()),
              ErrorCode::kShapeConflict,
              "layer '" + layer.name + "' concat axis " +
                  std::to_string(axis) + " out of range for shape " +
                  shapeToString(first));
      Shape out = first;
      for (std::size_t i = 1; i < inputs.size(); ++i) {
        const Shape& in = inputs[i];
        require(in.size() == first.size(), ErrorCode::kShapeConflict,
                "layer '" + layer.name + "' concat rank mismatch: " +
                    shapeToString(first) + " vs " + shapeToString(in));
        for (Index d = 0; d < static_cast<Index>(in.size()); ++d) {
          if (d == axis) continue;
          require(in[d] == first[d], ErrorCode::kShapeConflict,
                  "layer '" + layer.name + "' concat extent mismatch: " +
                      shapeToString(first) + " vs " + shapeToString(in));
        }
        out[axis] += in[axis];
      }
      return out;
    }
    case LayerKind::kSoftmax: {
      requireInputCount(layer, inputs.size(), 1);
      requireRank(layer, inputs[0], 1);
      return inputs[0];
    }
  }
  fail(ErrorCode::kBadParameter, "unknown layer kind");
}

Tensor layerForward(const LayerSpec& layer, const std::vector<Tensor>& inputs) {
  std::vector<Shape> shapes;
  shapes.reserve(inputs.size());
  for (const Tensor& t : inputs) shapes.push_back(t.shape());
  layerOutputShape(layer, shapes);

  switch (layer.kind) {
    case LayerKind::kConvolution:
      return forwardConvolution(layer, inputs[0]);
    case LayerKind::kInnerProduct:
      return forwardInnerProduct(layer, inputs[0]);
    case LayerKind::kRelu: {
      Tensor output = Tensor::zeros(inputs[0].shape());
      output.array() = inputs[0].array().max(0.0);
      return output;
    }
    case LayerKind::kMaxPool:
      return forwardMaxPool(layer, inputs[0]);
    case LayerKind::kAvgPool:
      return forwardAvgPool(layer, inputs[0]);
    case LayerKind::kFlatten:
      return inputs[0].reshaped({inputs[0].size()});
    case LayerKind::kConcat:
      return forwardConcat(layer, inputs);
    case LayerKind::kSoftmax:
      return forwardSoftmax(inputs[0]);
  }
  fail(ErrorCode::kBadParameter, "unknown layer kind");
}

Index layerFanIn(const LayerSpec& layer, const Shape& inputShape) {
  switch (layer.kind) {
    case LayerKind::kConvolution:
      return layer.conv.inChannels * layer.conv.kernelH * layer.conv.kernelW;
    case LayerKind::kInnerProduct:
      return shapeSize(inputShape);
    default:
      fail(ErrorCode::kBadRule,
           "flat fan-in is only defined for parameterized layers, not " +
               std::string(layerKindName(layer.kind)));
  }
}

}  // namespace nnlrp
