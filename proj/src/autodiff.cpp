#include "nnlrp/autodiff.hpp"

#include <cmath>

#include <Eigen/Dense>

#include "nnlrp/error.hpp"
#include "nnlrp/rng.hpp"

namespace nnlrp {
namespace {

using MatrixRM =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using VectorX = Eigen::Matrix<double, Eigen::Dynamic, 1>;

LayerGradients backwardConvolution(const LayerSpec& layer, const Tensor& input,
                                   const Tensor& gout, bool wantParams) {
  const ConvParams& p = layer.conv;
  const Index h = input.extent(1);
  const Index w = input.extent(2);
  const Index outH = gout.extent(1);
  const Index outW = gout.extent(2);

  LayerGradients grads;
  grads.inputs.push_back(Tensor::zeros(input.shape()));
  Tensor& gx = grads.inputs[0];
  if (wantParams) {
    grads.weights = Tensor::zeros(layer.weights.shape());
    grads.bias = Tensor::zeros(layer.bias.shape());
  }

  for (Index o = 0; o < p.outChannels; ++o) {
    for (Index oy = 0; oy < outH; ++oy) {
      for (Index ox = 0; ox < outW; ++ox) {
        const double g = gout(o, oy, ox);
        if (g == 0.0) continue;
        for (Index c = 0; c < p.inChannels; ++c) {
          for (Index ky = 0; ky < p.kernelH; ++ky) {
            const Index y = oy * p.stride + ky - p.pad;
            if (y < 0 || y >= h) continue;
            for (Index kx = 0; kx < p.kernelW; ++kx) {
              const Index x = ox * p.stride + kx - p.pad;
              if (x < 0 || x >= w) continue;
              const Index wi = layer.weights.flatIndex(o, c, ky, kx);
              const Index xi = input.flatIndex(c, y, x);
              gx.at(xi) += layer.weights.at(wi) * g;
              if (wantParams) grads.weights.at(wi) += input.at(xi) * g;
            }
          }
        }
        if (wantParams) grads.bias.at(o) += g;
      }
    }
  }
  return grads;
}

LayerGradients backwardInnerProduct(const LayerSpec& layer,
                                    const Tensor& input, const Tensor& gout,
                                    bool wantParams) {
  const Index inSize = layer.weights.extent(0);
  const Index outSize = layer.weights.extent(1);

  LayerGradients grads;
  grads.inputs.push_back(Tensor::zeros(input.shape()));
  Eigen::Map<const MatrixRM> weights(layer.weights.data(), inSize, outSize);
  Eigen::Map<const VectorX> g(gout.data(), outSize);
  Eigen::Map<VectorX> gx(grads.inputs[0].data(), inSize);
  gx.noalias() = weights * g;

  if (wantParams) {
    grads.weights = Tensor::zeros(layer.weights.shape());
    grads.bias = gout;
    Eigen::Map<const VectorX> x(input.data(), inSize);
    Eigen::Map<MatrixRM> gw(grads.weights.data(), inSize, outSize);
    gw.noalias() = x * g.transpose();
  }
  return grads;
}

LayerGradients backwardMaxPool(const LayerSpec& layer, const Tensor& input,
                               const Tensor& gout) {
  const PoolParams& p = layer.pool;
  const Index c = input.extent(0);
  const Index h = input.extent(1);
  const Index w = input.extent(2);
  const Index outH = gout.extent(1);
  const Index outW = gout.extent(2);

  LayerGradients grads;
  grads.inputs.push_back(Tensor::zeros(input.shape()));
  Tensor& gx = grads.inputs[0];
  for (Index ch = 0; ch < c; ++ch) {
    const double* plane = input.data() + ch * h * w;
    for (Index oy = 0; oy < outH; ++oy) {
      for (Index ox = 0; ox < outW; ++ox) {
        Index bestY = oy * p.stride;
        Index bestX = ox * p.stride;
        double best = plane[bestY * w + bestX];
        for (Index ky = 0; ky < p.window; ++ky) {
          for (Index kx = 0; kx < p.window; ++kx) {
            const Index y = oy * p.stride + ky;
            const Index x = ox * p.stride + kx;
            const double v = plane[y * w + x];
            if (v > best) {
              best = v;
              bestY = y;
              bestX = x;
            }
          }
        }
        gx(ch, bestY, bestX) +=
            gout(ch, oy, ox);
      }
    }
  }
  return grads;
}

LayerGradients backwardAvgPool(const LayerSpec& layer, const Tensor& input,
                               const Tensor& gout) {
  const PoolParams& p = layer.pool;
  const Index c = input.extent(0);
  const Index outH = gout.extent(1);
  const Index outW = gout.extent(2);
  const double norm = 1.0 / static_cast<double>(p.window * p.window);

  LayerGradients grads;
  grads.inputs.push_back(Tensor::zeros(input.shape()));
  Tensor& gx = grads.inputs[0];
  for (Index ch = 0; ch < c; ++ch) {
    for (Index oy = 0; oy < outH; ++oy) {
      for (Index ox = 0; ox < outW; ++ox) {
        const double g = gout(ch, oy, ox) * norm;
        for (Index ky = 0; ky < p.window; ++ky) {
          for (Index kx = 0; kx < p.window; ++kx) {
            gx(ch, oy * p.stride + ky, ox * p.stride + kx) += g;
          }
        }
      }
    }
  }
  return grads;
}

LayerGradients backwardConcat(const LayerSpec& layer,
                              const std::vector<Tensor>& inputs,
                              const Tensor& gout) {
  const Index axis = layer.concatAxis;
  const Shape& outShape = gout.shape();
  const Index rank = static_cast<Index>(outShape.size());
  Index outer = 1;
  for (Index d = 0; d < axis; ++d) outer *= outShape[d];
  Index inner = 1;
  for (Index d = axis + 1; d < rank; ++d) inner *= outShape[d];

  LayerGradients grads;
  const double* src = gout.data();
  Index axisOffset = 0;
  for (const Tensor& in : inputs) {
    Tensor slice = Tensor::zeros(in.shape());
    const Index span = in.extent(axis) * inner;
    double* dst = slice.data();
    for (Index o = 0; o < outer; ++o) {
      const double* from = src + o * outShape[axis] * inner + axisOffset * inner;
      std::copy(from, from + span, dst + o * span);
    }
    axisOffset += in.extent(axis);
    grads.inputs.push_back(std::move(slice));
  }
  return grads;
}

LayerGradients backwardSoftmax(const Tensor& output, const Tensor& gout) {
  LayerGradients grads;
  Tensor gx = Tensor::zeros(output.shape());
  const double dot = (output.array() * gout.array()).sum();
  gx.array() = output.array() * (gout.array() - dot);
  grads.inputs.push_back(std::move(gx));
  return grads;
}

}  // namespace

LayerGradients layerBackward(const LayerSpec& layer,
                             const std::vector<Tensor>& inputs,
                             const Tensor& output, const Tensor& outputAdjoint,
                             bool wantParameterGradients) {
  require(output.sameShape(outputAdjoint), ErrorCode::kShapeMismatch,
          "adjoint shape " + shapeToString(outputAdjoint.shape()) +
              " does not match output " + shapeToString(output.shape()) +
              " at layer '" + layer.name + "'");
  switch (layer.kind) {
    case LayerKind::kConvolution:
      return backwardConvolution(layer, inputs[0], outputAdjoint,
                                 wantParameterGradients);
    case LayerKind::kInnerProduct:
      return backwardInnerProduct(layer, inputs[0], outputAdjoint,
                                  wantParameterGradients);
    case LayerKind::kRelu: {
      LayerGradients grads;
      Tensor gx = Tensor::zeros(inputs[0].shape());
      gx.array() =
          (inputs[0].array() > 0.0).select(outputAdjoint.array(), 0.0);
      grads.inputs.push_back(std::move(gx));
      return grads;
    }
    case LayerKind::kMaxPool:
      return backwardMaxPool(layer, inputs[0], outputAdjoint);
    case LayerKind::kAvgPool:
      return backwardAvgPool(layer, inputs[0], outputAdjoint);
    case LayerKind::kFlatten: {
      LayerGradients grads;
      grads.inputs.push_back(outputAdjoint.reshaped(inputs[0].shape()));
      return grads;
    }
    case LayerKind::kConcat:
      return backwardConcat(layer, inputs, outputAdjoint);
    case LayerKind::kSoftmax:
      return backwardSoftmax(output, outputAdjoint);
  }
  fail(ErrorCode::kBadParameter, "unknown layer kind");
}

GradientTape backpropagate(const NetworkGraph& net, const ForwardTrace& trace,
                           const Tensor& logitsAdjoint,
                           bool wantParameterGradients) {
  const ShapeReport& report = net.validate();
  const Index n = net.size();
  require(static_cast<Index>(trace.outputs.size()) == n,
          ErrorCode::kTraceMismatch,
          "trace holds " + std::to_string(trace.outputs.size()) +
              " node outputs, network has " + std::to_string(n));
  for (Index i = 0; i < n; ++i) {
    require(trace.outputs[i].shape() == report.outputShapes[i],
            ErrorCode::kTraceMismatch,
            "trace output shape at node '" + net.node(i).layer.name +
                "' does not match the network");
  }
  require(logitsAdjoint.shape() == report.outputShapes[report.logits],
          ErrorCode::kShapeMismatch,
          "logit adjoint shape " + shapeToString(logitsAdjoint.shape()) +
              " does not match " +
              shapeToString(report.outputShapes[report.logits]));

  GradientTape tape;
  tape.adjoints.reserve(n);
  for (Index i = 0; i < n; ++i) {
    tape.adjoints.push_back(Tensor::zeros(report.outputShapes[i]));
  }
  tape.inputAdjoint = Tensor::zeros(net.inputShape());
  tape.weightGradients.assign(n, Tensor{});
  tape.biasGradients.assign(n, Tensor{});
  tape.adjoints[report.logits] = logitsAdjoint;

  const std::vector<Index>& topo = net.topoOrder();
  for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
    const Index i = *it;
    const Tensor& gout = tape.adjoints[i];
    if ((gout.array() == 0.0).all()) continue;

    const std::vector<Index>& preds = net.predecessorIndices(i);
    std::vector<Tensor> inputs;
    inputs.reserve(preds.size());
    for (std::size_t s = 0; s < preds.size(); ++s) {
      inputs.push_back(net.nodeInput(trace, i, s));
    }
    LayerGradients grads = layerBackward(net.node(i).layer, inputs,
                                         trace.outputs[i], gout,
                                         wantParameterGradients);
    for (std::size_t s = 0; s < preds.size(); ++s) {
      if (preds[s] < 0) {
        tape.inputAdjoint.array() += grads.inputs[s].array();
      } else {
        tape.adjoints[preds[s]].array() += grads.inputs[s].array();
      }
    }
    if (wantParameterGradients && net.node(i).layer.hasParameters()) {
      tape.weightGradients[i] = std::move(grads.weights);
      tape.biasGradients[i] = std::move(grads.bias);
    }
  }
  return tape;
}

Tensor inputGradient(const NetworkGraph& net, const Tensor& x,
                     Index targetIndex) {
  const ShapeReport& report = net.validate();
  require(targetIndex >= 0 && targetIndex < report.outputSize,
          ErrorCode::kBadTarget,
          "target " + std::to_string(targetIndex) + " out of range for " +
              std::to_string(report.outputSize) + " outputs");
  const ForwardTrace trace = net.forward(x);
  Tensor adjoint = Tensor::zeros(report.outputShapes[report.logits]);
  adjoint.at(targetIndex) = 1.0;
  return backpropagate(net, trace, adjoint).inputAdjoint;
}

TrainResult trainToy(NetworkGraph net, const Dataset& dataset, int epochs,
                     double learningRate, std::uint64_t seed) {
  const ShapeReport& report = net.validate();
  require(net.node(report.sink).layer.kind == LayerKind::kSoftmax,
          ErrorCode::kBadParameter, "trainToy needs a Softmax sink");
  require(!dataset.empty(), ErrorCode::kBadParameter, "dataset is empty");
  for (const DatasetItem& item : dataset) {
    require(item.label >= 0 && item.label < report.outputSize,
            ErrorCode::kBadTarget,
            "dataset label " + std::to_string(item.label) +
                " out of range for " + std::to_string(report.outputSize) +
                " classes");
  }

  std::mt19937_64 rng(seed);
  TrainResult result;
  const Index n = static_cast<Index>(dataset.size());
  for (int epoch = 0; epoch < epochs; ++epoch) {
    const std::vector<Index> order = shuffledIndices(rng, n);
    double lossSum = 0.0;
    Index correct = 0;
    for (Index k = 0; k < n; ++k) {
      const DatasetItem& item = dataset[order[k]];
      const ForwardTrace trace = net.forward(item.input);
      const double loss = -std::log(trace.probabilities.at(item.label));
      require(std::isfinite(loss), ErrorCode::kTrainingDiverged,
              "epoch " + std::to_string(epoch) + ", sample " +
                  std::to_string(order[k]) + ": loss is not finite");
      lossSum += loss;
      if (trace.predictedClass == item.label) ++correct;

      if (learningRate == 0.0) continue;
      Tensor adjoint = trace.probabilities;
      adjoint.at(item.label) -= 1.0;
      const GradientTape tape = backpropagate(net, trace, adjoint, true);
      for (Index i = 0; i < net.size(); ++i) {
        if (tape.weightGradients[i].size() == 0) continue;
        Tensor weights = net.node(i).layer.weights;
        Tensor bias = net.node(i).layer.bias;
        weights.array() -= learningRate * tape.weightGradients[i].array();
        bias.array() -= learningRate * tape.biasGradients[i].array();
        net.setParameters(i, std::move(weights), std::move(bias));
      }
    }
    result.log.push_back({lossSum / static_cast<double>(n),
                          static_cast<double>(correct) /
                              static_cast<double>(n)});
  }
  result.net = std::move(net);
  return result;
}

double evaluateAccuracy(const NetworkGraph& net, const Dataset& dataset) {
  if (dataset.empty()) return 0.0;
  Index correct = 0;
  for (const DatasetItem& item : dataset) {
    if (net.forward(item.input).predictedClass == item.label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(dataset.size());
}

}  // namespace nnlrp
