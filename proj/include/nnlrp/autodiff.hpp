#pragma once

#include <cstdint>
#include <vector>

#include "nnlrp/graph.hpp"
#include "nnlrp/model_io.hpp"
#include "nnlrp/tensor.hpp"

namespace nnlrp {

/// Reverse-mode adjoints aligned with a ForwardTrace. adjoints[i] is
/// d(scalar)/d(output of node i) and matches that node's activation shape;
/// parameter gradients are present only when requested.
struct GradientTape {
  std::vector<Tensor> adjoints;
  Tensor inputAdjoint;
  std::vector<Tensor> weightGradients;
  std::vector<Tensor> biasGradients;
};

/// Adjoints of one node: gradient per input slot plus parameter gradients
/// (empty tensors for non-parameterized kinds or when not requested).
struct LayerGradients {
  std::vector<Tensor> inputs;
  Tensor weights;
  Tensor bias;
};

LayerGradients layerBackward(const LayerSpec& layer,
                             const std::vector<Tensor>& inputs,
                             const Tensor& output, const Tensor& outputAdjoint,
                             bool wantParameterGradients);

/// Seeds `logitsAdjoint` at the pre-softmax logit node and sweeps the graph
/// in reverse topological order. ReLU uses the traced activation pattern
/// (subgradient 0 at exactly 0); max-pool ties break to the lowest flat
/// index.
GradientTape backpropagate(const NetworkGraph& net, const ForwardTrace& trace,
                           const Tensor& logitsAdjoint,
                           bool wantParameterGradients = false);

/// ∂f_target/∂x of the pre-softmax logit, shaped like x.
Tensor inputGradient(const NetworkGraph& net, const Tensor& x,
                     Index targetIndex);

struct EpochStats {
  double meanLoss = 0.0;
  double accuracy = 0.0;
};

struct TrainResult {
  NetworkGraph net;
  std::vector<EpochStats> log;
};

/// Minimal SGD on softmax cross-entropy, for manufacturing desk-scale
/// fixture models. Deterministic given the seed; single-threaded. A
/// non-finite loss aborts with a diagnostic.
TrainResult trainToy(NetworkGraph net, const Dataset& dataset, int epochs,
                     double learningRate, std::uint64_t seed);

/// Fraction of dataset items whose predicted class equals the label.
double evaluateAccuracy(const NetworkGraph& net, const Dataset& dataset);

}  // namespace nnlrp
