#pragma once

#include <string>
#include <vector>

#include "nnlrp/layer.hpp"
#include "nnlrp/tensor.hpp"

namespace nnlrp {

/// A node plus the names of the nodes feeding it. An empty input list means
/// the node reads the network input.
struct GraphNode {
  LayerSpec layer;
  std::vector<std::string> inputs;
};

/// Input normalization recorded with the model: an 8-bit image sample v in
/// channel c enters the network as scale·v − channelMeans[c]. Raw tensor
/// inputs bypass this entirely.
struct Preprocess {
  double scale = 1.0 / 255.0;
  std::vector<double> channelMeans;
};

struct ShapeReport {
  std::vector<Shape> outputShapes;
  std::vector<std::string> order;
  Index sink = -1;
  Index logits = -1;
  Index outputSize = 0;
};

/// Everything recorded during one forward pass. Node activations are indexed
/// like the graph's nodes; `input` is the network input. Attribution is
/// anchored at `logits` (the pre-softmax scores when the sink is a Softmax).
struct ForwardTrace {
  Tensor input;
  std::vector<Tensor> outputs;
  Tensor logits;
  bool hasProbabilities = false;
  Tensor probabilities;
  Index predictedClass = -1;
};

/// A DAG of layers with a single input and a single sink. Derived data
/// (topological order, shapes, fan-out) is computed on first use and reused
/// until the graph is mutated.
class NetworkGraph {
 public:
  NetworkGraph() = default;
  NetworkGraph(std::string name, Shape inputShape);

  void add(LayerSpec layer, std::vector<std::string> inputNames = {});

  const std::string& name() const { return name_; }
  const Shape& inputShape() const { return inputShape_; }
  Index size() const { return static_cast<Index>(nodes_.size()); }
  const GraphNode& node(Index i) const { return nodes_[i]; }

  /// Index of a node by name; throws kGraphEdge when absent.
  Index indexOf(const std::string& nodeName) const;

  /// Validates structure (unique names, known edges, acyclic, exactly one
  /// sink, Softmax only at the sink, rank-1 output) and infers every node's
  /// output shape. Throws on the first violation.
  const ShapeReport& validate() const;

  const std::vector<Index>& topoOrder() const;

  /// Predecessor node indices of node i; -1 denotes the network input.
  const std::vector<Index>& predecessorIndices(Index i) const;

  /// Node indices consuming node i's output.
  const std::vector<Index>& consumerIndices(Index i) const;

  ForwardTrace forward(const Tensor& input) const;

  /// Activation feeding input slot `slot` of node i during `trace`.
  const Tensor& nodeInput(const ForwardTrace& trace, Index i,
                          std::size_t slot) const;

  const Preprocess& preprocess() const { return preprocess_; }
  void setPreprocess(Preprocess p) { preprocess_ = std::move(p); }

  /// Replaces node i's parameters with same-shaped tensors (training
  /// updates). Shapes are fixed, so cached derived data stays valid.
  void setParameters(Index i, Tensor weights, Tensor bias);

 private:
  void ensureValidated() const;

  std::string name_ = "net";
  Shape inputShape_;
  std::vector<GraphNode> nodes_;
  Preprocess preprocess_;

  mutable bool validated_ = false;
  mutable ShapeReport report_;
  mutable std::vector<Index> topo_;
  mutable std::vector<std::vector<Index>> preds_;
  mutable std::vector<std::vector<Index>> consumers_;
};

}  // namespace nnlrp
