#include "nnlrp/graph.hpp"

#include <algorithm>
#include <unordered_map>

#include "nnlrp/error.hpp"

namespace nnlrp {

NetworkGraph::NetworkGraph(std::string name, Shape inputShape)
    : name_(std::move(name)), inputShape_(std::move(inputShape)) {
  requireValidShape(inputShape_);
}

void NetworkGraph::add(LayerSpec layer, std::vector<std::string> inputNames) {
  validated_ = false;
  nodes_.push_back({std::move(layer), std::move(inputNames)});
}

Index NetworkGraph::indexOf(const std::string& nodeName) const {
  for (Index i = 0; i < size(); ++i) {
    if (nodes_[i].layer.name == nodeName) return i;
  }
  fail(ErrorCode::kGraphEdge, "no node named '" + nodeName + "'");
}

const ShapeReport& NetworkGraph::validate() const {
  ensureValidated();
  return report_;
}

const std::vector<Index>& NetworkGraph::topoOrder() const {
  ensureValidated();
  return topo_;
}

const std::vector<Index>& NetworkGraph::predecessorIndices(Index i) const {
  ensureValidated();
  return preds_[i];
}

const std::vector<Index>& NetworkGraph::consumerIndices(Index i) const {
  ensureValidated();
  return consumers_[i];
}

void NetworkGraph::ensureValidated() const {
  if (validated_) return;
  const Index n = size();
  require(n > 0, ErrorCode::kGraphSink, "network has no nodes");

  std::unordered_map<std::string, Index> byName;
  for (Index i = 0; i < n; ++i) {
    const auto [it, inserted] = byName.emplace(nodes_[i].layer.name, i);
    (void)it;
    require(inserted, ErrorCode::kBadParameter,
            "duplicate node name '" + nodes_[i].layer.name + "'");
  }

  preds_.assign(n, {});
  consumers_.assign(n, {});
  std::vector<Index> pending(n, 0);
  for (Index i = 0; i < n; ++i) {
    if (nodes_[i].inputs.empty()) {
      preds_[i].push_back(-1);
      continue;
    }
    for (const std::string& name : nodes_[i].inputs) {
      const auto it = byName.find(name);
      require(it != byName.end(), ErrorCode::kGraphEdge,
              "node '" + nodes_[i].layer.name +
                  "' references unknown node '" + name + "'");
      preds_[i].push_back(it->second);
      consumers_[it->second].push_back(i);
      ++pending[i];
    }
  }

  topo_.clear();
  topo_.reserve(n);
  std::vector<Index> ready;
  for (Index i = 0; i < n; ++i) {
    if (pending[i] == 0) ready.push_back(i);
  }
  for (std::size_t head = 0; head < ready.size(); ++head) {
    const Index i = ready[head];
    topo_.push_back(i);
    for (Index consumer : consumers_[i]) {
      if (--pending[consumer] == 0) ready.push_back(consumer);
    }
  }
  require(static_cast<Index>(topo_.size()) == n, ErrorCode::kGraphCycle,
          "network graph contains a cycle");

  Index sink = -1;
  for (Index i = 0; i < n; ++i) {
    if (!consumers_[i].empty()) continue;
    if (sink >= 0) {
      fail(ErrorCode::kGraphSink,
           "network has multiple sinks: '" + nodes_[sink].layer.name +
               "' and '" + nodes_[i].layer.name + "'");
    }
    sink = i;
  }
  require(sink >= 0, ErrorCode::kGraphSink, "network has no sink");

  for (Index i = 0; i < n; ++i) {
    if (nodes_[i].layer.kind == LayerKind::kSoftmax) {
      require(i == sink, ErrorCode::kBadParameter,
              "node '" + nodes_[i].layer.name +
                  "': Softmax is only allowed at the sink");
    }
  }

  report_ = ShapeReport{};
  report_.outputShapes.assign(n, {});
  report_.sink = sink;
  for (Index i : topo_) {
    validateLayerParams(nodes_[i].layer);
    std::vector<Shape> inputs;
    inputs.reserve(preds_[i].size());
    for (Index pred : preds_[i]) {
      inputs.push_back(pred < 0 ? inputShape_ : report_.outputShapes[pred]);
    }
    report_.outputShapes[i] = layerOutputShape(nodes_[i].layer, inputs);
    report_.order.push_back(nodes_[i].layer.name);
  }

  Index logits = sink;
  if (nodes_[sink].layer.kind == LayerKind::kSoftmax) {
    logits = preds_[sink][0];
    require(logits >= 0, ErrorCode::kBadParameter,
            "node '" + nodes_[sink].layer.name +
                "': Softmax needs a preceding layer");
  }
  require(report_.outputShapes[logits].size() == 1,
          ErrorCode::kShapeConflict,
          "network output must be rank 1, got " +
              shapeToString(report_.outputShapes[logits]));
  report_.logits = logits;
  report_.outputSize = report_.outputShapes[logits][0];

  validated_ = true;
}

ForwardTrace NetworkGraph::forward(const Tensor& input) const {
  ensureValidated();
  require(input.shape() == inputShape_, ErrorCode::kBadInput,
          "network '" + name_ + "' expects input " +
              shapeToString(inputShape_) + ", got " +
              shapeToString(input.shape()));
  require(input.allFinite(), ErrorCode::kBadInput,
          "network input contains non-finite values");

  ForwardTrace trace;
  trace.input = input;
  trace.outputs.assign(nodes_.size(), Tensor{});
  for (Index i : topo_) {
    std::vector<Tensor> inputs;
    inputs.reserve(preds_[i].size());
    for (Index pred : preds_[i]) {
      inputs.push_back(pred < 0 ? input : trace.outputs[pred]);
    }
    trace.outputs[i] = layerForward(nodes_[i].layer, inputs);
  }

  trace.logits = trace.outputs[report_.logits];
  if (nodes_[report_.sink].layer.kind == LayerKind::kSoftmax) {
    trace.hasProbabilities = true;
    trace.probabilities = trace.outputs[report_.sink];
  }
  Index best = 0;
  for (Index k = 1; k < trace.logits.size(); ++k) {
    if (trace.logits.at(k) > trace.logits.at(best)) best = k;
  }
  trace.predictedClass = best;
  return trace;
}

const Tensor& NetworkGraph::nodeInput(const ForwardTrace& trace, Index i,
                                      std::size_t slot) const {
  ensureValidated();
  const Index pred = preds_[i][slot];
  return pred < 0 ? trace.input : trace.outputs[pred];
}

void NetworkGraph::setParameters(Index i, Tensor weights, Tensor bias) {
  require(i >= 0 && i < size(), ErrorCode::kBadParameter,
          "node index " + std::to_string(i) + " out of range");
  LayerSpec& layer = nodes_[i].layer;
  require(layer.hasParameters(), ErrorCode::kBadParameter,
          "node '" + layer.name + "' has no parameters");
  require(weights.shape() == layer.weights.shape(), ErrorCode::kShapeMismatch,
          "node '" + layer.name + "' weights must keep shape " +
              shapeToString(layer.weights.shape()));
  require(bias.shape() == layer.bias.shape(), ErrorCode::kShapeMismatch,
          "node '" + layer.name + "' bias must keep shape " +
              shapeToString(layer.bias.shape()));
  layer.weights = std::move(weights);
  layer.bias = std::move(bias);
}

}  // namespace nnlrp
