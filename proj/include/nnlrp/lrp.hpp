#pragma once

#include <map>
#include <string>
#include <vector>

#include "nnlrp/graph.hpp"
#include "nnlrp/tensor.hpp"

namespace nnlrp {

struct LrpRule {
  enum class Kind { kEpsilon, kAlphaBeta, kFlat };

  Kind kind = Kind::kEpsilon;
  double epsilon = 0.01;
  double alpha = 2.0;
  double beta = -1.0;

  static LrpRule epsilonRule(double eps);
  static LrpRule alphaBeta(double alpha, double beta);
  static LrpRule flat();
};

/// Rule per parameterized node. ReLU/pool/Flatten/Concat/Softmax behavior is
/// fixed and never assigned.
class RuleAssignment {
 public:
  /// Depth-based policy: epsilon on InnerProduct nodes, alpha-beta on
  /// Convolution nodes, and the flat rule on convolutions whose shortest
  /// path from the input crosses fewer than flatDepth convolutions.
  static RuleAssignment defaultPolicy(const NetworkGraph& net,
                                      double epsilon = 0.01,
                                      double alpha = 2.0, double beta = -1.0,
                                      Index flatDepth = 1);

  /// The same rule for every parameterized node.
  static RuleAssignment uniform(const NetworkGraph& net, const LrpRule& rule);

  void setRule(Index node, const LrpRule& rule) { rules_[node] = rule; }
  bool hasRule(Index node) const { return rules_.count(node) != 0; }
  const LrpRule& ruleFor(Index node) const;

 private:
  std::map<Index, LrpRule> rules_;
};

/// One backward step's accounting. The exact identity is
/// sumOut = sumIn + biasAbsorbed + epsilonAbsorbed + poolDiscarded +
/// paddingDiscarded, up to rounding.
struct LedgerRow {
  std::string node;
  double sumOut = 0.0;
  double sumIn = 0.0;
  double biasAbsorbed = 0.0;
  double epsilonAbsorbed = 0.0;
  double poolDiscarded = 0.0;
  double paddingDiscarded = 0.0;

  double deviation() const { return sumOut - sumIn; }
  double absorbed() const {
    return biasAbsorbed + epsilonAbsorbed + poolDiscarded + paddingDiscarded;
  }
  double residual() const { return deviation() - absorbed(); }
};

/// Relevance at every node output plus the network input, with the
/// conservation ledger (one row per node, in propagation order).
struct RelevanceMap {
  std::vector<Tensor> nodeRelevance;
  Tensor inputRelevance;
  std::vector<LedgerRow> ledger;
  Index targetIndex = 0;
  double anchor = 0.0;
};

/// Per-layer relevance messages, pooled. `input` is the activation feeding
/// the layer; z_j is recomputed from it (bit-identical to the trace by
/// forward determinism). Messages for R_j = 0 are zero. A null ledger skips
/// the accounting.
Tensor epsilonBackward(const LayerSpec& layer, const Tensor& input,
                       const Tensor& rOut, double epsilon,
                       LedgerRow* ledger = nullptr);
Tensor alphaBetaBackward(const LayerSpec& layer, const Tensor& input,
                         const Tensor& rOut, double alpha, double beta,
                         LedgerRow* ledger = nullptr);
Tensor flatBackward(const LayerSpec& layer, const Shape& inputShape,
                    const Tensor& rOut, LedgerRow* ledger = nullptr);

/// Fixed behaviors: ReLU and Softmax pass through, MaxPool sends everything
/// to the traced argmax (ties to the lowest flat index), AvgPool splits
/// proportionally to input with a built-in 1e-12 stabilizer, Flatten and
/// Concat realign indices. One result tensor per input slot.
std::vector<Tensor> fixedBackward(const LayerSpec& layer,
                                  const std::vector<Tensor>& inputs,
                                  const Tensor& rOut,
                                  LedgerRow* ledger = nullptr);

/// Full backward pass: seeds the target logit's value at the pre-softmax
/// output, then walks the graph in reverse topological order pooling
/// incoming relevance at every activation.
RelevanceMap explain(const NetworkGraph& net, const ForwardTrace& trace,
                     Index targetIndex, const RuleAssignment& rules);

struct ConservationReport {
  std::vector<LedgerRow> rows;
  double anchor = 0.0;
  double inputSum = 0.0;
  double globalAbsolute = 0.0;
  double globalRelative = 0.0;
  double maxAbsoluteDeviation = 0.0;
  double maxRelativeDeviation = 0.0;
  double maxResidual = 0.0;
};

ConservationReport conservationAudit(const RelevanceMap& rmap,
                                     const ForwardTrace& trace);

/// Sum-pools (C,H,W) relevance over the channel axis to an H×W grid.
Tensor channelPool(const Tensor& rInput);

/// Plain-text ledger: one row per layer with sums, deviation, and absorbed
/// mass, full precision.
std::string ledgerText(const RelevanceMap& rmap);

/// Writes per-node raw relevance tensors (float32 payload format), an
/// index.json describing them, and ledger.txt into `dir`.
void exportRelevance(const RelevanceMap& rmap, const NetworkGraph& net,
                     const std::string& dir);

}  // namespace nnlrp
