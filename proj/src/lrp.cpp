#include "nnlrp/lrp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "nnlrp/error.hpp"
#include "nnlrp/model_io.hpp"

namespace nnlrp {
namespace {

constexpr double kAvgPoolEpsilon = 1e-12;
constexpr double kAlphaBetaSlack = 1e-12;

double stabilized(double z, double eps) {
  return z >= 0.0 ? z + eps : z - eps;
}

struct Accounting {
  double biasAbsorbed = 0.0;
  double epsilonAbsorbed = 0.0;
  double poolDiscarded = 0.0;
  double paddingDiscarded = 0.0;
};

void storeLedger(LedgerRow* ledger, const Tensor& rOut,
                 const std::vector<Tensor>& rIns, const Accounting& acc) {
  if (!ledger) return;
  ledger->sumOut = rOut.sum();
  double sumIn = 0.0;
  for (const Tensor& r : rIns) sumIn += r.sum();
  ledger->sumIn = sumIn;
  ledger->biasAbsorbed = acc.biasAbsorbed;
  ledger->epsilonAbsorbed = acc.epsilonAbsorbed;
  ledger->poolDiscarded = acc.poolDiscarded;
  ledger->paddingDiscarded = acc.paddingDiscarded;
}

void requireLinear(const LayerSpec& layer, const char* rule) {
  require(layer.hasParameters(), ErrorCode::kBadRule,
          std::string(rule) + " rule applies to Convolution or InnerProduct, "
                              "not " +
              layerKindName(layer.kind) + " ('" + layer.name + "')");
}

Tensor epsilonInnerProduct(const LayerSpec& layer, const Tensor& input,
                           const Tensor& rOut, double eps, Accounting& acc) {
  const Index inSize = layer.weights.extent(0);
  const Index outSize = layer.weights.extent(1);
  const Tensor z = layerForward(layer, {input});

  Tensor rIn = Tensor::zeros(input.shape());
  for (Index j = 0; j < outSize; ++j) {
    const double rj = rOut.at(j);
    if (rj == 0.0) continue;
    const double denom = stabilized(z.at(j), eps);
    const double factor = rj / denom;
    for (Index i = 0; i < inSize; ++i) {
      rIn.at(i) +=
          input.at(i) * layer.weights.at(i * outSize + j) * factor;
    }
    acc.biasAbsorbed += layer.bias.at(j) * factor;
    acc.epsilonAbsorbed += (denom - z.at(j)) * factor;
  }
  return rIn;
}

Tensor epsilonConvolution(const LayerSpec& layer, const Tensor& input,
                          const Tensor& rOut, double eps, Accounting& acc) {
  const ConvParams& p = layer.conv;
  const Index h = input.extent(1);
  const Index w = input.extent(2);
  const Tensor z = layerForward(layer, {input});
  const Index outH = z.extent(1);
  const Index outW = z.extent(2);

  Tensor rIn = Tensor::zeros(input.shape());
  for (Index o = 0; o < p.outChannels; ++o) {
    for (Index oy = 0; oy < outH; ++oy) {
      for (Index ox = 0; ox < outW; ++ox) {
        const double rj = rOut(o, oy, ox);
        if (rj == 0.0) continue;
        const double zj = z(o, oy, ox);
        const double denom = stabilized(zj, eps);
        const double factor = rj / denom;
        for (Index c = 0; c < p.inChannels; ++c) {
          for (Index ky = 0; ky < p.kernelH; ++ky) {
            const Index y = oy * p.stride + ky - p.pad;
            if (y < 0 || y >= h) continue;
            for (Index kx = 0; kx < p.kernelW; ++kx) {
              const Index x = ox * p.stride + kx - p.pad;
              if (x < 0 || x >= w) continue;
              const Index xi = input.flatIndex(c, y, x);
              rIn.at(xi) += input.at(xi) *
                            layer.weights(o, c, ky, kx) *
                            factor;
            }
          }
        }
        acc.biasAbsorbed += layer.bias.at(o) * factor;
        acc.epsilonAbsorbed += (denom - zj) * factor;
      }
    }
  }
  return rIn;
}

Tensor alphaBetaInnerProduct(const LayerSpec& layer, const Tensor& input,
                             const Tensor& rOut, double alpha, double beta,
                             Accounting& acc) {
  const Index inSize = layer.weights.extent(0);
  const Index outSize = layer.weights.extent(1);

  Tensor rIn = Tensor::zeros(input.shape());
  for (Index j = 0; j < outSize; ++j) {
    const double rj = rOut.at(j);
    if (rj == 0.0) continue;
    const double biasPlus = std::max(layer.bias.at(j), 0.0);
    const double biasMinus = std::min(layer.bias.at(j), 0.0);
    double zPlus = biasPlus;
    double zMinus = biasMinus;
    for (Index i = 0; i < inSize; ++i) {
      const double zij = input.at(i) * layer.weights.at(i * outSize + j);
      if (zij > 0.0) zPlus += zij;
      if (zij < 0.0) zMinus += zij;
    }

    if (zPlus != 0.0) {
      const double coeff = alpha * rj / zPlus;
      for (Index i = 0; i < inSize; ++i) {
        const double zij = input.at(i) * layer.weights.at(i * outSize + j);
        if (zij > 0.0) rIn.at(i) += coeff * zij;
      }
      acc.biasAbsorbed += coeff * biasPlus;
    } else {
      acc.poolDiscarded += alpha * rj;
    }
    if (zMinus != 0.0) {
      const double coeff = beta * rj / zMinus;
      for (Index i = 0; i < inSize; ++i) {
        const double zij = input.at(i) * layer.weights.at(i * outSize + j);
        if (zij < 0.0) rIn.at(i) += coeff * zij;
      }
      acc.biasAbsorbed += coeff * biasMinus;
    } else {
      acc.poolDiscarded += beta * rj;
    }
  }
  return rIn;
}

Tensor alphaBetaConvolution(const LayerSpec& layer, const Tensor& input,
                            const Tensor& rOut, double alpha, double beta,
                            Accounting& acc) {
  const ConvParams& p = layer.conv;
  const Index h = input.extent(1);
  const Index w = input.extent(2);
  const Shape outShape =
      layerOutputShape(layer, {input.shape()});
  const Index outH = outShape[1];
  const Index outW = outShape[2];

  Tensor rIn = Tensor::zeros(input.shape());
  for (Index o = 0; o < p.outChannels; ++o) {
    const double biasPlus = std::max(layer.bias.at(o), 0.0);
    const double biasMinus = std::min(layer.bias.at(o), 0.0);
    for (Index oy = 0; oy < outH; ++oy) {
      for (Index ox = 0; ox < outW; ++ox) {
        const double rj = rOut(o, oy, ox);
        if (rj == 0.0) continue;

        double zPlus = biasPlus;
        double zMinus = biasMinus;
        for (Index c = 0; c < p.inChannels; ++c) {
          for (Index ky = 0; ky < p.kernelH; ++ky) {
            const Index y = oy * p.stride + ky - p.pad;
            if (y < 0 || y >= h) continue;
            for (Index kx = 0; kx < p.kernelW; ++kx) {
              const Index x = ox * p.stride + kx - p.pad;
              if (x < 0 || x >= w) continue;
              const double zij =
                  input(c, y, x) *
                  layer.weights(o, c, ky, kx);
              if (zij > 0.0) zPlus += zij;
              if (zij < 0.0) zMinus += zij;
            }
          }
        }

        const double coeffPlus = zPlus != 0.0 ? alpha * rj / zPlus : 0.0;
        const double coeffMinus = zMinus != 0.0 ? beta * rj / zMinus : 0.0;
        if (zPlus != 0.0 || zMinus != 0.0) {
          for (Index c = 0; c < p.inChannels; ++c) {
            for (Index ky = 0; ky < p.kernelH; ++ky) {
              const Index y = oy * p.stride + ky - p.pad;
              if (y < 0 || y >= h) continue;
              for (Index kx = 0; kx < p.kernelW; ++kx) {
                const Index x = ox * p.stride + kx - p.pad;
                if (x < 0 || x >= w) continue;
                const Index xi = input.flatIndex(c, y, x);
                const double zij =
                    input.at(xi) *
                    layer.weights(o, c, ky, kx);
                if (zij > 0.0) rIn.at(xi) += coeffPlus * zij;
                if (zij < 0.0) rIn.at(xi) += coeffMinus * zij;
              }
            }
          }
        }
        if (zPlus != 0.0) {
          acc.biasAbsorbed += coeffPlus * biasPlus;
        } else {
          acc.poolDiscarded += alpha * rj;
        }
        if (zMinus != 0.0) {
          acc.biasAbsorbed += coeffMinus * biasMinus;
        } else {
          acc.poolDiscarded += beta * rj;
        }
      }
    }
  }
  return rIn;
}

Tensor splitUniform(const LayerSpec& layer, const Shape& inputShape,
                    const Tensor& rOut, Accounting& acc) {
  const Index fanIn = layerFanIn(layer, inputShape);
  Tensor rIn = Tensor::zeros(inputShape);

  if (layer.kind == LayerKind::kInnerProduct) {
    double each = 0.0;
    for (Index j = 0; j < rOut.size(); ++j) {
      each += rOut.at(j) / static_cast<double>(fanIn);
    }
    rIn.array() = each;
    return rIn;
  }

  const ConvParams& p = layer.conv;
  const Index h = inputShape[1];
  const Index w = inputShape[2];
  const Shape outShape = layerOutputShape(layer, {inputShape});
  const Index outH = outShape[1];
  const Index outW = outShape[2];
  for (Index o = 0; o < p.outChannels; ++o) {
    for (Index oy = 0; oy < outH; ++oy) {
      for (Index ox = 0; ox < outW; ++ox) {
        const double rj = rOut(o, oy, ox);
        if (rj == 0.0) continue;
        const double share = rj / static_cast<double>(fanIn);
        for (Index c = 0; c < p.inChannels; ++c) {
          for (Index ky = 0; ky < p.kernelH; ++ky) {
            const Index y = oy * p.stride + ky - p.pad;
            for (Index kx = 0; kx < p.kernelW; ++kx) {
              const Index x = ox * p.stride + kx - p.pad;
              if (y >= 0 && y < h && x >= 0 && x < w) {
                rIn(c, y, x) += share;
              } else {
                acc.paddingDiscarded += share;
              }
            }
          }
        }
      }
    }
  }
  return rIn;
}

std::string sanitizeFileName(const std::string& name) {
  std::string out = name;
  for (char& c : out) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                    (c >= '0' && c <= '9') || c == '_' || c == '-' ||
                    c == '.';
    if (!ok) c = '_';
  }
  return out;
}

std::string formatDouble(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

LrpRule LrpRule::epsilonRule(double eps) {
  require(eps > 0.0, ErrorCode::kBadRule,
          "epsilon must be positive, got " + formatDouble(eps));
  LrpRule rule;
  rule.kind = Kind::kEpsilon;
  rule.epsilon = eps;
  return rule;
}

LrpRule LrpRule::alphaBeta(double alpha, double beta) {
  require(std::abs(alpha + beta - 1.0) <= kAlphaBetaSlack,
          ErrorCode::kBadRule,
          "alpha + beta must equal 1, got " + formatDouble(alpha) + " + " +
              formatDouble(beta));
  LrpRule rule;
  rule.kind = Kind::kAlphaBeta;
  rule.alpha = alpha;
  rule.beta = beta;
  return rule;
}

LrpRule LrpRule::flat() {
  LrpRule rule;
  rule.kind = Kind::kFlat;
  return rule;
}

RuleAssignment RuleAssignment::defaultPolicy(const NetworkGraph& net,
                                             double epsilon, double alpha,
                                             double beta, Index flatDepth) {
  const LrpRule eps = LrpRule::epsilonRule(epsilon);
  const LrpRule ab = LrpRule::alphaBeta(alpha, beta);
  require(flatDepth >= 0, ErrorCode::kBadRule,
          "flat depth must be non-negative");

  net.validate();
  std::vector<Index> priorConvs(net.size(), 0);
  for (Index i : net.topoOrder()) {
    Index best = -1;
    for (Index pred : net.predecessorIndices(i)) {
      const Index via =
          pred < 0 ? 0
                   : priorConvs[pred] +
                         (net.node(pred).layer.kind == LayerKind::kConvolution
                              ? 1
                              : 0);
      if (best < 0 || via < best) best = via;
    }
    priorConvs[i] = best;
  }

  RuleAssignment rules;
  for (Index i = 0; i < net.size(); ++i) {
    switch (net.node(i).layer.kind) {
      case LayerKind::kInnerProduct:
        rules.setRule(i, eps);
        break;
      case LayerKind::kConvolution:
        rules.setRule(i, priorConvs[i] < flatDepth ? LrpRule::flat() : ab);
        break;
      default:
        break;
    }
  }
  return rules;
}

RuleAssignment RuleAssignment::uniform(const NetworkGraph& net,
                                       const LrpRule& rule) {
  RuleAssignment rules;
  for (Index i = 0; i < net.size(); ++i) {
    if (net.node(i).layer.hasParameters()) rules.setRule(i, rule);
  }
  return rules;
}

const LrpRule& RuleAssignment::ruleFor(Index node) const {
  const auto it = rules_.find(node);
  require(it != rules_.end(), ErrorCode::kMissingRule,
          "no rule assigned to node " + std::to_string(node));
  return it->second;
}

Tensor epsilonBackward(const LayerSpec& layer, const Tensor& input,
                       const Tensor& rOut, double epsilon,
                       LedgerRow* ledger) {
  requireLinear(layer, "epsilon");
  require(epsilon >= 0.0, ErrorCode::kBadRule, "epsilon must not be negative");
  Accounting acc;
  Tensor rIn = layer.kind == LayerKind::kInnerProduct
                   ? epsilonInnerProduct(layer, input, rOut, epsilon, acc)
                   : epsilonConvolution(layer, input, rOut, epsilon, acc);
  storeLedger(ledger, rOut, {rIn}, acc);
  return rIn;
}

Tensor alphaBetaBackward(const LayerSpec& layer, const Tensor& input,
                         const Tensor& rOut, double alpha, double beta,
                         LedgerRow* ledger) {
  requireLinear(layer, "alpha-beta");
  require(std::abs(alpha + beta - 1.0) <= kAlphaBetaSlack,
          ErrorCode::kBadRule,
          "alpha + beta must equal 1, got " + formatDouble(alpha) + " + " +
              formatDouble(beta));
  Accounting acc;
  Tensor rIn =
      layer.kind == LayerKind::kInnerProduct
          ? alphaBetaInnerProduct(layer, input, rOut, alpha, beta, acc)
          : alphaBetaConvolution(layer, input, rOut, alpha, beta, acc);
  storeLedger(ledger, rOut, {rIn}, acc);
  return rIn;
}

Tensor flatBackward(const LayerSpec& layer, const Shape& inputShape,
                    const Tensor& rOut, LedgerRow* ledger) {
  requireLinear(layer, "flat");
  Accounting acc;
  Tensor rIn = splitUniform(layer, inputShape, rOut, acc);
  storeLedger(ledger, rOut, {rIn}, acc);
  return rIn;
}

std::vector<Tensor> fixedBackward(const LayerSpec& layer,
                                  const std::vector<Tensor>& inputs,
                                  const Tensor& rOut, LedgerRow* ledger) {
  Accounting acc;
  std::vector<Tensor> rIns;
  switch (layer.kind) {
    case LayerKind::kRelu:
    case LayerKind::kSoftmax: {
      require(inputs[0].sameShape(rOut), ErrorCode::kShapeMismatch,
              "relevance shape " + shapeToString(rOut.shape()) +
                  " does not match input " +
                  shapeToString(inputs[0].shape()) + " at layer '" +
                  layer.name + "'");
      rIns.push_back(rOut);
      break;
    }
    case LayerKind::kFlatten: {
      rIns.push_back(rOut.reshaped(inputs[0].shape()));
      break;
    }
    case LayerKind::kConcat: {
      const Index axis = layer.concatAxis;
      const Shape& outShape = rOut.shape();
      const Index rank = static_cast<Index>(outShape.size());
      Index outer = 1;
      for (Index d = 0; d < axis; ++d) outer *= outShape[d];
      Index inner = 1;
      for (Index d = axis + 1; d < rank; ++d) inner *= outShape[d];
      Index axisOffset = 0;
      for (const Tensor& in : inputs) {
        Tensor slice = Tensor::zeros(in.shape());
        const Index span = in.extent(axis) * inner;
        for (Index o = 0; o < outer; ++o) {
          const double* src = rOut.data() + o * outShape[axis] * inner +
                              axisOffset * inner;
          std::copy(src, src + span, slice.data() + o * span);
        }
        axisOffset += in.extent(axis);
        rIns.push_back(std::move(slice));
      }
      break;
    }
    case LayerKind::kMaxPool: {
      const Tensor& input = inputs[0];
      const PoolParams& p = layer.pool;
      const Index h = input.extent(1);
      const Index w = input.extent(2);
      Tensor rIn = Tensor::zeros(input.shape());
      for (Index ch = 0; ch < input.extent(0); ++ch) {
        const double* plane = input.data() + ch * h * w;
        for (Index oy = 0; oy < rOut.extent(1); ++oy) {
          for (Index ox = 0; ox < rOut.extent(2); ++ox) {
            Index bestY = oy * p.stride;
            Index bestX = ox * p.stride;
            double best = plane[bestY * w + bestX];
            for (Index ky = 0; ky < p.window; ++ky) {
              for (Index kx = 0; kx < p.window; ++kx) {
                const Index y = oy * p.stride + ky;
                const Index x = ox * p.stride + kx;
                if (plane[y * w + x] > best) {
                  best = plane[y * w + x];
                  bestY = y;
                  bestX = x;
                }
              }
            }
            rIn(ch, bestY, bestX) +=
                rOut(ch, oy, ox);
          }
        }
      }
      rIns.push_back(std::move(rIn));
      break;
    }
    case LayerKind::kAvgPool: {
      const Tensor& input = inputs[0];
      const PoolParams& p = layer.pool;
      const Index h = input.extent(1);
      const Index w = input.extent(2);
      Tensor rIn = Tensor::zeros(input.shape());
      for (Index ch = 0; ch < input.extent(0); ++ch) {
        const double* plane = input.data() + ch * h * w;
        for (Index oy = 0; oy < rOut.extent(1); ++oy) {
          for (Index ox = 0; ox < rOut.extent(2); ++ox) {
            const double rj = rOut(ch, oy, ox);
            if (rj == 0.0) continue;
            double z = 0.0;
            for (Index ky = 0; ky < p.window; ++ky) {
              for (Index kx = 0; kx < p.window; ++kx) {
                z += plane[(oy * p.stride + ky) * w + ox * p.stride + kx];
              }
            }
            const double denom = stabilized(z, kAvgPoolEpsilon);
            const double factor = rj / denom;
            for (Index ky = 0; ky < p.window; ++ky) {
              for (Index kx = 0; kx < p.window; ++kx) {
                const Index y = oy * p.stride + ky;
                const Index x = ox * p.stride + kx;
                rIn(ch, y, x) +=
                    factor * plane[y * w + x];
              }
            }
            acc.epsilonAbsorbed += (denom - z) * factor;
          }
        }
      }
      rIns.push_back(std::move(rIn));
      break;
    }
    default:
      fail(ErrorCode::kBadRule,
           std::string("no fixed behavior for ") +
               layerKindName(layer.kind) + " ('" + layer.name + "')");
  }
  storeLedger(ledger, rOut, rIns, acc);
  return rIns;
}

RelevanceMap explain(const NetworkGraph& net, const ForwardTrace& trace,
                     Index targetIndex, const RuleAssignment& rules) {
  const ShapeReport& report = net.validate();
  const Index n = net.size();
  require(static_cast<Index>(trace.outputs.size()) == n,
          ErrorCode::kTraceMismatch,
          "trace holds " + std::to_string(trace.outputs.size()) +
              " node outputs, network has " + std::to_string(n));
  require(trace.input.shape() == net.inputShape(), ErrorCode::kTraceMismatch,
          "trace input shape does not match the network");
  for (Index i = 0; i < n; ++i) {
    require(trace.outputs[i].shape() == report.outputShapes[i],
            ErrorCode::kTraceMismatch,
            "trace output shape at node '" + net.node(i).layer.name +
                "' does not match the network");
  }
  require(targetIndex >= 0 && targetIndex < report.outputSize,
          ErrorCode::kBadTarget,
          "target " + std::to_string(targetIndex) + " out of range for " +
              std::to_string(report.outputSize) + " outputs");
  for (Index i = 0; i < n; ++i) {
    if (net.node(i).layer.hasParameters()) {
      require(rules.hasRule(i), ErrorCode::kMissingRule,
              "no rule assigned to parameterized node '" +
                  net.node(i).layer.name + "'");
    }
  }

  RelevanceMap rmap;
  rmap.targetIndex = targetIndex;
  rmap.anchor = trace.logits.at(targetIndex);
  rmap.nodeRelevance.reserve(n);
  for (Index i = 0; i < n; ++i) {
    rmap.nodeRelevance.push_back(Tensor::zeros(report.outputShapes[i]));
  }
  rmap.inputRelevance = Tensor::zeros(net.inputShape());
  rmap.nodeRelevance[report.logits].at(targetIndex) = rmap.anchor;

  const std::vector<Index>& topo = net.topoOrder();
  for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
    const Index i = *it;
    const LayerSpec& layer = net.node(i).layer;
    const Tensor& rOut = rmap.nodeRelevance[i];
    LedgerRow row;
    row.node = layer.name;

    std::vector<Tensor> rIns;
    if (layer.hasParameters()) {
      const Tensor& input = net.nodeInput(trace, i, 0);
      const LrpRule& rule = rules.ruleFor(i);
      switch (rule.kind) {
        case LrpRule::Kind::kEpsilon:
          rIns.push_back(
              epsilonBackward(layer, input, rOut, rule.epsilon, &row));
          break;
        case LrpRule::Kind::kAlphaBeta:
          rIns.push_back(alphaBetaBackward(layer, input, rOut, rule.alpha,
                                           rule.beta, &row));
          break;
        case LrpRule::Kind::kFlat:
          rIns.push_back(flatBackward(layer, input.shape(), rOut, &row));
          break;
      }
    } else {
      const std::vector<Index>& preds = net.predecessorIndices(i);
      std::vector<Tensor> inputs;
      inputs.reserve(preds.size());
      for (std::size_t s = 0; s < preds.size(); ++s) {
        inputs.push_back(net.nodeInput(trace, i, s));
      }
      rIns = fixedBackward(layer, inputs, rOut, &row);
    }

    const std::vector<Index>& preds = net.predecessorIndices(i);
    for (std::size_t s = 0; s < preds.size(); ++s) {
      if (preds[s] < 0) {
        rmap.inputRelevance.array() += rIns[s].array();
      } else {
        rmap.nodeRelevance[preds[s]].array() += rIns[s].array();
      }
    }
    rmap.ledger.push_back(std::move(row));
  }
  return rmap;
}

ConservationReport conservationAudit(const RelevanceMap& rmap,
                                     const ForwardTrace& trace) {
  require(rmap.targetIndex >= 0 && rmap.targetIndex < trace.logits.size(),
          ErrorCode::kTraceMismatch, "relevance map target is out of range");
  require(rmap.anchor == trace.logits.at(rmap.targetIndex),
          ErrorCode::kTraceMismatch,
          "relevance map anchor does not match the trace");

  ConservationReport report;
  report.rows = rmap.ledger;
  report.anchor = rmap.anchor;
  report.inputSum = rmap.inputRelevance.sum();
  report.globalAbsolute = std::abs(report.inputSum - report.anchor);
  const double scale = std::abs(report.anchor);
  report.globalRelative =
      scale > 0.0 ? report.globalAbsolute / scale
                  : (report.globalAbsolute == 0.0
                         ? 0.0
                         : std::numeric_limits<double>::infinity());
  for (const LedgerRow& row : report.rows) {
    const double dev = std::abs(row.deviation());
    report.maxAbsoluteDeviation = std::max(report.maxAbsoluteDeviation, dev);
    const double rel =
        scale > 0.0 ? dev / scale
                    : (dev == 0.0 ? 0.0
                                  : std::numeric_limits<double>::infinity());
    report.maxRelativeDeviation = std::max(report.maxRelativeDeviation, rel);
    report.maxResidual =
        std::max(report.maxResidual, std::abs(row.residual()));
  }
  return report;
}

Tensor channelPool(const Tensor& rInput) {
  require(rInput.rank() == 3, ErrorCode::kShapeMismatch,
          "channel pooling needs a (C,H,W) tensor, got " +
              shapeToString(rInput.shape()));
  return reduceSum(rInput, {0});
}

std::string ledgerText(const RelevanceMap& rmap) {
  std::string out;
  out += "target " + std::to_string(rmap.targetIndex) + "\n";
  out += "anchor " + formatDouble(rmap.anchor) + "\n";
  out += "input_sum " + formatDouble(rmap.inputRelevance.sum()) + "\n";
  out +=
      "node\tsum_out\tsum_in\tdeviation\tbias_absorbed\tepsilon_absorbed\t"
      "pool_discarded\tpadding_discarded\n";
  for (const LedgerRow& row : rmap.ledger) {
    out += row.node + "\t" + formatDouble(row.sumOut) + "\t" +
           formatDouble(row.sumIn) + "\t" + formatDouble(row.deviation()) +
           "\t" + formatDouble(row.biasAbsorbed) + "\t" +
           formatDouble(row.epsilonAbsorbed) + "\t" +
           formatDouble(row.poolDiscarded) + "\t" +
           formatDouble(row.paddingDiscarded) + "\n";
  }
  return out;
}

void exportRelevance(const RelevanceMap& rmap, const NetworkGraph& net,
                     const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  require(!ec, ErrorCode::kIoFailure,
          "cannot create directory '" + dir + "': " + ec.message());
  const std::filesystem::path base(dir);

  nlohmann::json index;
  writeTensorRaw(rmap.inputRelevance, (base / "input.bin").string());
  nlohmann::json inputEntry;
  inputEntry["file"] = "input.bin";
  inputEntry["shape"] = rmap.inputRelevance.shape();
  index["input"] = inputEntry;

  nlohmann::json nodes = nlohmann::json::array();
  for (Index i = 0; i < net.size(); ++i) {
    const std::string file = "n" + std::to_string(i) + "_" +
                             sanitizeFileName(net.node(i).layer.name) + ".bin";
    writeTensorRaw(rmap.nodeRelevance[i], (base / file).string());
    nlohmann::json entry;
    entry["name"] = net.node(i).layer.name;
    entry["file"] = file;
    entry["shape"] = rmap.nodeRelevance[i].shape();
    nodes.push_back(entry);
  }
  index["nodes"] = nodes;

  const std::string indexText = index.dump(2);
  std::ofstream indexOut(base / "index.json", std::ios::trunc);
  indexOut << indexText << "\n";
  require(indexOut.good(), ErrorCode::kIoFailure,
          "cannot write relevance index in '" + dir + "'");

  std::ofstream ledgerOut(base / "ledger.txt", std::ios::trunc);
  ledgerOut << ledgerText(rmap);
  require(ledgerOut.good(), ErrorCode::kIoFailure,
          "cannot write ledger in '" + dir + "'");
}

}  // namespace nnlrp
