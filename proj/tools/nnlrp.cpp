// nnlrp command line: predict / explain / audit / info.
//
// Exit codes: 0 success, 2 malformed input or arguments, 3 model error,
// 4 rule-policy validation failure, 5 audit tolerance breach.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "nnlrp/autodiff.hpp"
#include "nnlrp/error.hpp"
#include "nnlrp/graph.hpp"
#include "nnlrp/heatmap.hpp"
#include "nnlrp/lrp.hpp"
#include "nnlrp/model_io.hpp"
#include "nnlrp/oversample.hpp"
#include "nnlrp/parallel.hpp"
#include "nnlrp/rng.hpp"
#include "nnlrp/version.hpp"

namespace {

using nnlrp::Error;
using nnlrp::ErrorCode;
using nnlrp::Index;
using nnlrp::LrpRule;
using nnlrp::NetworkGraph;
using nnlrp::RuleAssignment;
using nnlrp::Tensor;

constexpr int kExitOk = 0;
constexpr int kExitBadInput = 2;
constexpr int kExitModelError = 3;
constexpr int kExitBadRule = 4;
constexpr int kExitAuditBreach = 5;

struct RulePolicy {
  std::string policy = "default";
  double epsilon = 0.01;
  double alpha = 2.0;
  double beta = -1.0;
  Index flatDepth = 1;
};

/// Throws kBadRule on invalid parameters. Runs before the model is touched.
void validatePolicy(const RulePolicy& p) {
  nnlrp::require(p.flatDepth >= 0, ErrorCode::kBadRule,
                 "flat depth must be non-negative");
  if (p.policy == "default") {
    LrpRule::epsilonRule(p.epsilon);
    LrpRule::alphaBeta(p.alpha, p.beta);
  } else if (p.policy == "epsilon") {
    LrpRule::epsilonRule(p.epsilon);
  } else if (p.policy == "alphabeta") {
    LrpRule::alphaBeta(p.alpha, p.beta);
  } else if (p.policy == "flat") {
    LrpRule::flat();
  } else {
    nnlrp::fail(ErrorCode::kBadRule, "unknown rule policy '" + p.policy + "'");
  }
}

RuleAssignment buildRules(const NetworkGraph& net, const RulePolicy& p) {
  if (p.policy == "epsilon")
    return RuleAssignment::uniform(net, LrpRule::epsilonRule(p.epsilon));
  if (p.policy == "alphabeta")
    return RuleAssignment::uniform(net, LrpRule::alphaBeta(p.alpha, p.beta));
  if (p.policy == "flat")
    return RuleAssignment::uniform(net, LrpRule::flat());
  return RuleAssignment::defaultPolicy(net, p.epsilon, p.alpha, p.beta,
                                       p.flatDepth);
}

nlohmann::json policyJson(const RulePolicy& p) {
  nlohmann::json j;
  j["policy"] = p.policy;
  j["epsilon"] = p.epsilon;
  j["alpha"] = p.alpha;
  j["beta"] = p.beta;
  j["flat_depth"] = p.flatDepth;
  return j;
}

std::string crcHex(std::uint32_t value) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%08x", value);
  return buf;
}

nlohmann::json fileStamp(const std::string& path) {
  nlohmann::json j;
  j["path"] = path;
  j["crc32"] = crcHex(nnlrp::crc32File(path));
  return j;
}

std::string formatScalar(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string formatScores(const Tensor& scores) {
  std::string out;
  for (Index i = 0; i < scores.size(); ++i) {
    if (i) out += ' ';
    out += formatScalar(scores.at(i));
  }
  return out;
}

std::string formatShape(const nnlrp::Shape& shape) {
  std::string out;
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out += 'x';
    out += std::to_string(shape[i]);
  }
  return out.empty() ? "scalar" : out;
}

bool hasSuffix(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

/// PPM inputs go through the model's recorded preprocess; anything else is
/// read as a raw float32 tensor of exactly the network's input shape. When
/// oversampling, a PPM frame may be larger than the input: the crop geometry
/// is validated downstream and the engine does not resample.
Tensor loadInput(const NetworkGraph& net, const std::string& path,
                 bool allowLargerFrame = false) {
  if (hasSuffix(path, ".ppm")) {
    const nnlrp::RgbImage img = nnlrp::readPpm(path);
    Tensor t = nnlrp::ppmToTensor(img, net.preprocess());
    if (allowLargerFrame) return t;
    nnlrp::require(t.shape() == net.inputShape(), ErrorCode::kBadInput,
                   "image '" + path + "' has shape " + formatShape(t.shape()) +
                       " but the model expects " +
                       formatShape(net.inputShape()));
    return t;
  }
  return nnlrp::readTensorRaw(path, net.inputShape());
}

Index resolveTarget(const std::string& spec, const nnlrp::ForwardTrace& trace) {
  if (spec == "predicted") return trace.predictedClass;
  std::size_t used = 0;
  long long value = 0;
  try {
    value = std::stoll(spec, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  nnlrp::require(used == spec.size(), ErrorCode::kBadInput,
                 "target must be 'predicted' or an integer, got '" + spec +
                     "'");
  return static_cast<Index>(value);
}

void writeManifest(const std::string& outDir, const nlohmann::json& manifest) {
  std::error_code ec;
  std::filesystem::create_directories(outDir, ec);
  nnlrp::require(!ec, ErrorCode::kIoFailure,
                 "cannot create directory '" + outDir + "': " + ec.message());
  const std::string path =
      (std::filesystem::path(outDir) / "run_manifest.json").string();
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  nnlrp::require(file.good(), ErrorCode::kIoFailure,
                 "cannot write '" + path + "'");
  file << manifest.dump(2) << '\n';
  nnlrp::require(file.good(), ErrorCode::kIoFailure,
                 "write to '" + path + "' failed");
}

Index argmax(const Tensor& scores) {
  Index best = 0;
  for (Index i = 1; i < scores.size(); ++i)
    if (scores.at(i) > scores.at(best)) best = i;
  return best;
}

struct PredictOpts {
  std::string model;
  std::vector<std::string> inputs;
  bool oversample = false;
  double cropFraction = 0.875;
  std::string out = "nnlrp-out";
};

int cmdPredict(const PredictOpts& opts) {
  NetworkGraph net;
  try {
    net = nnlrp::loadModel(opts.model);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitModelError;
  }

  nlohmann::json manifest;
  manifest["command"] = "predict";
  manifest["engine_version"] = nnlrp::kEngineVersion;
  manifest["model"] = fileStamp(opts.model);
  manifest["inputs"] = nlohmann::json::array();
  manifest["config"]["oversample"] = opts.oversample;
  manifest["config"]["crop_fraction"] = opts.cropFraction;
  manifest["config"]["out"] = opts.out;

  try {
    for (const std::string& path : opts.inputs) {
      const Tensor input = loadInput(net, path, opts.oversample);
      manifest["inputs"].push_back(fileStamp(path));
      std::printf("input: %s\n", path.c_str());
      if (opts.oversample) {
        const nnlrp::OversampleResult result =
            nnlrp::predictOversampled(net, input, opts.cropFraction);
        const char* label =
            result.usedProbabilities ? "probabilities" : "logits";
        for (std::size_t k = 0; k < result.cropScores.size(); ++k)
          std::printf("crop %zu: %s\n", k,
                      formatScores(result.cropScores[k]).c_str());
        std::printf("mean (%s): %s\n", label,
                    formatScores(result.mean).c_str());
        std::printf("predicted: %lld\n",
                    static_cast<long long>(argmax(result.mean)));
      } else {
        const nnlrp::ForwardTrace trace = net.forward(input);
        const Tensor& scores =
            trace.hasProbabilities ? trace.probabilities : trace.logits;
        const char* label =
            trace.hasProbabilities ? "probabilities" : "logits";
        std::printf("scores (%s): %s\n", label, formatScores(scores).c_str());
        std::printf("predicted: %lld\n",
                    static_cast<long long>(trace.predictedClass));
      }
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitBadInput;
  }

  manifest["outputs"] = {"run_manifest.json"};
  writeManifest(opts.out, manifest);
  return kExitOk;
}

struct ExplainOpts {
  std::string model;
  std::string input;
  std::string target = "predicted";
  RulePolicy rules;
  Index upscale = 8;
  std::vector<double> range;
  std::string out = "nnlrp-out";
};

int cmdExplain(const ExplainOpts& opts) {
  try {
    validatePolicy(opts.rules);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitBadRule;
  }
  if (opts.upscale < 1) {
    std::fprintf(stderr, "error: --upscale must be at least 1\n");
    return kExitBadInput;
  }
  if (!opts.range.empty() && !(opts.range[0] < 0.0 && 0.0 < opts.range[1])) {
    std::fprintf(stderr, "error: --range must satisfy lo < 0 < hi\n");
    return kExitBadInput;
  }

  NetworkGraph net;
  try {
    net = nnlrp::loadModel(opts.model);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitModelError;
  }

  Tensor input;
  try {
    input = loadInput(net, opts.input);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitBadInput;
  }

  nnlrp::RelevanceMap rmap;
  nnlrp::ForwardTrace trace;
  Index target = 0;
  try {
    trace = net.forward(input);
    target = resolveTarget(opts.target, trace);
    const RuleAssignment rules = buildRules(net, opts.rules);
    rmap = nnlrp::explain(net, trace, target, rules);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return (e.code() == ErrorCode::kBadTarget ||
            e.code() == ErrorCode::kBadInput)
               ? kExitBadInput
               : kExitModelError;
  }

  const std::filesystem::path base(opts.out);
  std::error_code ec;
  std::filesystem::create_directories(base, ec);
  nnlrp::require(!ec, ErrorCode::kIoFailure,
                 "cannot create directory '" + opts.out + "': " + ec.message());

  Tensor grid = rmap.inputRelevance;
  if (grid.shape().size() == 3) grid = nnlrp::channelPool(grid);
  if (grid.shape().size() == 1) grid = grid.reshaped({1, grid.size()});

  const nnlrp::Heatmap heat =
      opts.range.empty()
          ? nnlrp::Heatmap::symmetricMax(grid)
          : nnlrp::Heatmap::fixedRange(grid, opts.range[0], opts.range[1]);
  nnlrp::writePpm(nnlrp::render(heat, opts.upscale),
                  (base / "heatmap.ppm").string());
  nnlrp::writeCsv(grid, (base / "heatmap.csv").string());
  nnlrp::exportRelevance(rmap, net, (base / "relevance").string());

  const nnlrp::ConservationReport report =
      nnlrp::conservationAudit(rmap, trace);

  nlohmann::json manifest;
  manifest["command"] = "explain";
  manifest["engine_version"] = nnlrp::kEngineVersion;
  manifest["model"] = fileStamp(opts.model);
  manifest["inputs"] = {fileStamp(opts.input)};
  manifest["config"]["target"]["requested"] = opts.target;
  manifest["config"]["target"]["resolved"] = target;
  manifest["config"]["rules"] = policyJson(opts.rules);
  manifest["config"]["upscale"] = opts.upscale;
  if (opts.range.empty()) {
    manifest["config"]["normalization"]["mode"] = "symmetric-max";
  } else {
    manifest["config"]["normalization"]["mode"] = "fixed-range";
    manifest["config"]["normalization"]["lo"] = opts.range[0];
    manifest["config"]["normalization"]["hi"] = opts.range[1];
  }
  manifest["config"]["out"] = opts.out;
  manifest["outputs"] = {"heatmap.ppm", "heatmap.csv", "relevance",
                         "run_manifest.json"};
  writeManifest(opts.out, manifest);

  std::printf("model: %s\n", net.name().c_str());
  std::printf("predicted: %lld\n",
              static_cast<long long>(trace.predictedClass));
  std::printf("target: %lld\n", static_cast<long long>(target));
  std::printf("anchor: %s\n", formatScalar(rmap.anchor).c_str());
  std::printf("input relevance sum: %s\n",
              formatScalar(report.inputSum).c_str());
  std::printf("global deviation: %s (relative %s)\n",
              formatScalar(report.globalAbsolute).c_str(),
              formatScalar(report.globalRelative).c_str());
  std::printf("wrote %s: heatmap.ppm heatmap.csv relevance/ run_manifest.json\n",
              opts.out.c_str());
  return kExitOk;
}

struct AuditOpts {
  std::string model;
  int samples = 16;
  std::uint64_t seed = 1;
  double tolerance = 1e-6;
  RulePolicy rules;
  std::string out = "nnlrp-out";
};

struct LayerAggregate {
  double maxAbs = 0.0;
  double sumAbs = 0.0;
  double bias = 0.0;
  double epsilon = 0.0;
  double pool = 0.0;
  double padding = 0.0;
  int count = 0;
};

int cmdAudit(const AuditOpts& opts) {
  try {
    validatePolicy(opts.rules);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitBadRule;
  }
  if (opts.samples < 0) {
    std::fprintf(stderr, "error: --samples must be non-negative\n");
    return kExitBadInput;
  }

  NetworkGraph net;
  try {
    net = nnlrp::loadModel(opts.model);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitModelError;
  }

  std::vector<Tensor> inputs;
  std::mt19937_64 rng(opts.seed);
  for (int k = 0; k < opts.samples; ++k)
    inputs.push_back(nnlrp::randomTensor(rng, net.inputShape(), 0.0, 1.0));

  std::vector<nnlrp::ConservationReport> reports(inputs.size());
  std::vector<Index> targets(inputs.size(), 0);
  try {
    const RuleAssignment rules = buildRules(net, opts.rules);
    nnlrp::parallelFor(static_cast<Index>(inputs.size()), [&](Index k) {
      const nnlrp::ForwardTrace trace = net.forward(inputs[k]);
      const nnlrp::RelevanceMap rmap =
          nnlrp::explain(net, trace, trace.predictedClass, rules);
      reports[k] = nnlrp::conservationAudit(rmap, trace);
      targets[k] = trace.predictedClass;
    });
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitModelError;
  }

  std::map<std::string, LayerAggregate> perLayer;
  std::vector<std::string> layerOrder;
  double maxRel = 0.0;
  double maxAbs = 0.0;
  double sumAbs = 0.0;
  std::size_t rowCount = 0;
  for (const nnlrp::ConservationReport& report : reports) {
    maxRel = std::max(maxRel, report.maxRelativeDeviation);
    for (const nnlrp::LedgerRow& row : report.rows) {
      auto it = perLayer.find(row.node);
      if (it == perLayer.end()) {
        layerOrder.push_back(row.node);
        it = perLayer.emplace(row.node, LayerAggregate{}).first;
      }
      LayerAggregate& agg = it->second;
      const double dev = std::abs(row.deviation());
      agg.maxAbs = std::max(agg.maxAbs, dev);
      agg.sumAbs += dev;
      agg.bias += row.biasAbsorbed;
      agg.epsilon += row.epsilonAbsorbed;
      agg.pool += row.poolDiscarded;
      agg.padding += row.paddingDiscarded;
      agg.count += 1;
      maxAbs = std::max(maxAbs, dev);
      sumAbs += dev;
      rowCount += 1;
    }
  }

  std::printf("audit: %d sample(s), seed %llu, rule policy %s\n", opts.samples,
              static_cast<unsigned long long>(opts.seed),
              opts.rules.policy.c_str());
  nlohmann::json layerJson = nlohmann::json::array();
  if (opts.samples > 0) {
    std::printf(
        "%-20s %14s %14s %14s %14s %14s %14s\n", "layer", "max|dev|",
        "mean|dev|", "mean bias", "mean epsilon", "mean pool", "mean pad");
    for (const std::string& name : layerOrder) {
      const LayerAggregate& agg = perLayer[name];
      const double n = agg.count;
      std::printf("%-20s %14.6g %14.6g %14.6g %14.6g %14.6g %14.6g\n",
                  name.c_str(), agg.maxAbs, agg.sumAbs / n, agg.bias / n,
                  agg.epsilon / n, agg.pool / n, agg.padding / n);
      nlohmann::json entry;
      entry["layer"] = name;
      entry["max_abs_deviation"] = agg.maxAbs;
      entry["mean_abs_deviation"] = agg.sumAbs / n;
      entry["mean_bias_absorbed"] = agg.bias / n;
      entry["mean_epsilon_absorbed"] = agg.epsilon / n;
      entry["mean_pool_discarded"] = agg.pool / n;
      entry["mean_padding_discarded"] = agg.padding / n;
      layerJson.push_back(entry);
    }
    std::printf("max deviation: %s absolute, %s relative to the anchor\n",
                formatScalar(maxAbs).c_str(), formatScalar(maxRel).c_str());
    std::printf("mean |deviation| per layer step: %s\n",
                formatScalar(rowCount ? sumAbs / rowCount : 0.0).c_str());
  } else {
    std::printf("no samples requested; nothing to audit\n");
  }

  const bool breach = opts.samples > 0 && maxRel > opts.tolerance;
  std::printf("tolerance %s: %s\n", formatScalar(opts.tolerance).c_str(),
              breach ? "BREACH" : "ok");

  nlohmann::json reportJson;
  reportJson["samples"] = opts.samples;
  reportJson["seed"] = opts.seed;
  reportJson["tolerance"] = opts.tolerance;
  reportJson["max_abs_deviation"] = maxAbs;
  reportJson["max_relative_deviation"] = maxRel;
  reportJson["mean_abs_deviation"] = rowCount ? sumAbs / rowCount : 0.0;
  reportJson["per_layer"] = layerJson;
  reportJson["breach"] = breach;
  {
    std::error_code ec;
    std::filesystem::create_directories(opts.out, ec);
    nnlrp::require(!ec, ErrorCode::kIoFailure,
                   "cannot create directory '" + opts.out +
                       "': " + ec.message());
    const std::string path =
        (std::filesystem::path(opts.out) / "audit_report.json").string();
    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    nnlrp::require(file.good(), ErrorCode::kIoFailure,
                   "cannot write '" + path + "'");
    file << reportJson.dump(2) << '\n';
  }

  nlohmann::json manifest;
  manifest["command"] = "audit";
  manifest["engine_version"] = nnlrp::kEngineVersion;
  manifest["model"] = fileStamp(opts.model);
  manifest["config"]["samples"] = opts.samples;
  manifest["config"]["seed"] = opts.seed;
  manifest["config"]["tolerance"] = opts.tolerance;
  manifest["config"]["rules"] = policyJson(opts.rules);
  manifest["config"]["input_distribution"] = "uniform[0,1)";
  manifest["config"]["target"] = "predicted";
  manifest["config"]["out"] = opts.out;
  manifest["outputs"] = {"audit_report.json", "run_manifest.json"};
  writeManifest(opts.out, manifest);

  return breach ? kExitAuditBreach : kExitOk;
}

struct InfoOpts {
  std::string model;
  std::string out = "nnlrp-out";
};

int cmdInfo(const InfoOpts& opts) {
  NetworkGraph net;
  try {
    net = nnlrp::loadModel(opts.model);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitModelError;
  }

  const nnlrp::ShapeReport& report = net.validate();
  std::printf("model: %s\n", net.name().c_str());
  std::printf("input shape: %s\n", formatShape(net.inputShape()).c_str());
  std::printf("preprocess: scale %s", formatScalar(net.preprocess().scale).c_str());
  if (!net.preprocess().channelMeans.empty()) {
    std::printf(", channel means");
    for (double m : net.preprocess().channelMeans)
      std::printf(" %s", formatScalar(m).c_str());
  }
  std::printf("\n");

  Index parameterCount = 0;
  for (Index i = 0; i < net.size(); ++i) {
    const nnlrp::GraphNode& node = net.node(i);
    std::string inputs;
    if (node.inputs.empty()) {
      inputs = "input";
    } else {
      for (std::size_t k = 0; k < node.inputs.size(); ++k) {
        if (k) inputs += ", ";
        inputs += node.inputs[k];
      }
    }
    Index params = 0;
    if (node.layer.hasParameters())
      params = node.layer.weights.size() + node.layer.bias.size();
    parameterCount += params;
    std::printf("  %-3lld %-16s %-12s <- %-24s out %-10s params %lld\n",
                static_cast<long long>(i), node.layer.name.c_str(),
                nnlrp::layerKindName(node.layer.kind), inputs.c_str(),
                formatShape(report.outputShapes[i]).c_str(),
                static_cast<long long>(params));
  }
  std::printf("sink: %s, logits: %s, classes: %lld, parameters: %lld\n",
              net.node(report.sink).layer.name.c_str(),
              net.node(report.logits).layer.name.c_str(),
              static_cast<long long>(report.outputSize),
              static_cast<long long>(parameterCount));

  nlohmann::json manifest;
  manifest["command"] = "info";
  manifest["engine_version"] = nnlrp::kEngineVersion;
  manifest["model"] = fileStamp(opts.model);
  manifest["config"]["out"] = opts.out;
  manifest["outputs"] = {"run_manifest.json"};
  writeManifest(opts.out, manifest);
  return kExitOk;
}

void addRuleFlags(CLI::App* cmd, RulePolicy* rules) {
  cmd->add_option("--rule", rules->policy,
                  "Rule policy: default, epsilon, alphabeta, or flat")
      ->capture_default_str();
  cmd->add_option("--epsilon", rules->epsilon, "Stabilizer for the epsilon rule")
      ->capture_default_str();
  cmd->add_option("--alpha", rules->alpha, "Alpha weight (alphabeta rule)")
      ->capture_default_str();
  cmd->add_option("--beta", rules->beta, "Beta weight (alphabeta rule)")
      ->capture_default_str();
  cmd->add_option("--flat-depth", rules->flatDepth,
                  "Convolution depth covered by the flat rule (default policy)")
      ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Feedforward network inference and layer-wise relevance "
               "propagation attribution"};
  app.require_subcommand(1);

  PredictOpts predictOpts;
  CLI::App* predict =
      app.add_subcommand("predict", "Run the forward pass and print scores");
  predict->add_option("--model", predictOpts.model, "Model file")->required();
  predict
      ->add_option("--input", predictOpts.inputs,
                   "Input image (.ppm) or raw tensor file; repeatable")
      ->required();
  predict->add_flag("--oversample", predictOpts.oversample,
                    "Average predictions over ten crops");
  predict
      ->add_option("--crop-fraction", predictOpts.cropFraction,
                   "Crop extent as a fraction of the image extent")
      ->capture_default_str();
  predict->add_option("--out", predictOpts.out, "Output directory")
      ->capture_default_str();

  ExplainOpts explainOpts;
  CLI::App* explain = app.add_subcommand(
      "explain", "Attribute a prediction back to the input pixels");
  explain->add_option("--model", explainOpts.model, "Model file")->required();
  explain
      ->add_option("--input", explainOpts.input,
                   "Input image (.ppm) or raw tensor file")
      ->required();
  explain
      ->add_option("--target", explainOpts.target,
                   "Class index to explain, or 'predicted'")
      ->capture_default_str();
  addRuleFlags(explain, &explainOpts.rules);
  explain
      ->add_option("--upscale", explainOpts.upscale,
                   "Pixel replication factor for heatmap.ppm")
      ->capture_default_str();
  explain
      ->add_option("--range", explainOpts.range,
                   "Fixed color range lo hi (default: symmetric max)")
      ->expected(2);
  explain->add_option("--out", explainOpts.out, "Output directory")
      ->capture_default_str();

  AuditOpts auditOpts;
  CLI::App* audit = app.add_subcommand(
      "audit", "Check relevance conservation on random inputs");
  audit->add_option("--model", auditOpts.model, "Model file")->required();
  audit->add_option("--samples", auditOpts.samples, "Number of random inputs")
      ->capture_default_str();
  audit->add_option("--seed", auditOpts.seed, "Random seed")
      ->capture_default_str();
  audit
      ->add_option("--tolerance", auditOpts.tolerance,
                   "Maximum allowed per-layer deviation relative to the anchor")
      ->capture_default_str();
  addRuleFlags(audit, &auditOpts.rules);
  audit->add_option("--out", auditOpts.out, "Output directory")
      ->capture_default_str();

  InfoOpts infoOpts;
  CLI::App* info = app.add_subcommand("info", "Print a model summary");
  info->add_option("--model", infoOpts.model, "Model file")->required();
  info->add_option("--out", infoOpts.out, "Output directory")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitBadInput;
  }

  try {
    if (*predict) return cmdPredict(predictOpts);
    if (*explain) return cmdExplain(explainOpts);
    if (*audit) return cmdAudit(auditOpts);
    return cmdInfo(infoOpts);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitModelError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitModelError;
  }
}
