#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "json.hpp"
#include "nnlrp/error.hpp"
#include "nnlrp/lrp.hpp"
#include "nnlrp/model_io.hpp"
#include "nnlrp/rng.hpp"
#include "oracles.hpp"

using namespace nnlrp;
namespace fs = std::filesystem;

namespace {

double tensorSum(const Tensor& t) {
  double s = 0.0;
  for (Index i = 0; i < t.size(); ++i) s += t.at(i);
  return s;
}

NetworkGraph positiveNet(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  NetworkGraph net("positive", {1, 5, 5});
  ConvParams p{1, 2, 3, 3, 1, 0};
  net.add(LayerSpec::convolution("conv", p,
                                 randomTensor(rng, {2, 1, 3, 3}, 0.05, 0.5),
                                 Tensor::zeros({2})));
  net.add(LayerSpec::relu("relu"), {"conv"});
  net.add(LayerSpec::flatten("flat"), {"relu"});
  net.add(LayerSpec::innerProduct("out", randomTensor(rng, {18, 3}, 0.05, 0.5),
                                  Tensor::zeros({3})),
          {"flat"});
  return net;
}

}  // namespace

TEST_SUITE("lrp") {

TEST_CASE("rule factories police their parameters") {
  CHECK_THROWS_WITH_AS((void)LrpRule::epsilonRule(0.0),
                       doctest::Contains("must be positive"), Error);
  CHECK_THROWS_WITH_AS((void)LrpRule::epsilonRule(-0.5),
                       doctest::Contains("must be positive"), Error);
  CHECK_THROWS_WITH_AS((void)LrpRule::alphaBeta(2.0, -0.5),
                       doctest::Contains("must equal 1"), Error);
  CHECK(LrpRule::alphaBeta(1.0, 0.0).kind == LrpRule::Kind::kAlphaBeta);
  CHECK(LrpRule::alphaBeta(2.0, -1.0).alpha == 2.0);
  CHECK(LrpRule::epsilonRule(0.01).epsilon == 0.01);
  CHECK(LrpRule::flat().kind == LrpRule::Kind::kFlat);
}

TEST_CASE("an identity layer passes relevance through unchanged") {
  NetworkGraph net("identity", {2});
  net.add(LayerSpec::innerProduct("out", Tensor::fromList({2, 2}, {1, 0, 0, 1}),
                                  Tensor::zeros({2})));
  const ForwardTrace trace = net.forward(Tensor::vector({3.0, 0.0}));
  const RuleAssignment rules =
      RuleAssignment::uniform(net, LrpRule::alphaBeta(1.0, 0.0));
  const RelevanceMap rmap = explain(net, trace, 0, rules);
  CHECK(rmap.anchor == 3.0);
  CHECK(rmap.inputRelevance.at(0) == 3.0);
  CHECK(rmap.inputRelevance.at(1) == 0.0);
}

TEST_CASE("epsilon messages follow the literal formula") {
  std::mt19937_64 rng(100);
  const LayerSpec fc = LayerSpec::innerProduct(
      "fc", randomTensor(rng, {6, 4}, -1.0, 1.0),
      randomTensor(rng, {4}, -0.3, 0.3));
  const Tensor x = randomTensor(rng, {6}, -1.0, 1.0);
  const Tensor rOut = randomTensor(rng, {4}, -1.0, 1.0);

  const Tensor engine = epsilonBackward(fc, x, rOut, 0.01);
  const Tensor oracle = oracles::epsilonMessages(fc, x, rOut, 0.01);
  for (Index i = 0; i < engine.size(); ++i)
    CHECK(std::abs(engine.at(i) - oracle.at(i)) <= 1e-12);
}

TEST_CASE("epsilon accounting closes the books") {
  std::mt19937_64 rng(101);
  const LayerSpec fc = LayerSpec::innerProduct(
      "fc", randomTensor(rng, {5, 3}, -1.0, 1.0),
      randomTensor(rng, {3}, -0.5, 0.5));
  const Tensor x = randomTensor(rng, {5}, -1.0, 1.0);
  const Tensor rOut = randomTensor(rng, {3}, -1.0, 1.0);

  LedgerRow row;
  const Tensor rIn = epsilonBackward(fc, x, rOut, 0.05, &row);
  CHECK(row.sumOut == doctest::Approx(tensorSum(rOut)).epsilon(1e-12));
  CHECK(row.sumIn == doctest::Approx(tensorSum(rIn)).epsilon(1e-12));
  CHECK(std::abs(row.residual()) <= 1e-12);
}

TEST_CASE("a zero epsilon is allowed at the operator level") {
  const LayerSpec fc = LayerSpec::innerProduct(
      "fc", Tensor::fromList({2, 1}, {1.0, 2.0}), Tensor::zeros({1}));
  const Tensor x = Tensor::vector({1.0, 1.0});
  const Tensor rIn = epsilonBackward(fc, x, Tensor::vector({3.0}), 0.0);
  CHECK(rIn.at(0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(rIn.at(1) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK_THROWS_WITH_AS((void)epsilonBackward(fc, x, Tensor::vector({3.0}), -1.0),
                       doctest::Contains("must not be negative"), Error);
}

TEST_CASE("alpha-beta messages follow the literal formula") {
  std::mt19937_64 rng(102);
  ConvParams p{2, 3, 3, 3, 1, 1};
  const LayerSpec conv = LayerSpec::convolution(
      "conv", p, randomTensor(rng, {3, 2, 3, 3}, -1.0, 1.0),
      randomTensor(rng, {3}, -0.3, 0.3));
  const Tensor x = randomTensor(rng, {2, 4, 4}, -1.0, 1.0);
  const Tensor rOut = randomTensor(rng, {3, 4, 4}, -1.0, 1.0);

  const Tensor engine = alphaBetaBackward(conv, x, rOut, 2.0, -1.0);
  const Tensor oracle = oracles::alphaBetaMessages(conv, x, rOut, 2.0, -1.0);
  REQUIRE(engine.size() == oracle.size());
  for (Index i = 0; i < engine.size(); ++i)
    CHECK(std::abs(engine.at(i) - oracle.at(i)) <= 1e-11);
}

TEST_CASE("an empty pool is ledgered, not fabricated") {
  const LayerSpec fc = LayerSpec::innerProduct(
      "fc", Tensor::fromList({2, 1}, {1.0, 1.0}), Tensor::zeros({1}));
  const Tensor x = Tensor::vector({1.0, 1.0});
  LedgerRow row;
  const Tensor rIn = alphaBetaBackward(fc, x, Tensor::vector({1.0}), 2.0, -1.0,
                                       &row);
  CHECK(rIn.at(0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(rIn.at(1) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(row.poolDiscarded == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(std::abs(row.residual()) <= 1e-12);
}

TEST_CASE("alpha-beta with alpha one matches vanishing epsilon on positive nets") {
  std::mt19937_64 rng(103);
  const LayerSpec fc = LayerSpec::innerProduct(
      "fc", randomTensor(rng, {6, 3}, 0.05, 1.0), Tensor::zeros({3}));
  const Tensor x = randomTensor(rng, {6}, 0.1, 1.0);
  const Tensor rOut = randomTensor(rng, {3}, -1.0, 1.0);

  const Tensor viaEpsilon = epsilonBackward(fc, x, rOut, 0.0);
  const Tensor viaAlpha = alphaBetaBackward(fc, x, rOut, 1.0, 0.0);
  for (Index i = 0; i < viaEpsilon.size(); ++i)
    CHECK(std::abs(viaEpsilon.at(i) - viaAlpha.at(i)) <= 1e-10);
}

TEST_CASE("the flat rule ignores magnitudes") {
  const LayerSpec fc = LayerSpec::innerProduct(
      "fc", Tensor::fromList({3, 2}, {5, -2, 100, 3, 0, 7}),
      Tensor::vector({1.0, -1.0}));
  const Tensor rOut = Tensor::vector({0.9, 0.3});
  const Tensor rIn = flatBackward(fc, {3}, rOut);
  for (Index i = 0; i < 3; ++i)
    CHECK(rIn.at(i) == doctest::Approx(1.2 / 3.0).epsilon(1e-15));

  const Tensor oracle = oracles::flatMessages(fc, {3}, rOut);
  for (Index i = 0; i < 3; ++i) CHECK(rIn.at(i) == oracle.at(i));
}

TEST_CASE("the flat rule splits shared pixels across receptive fields") {
  ConvParams p{1, 1, 1, 2, 1, 0};
  const LayerSpec conv = LayerSpec::convolution(
      "conv", p, Tensor::fromList({1, 1, 1, 2}, {4.0, -9.0}),
      Tensor::zeros({1}));
  const Tensor rOut = Tensor::fromList({1, 1, 2}, {1.0, 1.0});
  const Tensor rIn = flatBackward(conv, {1, 1, 3}, rOut);
  CHECK(rIn(0, 0, 0) == 0.5);
  CHECK(rIn(0, 0, 1) == 1.0);
  CHECK(rIn(0, 0, 2) == 0.5);
}

TEST_CASE("flat relevance dropped into padding is ledgered") {
  std::mt19937_64 rng(104);
  ConvParams p{1, 2, 3, 3, 1, 1};
  const LayerSpec conv = LayerSpec::convolution(
      "conv", p, randomTensor(rng, {2, 1, 3, 3}, -1.0, 1.0),
      Tensor::zeros({2}));
  const Tensor rOut = Tensor::constant({2, 3, 3}, 1.0);
  LedgerRow row;
  const Tensor rIn = flatBackward(conv, {1, 3, 3}, rOut, &row);
  CHECK(row.paddingDiscarded > 0.0);
  CHECK(std::abs(row.residual()) <= 1e-12);
  CHECK(tensorSum(rIn) ==
        doctest::Approx(tensorSum(rOut) - row.paddingDiscarded).epsilon(1e-12));

  const Tensor oracle = oracles::flatMessages(conv, {1, 3, 3}, rOut);
  for (Index i = 0; i < rIn.size(); ++i) CHECK(rIn.at(i) == oracle.at(i));
}

TEST_CASE("linear rules refuse non-linear layers") {
  const LayerSpec relu = LayerSpec::relu("relu");
  const Tensor x = Tensor::vector({1.0, 2.0});
  CHECK_THROWS_AS((void)epsilonBackward(relu, x, x, 0.01), Error);
  CHECK_THROWS_AS((void)alphaBetaBackward(relu, x, x, 2.0, -1.0), Error);
  CHECK_THROWS_AS((void)flatBackward(relu, {2}, x), Error);
}

TEST_CASE("max pool relevance follows the winner") {
  const LayerSpec pool = LayerSpec::maxPool("pool", 2, 2);
  const Tensor x = Tensor::fromList({1, 2, 2}, {1, 5, 3, 2});
  const Tensor y = layerForward(pool, {x});
  const std::vector<Tensor> rIn =
      fixedBackward(pool, {x}, Tensor::constant({1, 1, 1}, 1.0));
  REQUIRE(rIn.size() == 1);
  CHECK(rIn[0].at(0) == 0.0);
  CHECK(rIn[0].at(1) == 1.0);
  CHECK(rIn[0].at(2) == 0.0);
  CHECK(rIn[0].at(3) == 0.0);
}

TEST_CASE("avg pool relevance follows the contributions") {
  const LayerSpec pool = LayerSpec::avgPool("pool", 2, 2);
  const Tensor x = Tensor::fromList({1, 2, 2}, {2, 2, 0, 0});
  const std::vector<Tensor> rIn =
      fixedBackward(pool, {x}, Tensor::constant({1, 1, 1}, 1.0));
  CHECK(std::abs(rIn[0].at(0) - 0.5) <= 1e-9);
  CHECK(std::abs(rIn[0].at(1) - 0.5) <= 1e-9);
  CHECK(rIn[0].at(2) == 0.0);
  CHECK(rIn[0].at(3) == 0.0);
}

TEST_CASE("concat relevance lands in the right slots") {
  const LayerSpec cat = LayerSpec::concat("cat", 0);
  const Tensor a = Tensor::constant({1, 2, 2}, 1.0);
  const Tensor b = Tensor::constant({2, 2, 2}, 1.0);
  Tensor rOut = Tensor::zeros({3, 2, 2});
  for (Index i = 0; i < rOut.size(); ++i) rOut.at(i) = static_cast<double>(i);
  const std::vector<Tensor> rIn = fixedBackward(cat, {a, b}, rOut);
  REQUIRE(rIn.size() == 2);
  CHECK(rIn[0].shape() == Shape{1, 2, 2});
  CHECK(rIn[1].shape() == Shape{2, 2, 2});
  for (Index i = 0; i < 4; ++i) CHECK(rIn[0].at(i) == rOut.at(i));
  for (Index i = 0; i < 8; ++i) CHECK(rIn[1].at(i) == rOut.at(4 + i));
}

TEST_CASE("relu and flatten pass relevance through") {
  const Tensor x = Tensor::vector({-1.0, 2.0, 3.0});
  const Tensor r = Tensor::vector({0.5, -0.25, 1.0});
  const std::vector<Tensor> viaRelu =
      fixedBackward(LayerSpec::relu("r"), {x}, r);
  for (Index i = 0; i < 3; ++i) CHECK(viaRelu[0].at(i) == r.at(i));

  const Tensor img = Tensor::fromList({1, 1, 3}, {1, 2, 3});
  const std::vector<Tensor> viaFlat =
      fixedBackward(LayerSpec::flatten("f"), {img}, r);
  CHECK(viaFlat[0].shape() == Shape{1, 1, 3});
  for (Index i = 0; i < 3; ++i) CHECK(viaFlat[0].at(i) == r.at(i));
}

TEST_CASE("explain matches the message oracle end to end") {
  for (std::uint64_t seed : {0ull, 1ull, 2ull, 3ull}) {
    const NetworkGraph net = fixtures::smallNet(seed);
    std::mt19937_64 rng(900 + seed);
    const Tensor x = randomTensor(rng, net.inputShape(), -1.0, 1.0);
    const ForwardTrace trace = net.forward(x);
    const Index target = trace.predictedClass;

    RuleAssignment rules;
    for (Index i = 0; i < net.size(); ++i) {
      if (!net.node(i).layer.hasParameters()) continue;
      switch (rng() % 3) {
        case 0: rules.setRule(i, LrpRule::epsilonRule(0.01)); break;
        case 1: rules.setRule(i, LrpRule::alphaBeta(2.0, -1.0)); break;
        default: rules.setRule(i, LrpRule::flat()); break;
      }
    }

    const RelevanceMap rmap = explain(net, trace, target, rules);
    const oracles::OracleRelevance oracle =
        oracles::oracleExplain(net, trace, target, rules);
    REQUIRE(rmap.inputRelevance.size() == oracle.inputRelevance.size());
    for (Index i = 0; i < rmap.inputRelevance.size(); ++i)
      CHECK(std::abs(rmap.inputRelevance.at(i) -
                     oracle.inputRelevance.at(i)) <= 1e-10);
  }
}

TEST_CASE("every ledger row closes under the epsilon rule") {
  const NetworkGraph net = fixtures::conservationNet(7, true);
  std::mt19937_64 rng(105);
  Index target = 0;
  const Tensor x = fixtures::conservationInput(net, rng, &target);
  const ForwardTrace trace = net.forward(x);
  const RelevanceMap rmap =
      explain(net, trace, target, RuleAssignment::uniform(
                                      net, LrpRule::epsilonRule(0.01)));
  REQUIRE(!rmap.ledger.empty());
  for (const LedgerRow& row : rmap.ledger)
    CHECK(std::abs(row.residual()) <= 1e-10);

  const ConservationReport report = conservationAudit(rmap, trace);
  CHECK(report.anchor == rmap.anchor);
  CHECK(report.maxResidual <= 1e-10);
  CHECK(report.globalAbsolute ==
        doctest::Approx(std::abs(tensorSum(rmap.inputRelevance) -
                                 rmap.anchor))
            .epsilon(1e-12));
}

TEST_CASE("bias-free alpha-beta attribution is homogeneous") {
  const NetworkGraph net = fixtures::conservationNet(9, false);
  std::mt19937_64 rng(106);
  Index target = 0;
  const Tensor x = fixtures::conservationInput(net, rng, &target);
  const RuleAssignment rules =
      RuleAssignment::uniform(net, LrpRule::alphaBeta(2.0, -1.0));
  const RelevanceMap base = explain(net, net.forward(x), target, rules);

  for (double factor : {2.0, 0.5, 3.0}) {
    const RelevanceMap scaledMap =
        explain(net, net.forward(scaled(x, factor)), target, rules);
    for (Index i = 0; i < base.inputRelevance.size(); ++i) {
      const double want = factor * base.inputRelevance.at(i);
      const double got = scaledMap.inputRelevance.at(i);
      CHECK(std::abs(got - want) <= 1e-8 * std::max(1.0, std::abs(want)));
    }
  }
}

TEST_CASE("explain validates its inputs") {
  const NetworkGraph net = positiveNet(107);
  std::mt19937_64 rng(108);
  const Tensor x = randomTensor(rng, {1, 5, 5}, 0.1, 1.0);
  const ForwardTrace trace = net.forward(x);
  const RuleAssignment rules =
      RuleAssignment::uniform(net, LrpRule::epsilonRule(0.01));

  try {
    (void)explain(net, trace, 99, rules);
    FAIL("expected kBadTarget");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kBadTarget);
  }

  RuleAssignment sparse;
  try {
    (void)explain(net, trace, 0, sparse);
    FAIL("expected kMissingRule");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kMissingRule);
    CHECK(std::string(e.what()).find("no rule assigned") != std::string::npos);
  }

  const NetworkGraph other = fixtures::smallNet(0);
  std::mt19937_64 rng2(109);
  const ForwardTrace foreign =
      other.forward(randomTensor(rng2, other.inputShape(), -1.0, 1.0));
  try {
    (void)explain(net, foreign, 0, rules);
    FAIL("expected kTraceMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kTraceMismatch);
  }
}

TEST_CASE("the audit rejects a tampered anchor") {
  const NetworkGraph net = positiveNet(110);
  std::mt19937_64 rng(111);
  const ForwardTrace trace = net.forward(randomTensor(rng, {1, 5, 5}, 0.1, 1.0));
  RelevanceMap rmap = explain(net, trace, 0, RuleAssignment::uniform(
                                                 net, LrpRule::epsilonRule(0.01)));
  rmap.anchor += 0.5;
  CHECK_THROWS_AS((void)conservationAudit(rmap, trace), Error);
}

TEST_CASE("a zero anchor audits cleanly") {
  std::mt19937_64 rng(112);
  NetworkGraph net("zeroed", {4});
  Tensor w = randomTensor(rng, {4, 2}, -1.0, 1.0);
  for (Index i = 0; i < 4; ++i) w(i, 1) = 0.0;
  net.add(LayerSpec::innerProduct("out", std::move(w), Tensor::zeros({2})));
  const ForwardTrace trace = net.forward(randomTensor(rng, {4}, -1.0, 1.0));
  REQUIRE(trace.logits.at(1) == 0.0);

  const RelevanceMap rmap = explain(
      net, trace, 1, RuleAssignment::uniform(net, LrpRule::alphaBeta(2.0, -1.0)));
  CHECK(rmap.anchor == 0.0);
  const ConservationReport report = conservationAudit(rmap, trace);
  CHECK(report.globalRelative == 0.0);
  CHECK(report.globalAbsolute == 0.0);
}

TEST_CASE("the default policy follows conv depth") {
  std::mt19937_64 rng(113);
  NetworkGraph net("deep", {1, 8, 8});
  ConvParams p1{1, 2, 3, 3, 1, 1};
  net.add(LayerSpec::convolution("conv1", p1,
                                 randomTensor(rng, {2, 1, 3, 3}, -0.5, 0.5),
                                 Tensor::zeros({2})));
  net.add(LayerSpec::relu("relu1"), {"conv1"});
  ConvParams p2{2, 2, 3, 3, 1, 1};
  net.add(LayerSpec::convolution("conv2", p2,
                                 randomTensor(rng, {2, 2, 3, 3}, -0.5, 0.5),
                                 Tensor::zeros({2})),
          {"relu1"});
  net.add(LayerSpec::relu("relu2"), {"conv2"});
  net.add(LayerSpec::flatten("flat"), {"relu2"});
  net.add(LayerSpec::innerProduct("fc", randomTensor(rng, {128, 3}, -0.5, 0.5),
                                  Tensor::zeros({3})),
          {"flat"});

  const Index conv1 = net.indexOf("conv1");
  const Index conv2 = net.indexOf("conv2");
  const Index fc = net.indexOf("fc");

  const RuleAssignment depthOne = RuleAssignment::defaultPolicy(net);
  CHECK(depthOne.ruleFor(conv1).kind == LrpRule::Kind::kFlat);
  CHECK(depthOne.ruleFor(conv2).kind == LrpRule::Kind::kAlphaBeta);
  CHECK(depthOne.ruleFor(fc).kind == LrpRule::Kind::kEpsilon);
  CHECK_FALSE(depthOne.hasRule(net.indexOf("relu1")));

  const RuleAssignment depthZero =
      RuleAssignment::defaultPolicy(net, 0.01, 2.0, -1.0, 0);
  CHECK(depthZero.ruleFor(conv1).kind == LrpRule::Kind::kAlphaBeta);
  CHECK(depthZero.ruleFor(conv2).kind == LrpRule::Kind::kAlphaBeta);

  const RuleAssignment depthTwo =
      RuleAssignment::defaultPolicy(net, 0.01, 2.0, -1.0, 2);
  CHECK(depthTwo.ruleFor(conv1).kind == LrpRule::Kind::kFlat);
  CHECK(depthTwo.ruleFor(conv2).kind == LrpRule::Kind::kFlat);

  CHECK_THROWS_AS(
      (void)RuleAssignment::defaultPolicy(net, 0.01, 2.0, -1.0, -1), Error);
}

TEST_CASE("the default policy takes the shortest branch") {
  std::mt19937_64 rng(114);
  NetworkGraph net("branches", {1, 6, 6});
  ConvParams pa{1, 2, 3, 3, 1, 1};
  net.add(LayerSpec::convolution("convA", pa,
                                 randomTensor(rng, {2, 1, 3, 3}, -0.5, 0.5),
                                 Tensor::zeros({2})));
  ConvParams pb{2, 2, 3, 3, 1, 1};
  net.add(LayerSpec::convolution("convB", pb,
                                 randomTensor(rng, {2, 2, 3, 3}, -0.5, 0.5),
                                 Tensor::zeros({2})),
          {"convA"});
  net.add(LayerSpec::concat("cat", 0), {"convA", "convB"});
  ConvParams pc{4, 2, 3, 3, 1, 1};
  net.add(LayerSpec::convolution("convC", pc,
                                 randomTensor(rng, {2, 4, 3, 3}, -0.5, 0.5),
                                 Tensor::zeros({2})),
          {"cat"});
  net.add(LayerSpec::flatten("flat"), {"convC"});
  net.add(LayerSpec::innerProduct("fc", randomTensor(rng, {72, 2}, -0.5, 0.5),
                                  Tensor::zeros({2})),
          {"flat"});

  const RuleAssignment depthOne =
      RuleAssignment::defaultPolicy(net, 0.01, 2.0, -1.0, 1);
  CHECK(depthOne.ruleFor(net.indexOf("convA")).kind == LrpRule::Kind::kFlat);
  CHECK(depthOne.ruleFor(net.indexOf("convB")).kind ==
        LrpRule::Kind::kAlphaBeta);
  CHECK(depthOne.ruleFor(net.indexOf("convC")).kind ==
        LrpRule::Kind::kAlphaBeta);

  const RuleAssignment depthTwo =
      RuleAssignment::defaultPolicy(net, 0.01, 2.0, -1.0, 2);
  CHECK(depthTwo.ruleFor(net.indexOf("convB")).kind == LrpRule::Kind::kFlat);
  CHECK(depthTwo.ruleFor(net.indexOf("convC")).kind == LrpRule::Kind::kFlat);
}

TEST_CASE("channel pooling sums over channels") {
  Tensor r = Tensor::zeros({2, 2, 2});
  for (Index i = 0; i < 8; ++i) r.at(i) = static_cast<double>(i + 1);
  const Tensor pooled = channelPool(r);
  REQUIRE(pooled.shape() == Shape{2, 2});
  CHECK(pooled(0, 0) == 1.0 + 5.0);
  CHECK(pooled(0, 1) == 2.0 + 6.0);
  CHECK(pooled(1, 0) == 3.0 + 7.0);
  CHECK(pooled(1, 1) == 4.0 + 8.0);
  CHECK_THROWS_AS((void)channelPool(Tensor::vector({1.0, 2.0})), Error);
}

TEST_CASE("the text ledger is complete and parseable") {
  const NetworkGraph net = positiveNet(115);
  std::mt19937_64 rng(116);
  const ForwardTrace trace = net.forward(randomTensor(rng, {1, 5, 5}, 0.1, 1.0));
  const RelevanceMap rmap = explain(
      net, trace, 1, RuleAssignment::uniform(net, LrpRule::epsilonRule(0.01)));

  const std::string text = ledgerText(rmap);
  CHECK(text.rfind("target 1\n", 0) == 0);
  CHECK(text.find("anchor ") != std::string::npos);
  CHECK(text.find("input_sum ") != std::string::npos);
  CHECK(text.find("node\t") != std::string::npos);
  for (const LedgerRow& row : rmap.ledger)
    CHECK(text.find(row.node) != std::string::npos);
}

TEST_CASE("exported relevance round-trips through the raw format") {
  const NetworkGraph net = positiveNet(117);
  std::mt19937_64 rng(118);
  const ForwardTrace trace = net.forward(randomTensor(rng, {1, 5, 5}, 0.1, 1.0));
  const RelevanceMap rmap = explain(
      net, trace, 0, RuleAssignment::uniform(net, LrpRule::epsilonRule(0.01)));

  const fs::path dir = "scratch_lrp_export";
  fs::remove_all(dir);
  exportRelevance(rmap, net, dir.string());

  CHECK(fs::exists(dir / "input.bin"));
  CHECK(fs::exists(dir / "index.json"));
  CHECK(fs::exists(dir / "ledger.txt"));

  std::ifstream indexFile(dir / "index.json");
  REQUIRE(indexFile.good());
  const nlohmann::json index = nlohmann::json::parse(indexFile);
  REQUIRE(index.contains("nodes"));
  CHECK(index["nodes"].size() == static_cast<std::size_t>(net.size()));

  const Tensor back =
      readTensorRaw((dir / "input.bin").string(), rmap.inputRelevance.shape());
  for (Index i = 0; i < back.size(); ++i) {
    const double want =
        static_cast<double>(static_cast<float>(rmap.inputRelevance.at(i)));
    CHECK(back.at(i) == want);
  }

  std::ifstream ledgerFile(dir / "ledger.txt");
  std::stringstream buffer;
  buffer << ledgerFile.rdbuf();
  CHECK(buffer.str() == ledgerText(rmap));
  fs::remove_all(dir);
}

}
