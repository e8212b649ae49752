#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "nnlrp/error.hpp"
#include "nnlrp/graph.hpp"
#include "nnlrp/layer.hpp"
#include "nnlrp/model_io.hpp"
#include "nnlrp/rng.hpp"
#include "nnlrp/tensor.hpp"

/// Seeded fixture builders shared by the test suites: random networks with
/// known structural properties, dyadic grids whose sums are exact in double
/// precision, and samplers that stay away from ReLU kinks and max-pool ties.
namespace nnlrp {
namespace fixtures {

/// Multiples of 2^-10 in [-1, 1]. Pairwise products are multiples of 2^-20,
/// so sums of a few hundred such products are exactly representable and
/// addition is order-independent.
inline double dyadic(std::mt19937_64& rng) {
  return (static_cast<double>(rng() % 2049) - 1024.0) / 1024.0;
}

inline Tensor dyadicTensor(std::mt19937_64& rng, const Shape& shape) {
  Tensor t = Tensor::zeros(shape);
  for (Index i = 0; i < t.size(); ++i) t.at(i) = dyadic(rng);
  return t;
}

inline Index strongestLogit(const Tensor& logits) {
  Index best = 0;
  for (Index i = 1; i < logits.size(); ++i) {
    if (std::abs(logits.at(i)) > std::abs(logits.at(best))) best = i;
  }
  return best;
}

/// Seeded conv/pool/inner-product chain with 2 to 5 parameterized layers.
/// Structure is chosen so that alpha-beta pools stay populated for neurons
/// that carry relevance: convolutions are 3x3 stride 1 unpadded (18+ terms
/// per pool), every convolution is followed by ReLU and a 2x2 pool (pooled
/// activations are mostly strictly positive), and inner-product layers are
/// at least 20 wide with no interleaved ReLU. The bias draw is consumed
/// either way, so both variants of one seed share topology and weights.
inline NetworkGraph conservationNet(std::uint64_t seed, bool withBias) {
  std::mt19937_64 rng(seed);
  auto bias = [&](Index n) {
    Tensor b = randomTensor(rng, {n}, -0.1, 0.1);
    return withBias ? b : Tensor::zeros({n});
  };

  const Index inC = 2 + static_cast<Index>(rng() % 2);
  const Index side = 10 + static_cast<Index>(rng() % 3);
  NetworkGraph net("cons" + std::to_string(seed), {inC, side, side});

  Index channels = inC;
  Index extent = side;

  const Index c1 = 3 + static_cast<Index>(rng() % 3);
  ConvParams p1{channels, c1, 3, 3, 1, 0};
  net.add(LayerSpec::convolution("conv1", p1,
                                 randomTensor(rng, {c1, channels, 3, 3}, -0.5,
                                              0.5),
                                 bias(c1)));
  net.add(LayerSpec::relu("relu1"), {"conv1"});
  channels = c1;
  extent -= 2;
  const bool avg1 = rng() % 2 == 0;
  net.add(avg1 ? LayerSpec::avgPool("pool1", 2, 2)
               : LayerSpec::maxPool("pool1", 2, 2),
          {"relu1"});
  extent = (extent - 2) / 2 + 1;
  std::string prev = "pool1";

  const bool wantConv2 = rng() % 2 == 0;
  if (wantConv2 && extent >= 5) {
    const Index c2 = 3 + static_cast<Index>(rng() % 3);
    ConvParams p2{channels, c2, 3, 3, 1, 0};
    net.add(LayerSpec::convolution("conv2", p2,
                                   randomTensor(rng, {c2, channels, 3, 3},
                                                -0.5, 0.5),
                                   bias(c2)),
            {prev});
    net.add(LayerSpec::relu("relu2"), {"conv2"});
    channels = c2;
    extent -= 2;
    prev = "relu2";
  }

  net.add(LayerSpec::flatten("flat"), {prev});
  prev = "flat";
  Index width = channels * extent * extent;

  const int hiddenCount = static_cast<int>(rng() % 3);
  for (int k = 0; k < hiddenCount; ++k) {
    const Index hidden = 20 + static_cast<Index>(rng() % 7);
    const std::string name = "fc" + std::to_string(k + 1);
    net.add(LayerSpec::innerProduct(
                name, randomTensor(rng, {width, hidden}, -0.5, 0.5),
                bias(hidden)),
            {prev});
    prev = name;
    width = hidden;
  }

  net.add(LayerSpec::innerProduct(
              "out", randomTensor(rng, {width, 3}, -0.5, 0.5), bias(3)),
          {prev});
  return net;
}

/// Input draw for the conservation suites; resamples until the strongest
/// logit is bounded away from zero so relative deviations are meaningful.
inline Tensor conservationInput(const NetworkGraph& net, std::mt19937_64& rng,
                                Index* target) {
  for (int attempt = 0; attempt < 32; ++attempt) {
    Tensor x = randomTensor(rng, net.inputShape(), 0.1, 1.0);
    const Tensor logits = net.forward(x).logits;
    const Index best = strongestLogit(logits);
    if (std::abs(logits.at(best)) >= 0.05) {
      *target = best;
      return x;
    }
  }
  fail(ErrorCode::kBadInput, "no input with a usable logit after 32 draws");
}

/// Tiny chains for the message-enumeration oracle; the neuron count
/// (parameterized outputs) stays at or below 50.
inline NetworkGraph smallNet(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const bool withBias = rng() % 2 == 0;
  auto bias = [&](Index n) {
    Tensor b = randomTensor(rng, {n}, -0.2, 0.2);
    return withBias ? b : Tensor::zeros({n});
  };
  auto weights = [&](const Shape& s) {
    return randomTensor(rng, s, -0.6, 0.6);
  };

  switch (seed % 4) {
    case 0: {
      NetworkGraph net("small0", {2, 4, 4});
      ConvParams p{2, 2, 3, 3, 1, 0};
      net.add(LayerSpec::convolution("conv", p, weights({2, 2, 3, 3}),
                                     bias(2)));
      net.add(LayerSpec::relu("relu"), {"conv"});
      net.add(LayerSpec::flatten("flat"), {"relu"});
      net.add(LayerSpec::innerProduct("fc1", weights({8, 4}), bias(4)),
              {"flat"});
      net.add(LayerSpec::relu("relu2"), {"fc1"});
      net.add(LayerSpec::innerProduct("fc2", weights({4, 3}), bias(3)),
              {"relu2"});
      return net;
    }
    case 1: {
      NetworkGraph net("small1", {1, 5, 5});
      ConvParams p{1, 3, 3, 3, 1, 0};
      net.add(LayerSpec::convolution("conv", p, weights({3, 1, 3, 3}),
                                     bias(3)));
      net.add(LayerSpec::relu("relu"), {"conv"});
      net.add(LayerSpec::maxPool("pool", 2, 1), {"relu"});
      net.add(LayerSpec::flatten("flat"), {"pool"});
      net.add(LayerSpec::innerProduct("fc", weights({12, 3}), bias(3)),
              {"flat"});
      return net;
    }
    case 2: {
      NetworkGraph net("small2", {1, 4, 4});
      ConvParams p{1, 2, 3, 3, 1, 1};
      net.add(LayerSpec::convolution("conv", p, weights({2, 1, 3, 3}),
                                     bias(2)));
      net.add(LayerSpec::relu("relu"), {"conv"});
      net.add(LayerSpec::maxPool("pool", 2, 2), {"relu"});
      net.add(LayerSpec::flatten("flat"), {"pool"});
      net.add(LayerSpec::innerProduct("fc", weights({8, 3}), bias(3)),
              {"flat"});
      return net;
    }
    default: {
      NetworkGraph net("small3", {2, 4, 4});
      ConvParams p{2, 3, 2, 2, 2, 0};
      net.add(LayerSpec::convolution("conv", p, weights({3, 2, 2, 2}),
                                     bias(3)));
      net.add(LayerSpec::relu("relu"), {"conv"});
      net.add(LayerSpec::avgPool("pool", 2, 2), {"relu"});
      net.add(LayerSpec::flatten("flat"), {"pool"});
      net.add(LayerSpec::innerProduct("fc1", weights({3, 5}), bias(5)),
              {"flat"});
      net.add(LayerSpec::innerProduct("fc2", weights({5, 2}), bias(2)),
              {"fc1"});
      return net;
    }
  }
}

/// Networks for finite-difference gradient checks, covering every layer
/// kind including a concat branch and a softmax sink.
inline NetworkGraph gradNet(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto weights = [&](const Shape& s) {
    return randomTensor(rng, s, -0.7, 0.7);
  };
  auto bias = [&](Index n) { return randomTensor(rng, {n}, -0.3, 0.3); };

  switch (seed % 3) {
    case 0: {
      NetworkGraph net("grad0", {2, 5, 5});
      ConvParams pa{2, 2, 3, 3, 1, 1};
      ConvParams pb{2, 3, 3, 3, 1, 1};
      net.add(LayerSpec::convolution("convA", pa, weights({2, 2, 3, 3}),
                                     bias(2)));
      net.add(LayerSpec::convolution("convB", pb, weights({3, 2, 3, 3}),
                                     bias(3)));
      net.add(LayerSpec::concat("cat", 0), {"convA", "convB"});
      net.add(LayerSpec::relu("relu"), {"cat"});
      net.add(LayerSpec::maxPool("pool", 2, 2), {"relu"});
      net.add(LayerSpec::flatten("flat"), {"pool"});
      net.add(LayerSpec::innerProduct("fc", weights({20, 4}), bias(4)),
              {"flat"});
      return net;
    }
    case 1: {
      NetworkGraph net("grad1", {1, 6, 6});
      ConvParams p{1, 3, 3, 3, 1, 0};
      net.add(LayerSpec::convolution("conv", p, weights({3, 1, 3, 3}),
                                     bias(3)));
      net.add(LayerSpec::relu("relu"), {"conv"});
      net.add(LayerSpec::avgPool("pool", 2, 2), {"relu"});
      net.add(LayerSpec::flatten("flat"), {"pool"});
      net.add(LayerSpec::innerProduct("fc1", weights({12, 6}), bias(6)),
              {"flat"});
      net.add(LayerSpec::relu("relu2"), {"fc1"});
      net.add(LayerSpec::innerProduct("fc2", weights({6, 3}), bias(3)),
              {"relu2"});
      net.add(LayerSpec::softmax("prob"), {"fc2"});
      return net;
    }
    default: {
      NetworkGraph net("grad2", {8});
      net.add(LayerSpec::innerProduct("fc1", weights({8, 10}), bias(10)));
      net.add(LayerSpec::relu("relu1"), {"fc1"});
      net.add(LayerSpec::innerProduct("fc2", weights({10, 5}), bias(5)),
              {"relu1"});
      net.add(LayerSpec::relu("relu2"), {"fc2"});
      net.add(LayerSpec::innerProduct("fc3", weights({5, 2}), bias(2)),
              {"relu2"});
      net.add(LayerSpec::softmax("prob"), {"fc3"});
      return net;
    }
  }
}

/// True when every ReLU input is at least `margin` away from zero and every
/// max-pool window has a unique maximum with at least `margin` of headroom,
/// so a finite-difference probe cannot cross a kink.
inline bool kinkFree(const NetworkGraph& net, const ForwardTrace& trace,
                     double margin) {
  for (Index i = 0; i < net.size(); ++i) {
    const LayerSpec& layer = net.node(i).layer;
    if (layer.kind == LayerKind::kRelu) {
      const Tensor& z = net.nodeInput(trace, i, 0);
      for (Index k = 0; k < z.size(); ++k) {
        if (std::abs(z.at(k)) < margin) return false;
      }
    } else if (layer.kind == LayerKind::kMaxPool) {
      const Tensor& z = net.nodeInput(trace, i, 0);
      const PoolParams& p = layer.pool;
      const Index h = z.extent(1);
      const Index w = z.extent(2);
      const Index outH = (h - p.window) / p.stride + 1;
      const Index outW = (w - p.window) / p.stride + 1;
      for (Index c = 0; c < z.extent(0); ++c) {
        for (Index oy = 0; oy < outH; ++oy) {
          for (Index ox = 0; ox < outW; ++ox) {
            double best = -std::numeric_limits<double>::infinity();
            double second = best;
            for (Index ky = 0; ky < p.window; ++ky) {
              for (Index kx = 0; kx < p.window; ++kx) {
                const double v =
                    z(c, oy * p.stride + ky, ox * p.stride + kx);
                if (v > best) {
                  second = best;
                  best = v;
                } else if (v > second) {
                  second = v;
                }
              }
            }
            if (best - second < margin) return false;
          }
        }
      }
    }
  }
  return true;
}

inline Tensor sampleKinkFree(const NetworkGraph& net, std::mt19937_64& rng,
                             double lo, double hi, double margin = 1e-3) {
  for (int attempt = 0; attempt < 64; ++attempt) {
    Tensor x = randomTensor(rng, net.inputShape(), lo, hi);
    if (kinkFree(net, net.forward(x), margin)) return x;
  }
  fail(ErrorCode::kBadInput, "no kink-free sample after 64 draws");
}

/// f(x) = sum_p w_p x_p + b per class over a single-channel image: flatten
/// into one inner product. Dyadic weights keep occlusion differences exact.
inline NetworkGraph linearImageNet(std::uint64_t seed, Index side,
                                   Index classes, bool withBias) {
  std::mt19937_64 rng(seed);
  NetworkGraph net("linear", {1, side, side});
  net.add(LayerSpec::flatten("flat"));
  Tensor b = Tensor::zeros({classes});
  if (withBias) b = dyadicTensor(rng, {classes});
  net.add(LayerSpec::innerProduct(
              "fc", dyadicTensor(rng, {side * side, classes}), std::move(b)),
          {"flat"});
  return net;
}

/// Logits independent of the input: zero weights, fixed bias vector.
inline NetworkGraph constantNet(const Shape& inputShape,
                                const std::vector<double>& logits) {
  NetworkGraph net("constant", inputShape);
  net.add(LayerSpec::flatten("flat"));
  const Index n = shapeSize(inputShape);
  const Index k = static_cast<Index>(logits.size());
  Tensor b = Tensor::zeros({k});
  for (Index i = 0; i < k; ++i) b.at(i) = logits[static_cast<std::size_t>(i)];
  net.add(LayerSpec::innerProduct("fc", Tensor::zeros({n, k}), std::move(b)),
          {"flat"});
  return net;
}

/// Small conv net used as the oversampling fixture (8x8 input, three
/// classes, softmax sink).
inline NetworkGraph cropFixtureNet(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  NetworkGraph net("cropfix", {3, 8, 8});
  ConvParams p{3, 4, 3, 3, 1, 1};
  net.add(LayerSpec::convolution("conv", p,
                                 randomTensor(rng, {4, 3, 3, 3}, -0.4, 0.4),
                                 randomTensor(rng, {4}, -0.1, 0.1)));
  net.add(LayerSpec::relu("relu"), {"conv"});
  net.add(LayerSpec::maxPool("pool", 2, 2), {"relu"});
  net.add(LayerSpec::flatten("flat"), {"pool"});
  net.add(LayerSpec::innerProduct("fc",
                                  randomTensor(rng, {64, 3}, -0.4, 0.4),
                                  randomTensor(rng, {3}, -0.1, 0.1)),
          {"flat"});
  net.add(LayerSpec::softmax("prob"), {"fc"});
  return net;
}

/// Two well-separated 2-feature blobs; class 0 sits left of x = -0.6 and
/// class 1 right of +0.6, so a brute-force threshold on the first feature
/// classifies perfectly.
inline Dataset blobDataset(std::uint64_t seed, Index n) {
  std::mt19937_64 rng(seed);
  Dataset out;
  out.reserve(static_cast<std::size_t>(n));
  for (Index k = 0; k < n; ++k) {
    const Index label = static_cast<Index>(rng() % 2);
    const double cx = label == 0 ? -1.0 : 1.0;
    const double cy = label == 0 ? -0.5 : 0.5;
    Tensor x = Tensor::zeros({2});
    x.at(0) = cx + uniformRange(rng, -0.4, 0.4);
    x.at(1) = cy + uniformRange(rng, -0.4, 0.4);
    out.push_back({std::move(x), label});
  }
  return out;
}

inline NetworkGraph blobNet(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  NetworkGraph net("blob", {2});
  net.add(LayerSpec::innerProduct("fc",
                                  randomTensor(rng, {2, 2}, -0.5, 0.5),
                                  randomTensor(rng, {2}, -0.1, 0.1)));
  net.add(LayerSpec::softmax("prob"), {"fc"});
  return net;
}

/// 8x8 three-channel images: class 1 lights the top-left 4x4 quadrant,
/// class 0 is dim noise everywhere, so that quadrant alone separates the
/// classes.
inline Dataset quadrantDataset(std::uint64_t seed, Index n) {
  std::mt19937_64 rng(seed);
  Dataset out;
  out.reserve(static_cast<std::size_t>(n));
  for (Index k = 0; k < n; ++k) {
    const Index label = static_cast<Index>(rng() % 2);
    Tensor img = randomTensor(rng, {3, 8, 8}, 0.0, 0.2);
    if (label == 1) {
      for (Index c = 0; c < 3; ++c) {
        for (Index y = 0; y < 4; ++y) {
          for (Index x = 0; x < 4; ++x) {
            img(c, y, x) = uniformRange(rng, 0.7, 1.0);
          }
        }
      }
    }
    out.push_back({std::move(img), label});
  }
  return out;
}

inline NetworkGraph quadrantNet(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  NetworkGraph net("quadrant", {3, 8, 8});
  ConvParams p{3, 4, 3, 3, 1, 1};
  net.add(LayerSpec::convolution("conv", p,
                                 randomTensor(rng, {4, 3, 3, 3}, -0.25, 0.25),
                                 randomTensor(rng, {4}, -0.05, 0.05)));
  net.add(LayerSpec::relu("relu"), {"conv"});
  net.add(LayerSpec::maxPool("pool", 2, 2), {"relu"});
  net.add(LayerSpec::flatten("flat"), {"pool"});
  net.add(LayerSpec::innerProduct("fc",
                                  randomTensor(rng, {64, 2}, -0.25, 0.25),
                                  randomTensor(rng, {2}, -0.05, 0.05)),
          {"flat"});
  net.add(LayerSpec::softmax("prob"), {"fc"});
  return net;
}

}  // namespace fixtures
}  // namespace nnlrp
