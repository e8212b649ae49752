#pragma once

#include <cstdint>
#include <random>

#include "nnlrp/tensor.hpp"

namespace nnlrp {

/// Uniform double in [0, 1) built from raw generator bits. std::uniform_*
/// distributions are implementation-defined, so seeded fixtures and audits
/// derive values directly from the engine stream instead.
inline double uniformUnit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniformRange(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * uniformUnit(rng);
}

/// Fisher-Yates permutation of [0, n) driven by the raw stream.
inline std::vector<Index> shuffledIndices(std::mt19937_64& rng, Index n) {
  std::vector<Index> order(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) order[i] = i;
  for (Index i = n - 1; i > 0; --i) {
    const Index j = static_cast<Index>(rng() % static_cast<std::uint64_t>(i + 1));
    std::swap(order[i], order[j]);
  }
  return order;
}

inline Tensor randomTensor(std::mt19937_64& rng, const Shape& shape, double lo,
                           double hi) {
  Tensor t = Tensor::zeros(shape);
  for (Index i = 0; i < t.size(); ++i) t.at(i) = uniformRange(rng, lo, hi);
  return t;
}

}  // namespace nnlrp
