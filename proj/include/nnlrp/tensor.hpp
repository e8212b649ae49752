#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "nnlrp/error.hpp"

namespace nnlrp {

using Index = Eigen::Index;
using Shape = std::vector<Index>;

inline Index shapeSize(const Shape& shape) {
  Index n = 1;
  for (Index e : shape) n *= e;
  return n;
}

inline std::string shapeToString(const Shape& shape) {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ", ";
    os << shape[i];
  }
  os << ")";
  return os.str();
}

inline void requireValidShape(const Shape& shape) {
  for (Index e : shape)
    require(e > 0, ErrorCode::kBadParameter,
            "tensor extents must be positive, got " + shapeToString(shape));
}

/// Dense n-dimensional array over a real scalar, flat row-major storage.
/// The value carrier for activations, parameters and relevance throughout
/// the engine. Immutable by convention once handed to another module.
template <typename Scalar_>
class TensorT {
 public:
  using Scalar = Scalar_;
  using Array = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

  TensorT() = default;

  TensorT(Shape shape, Array data) : shape_(std::move(shape)), data_(std::move(data)) {
    requireValidShape(shape_);
    require(data_.size() == shapeSize(shape_), ErrorCode::kShapeMismatch,
            "flat data length " + std::to_string(data_.size()) +
                " does not match shape " + shapeToString(shape_));
  }

  static TensorT zeros(Shape shape) {
    requireValidShape(shape);
    const Index n = shapeSize(shape);
    return TensorT(std::move(shape), Array::Zero(n));
  }

  static TensorT constant(Shape shape, Scalar value) {
    requireValidShape(shape);
    const Index n = shapeSize(shape);
    return TensorT(std::move(shape), Array::Constant(n, value));
  }

  static TensorT fromList(Shape shape, std::initializer_list<Scalar> values) {
    Array a(static_cast<Index>(values.size()));
    Index i = 0;
    for (Scalar v : values) a[i++] = v;
    return TensorT(std::move(shape), std::move(a));
  }

  /// Rank-1 convenience.
  static TensorT vector(std::initializer_list<Scalar> values) {
    return fromList({static_cast<Index>(values.size())}, values);
  }

  const Shape& shape() const { return shape_; }
  Index rank() const { return static_cast<Index>(shape_.size()); }
  Index size() const { return data_.size(); }
  Index extent(Index axis) const { return shape_[static_cast<std::size_t>(axis)]; }

  Array& array() { return data_; }
  const Array& array() const { return data_; }

  Scalar* data() { return data_.data(); }
  const Scalar* data() const { return data_.data(); }

  Scalar& at(Index flat) { return data_[flat]; }
  Scalar at(Index flat) const { return data_[flat]; }

  template <typename... Ix>
  Scalar& operator()(Ix... ix) {
    return data_[flatIndex(ix...)];
  }
  template <typename... Ix>
  Scalar operator()(Ix... ix) const {
    return data_[flatIndex(ix...)];
  }

  /// Row-major flat offset of a multi-index.
  template <typename... Ix>
  Index flatIndex(Ix... ix) const {
    const Index idx[] = {static_cast<Index>(ix)...};
    Index flat = 0;
    for (std::size_t d = 0; d < sizeof...(ix); ++d) flat = flat * shape_[d] + idx[d];
    return flat;
  }

  /// Same data viewed under a different shape of equal element count.
  TensorT reshaped(Shape shape) const {
    requireValidShape(shape);
    require(shapeSize(shape) == size(), ErrorCode::kShapeMismatch,
            "cannot reshape " + shapeToString(shape_) + " to " + shapeToString(shape));
    return TensorT(std::move(shape), data_);
  }

  bool sameShape(const TensorT& other) const { return shape_ == other.shape_; }

  Scalar sum() const { return data_.sum(); }

  /// Value of a single-element tensor (rank 0 or any all-ones shape).
  Scalar scalarValue() const {
    require(size() == 1, ErrorCode::kShapeMismatch,
            "scalarValue on tensor of shape " + shapeToString(shape_));
    return data_[0];
  }

  bool allFinite() const { return data_.isFinite().all(); }

 private:
  Shape shape_;
  Array data_;
};

using Tensor = TensorT<double>;

namespace detail {
template <typename S>
inline void requireSameShape(const TensorT<S>& a, const TensorT<S>& b, const char* op) {
  require(a.sameShape(b), ErrorCode::kShapeMismatch,
          std::string(op) + " requires equal shapes, got " + shapeToString(a.shape()) +
              " and " + shapeToString(b.shape()));
}
}  // namespace detail

template <typename S>
TensorT<S> add(const TensorT<S>& a, const TensorT<S>& b) {
  detail::requireSameShape(a, b, "add");
  return TensorT<S>(a.shape(), a.array() + b.array());
}

template <typename S>
TensorT<S> sub(const TensorT<S>& a, const TensorT<S>& b) {
  detail::requireSameShape(a, b, "sub");
  return TensorT<S>(a.shape(), a.array() - b.array());
}

template <typename S>
TensorT<S> mul(const TensorT<S>& a, const TensorT<S>& b) {
  detail::requireSameShape(a, b, "mul");
  return TensorT<S>(a.shape(), a.array() * b.array());
}

/// Elementwise a / (b + sign(b)·eps). A zero denominator counts as positive,
/// so it receives +eps; any eps != 0 therefore keeps the result finite.
template <typename S>
TensorT<S> divStabilized(const TensorT<S>& a, const TensorT<S>& b, S eps) {
  detail::requireSameShape(a, b, "divStabilized");
  typename TensorT<S>::Array den =
      (b.array() >= S(0)).select(b.array() + eps, b.array() - eps);
  return TensorT<S>(a.shape(), a.array() / den);
}

/// Sum over the given axes; the result drops them. Empty axis list copies.
template <typename S>
TensorT<S> reduceSum(const TensorT<S>& a, const std::vector<Index>& axes) {
  const Index rank = a.rank();
  std::vector<bool> reduce(static_cast<std::size_t>(rank), false);
  for (Index ax : axes) {
    require(ax >= 0 && ax < rank, ErrorCode::kInvalidAxis,
            "axis " + std::to_string(ax) + " out of range for shape " +
                shapeToString(a.shape()));
    reduce[static_cast<std::size_t>(ax)] = true;
  }

  Shape outShape;
  for (Index d = 0; d < rank; ++d)
    if (!reduce[static_cast<std::size_t>(d)]) outShape.push_back(a.extent(d));

  TensorT<S> out = TensorT<S>::zeros(outShape);
  std::vector<Index> idx(static_cast<std::size_t>(rank), 0);
  for (Index flat = 0; flat < a.size(); ++flat) {
    Index outFlat = 0;
    for (Index d = 0; d < rank; ++d)
      if (!reduce[static_cast<std::size_t>(d)])
        outFlat = outFlat * a.extent(d) + idx[static_cast<std::size_t>(d)];
    out.at(outFlat) += a.at(flat);
    for (Index d = rank - 1; d >= 0; --d) {
      if (++idx[static_cast<std::size_t>(d)] < a.extent(d)) break;
      idx[static_cast<std::size_t>(d)] = 0;
    }
  }
  return out;
}

template <typename S>
TensorT<S> scaled(const TensorT<S>& a, S factor) {
  return TensorT<S>(a.shape(), a.array() * factor);
}

}  // namespace nnlrp
