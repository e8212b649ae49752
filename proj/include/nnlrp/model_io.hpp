#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nnlrp/graph.hpp"
#include "nnlrp/tensor.hpp"

namespace nnlrp {

std::uint32_t crc32(const unsigned char* data, std::size_t size);
std::uint32_t crc32(const std::vector<unsigned char>& data);
std::uint32_t crc32File(const std::string& path);

/// Model container, bit-exact: 8-byte magic "NNLRPM01", a 64-bit
/// little-endian manifest byte count, the UTF-8 JSON manifest (nodes, edges,
/// shapes, per-parameter byte offsets/lengths, preprocess block), the
/// parameter payload as 32-bit little-endian IEEE-754 floats in row-major
/// order, and a trailing CRC-32 of the payload. Parameters are quantized to
/// 32 bits on save and widened to 64 bits on load, so save→load→save is
/// byte-identical.
void saveModel(const NetworkGraph& net, const std::string& path);
NetworkGraph loadModel(const std::string& path);

/// Raw tensor fixture: bare float32 little-endian row-major payload. The
/// shape comes from the caller (network input shape or dataset manifest).
void writeTensorRaw(const Tensor& tensor, const std::string& path);
Tensor readTensorRaw(const std::string& path, const Shape& shape);

struct DatasetItem {
  Tensor input;
  Index label = 0;
};
using Dataset = std::vector<DatasetItem>;

/// Dataset fixture: a directory of raw tensor files plus manifest.json
/// mapping each file to its shape and class index.
void saveDataset(const Dataset& dataset, const std::string& dir);
Dataset loadDataset(const std::string& dir);

}  // namespace nnlrp
