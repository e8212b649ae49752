#include "nnlrp/model_io.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "nnlrp/error.hpp"
#include "nnlrp/version.hpp"

namespace nnlrp {
namespace {

using nlohmann::json;

constexpr std::size_t kMagicBytes = 8;
constexpr std::size_t kHeaderBytes = kMagicBytes + 8;
constexpr const char* kMagicPrefix = "NNLRPM";
constexpr const char* kMagicVersion = "01";

std::array<std::uint32_t, 256> makeCrcTable() {
  std::array<std::uint32_t, 256> table{};
  for (std::uint32_t n = 0; n < 256; ++n) {
    std::uint32_t c = n;
    for (int k = 0; k < 8; ++k) {
      c = (c & 1u) ? 0xEDB88320u ^ (c >> 1) : (c >> 1);
    }
    table[n] = c;
  }
  return table;
}

void putU32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) {
    out.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xFFu));
  }
}

void putU64(std::vector<unsigned char>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) {
    out.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xFFu));
  }
}

std::uint32_t getU32(const unsigned char* p) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
  return v;
}

std::uint64_t getU64(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return v;
}

std::vector<unsigned char> readFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorCode::kIoFailure, "cannot open '" + path + "'");
  std::vector<unsigned char> bytes(
      (std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  require(!in.bad(), ErrorCode::kIoFailure, "cannot read '" + path + "'");
  return bytes;
}

void writeFile(const std::string& path, const unsigned char* data,
               std::size_t size) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(out.good(), ErrorCode::kIoFailure, "cannot open '" + path + "'");
  out.write(reinterpret_cast<const char*>(data), static_cast<long>(size));
  out.flush();
  require(out.good(), ErrorCode::kIoFailure, "cannot write '" + path + "'");
}

void appendFloat32(std::vector<unsigned char>& payload, const Tensor& t) {
  for (Index i = 0; i < t.size(); ++i) {
    const float f = static_cast<float>(t.at(i));
    putU32(payload, std::bit_cast<std::uint32_t>(f));
  }
}

json parameterEntry(const Tensor& t, std::uint64_t offset) {
  json entry;
  entry["shape"] = t.shape();
  entry["offset"] = offset;
  entry["length"] = static_cast<std::uint64_t>(t.size()) * 4;
  return entry;
}

const json& field(const json& obj, const char* key,
                  const std::string& context) {
  const auto it = obj.find(key);
  require(it != obj.end(), ErrorCode::kBadParameter,
          "manifest: " + context + " is missing field '" + key + "'");
  return *it;
}

Shape shapeFromJson(const json& arr, const std::string& context) {
  require(arr.is_array(), ErrorCode::kBadParameter,
          "manifest: " + context + " shape must be an array");
  Shape shape;
  for (const json& v : arr) {
    require(v.is_number_integer(), ErrorCode::kBadParameter,
            "manifest: " + context + " shape must hold integers");
    shape.push_back(v.get<Index>());
  }
  requireValidShape(shape);
  return shape;
}

Tensor readParameter(const unsigned char* payload, std::uint64_t payloadBytes,
                     const json& entry, const std::string& context) {
  const Shape shape = shapeFromJson(field(entry, "shape", context), context);
  const auto offset = field(entry, "offset", context).get<std::uint64_t>();
  const auto length = field(entry, "length", context).get<std::uint64_t>();
  const std::uint64_t want = static_cast<std::uint64_t>(shapeSize(shape)) * 4;
  require(length == want, ErrorCode::kTruncated,
          context + " declares " + std::to_string(length) +
              " bytes for shape " + shapeToString(shape) + ", expected " +
              std::to_string(want));
  require(length <= payloadBytes && offset <= payloadBytes - length,
          ErrorCode::kTruncated, context + " extends past the payload end");
  Tensor t = Tensor::zeros(shape);
  for (Index i = 0; i < t.size(); ++i) {
    const std::uint32_t bits = getU32(payload + offset + 4 * i);
    t.at(i) = static_cast<double>(std::bit_cast<float>(bits));
  }
  return t;
}

}  // namespace

std::uint32_t crc32(const unsigned char* data, std::size_t size) {
  static const std::array<std::uint32_t, 256> table = makeCrcTable();
  std::uint32_t c = 0xFFFFFFFFu;
  for (std::size_t i = 0; i < size; ++i) {
    c = table[(c ^ data[i]) & 0xFFu] ^ (c >> 8);
  }
  return c ^ 0xFFFFFFFFu;
}

std::uint32_t crc32(const std::vector<unsigned char>& data) {
  return crc32(data.data(), data.size());
}

std::uint32_t crc32File(const std::string& path) {
  const std::vector<unsigned char> bytes = readFile(path);
  return crc32(bytes);
}

void saveModel(const NetworkGraph& net, const std::string& path) {
  net.validate();

  json manifest;
  manifest["format"] = "nnlrp-model";
  manifest["format_version"] = 1;
  manifest["engine_version"] = kEngineVersion;
  manifest["name"] = net.name();
  manifest["input_shape"] = net.inputShape();
  json preprocess;
  preprocess["scale"] = net.preprocess().scale;
  preprocess["channel_means"] = net.preprocess().channelMeans;
  manifest["preprocess"] = preprocess;

  std::vector<unsigned char> payload;
  json nodes = json::array();
  for (Index i = 0; i < net.size(); ++i) {
    const GraphNode& node = net.node(i);
    json entry;
    entry["name"] = node.layer.name;
    entry["kind"] = layerKindName(node.layer.kind);
    entry["inputs"] = node.inputs;
    switch (node.layer.kind) {
      case LayerKind::kConvolution: {
        const ConvParams& p = node.layer.conv;
        json conv;
        conv["in_channels"] = p.inChannels;
        conv["out_channels"] = p.outChannels;
        conv["kernel_h"] = p.kernelH;
        conv["kernel_w"] = p.kernelW;
        conv["stride"] = p.stride;
        conv["pad"] = p.pad;
        entry["conv"] = conv;
        break;
      }
      case LayerKind::kMaxPool:
      case LayerKind::kAvgPool: {
        json pool;
        pool["window"] = node.layer.pool.window;
        pool["stride"] = node.layer.pool.stride;
        entry["pool"] = pool;
        break;
      }
      case LayerKind::kConcat:
        entry["axis"] = node.layer.concatAxis;
        break;
      default:
        break;
    }
    if (node.layer.hasParameters()) {
      entry["weights"] = parameterEntry(node.layer.weights, payload.size());
      appendFloat32(payload, node.layer.weights);
      entry["bias"] = parameterEntry(node.layer.bias, payload.size());
      appendFloat32(payload, node.layer.bias);
    }
    nodes.push_back(entry);
  }
  manifest["nodes"] = nodes;
  manifest["payload_length"] = static_cast<std::uint64_t>(payload.size());

  const std::string text = manifest.dump();
  std::vector<unsigned char> bytes;
  bytes.reserve(kHeaderBytes + text.size() + payload.size() + 4);
  for (const char* p = kMagicPrefix; *p; ++p) {
    bytes.push_back(static_cast<unsigned char>(*p));
  }
  for (const char* p = kMagicVersion; *p; ++p) {
    bytes.push_back(static_cast<unsigned char>(*p));
  }
  putU64(bytes, text.size());
  bytes.insert(bytes.end(), text.begin(), text.end());
  bytes.insert(bytes.end(), payload.begin(), payload.end());
  putU32(bytes, crc32(payload));
  writeFile(path, bytes.data(), bytes.size());
}

NetworkGraph loadModel(const std::string& path) {
  const std::vector<unsigned char> bytes = readFile(path);
  require(bytes.size() >= kMagicBytes, ErrorCode::kTruncated,
          "'" + path + "' is too short to hold the magic");
  require(std::equal(kMagicPrefix, kMagicPrefix + 6, bytes.data()),
          ErrorCode::kBadMagic, "'" + path + "' is not a model file");
  require(bytes[6] == '0' && bytes[7] == '1', ErrorCode::kBadVersion,
          "'" + path + "' uses an unsupported model format version");
  require(bytes.size() >= kHeaderBytes, ErrorCode::kTruncated,
          "'" + path + "' is too short to hold the manifest length");
  const std::uint64_t manifestLen = getU64(bytes.data() + kMagicBytes);
  require(manifestLen <= bytes.size() - kHeaderBytes &&
              bytes.size() - kHeaderBytes - manifestLen >= 4,
          ErrorCode::kTruncated,
          "'" + path + "' manifest extends past the end of the file");

  json manifest;
  try {
    manifest = json::parse(bytes.begin() + kHeaderBytes,
                           bytes.begin() + kHeaderBytes + manifestLen);
  } catch (const json::exception& e) {
    fail(ErrorCode::kBadParameter,
         std::string("manifest is not valid JSON: ") + e.what());
  }

  const unsigned char* payload = bytes.data() + kHeaderBytes + manifestLen;
  const std::uint64_t payloadBytes =
      bytes.size() - kHeaderBytes - manifestLen - 4;
  try {
    const auto declared =
        field(manifest, "payload_length", "model").get<std::uint64_t>();
    require(declared == payloadBytes, ErrorCode::kTruncated,
            "manifest declares " + std::to_string(declared) +
                " payload bytes, file holds " + std::to_string(payloadBytes));

    const std::uint32_t stored = getU32(payload + payloadBytes);
    const std::uint32_t computed = crc32(payload, payloadBytes);
    require(stored == computed, ErrorCode::kChecksumMismatch,
            "payload checksum mismatch in '" + path + "'");

    NetworkGraph net(field(manifest, "name", "model").get<std::string>(),
                     shapeFromJson(field(manifest, "input_shape", "model"),
                                   "input"));
    if (manifest.contains("preprocess")) {
      const json& pre = manifest["preprocess"];
      Preprocess p;
      p.scale = field(pre, "scale", "preprocess").get<double>();
      p.channelMeans = field(pre, "channel_means", "preprocess")
                           .get<std::vector<double>>();
      net.setPreprocess(std::move(p));
    }

    for (const json& entry : field(manifest, "nodes", "model")) {
      const auto name = field(entry, "name", "node").get<std::string>();
      const LayerKind kind =
          layerKindFromName(field(entry, "kind", name).get<std::string>());
      auto inputs = field(entry, "inputs", name).get<std::vector<std::string>>();
      switch (kind) {
        case LayerKind::kConvolution: {
          const json& conv = field(entry, "conv", name);
          ConvParams p;
          p.inChannels = field(conv, "in_channels", name).get<Index>();
          p.outChannels = field(conv, "out_channels", name).get<Index>();
          p.kernelH = field(conv, "kernel_h", name).get<Index>();
          p.kernelW = field(conv, "kernel_w", name).get<Index>();
          p.stride = field(conv, "stride", name).get<Index>();
          p.pad = field(conv, "pad", name).get<Index>();
          Tensor weights = readParameter(payload, payloadBytes,
                                         field(entry, "weights", name),
                                         "node '" + name + "' weights");
          Tensor bias = readParameter(payload, payloadBytes,
                                      field(entry, "bias", name),
                                      "node '" + name + "' bias");
          net.add(LayerSpec::convolution(name, p, std::move(weights),
                                         std::move(bias)),
                  std::move(inputs));
          break;
        }
        case LayerKind::kInnerProduct: {
          Tensor weights = readParameter(payload, payloadBytes,
                                         field(entry, "weights", name),
                                         "node '" + name + "' weights");
          Tensor bias = readParameter(payload, payloadBytes,
                                      field(entry, "bias", name),
                                      "node '" + name + "' bias");
          net.add(LayerSpec::innerProduct(name, std::move(weights),
                                          std::move(bias)),
                  std::move(inputs));
          break;
        }
        case LayerKind::kRelu:
          net.add(LayerSpec::relu(name), std::move(inputs));
          break;
        case LayerKind::kMaxPool: {
          const json& pool = field(entry, "pool", name);
          net.add(LayerSpec::maxPool(name,
                                     field(pool, "window", name).get<Index>(),
                                     field(pool, "stride", name).get<Index>()),
                  std::move(inputs));
          break;
        }
        case LayerKind::kAvgPool: {
          const json& pool = field(entry, "pool", name);
          net.add(LayerSpec::avgPool(name,
                                     field(pool, "window", name).get<Index>(),
                                     field(pool, "stride", name).get<Index>()),
                  std::move(inputs));
          break;
        }
        case LayerKind::kFlatten:
          net.add(LayerSpec::flatten(name), std::move(inputs));
          break;
        case LayerKind::kConcat:
          net.add(LayerSpec::concat(name,
                                    field(entry, "axis", name).get<Index>()),
                  std::move(inputs));
          break;
        case LayerKind::kSoftmax:
          net.add(LayerSpec::softmax(name), std::move(inputs));
          break;
      }
    }
    net.validate();
    return net;
  } catch (const json::exception& e) {
    fail(ErrorCode::kBadParameter, std::string("manifest: ") + e.what());
  }
}

void writeTensorRaw(const Tensor& tensor, const std::string& path) {
  std::vector<unsigned char> payload;
  payload.reserve(static_cast<std::size_t>(tensor.size()) * 4);
  appendFloat32(payload, tensor);
  writeFile(path, payload.data(), payload.size());
}

Tensor readTensorRaw(const std::string& path, const Shape& shape) {
  const std::vector<unsigned char> bytes = readFile(path);
  const std::uint64_t want = static_cast<std::uint64_t>(shapeSize(shape)) * 4;
  require(bytes.size() == want, ErrorCode::kTruncated,
          "'" + path + "' holds " + std::to_string(bytes.size()) +
              " bytes, shape " + shapeToString(shape) + " needs " +
              std::to_string(want));
  Tensor t = Tensor::zeros(shape);
  for (Index i = 0; i < t.size(); ++i) {
    const std::uint32_t bits = getU32(bytes.data() + 4 * i);
    t.at(i) = static_cast<double>(std::bit_cast<float>(bits));
  }
  return t;
}

void saveDataset(const Dataset& dataset, const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  require(!ec, ErrorCode::kIoFailure,
          "cannot create directory '" + dir + "': " + ec.message());

  json manifest;
  manifest["format"] = "nnlrp-dataset";
  json items = json::array();
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "item%04zu.bin", i);
    writeTensorRaw(dataset[i].input,
                   (std::filesystem::path(dir) / name).string());
    json item;
    item["file"] = name;
    item["shape"] = dataset[i].input.shape();
    item["class"] = dataset[i].label;
    items.push_back(item);
  }
  manifest["items"] = items;
  const std::string text = manifest.dump(2);
  writeFile((std::filesystem::path(dir) / "manifest.json").string(),
            reinterpret_cast<const unsigned char*>(text.data()), text.size());
}

Dataset loadDataset(const std::string& dir) {
  const std::string manifestPath =
      (std::filesystem::path(dir) / "manifest.json").string();
  const std::vector<unsigned char> bytes = readFile(manifestPath);
  json manifest;
  try {
    manifest = json::parse(bytes.begin(), bytes.end());
    Dataset dataset;
    for (const json& item : field(manifest, "items", "dataset")) {
      const auto file = field(item, "file", "dataset item").get<std::string>();
      const Shape shape =
          shapeFromJson(field(item, "shape", file), file);
      DatasetItem entry;
      entry.input = readTensorRaw((std::filesystem::path(dir) / file).string(),
                                  shape);
      entry.label = field(item, "class", file).get<Index>();
      require(entry.label >= 0, ErrorCode::kBadParameter,
              "dataset item '" + file + "' has a negative class");
      dataset.push_back(std::move(entry));
    }
    return dataset;
  } catch (const json::exception& e) {
    fail(ErrorCode::kBadParameter,
         std::string("dataset manifest: ") + e.what());
  }
}

}  // namespace nnlrp
