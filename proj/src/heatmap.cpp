#include "nnlrp/heatmap.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>

#include "nnlrp/error.hpp"

namespace nnlrp {
namespace {

unsigned char fade(double t) {
  return static_cast<unsigned char>(std::llround(255.0 * (1.0 - t)));
}

std::string readTextFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorCode::kIoFailure, "cannot open '" + path + "'");
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  require(!in.bad(), ErrorCode::kIoFailure, "cannot read '" + path + "'");
  return text;
}

/// Next whitespace-delimited PPM header token; '#' starts a comment that
/// runs to the end of the line.
std::string nextToken(const std::string& text, std::size_t& pos) {
  while (pos < text.size()) {
    const char c = text[pos];
    if (c == '#') {
      while (pos < text.size() && text[pos] != '\n') ++pos;
    } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      ++pos;
    } else {
      break;
    }
  }
  const std::size_t start = pos;
  while (pos < text.size() && !std::isspace(static_cast<unsigned char>(text[pos]))) {
    ++pos;
  }
  require(pos > start, ErrorCode::kTruncated, "PPM header ended early");
  return text.substr(start, pos - start);
}

Index parsePpmNumber(const std::string& token) {
  char* end = nullptr;
  const long v = std::strtol(token.c_str(), &end, 10);
  require(end && *end == '\0' && v > 0, ErrorCode::kBadInput,
          "bad PPM header token '" + token + "'");
  return static_cast<Index>(v);
}

}  // namespace

Heatmap Heatmap::symmetricMax(Tensor grid) {
  Heatmap h;
  h.grid = std::move(grid);
  h.mode = Normalization::kSymmetricMax;
  return h;
}

Heatmap Heatmap::fixedRange(Tensor grid, double lo, double hi) {
  require(lo < 0.0 && hi > 0.0, ErrorCode::kBadParameter,
          "fixed range must straddle zero, got [" + std::to_string(lo) +
              ", " + std::to_string(hi) + "]");
  Heatmap h;
  h.grid = std::move(grid);
  h.mode = Normalization::kFixedRange;
  h.lo = lo;
  h.hi = hi;
  return h;
}

RgbImage render(const Heatmap& h, Index upscale) {
  require(h.grid.rank() == 2, ErrorCode::kShapeMismatch,
          "heatmap grid must be rank 2, got " +
              shapeToString(h.grid.shape()));
  require(h.grid.allFinite(), ErrorCode::kBadInput,
          "heatmap grid contains non-finite values");
  require(upscale >= 1, ErrorCode::kBadParameter,
          "upscale factor must be at least 1");

  double posScale;
  double negScale;
  if (h.mode == Heatmap::Normalization::kSymmetricMax) {
    posScale = negScale = h.grid.array().abs().maxCoeff();
  } else {
    posScale = h.hi;
    negScale = -h.lo;
  }

  const Index gh = h.grid.extent(0);
  const Index gw = h.grid.extent(1);
  RgbImage img;
  img.height = gh * upscale;
  img.width = gw * upscale;
  img.pixels.assign(static_cast<std::size_t>(img.height * img.width * 3), 255);

  for (Index y = 0; y < gh; ++y) {
    for (Index x = 0; x < gw; ++x) {
      const double v = h.grid(y, x);
      unsigned char r = 255;
      unsigned char g = 255;
      unsigned char b = 255;
      if (v > 0.0 && posScale > 0.0) {
        const double t = std::min(v / posScale, 1.0);
        g = b = fade(t);
      } else if (v < 0.0 && negScale > 0.0) {
        const double t = std::min(-v / negScale, 1.0);
        r = g = fade(t);
      }
      for (Index dy = 0; dy < upscale; ++dy) {
        for (Index dx = 0; dx < upscale; ++dx) {
          const std::size_t base = static_cast<std::size_t>(
              ((y * upscale + dy) * img.width + x * upscale + dx) * 3);
          img.pixels[base] = r;
          img.pixels[base + 1] = g;
          img.pixels[base + 2] = b;
        }
      }
    }
  }
  return img;
}

void writePpm(const RgbImage& img, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(out.good(), ErrorCode::kIoFailure, "cannot open '" + path + "'");
  out << "P6\n" << img.width << " " << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.pixels.data()),
            static_cast<long>(img.pixels.size()));
  out.flush();
  require(out.good(), ErrorCode::kIoFailure, "cannot write '" + path + "'");
}

RgbImage readPpm(const std::string& path) {
  const std::string text = readTextFile(path);
  std::size_t pos = 0;
  require(nextToken(text, pos) == "P6", ErrorCode::kBadInput,
          "'" + path + "' is not a binary P6 PPM");
  const Index width = parsePpmNumber(nextToken(text, pos));
  const Index height = parsePpmNumber(nextToken(text, pos));
  const Index maxval = parsePpmNumber(nextToken(text, pos));
  require(maxval == 255, ErrorCode::kBadInput,
          "'" + path + "' uses unsupported maxval " + std::to_string(maxval));
  require(pos < text.size(), ErrorCode::kTruncated,
          "'" + path + "' ends before its pixels");
  ++pos;

  const std::size_t want = static_cast<std::size_t>(width * height * 3);
  require(text.size() - pos >= want, ErrorCode::kTruncated,
          "'" + path + "' holds " + std::to_string(text.size() - pos) +
              " pixel bytes, needs " + std::to_string(want));
  RgbImage img;
  img.width = width;
  img.height = height;
  img.pixels.assign(text.begin() + static_cast<long>(pos),
                    text.begin() + static_cast<long>(pos + want));
  return img;
}

void writeCsv(const Tensor& grid, const std::string& path) {
  require(grid.rank() == 2, ErrorCode::kShapeMismatch,
          "CSV export needs a rank-2 grid, got " +
              shapeToString(grid.shape()));
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(out.good(), ErrorCode::kIoFailure, "cannot open '" + path + "'");
  char buf[40];
  for (Index y = 0; y < grid.extent(0); ++y) {
    for (Index x = 0; x < grid.extent(1); ++x) {
      std::snprintf(buf, sizeof(buf), "%.17g",
                    grid(y, x));
      if (x > 0) out << ",";
      out << buf;
    }
    out << "\n";
  }
  out.flush();
  require(out.good(), ErrorCode::kIoFailure, "cannot write '" + path + "'");
}

Tensor readCsv(const std::string& path) {
  const std::string text = readTextFile(path);
  std::vector<std::vector<double>> rows;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    if (eol > pos) {
      std::string line = text.substr(pos, eol - pos);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      std::vector<double> row;
      std::size_t cell = 0;
      while (cell <= line.size()) {
        std::size_t comma = line.find(',', cell);
        if (comma == std::string::npos) comma = line.size();
        const std::string token = line.substr(cell, comma - cell);
        char* end = nullptr;
        const double v = std::strtod(token.c_str(), &end);
        require(end && *end == '\0' && end != token.c_str(),
                ErrorCode::kBadInput,
                "'" + path + "' holds a non-numeric cell '" + token + "'");
        row.push_back(v);
        cell = comma + 1;
      }
      if (!rows.empty()) {
        require(row.size() == rows.front().size(), ErrorCode::kBadInput,
                "'" + path + "' rows have uneven lengths");
      }
      rows.push_back(std::move(row));
    }
    pos = eol + 1;
  }
  require(!rows.empty(), ErrorCode::kBadInput, "'" + path + "' is empty");

  Tensor grid = Tensor::zeros({static_cast<Index>(rows.size()),
                               static_cast<Index>(rows.front().size())});
  for (Index y = 0; y < grid.extent(0); ++y) {
    for (Index x = 0; x < grid.extent(1); ++x) {
      grid(y, x) =
          rows[static_cast<std::size_t>(y)][static_cast<std::size_t>(x)];
    }
  }
  return grid;
}

Tensor ppmToTensor(const RgbImage& img, const Preprocess& pre) {
  const Index channels = 3;
  require(pre.channelMeans.empty() ||
              pre.channelMeans.size() == 1 ||
              pre.channelMeans.size() == static_cast<std::size_t>(channels),
          ErrorCode::kBadInput,
          "preprocess declares " + std::to_string(pre.channelMeans.size()) +
              " channel means for a 3-channel image");
  Tensor t = Tensor::zeros({channels, img.height, img.width});
  for (Index c = 0; c < channels; ++c) {
    double mean = 0.0;
    if (pre.channelMeans.size() == 1) {
      mean = pre.channelMeans[0];
    } else if (!pre.channelMeans.empty()) {
      mean = pre.channelMeans[static_cast<std::size_t>(c)];
    }
    for (Index y = 0; y < img.height; ++y) {
      for (Index x = 0; x < img.width; ++x) {
        t(c, y, x) =
            pre.scale * static_cast<double>(img.at(y, x, c)) - mean;
      }
    }
  }
  return t;
}

}  // namespace nnlrp
