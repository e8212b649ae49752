#pragma once

#include <string>
#include <vector>

#include "nnlrp/graph.hpp"
#include "nnlrp/tensor.hpp"

namespace nnlrp {

/// A relevance grid plus its normalization. Symmetric-max maps [−m, m] with
/// m = max |grid|; fixed-range clamps to [lo, hi] with lo < 0 < hi. Zero is
/// always the neutral color.
struct Heatmap {
  enum class Normalization { kSymmetricMax, kFixedRange };

  Tensor grid;
  Normalization mode = Normalization::kSymmetricMax;
  double lo = -1.0;
  double hi = 1.0;

  static Heatmap symmetricMax(Tensor grid);
  static Heatmap fixedRange(Tensor grid, double lo, double hi);
};

struct RgbImage {
  Index height = 0;
  Index width = 0;
  std::vector<unsigned char> pixels;

  unsigned char at(Index y, Index x, Index c) const {
    return pixels[static_cast<std::size_t>((y * width + x) * 3 + c)];
  }
};

/// Diverging white-centered map: 0 → (255,255,255) exactly, positive values
/// interpolate linearly to (255,0,0), negative to (0,0,255). `upscale`
/// repeats each cell as an upscale×upscale block.
RgbImage render(const Heatmap& h, Index upscale = 1);

void writePpm(const RgbImage& img, const std::string& path);
RgbImage readPpm(const std::string& path);

/// CSV grid: one row per line, values separated by commas, %.17g precision
/// (bit-exact round-trip).
void writeCsv(const Tensor& grid, const std::string& path);
Tensor readCsv(const std::string& path);

/// (3,H,W) tensor from an RGB image under the model's preprocess: sample v
/// in channel c becomes scale·v − channelMeans[c].
Tensor ppmToTensor(const RgbImage& img, const Preprocess& pre);

}  // namespace nnlrp
