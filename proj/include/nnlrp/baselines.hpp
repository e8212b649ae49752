#pragma once

#include "nnlrp/graph.hpp"
#include "nnlrp/tensor.hpp"

namespace nnlrp {

struct OcclusionConfig {
  Index patchH = 1;
  Index patchW = 1;
  Index stride = 1;
  double fill = 0.0;
};

/// H×W grid where each position holds f_target(x) − f_target(x occluded),
/// averaged over every patch covering that pixel. Patches blank all
/// channels; positions no patch reaches stay 0.
Tensor occlusionMap(const NetworkGraph& net, const Tensor& image,
                    Index targetIndex, const OcclusionConfig& cfg);

/// H×W grid of channel-summed |∂f_target/∂x|.
Tensor sensitivityMap(const NetworkGraph& net, const Tensor& image,
                      Index targetIndex);

}  // namespace nnlrp
