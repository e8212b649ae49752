#pragma once

namespace nnlrp {

inline constexpr const char* kEngineVersion = "0.1.0";

}  // namespace nnlrp
