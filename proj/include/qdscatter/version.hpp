#pragma once

#include <string>

#ifndef QDSCATTER_REVISION
#define QDSCATTER_REVISION "unknown"
#endif

namespace qdscatter {

inline std::string version_string() { return "0.1.0"; }
inline std::string build_revision() { return QDSCATTER_REVISION; }

}  // namespace qdscatter
