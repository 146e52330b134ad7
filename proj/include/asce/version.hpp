#pragma once

namespace asce {

// Library version string (set by the build).
const char* version();

}  // namespace asce
