#include "asce/version.hpp"

namespace asce {

const char* version() {
#ifdef ASCE_VERSION
    return ASCE_VERSION;
#else
    return "unknown";
#endif
}

}  // namespace asce
