#pragma once

#ifndef NORMREG_VERSION
#define NORMREG_VERSION "0.1.0"
#endif

namespace normreg {

inline constexpr const char* kVersion = NORMREG_VERSION;

}  // namespace normreg
