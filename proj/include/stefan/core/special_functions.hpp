#pragma once

#include <cmath>

namespace stefan {

// Error functions backed by the C library, which is accurate to a few ulp
// over the whole real line (well inside the 1e-12 we need).
inline double erf(double x) noexcept { return std::erf(x); }
inline double erfc(double x) noexcept { return std::erfc(x); }

}  // namespace stefan
