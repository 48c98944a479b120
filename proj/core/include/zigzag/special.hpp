#pragma once

#include "zigzag/params.hpp"

namespace zigzag {

/// ln(n!) from a cached table (std::lgamma beyond the table).
double log_factorial(int n);

/// Associated Laguerre polynomial L_r^(l)(x) for complex argument, by the
/// three-term recurrence (r+1) L_{r+1} = (2r+1+l-x) L_r - (r+l) L_{r-1}.
Complex laguerre(int r, int l, Complex x);

}  // namespace zigzag
