#pragma once

#include <cstddef>

namespace fmpinn {

/// Array sin and cos in one pass. Vectorizable Cody-Waite reduction with
/// fdlibm minimax kernels; accurate to a couple of ulp for |x| <= 1e6 and
/// falling back to libm beyond that. Deterministic: one fixed code path per
/// block regardless of threading.
void sincos_array(const double* x, double* s, double* c, std::ptrdiff_t n);

/// tanh over an array (plain libm loop; only the trig path is hot).
void tanh_array(const double* x, double* t, std::ptrdiff_t n);

}  // namespace fmpinn
