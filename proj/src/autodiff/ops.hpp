#pragma once

#include <vector>

#include "autodiff/tape.hpp"
#include "autodiff/tensor.hpp"

namespace racelab {

// Differentiable tensor operations. A result is attached to a tape iff at
// least one operand is; attached operands must share the same tape. Detached
// operands act as constants and receive no gradient.

// a[m,k] * b[k,n] -> [m,n]
Tensor matmul(const Tensor& a, const Tensor& b);

// Valid (unpadded) convolution. x is [c,h,w] or batched [b,c,h,w],
// kernels [o,c,kh,kw]; output spatial dims are floor((h-kh)/stride)+1.
Tensor conv2d(const Tensor& x, const Tensor& kernels, int stride);

// Exact adjoint of conv2d with the same kernels and stride. Output spatial
// size is the minimal preimage (oh-1)*stride+kh; when conv2d's shape map was
// exact (no floor loss) this restores the original input dims.
Tensor conv2d_transpose(const Tensor& y, const Tensor& kernels, int stride);

// Elementwise unaries.
Tensor tanh(const Tensor& x);
Tensor relu(const Tensor& x);      // gradient at 0 is 0
Tensor softplus(const Tensor& x);  // stable: max(x,0) + log1p(exp(-|x|))
Tensor exp(const Tensor& x);
Tensor log(const Tensor& x);  // DomainError on entries <= 0
Tensor sqrt(const Tensor& x);  // DomainError on entries < 0
Tensor sigmoid(const Tensor& x);
Tensor neg(const Tensor& x);
Tensor square(const Tensor& x);

// Elementwise binaries; shapes must match, or one operand may be a
// single-element tensor (scalar<->tensor broadcast only).
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor div(const Tensor& a, const Tensor& b);  // DomainError on zero divisor

// scale * x + shift with compile-time-constant coefficients.
Tensor affine(const Tensor& x, double scale, double shift);

// Full reductions to a [1] tensor.
Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);

// Row-wise bias: x[m,n] + v[n] broadcast over rows (batched linear layers).
Tensor add_rowvec(const Tensor& x, const Tensor& v);

// Column concatenation / slicing of rank-2 tensors.
Tensor concat_cols(const std::vector<Tensor>& parts);
Tensor slice_cols(const Tensor& x, int col0, int col1);

// Same data, new shape (size must match).
Tensor reshape(const Tensor& x, std::vector<int> shape);

}  // namespace racelab
