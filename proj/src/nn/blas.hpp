#pragma once

namespace inpaint_lab::nn {

// Row-major C = alpha * op(A) * op(B) + beta * C, dispatched to OpenBLAS.
// op(A) is M x K, op(B) is K x N.
template <class T>
void gemm(bool trans_a, bool trans_b, int m, int n, int k, T alpha, const T* a, int lda,
          const T* b, int ldb, T beta, T* c, int ldc);

// Pins OpenBLAS to one thread so results are bit-reproducible, and keeps
// freed large buffers in the heap instead of returning them to the kernel
// (activation buffers are reallocated every layer).
void init_compute_runtime();

}  // namespace inpaint_lab::nn
