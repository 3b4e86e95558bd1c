#pragma once

#include <Eigen/Dense>
#include <string_view>

namespace nnfn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Thin SVD A = U * diag(s) * Vt, singular values non-increasing.
struct ThinSvd {
  Matrix u;
  Vector s;
  Matrix vt;
};

enum class SvdBackend { gesdd, gesvd, eigen };

std::string_view svd_backend_name(SvdBackend b);

/// Backend used by thin_svd. Chosen once per process: the fastest LAPACK
/// driver whose factors reconstruct a set of probe matrices, unless
/// NNFN_SVD=gesdd|gesvd|eigen forces one. Some optimized BLAS builds return
/// correct singular values with corrupted vectors from gesdd.
SvdBackend svd_backend();

/// Thin SVD using `backend`, with a QR-iteration retry when divide and
/// conquer fails to converge. Throws NumericalError naming the matrix shape and
/// conditioning on failure or non-finite input.
ThinSvd thin_svd(const Matrix& a, SvdBackend backend);
ThinSvd thin_svd(const Matrix& a);

/// Sum of singular values.
double nuclear_norm(const Matrix& a);

/// Restricts the BLAS backend to its calling thread. Idempotent.
void pin_blas_to_single_thread();

}  // namespace nnfn
