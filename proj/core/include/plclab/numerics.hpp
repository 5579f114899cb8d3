// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <vector>

#include "plclab/matrix.hpp"

namespace plclab {

/// Tolerances shared by the numerical kernels. All values are relative to a
/// matrix scale (Frobenius norm or mean diagonal) unless noted.
struct NumericTolerances {
  double hermitian = 1e-10;     ///< ||A - A^H||_F <= hermitian * ||A||_F
  double jacobi = 1e-12;        ///< stop when off-diagonal mass < jacobi * ||A||_F
  double pivot_floor = 1e-12;   ///< Cholesky pivot floor, times trace(R)/n
  double loading = 1e-10;       ///< diagonal load on a failed pivot, times trace(R)/n
  double psd_clamp = 1e-12;     ///< eigenvalues in [-psd_clamp*max|lambda|, 0) are set to 0
};

/// Unitary DFT (1/sqrt(N) in both directions). Radix-2 when N is a power of
/// two, direct O(N^2) sum otherwise.
std::vector<cplx> dft(std::span<const cplx> x, bool inverse = false);

bool is_power_of_two(std::size_t n) noexcept;

bool is_hermitian(const ComplexMatrix& a, double rel_tol);

struct CholeskyResult {
  ComplexMatrix lower;  ///< L with L L^H == R (+ loading on the diagonal)
  bool loaded = false;
  double loading = 0.0;  ///< absolute value added to the diagonal
};

/// Cholesky factorization of a Hermitian PSD matrix. A pivot below
/// pivot_floor * trace/n triggers a single retry with diagonal loading.
CholeskyResult cholesky(const ComplexMatrix& r, const NumericTolerances& tol = {});

struct EigenResult {
  std::vector<double> values;  ///< sorted descending
  ComplexMatrix vectors;       ///< column i pairs with values[i]; empty if not requested
  int sweeps = 0;
};

struct EigenOptions {
  bool vectors = true;
  bool clamp_psd = false;
};

/// Cyclic Jacobi eigensolver for Hermitian matrices.
EigenResult eig_hermitian(const ComplexMatrix& a, const NumericTolerances& tol = {},
                          EigenOptions options = {});

/// ln det(A) for Hermitian positive definite A, via the Cholesky diagonal.
/// Throws "singular matrix" when a pivot vanishes; no loading is applied.
double logdet_psd(const ComplexMatrix& a, const NumericTolerances& tol = {});

/// Solves L x = b for lower-triangular L (forward substitution).
std::vector<cplx> forward_substitute(const ComplexMatrix& lower, std::span<const cplx> b);

/// Solves L X = B column by column.
ComplexMatrix solve_lower(const ComplexMatrix& lower, const ComplexMatrix& b);

/// Inverse of a lower-triangular matrix. Only used to cross-check the solves.
ComplexMatrix invert_lower(const ComplexMatrix& lower);

}  // namespace plclab
