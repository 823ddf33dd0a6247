#pragma once

#include <complex>
#include <vector>

#include "biceit/errors.hpp"

namespace biceit {

// LU factorization of a complex banded matrix with partial pivoting,
// LAPACK-style band storage with kl extra rows for pivoting fill. The
// harmonic-balance systems solved here have bandwidth 3 and dimensions in
// the tens to low thousands, where a dense solve would be pure waste.
class BandedLU {
 public:
  using cplx = std::complex<double>;

  BandedLU(int dim, int kl, int ku);

  // Accumulate entries before factor(). (i, j) must lie inside the band.
  void add(int i, int j, cplx value);
  cplx& at(int i, int j);

  void factor();  // throws SolverError on an exactly singular matrix
  void solve(std::vector<cplx>& rhs) const;

  int dim() const { return dim_; }

 private:
  int row_index(int i, int j) const { return kl_ + ku_ + i - j; }

  int dim_, kl_, ku_, ldab_;
  bool factored_ = false;
  std::vector<cplx> ab_;   // ldab_ x dim_, column major
  std::vector<int> ipiv_;
};

}  // namespace biceit
