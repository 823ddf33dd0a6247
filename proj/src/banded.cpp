#include "biceit/banded.hpp"

#include <cmath>
#include <string>

namespace biceit {

BandedLU::BandedLU(int dim, int kl, int ku)
    : dim_(dim), kl_(kl), ku_(ku), ldab_(2 * kl + ku + 1) {
  if (dim <= 0 || kl < 0 || ku < 0)
    throw ValidationError("BandedLU: dim must be positive, kl/ku >= 0");
  ab_.assign(static_cast<size_t>(ldab_) * dim_, cplx(0.0));
  ipiv_.assign(dim_, 0);
}

void BandedLU::add(int i, int j, cplx value) { at(i, j) += value; }

BandedLU::cplx& BandedLU::at(int i, int j) {
  if (i < 0 || j < 0 || i >= dim_ || j >= dim_ || i - j > kl_ || j - i > ku_)
    throw ValidationError("BandedLU: entry (" + std::to_string(i) + ", " +
                          std::to_string(j) + ") outside the band");
  return ab_[static_cast<size_t>(j) * ldab_ + row_index(i, j)];
}

// Unblocked band factorization, following LAPACK's gbtf2.
void BandedLU::factor() {
  const int n = dim_;
  auto ab = [&](int r, int c) -> cplx& {
    return ab_[static_cast<size_t>(c) * ldab_ + r];
  };

  int ju = 0;
  for (int j = 0; j < n; ++j) {
    const int km = std::min(kl_, n - 1 - j);  // subdiagonal entries in col j

    int jp = 0;
    double best = std::abs(ab(kl_ + ku_, j));
    for (int p = 1; p <= km; ++p) {
      const double mag = std::abs(ab(kl_ + ku_ + p, j));
      if (mag > best) {
        best = mag;
        jp = p;
      }
    }
    ipiv_[j] = j + jp;

    if (best == 0.0)
      throw SolverError("banded LU: matrix is singular at column " +
                        std::to_string(j));

    ju = std::max(ju, std::min(j + ku_ + jp, n - 1));

    if (jp != 0) {
      for (int c = j; c <= ju; ++c)
        std::swap(ab(kl_ + ku_ + j - c, c), ab(kl_ + ku_ + j + jp - c, c));
    }

    const cplx pivot = ab(kl_ + ku_, j);
    for (int p = 1; p <= km; ++p) ab(kl_ + ku_ + p, j) /= pivot;

    for (int c = j + 1; c <= ju; ++c) {
      const cplx top = ab(kl_ + ku_ + j - c, c);
      if (top != cplx(0.0)) {
        for (int p = 1; p <= km; ++p)
          ab(kl_ + ku_ + j + p - c, c) -= ab(kl_ + ku_ + p, j) * top;
      }
    }
  }
  factored_ = true;
}

void BandedLU::solve(std::vector<cplx>& rhs) const {
  if (!factored_) throw SolverError("banded LU: solve before factor");
  if (static_cast<int>(rhs.size()) != dim_)
    throw ValidationError("banded LU: rhs size mismatch");

  const int n = dim_;
  auto ab = [&](int r, int c) -> const cplx& {
    return ab_[static_cast<size_t>(c) * ldab_ + r];
  };

  // L is unit lower triangular with at most kl subdiagonals, interleaved
  // with the row swaps recorded in ipiv_.
  for (int j = 0; j < n - 1; ++j) {
    const int km = std::min(kl_, n - 1 - j);
    const int p = ipiv_[j];
    if (p != j) std::swap(rhs[p], rhs[j]);
    for (int i = 1; i <= km; ++i) rhs[j + i] -= ab(kl_ + ku_ + i, j) * rhs[j];
  }

  // U has bandwidth ku + kl after pivoting.
  for (int j = n - 1; j >= 0; --j) {
    rhs[j] /= ab(kl_ + ku_, j);
    const int first = std::max(0, j - ku_ - kl_);
    for (int i = first; i < j; ++i)
      rhs[i] -= ab(kl_ + ku_ + i - j, j) * rhs[j];
  }
}

}  // namespace biceit
