#pragma once

#include <span>
#include <vector>

namespace lime {

/// Tridiagonal system in band storage. Row i reads
/// lower[i] x[i-1] + diag[i] x[i] + upper[i] x[i+1] = rhs[i];
/// lower[0] and upper[n-1] are ignored.
struct TridiagonalSystem {
  std::vector<double> lower;
  std::vector<double> diag;
  std::vector<double> upper;
  std::vector<double> rhs;

  explicit TridiagonalSystem(std::size_t n = 0) : lower(n, 0.0), diag(n, 0.0), upper(n, 0.0), rhs(n, 0.0) {}
  std::size_t size() const noexcept { return diag.size(); }
};

/// Thomas elimination without pivoting. Intended for diagonally dominant
/// systems (M-matrices in particular, where it preserves sign structure).
/// Throws SolverError on a vanishing pivot.
std::vector<double> solve_tridiagonal(const TridiagonalSystem& system);

/// y = A x
std::vector<double> multiply(const TridiagonalSystem& system, std::span<const double> x);

}  // namespace lime
