#include "lime/tridiagonal.hpp"

#include <cmath>

#include "lime/error.hpp"

namespace lime {

std::vector<double> solve_tridiagonal(const TridiagonalSystem& sys) {
  const std::size_t n = sys.size();
  std::vector<double> c(n, 0.0);
  std::vector<double> d(n, 0.0);
  double pivot = sys.diag[0];
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) pivot = sys.diag[i] - sys.lower[i] * c[i - 1];
    if (pivot == 0.0 || !std::isfinite(pivot)) {
      throw SolverError("tridiagonal solve: zero pivot at row " + std::to_string(i), INFINITY, 0);
    }
    c[i] = i + 1 < n ? sys.upper[i] / pivot : 0.0;
    d[i] = (sys.rhs[i] - (i > 0 ? sys.lower[i] * d[i - 1] : 0.0)) / pivot;
  }
  std::vector<double> x(n);
  x[n - 1] = d[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) x[i] = d[i] - c[i] * x[i + 1];
  return x;
}

std::vector<double> multiply(const TridiagonalSystem& sys, std::span<const double> x) {
  const std::size_t n = sys.size();
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    double v = sys.diag[i] * x[i];
    if (i > 0) v += sys.lower[i] * x[i - 1];
    if (i + 1 < n) v += sys.upper[i] * x[i + 1];
    y[i] = v;
  }
  return y;
}

}  // namespace lime
