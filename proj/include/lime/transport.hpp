#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "lime/constitutive.hpp"
#include "lime/mesh.hpp"

namespace lime {

using NodalField = std::vector<double>;

enum class KernelProfile { Triangular, Bump };

/// Nonnegative, even, unit-mass kernel supported on [-radius, radius].
///   Triangular: (1/eps) max(0, 1 - |y|/eps)
///   Bump:       (c/eps) exp(-1 / (1 - (y/eps)^2)), c normalizing to unit mass
class MollifierKernel {
 public:
  MollifierKernel() : MollifierKernel(KernelProfile::Triangular, 0.05) {}
  /// Throws ConfigError unless radius is finite and positive.
  MollifierKernel(KernelProfile profile, double radius);

  KernelProfile profile() const noexcept { return profile_; }
  double radius() const noexcept { return radius_; }

  double density(double y) const;
  /// Integral of the density over (-inf, z].
  double cdf(double z) const;
  double sup() const noexcept;

  bool operator==(const MollifierKernel& other) const {
    return profile_ == other.profile_ && radius_ == other.radius_;
  }

 private:
  KernelProfile profile_;
  double radius_;
};

/// weights[i] lists (cell, integral of sigma(x_i - y) over that cell) for every cell
/// meeting the kernel support around node i. Integration is over the grid only,
/// so rows near the boundary carry less than unit mass.
struct KernelWeights {
  std::size_t node_count = 0;
  std::size_t cell_count = 0;
  std::vector<std::vector<std::pair<std::size_t, double>>> rows;
};

KernelWeights build_kernel_weights(const MollifierKernel& kernel, const Grid1D& grid);

/// Darcy flux per cell, q_c = -k(mean precipitate) (f(s_{c+1}) - f(s_c)) / width_c.
struct FaceFlux {
  std::vector<double> values;
};

FaceFlux compute_water_flux(std::span<const double> saturation, std::span<const double> precipitate,
                            const WettingCurve& curve, const PermeabilityLaw& law, const Grid1D& grid);

/// Nodal transport velocity v_i = (1/rho_h) sum_c w_ic q_c.
NodalField mollified_velocity(const FaceFlux& flux, const KernelWeights& weights, double rho_h);

/// Componentwise magnitude clamp to R, sign kept.
NodalField truncate_velocity(std::span<const double> velocity, double R);

/// Sum over cells of the squared discrete gradient times the width.
double gradient_norm_sq(std::span<const double> field, const Grid1D& grid);

/// C in sup|v| <= C (1 + ||grad s||_2):  k_sharp f_sharp sup(sigma) sqrt(L) / rho_h.
double velocity_bound_constant(const MollifierKernel& kernel, const PermeabilityLaw& law,
                               const WettingCurve& curve, double rho_h, double length);

}  // namespace lime
