#include "lime/transport.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>

#include "lime/error.hpp"

namespace lime {

namespace {

double bump_profile(double u) {
  if (std::abs(u) >= 1.0) return 0.0;
  return std::exp(-1.0 / (1.0 - u * u));
}

double bump_integral(double a, double b) {
  using boost::math::quadrature::gauss_kronrod;
  return gauss_kronrod<double, 61>::integrate(bump_profile, a, b, 6, 1e-14);
}

double bump_mass() {
  static const double mass = bump_integral(-1.0, 1.0);
  return mass;
}

void check_size(std::span<const double> f, std::size_t n, const char* what) {
  if (f.size() != n) {
    throw ConfigError(std::string(what) + ": expected " + std::to_string(n) + " nodal values, got " +
                      std::to_string(f.size()));
  }
}

}  // namespace

MollifierKernel::MollifierKernel(KernelProfile profile, double radius) : profile_(profile), radius_(radius) {
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw ConfigError("kernel.radius: must be finite and positive");
  }
}

double MollifierKernel::density(double y) const {
  const double u = y / radius_;
  if (std::abs(u) >= 1.0) return 0.0;
  switch (profile_) {
    case KernelProfile::Triangular:
      return (1.0 - std::abs(u)) / radius_;
    case KernelProfile::Bump:
      return bump_profile(u) / (bump_mass() * radius_);
  }
  return 0.0;
}

double MollifierKernel::cdf(double z) const {
  const double u = z / radius_;
  if (u <= -1.0) return 0.0;
  if (u >= 1.0) return 1.0;
  switch (profile_) {
    case KernelProfile::Triangular:
      return u <= 0.0 ? 0.5 * (1.0 + u) * (1.0 + u) : 1.0 - 0.5 * (1.0 - u) * (1.0 - u);
    case KernelProfile::Bump:
      // Integrate from the nearer end of the support to keep the result exact at 1/2.
      if (u <= 0.0) return bump_integral(-1.0, u) / bump_mass();
      return 1.0 - bump_integral(u, 1.0) / bump_mass();
  }
  return 0.0;
}

double MollifierKernel::sup() const noexcept {
  switch (profile_) {
    case KernelProfile::Triangular:
      return 1.0 / radius_;
    case KernelProfile::Bump:
      return std::exp(-1.0) / (bump_mass() * radius_);
  }
  return 0.0;
}

KernelWeights build_kernel_weights(const MollifierKernel& kernel, const Grid1D& grid) {
  KernelWeights w;
  w.node_count = grid.node_count();
  w.cell_count = grid.cell_count();
  w.rows.resize(w.node_count);
  const auto x = grid.nodes();
  const double eps = kernel.radius();
  for (std::size_t i = 0; i < w.node_count; ++i) {
    // Cells [x_c, x_{c+1}] intersecting (x_i - eps, x_i + eps).
    auto first = std::upper_bound(x.begin(), x.end(), x[i] - eps);
    std::size_t c = first == x.begin() ? 0 : static_cast<std::size_t>(first - x.begin()) - 1;
    for (; c < w.cell_count && x[c] < x[i] + eps; ++c) {
      const double weight = kernel.cdf(x[i] - x[c]) - kernel.cdf(x[i] - x[c + 1]);
      if (weight > 0.0) w.rows[i].emplace_back(c, weight);
    }
  }
  return w;
}

FaceFlux compute_water_flux(std::span<const double> s, std::span<const double> cP, const WettingCurve& curve,
                            const PermeabilityLaw& law, const Grid1D& grid) {
  check_size(s, grid.node_count(), "water flux saturation");
  check_size(cP, grid.node_count(), "water flux precipitate");
  FaceFlux q;
  q.values.resize(grid.cell_count());
  for (std::size_t c = 0; c < grid.cell_count(); ++c) {
    const double k = law(0.5 * (cP[c] + cP[c + 1]));
    q.values[c] = -k * (curve(s[c + 1]) - curve(s[c])) / grid.width(c);
  }
  return q;
}

NodalField mollified_velocity(const FaceFlux& q, const KernelWeights& weights, double rho_h) {
  if (q.values.size() != weights.cell_count) {
    throw ConfigError("mollified velocity: kernel weights were built for a different grid");
  }
  NodalField v(weights.node_count, 0.0);
  for (std::size_t i = 0; i < weights.node_count; ++i) {
    double acc = 0.0;
    for (const auto& [c, w] : weights.rows[i]) acc += w * q.values[c];
    v[i] = acc / rho_h;
  }
  return v;
}

NodalField truncate_velocity(std::span<const double> v, double R) {
  NodalField out(v.size());
  std::transform(v.begin(), v.end(), out.begin(), [R](double x) { return std::clamp(x, -R, R); });
  return out;
}

double gradient_norm_sq(std::span<const double> f, const Grid1D& grid) {
  check_size(f, grid.node_count(), "gradient");
  double acc = 0.0;
  for (std::size_t c = 0; c < grid.cell_count(); ++c) {
    const double g = (f[c + 1] - f[c]) / grid.width(c);
    acc += g * g * grid.width(c);
  }
  return acc;
}

double velocity_bound_constant(const MollifierKernel& kernel, const PermeabilityLaw& law,
                               const WettingCurve& curve, double rho_h, double length) {
  return law.k_sharp() * curve.f_sharp() * kernel.sup() * std::sqrt(length) / rho_h;
}

}  // namespace lime
