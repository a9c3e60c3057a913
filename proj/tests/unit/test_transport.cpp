#include <gtest/gtest.h>

#include <cmath>

#include "gen.hpp"
#include "lime/error.hpp"
#include "lime/transport.hpp"

using namespace lime;

namespace {

// Composite midpoint rule for the mass of sigma(x - y) over y in [a, b].
double dense_mass(const MollifierKernel& k, double x, double a, double b, int pieces = 200000) {
  const double h = (b - a) / pieces;
  double acc = 0.0;
  for (int i = 0; i < pieces; ++i) acc += k.density(x - (a + (i + 0.5) * h));
  return acc * h;
}

}  // namespace

TEST(Flux, ConstantSaturationGivesZero) {
  const auto g = build_graded_grid(5, 1.0, 1.2);
  const auto q = compute_water_flux(NodalField(6, 0.4), NodalField(6, 0.3), WettingCurve{},
                                    PermeabilityLaw::constant(2e-4), g);
  for (double v : q.values) EXPECT_EQ(v, 0.0);
}

TEST(Flux, LinearProfile) {
  const auto g = build_graded_grid(4, 1.0, 1.0);
  const NodalField s(g.nodes().begin(), g.nodes().end());
  const auto q = compute_water_flux(s, NodalField(5, 0.0), WettingCurve{}, PermeabilityLaw::constant(2e-4), g);
  for (double v : q.values) EXPECT_NEAR(v, -2e-4, 1e-18);
}

TEST(Flux, TabulatedNonuniformCellByCell) {
  const Grid1D g({0.0, 0.3, 1.0});
  const auto f = WettingCurve::tabulated({0.0, 0.4, 1.0}, {0.0, 0.2, 1.4});
  const auto law = PermeabilityLaw::exp_decay(1.0, 2.0, 0.1);
  const NodalField s{0.1, 0.6, 0.9}, cP{0.0, 0.5, 1.5};
  const auto q = compute_water_flux(s, cP, f, law, g);
  // f(0.1) = 0.05, f(0.6) = 0.2 + 0.2*2 = 0.6, f(0.9) = 0.2 + 0.5*2 = 1.2
  const double k0 = 0.1 + 0.9 * std::exp(-2.0 * 0.25);
  const double k1 = 0.1 + 0.9 * std::exp(-2.0 * 1.0);
  ASSERT_EQ(q.values.size(), 2u);
  EXPECT_NEAR(q.values[0], -k0 * (0.6 - 0.05) / 0.3, 1e-15);
  EXPECT_NEAR(q.values[1], -k1 * (1.2 - 0.6) / 0.7, 1e-15);
}

TEST(Flux, SizeMismatchThrows) {
  const auto g = build_graded_grid(3, 1.0, 1.0);
  EXPECT_THROW(compute_water_flux(NodalField(3, 0.0), NodalField(4, 0.0), WettingCurve{}, PermeabilityLaw{}, g),
               ConfigError);
}

TEST(Kernel, UnitMassAndSupport) {
  for (auto profile : {KernelProfile::Triangular, KernelProfile::Bump}) {
    const MollifierKernel k(profile, 0.2);
    EXPECT_EQ(k.cdf(-0.2), 0.0);
    EXPECT_NEAR(k.cdf(0.2), 1.0, 1e-12);
    EXPECT_NEAR(k.cdf(0.0), 0.5, 1e-12);
    EXPECT_EQ(k.density(0.21), 0.0);
    EXPECT_GE(k.density(0.1), 0.0);
    EXPECT_NEAR(dense_mass(k, 0.0, -0.2, 0.2), 1.0, 1e-9);
  }
  EXPECT_THROW(MollifierKernel(KernelProfile::Triangular, 0.0), ConfigError);
}

TEST(Kernel, InteriorRowsSumToOne) {
  const auto g = build_graded_grid(40, 1.0, 1.03);
  for (auto profile : {KernelProfile::Triangular, KernelProfile::Bump}) {
    const MollifierKernel k(profile, 0.05);
    const auto w = build_kernel_weights(k, g);
    for (std::size_t i = 0; i < g.node_count(); ++i) {
      double sum = 0.0;
      for (const auto& [c, wt] : w.rows[i]) sum += wt;
      if (g.node(i) >= 0.05 && g.node(i) <= 0.95) EXPECT_NEAR(sum, 1.0, 1e-12);
      else EXPECT_LE(sum, 1.0 + 1e-12);
    }
  }
}

TEST(Velocity, ZeroAndConstantFlux) {
  const auto g = build_graded_grid(20, 1.0, 1.0);
  const MollifierKernel k(KernelProfile::Triangular, 0.1);
  const auto w = build_kernel_weights(k, g);
  const auto v0 = mollified_velocity(FaceFlux{std::vector<double>(20, 0.0)}, w, 1.0);
  for (double v : v0) EXPECT_EQ(v, 0.0);
  const auto v = mollified_velocity(FaceFlux{std::vector<double>(20, 0.3)}, w, 1.0);
  EXPECT_NEAR(v[10], 0.3, 1e-15);
  // half of the kernel lies outside the domain at x = 0
  for (auto profile : {KernelProfile::Triangular, KernelProfile::Bump}) {
    const MollifierKernel kk(profile, 0.1);
    const auto vb = mollified_velocity(FaceFlux{std::vector<double>(20, 0.3)}, build_kernel_weights(kk, g), 1.0);
    EXPECT_NEAR(vb[0], 0.3 * dense_mass(kk, 0.0, 0.0, 1.0), 1e-10);
    EXPECT_NEAR(vb[0], 0.15, 1e-10);
  }
}

TEST(Velocity, ScalesWithInverseDensity) {
  const auto g = build_graded_grid(10, 1.0, 1.0);
  const auto w = build_kernel_weights(MollifierKernel(KernelProfile::Bump, 0.2), g);
  const FaceFlux q{std::vector<double>(10, 1.0)};
  const auto a = mollified_velocity(q, w, 1.0);
  const auto b = mollified_velocity(q, w, 4.0);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(b[i], a[i] / 4.0, 1e-16);
}

TEST(Velocity, SuperpositionHolds) {
  gen::Rng rng(31);
  for (int trial = 0; trial < 50; ++trial) {
    const auto cells = static_cast<std::size_t>(rng.integer(1, 30));
    const auto g = build_graded_grid(cells, rng.uniform(0.5, 2), rng.uniform(0.8, 1.2));
    const MollifierKernel k(rng.coin() ? KernelProfile::Bump : KernelProfile::Triangular, rng.uniform(0.01, 0.5));
    const auto w = build_kernel_weights(k, g);
    const FaceFlux q1{rng.vec(cells, -1, 1)}, q2{rng.vec(cells, -1, 1)};
    const double a = rng.uniform(-3, 3), b = rng.uniform(-3, 3);
    FaceFlux mix{std::vector<double>(cells)};
    for (std::size_t c = 0; c < cells; ++c) mix.values[c] = a * q1.values[c] + b * q2.values[c];
    const auto v1 = mollified_velocity(q1, w, 1.0), v2 = mollified_velocity(q2, w, 1.0);
    const auto vm = mollified_velocity(mix, w, 1.0);
    for (std::size_t i = 0; i < vm.size(); ++i) EXPECT_NEAR(vm[i], a * v1[i] + b * v2[i], 1e-13);
  }
}

TEST(Velocity, TruncationClampsMagnitude) {
  const auto v = truncate_velocity(std::vector<double>{0.3, -4.0, 2.0, 0.0, -0.5}, 1.0);
  EXPECT_EQ(v, (std::vector<double>{0.3, -1.0, 1.0, 0.0, -0.5}));
  gen::Rng rng(2);
  const auto big = rng.vec(100, -10, 10);
  for (double x : truncate_velocity(big, 2.5)) EXPECT_LE(std::abs(x), 2.5);
}

TEST(Velocity, RespectsGradientBound) {
  gen::Rng rng(41);
  for (int trial = 0; trial < 100; ++trial) {
    const auto cells = static_cast<std::size_t>(rng.integer(2, 40));
    const auto g = build_graded_grid(cells, 1.0, rng.uniform(0.9, 1.1));
    const MollifierKernel k(rng.coin() ? KernelProfile::Bump : KernelProfile::Triangular, rng.uniform(0.02, 0.3));
    const auto law = PermeabilityLaw::exp_decay(0.5, 1.0, 0.05);
    const auto f = WettingCurve::tabulated({0.0, 0.5, 1.0}, {0.0, 0.3, 1.5});
    const auto s = rng.vec(cells + 1, 0, 1), cP = rng.vec(cells + 1, 0, 2);
    const auto v = mollified_velocity(compute_water_flux(s, cP, f, law, g), build_kernel_weights(k, g), 2.0);
    const double C = velocity_bound_constant(k, law, f, 2.0, 1.0);
    double sup = 0.0;
    for (double x : v) sup = std::max(sup, std::abs(x));
    EXPECT_LE(sup, C * (1.0 + std::sqrt(gradient_norm_sq(s, g))));
  }
}

TEST(Gradient, LinearProfileEnergy) {
  const auto g = build_graded_grid(7, 2.0, 1.3);
  const NodalField s(g.nodes().begin(), g.nodes().end());
  EXPECT_NEAR(gradient_norm_sq(s, g), 2.0, 1e-14);
}
