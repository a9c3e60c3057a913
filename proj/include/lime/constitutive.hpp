#pragma once

// Pointwise material laws of the lime-water model: wetting curve, permeability,
// truncation, reaction kinetics and stoichiometry. Everything here is a pure
// function of its arguments.

#include <string>
#include <variant>
#include <vector>

namespace lime {

struct LinearWetting {
  double offset = 0.0;
  double slope = 1.0;
  bool operator==(const LinearWetting&) const = default;
};

/// Piecewise-linear curve through (saturation, pressure) breakpoints covering
/// [0, 1]. Pressures must be strictly increasing.
struct TabulatedWetting {
  std::vector<double> saturation;
  std::vector<double> pressure;
  bool operator==(const TabulatedWetting&) const = default;
};

/// Capillary pressure as a function of saturation, p = f(s), together with its
/// linear continuation outside [0, 1].
class WettingCurve {
 public:
  using Form = std::variant<LinearWetting, TabulatedWetting>;

  /// Identity curve f(s) = s.
  WettingCurve() : WettingCurve(linear(0.0, 1.0)) {}

  static WettingCurve linear(double offset, double slope);
  /// Throws ConfigError if the breakpoints do not describe a strictly
  /// increasing curve on [0, 1].
  static WettingCurve tabulated(std::vector<double> saturation, std::vector<double> pressure);

  /// Extended curve: f on [0,1], tangent continuation with f'(0) below and f'(1) above.
  double operator()(double s) const;
  /// Derivative of the extended curve. At interior breakpoints the slope of
  /// the segment to the right is returned.
  double derivative(double s) const;

  double f_flat() const noexcept { return f_flat_; }
  double f_sharp() const noexcept { return f_sharp_; }
  const Form& form() const noexcept { return form_; }

  bool operator==(const WettingCurve& other) const { return form_ == other.form_; }

 private:
  explicit WettingCurve(Form form, double f_flat, double f_sharp)
      : form_(std::move(form)), f_flat_(f_flat), f_sharp_(f_sharp) {}

  Form form_;
  double f_flat_;
  double f_sharp_;
};

double eval_wetting_extended(const WettingCurve& curve, double s);

struct ConstantPermeability {
  double k0 = 2e-4;
  bool operator==(const ConstantPermeability&) const = default;
};

/// k(c) = floor + (k0 - floor) exp(-rate c): smooth, nonincreasing, in (floor, k0].
struct ExpDecayPermeability {
  double k0 = 1.0;
  double rate = 1.0;
  double floor = 0.1;
  bool operator==(const ExpDecayPermeability&) const = default;
};

/// Permeability of the solid as a function of deposited precipitate.
class PermeabilityLaw {
 public:
  using Form = std::variant<ConstantPermeability, ExpDecayPermeability>;

  PermeabilityLaw() : PermeabilityLaw(constant(2e-4)) {}

  static PermeabilityLaw constant(double k0);
  static PermeabilityLaw exp_decay(double k0, double rate, double floor);

  /// Throws std::domain_error for negative precipitate.
  double operator()(double precipitate) const;

  double k_flat() const noexcept;
  double k_sharp() const noexcept;
  const Form& form() const noexcept { return form_; }

  bool operator==(const PermeabilityLaw& other) const { return form_ == other.form_; }

 private:
  explicit PermeabilityLaw(Form form) : form_(std::move(form)) {}
  Form form_;
};

double eval_permeability(const PermeabilityLaw& law, double precipitate);

/// Physical constants. Boundary permeabilities live with the boundary
/// schedule since they differ per boundary point.
struct PhysParams {
  double rho_w = 1.0;    ///< water density
  double rho_h = 1.0;    ///< Ca(OH)2 density
  double m_w = 1.0;      ///< molar mass H2O
  double m_h = 1.0;      ///< molar mass Ca(OH)2
  double m_p = 1.0;      ///< molar mass CaCO3
  double m_g = 1.0;      ///< molar mass CO2
  double gamma = 1e-2;   ///< reaction speed
  double kappa = 1e-3;   ///< Ca(OH)2 diffusivity
  double s_flat = 0.0;   ///< lower saturation bound
  double h_sharp = 1.0;  ///< upper bound of exterior/initial concentration
  double truncation = 10.0;  ///< cut-off level R

  bool operator==(const PhysParams&) const = default;

  /// Problems with field paths under `prefix`. A zero lower saturation bound
  /// is accepted here; callers flag it as degenerate.
  std::vector<std::string> validate(const std::string& prefix = "physics") const;
};

/// max(1, 10 max(h_sharp, 1)).
double default_truncation_level(double h_sharp) noexcept;

/// min(max(v, 0), R).
double truncate_Q(double v, double R) noexcept;

/// Precipitation rate gamma * m_p * h * s * (1 - s).
double reaction_rate_P(double h, double s, double gamma, double m_p) noexcept;

struct StoichiometricRates {
  double water;
  double hydroxide;
  double gas;
};

/// Source rates of H2O, Ca(OH)2 and CO2 that balance a CaCO3 production rate.
StoichiometricRates stoichiometric_rates(double precipitate_rate, const PhysParams& params) noexcept;

}  // namespace lime
