#include "lime/constitutive.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "lime/error.hpp"

namespace lime {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// Index of the segment [s_i, s_{i+1}] containing s, clamped to the table.
std::size_t segment_of(const TabulatedWetting& t, double s) {
  auto it = std::upper_bound(t.saturation.begin(), t.saturation.end(), s);
  auto idx = static_cast<std::size_t>(std::distance(t.saturation.begin(), it));
  if (idx == 0) return 0;
  return std::min(idx - 1, t.saturation.size() - 2);
}

double segment_slope(const TabulatedWetting& t, std::size_t i) {
  return (t.pressure[i + 1] - t.pressure[i]) / (t.saturation[i + 1] - t.saturation[i]);
}

}  // namespace

WettingCurve WettingCurve::linear(double offset, double slope) {
  if (!(slope > 0.0) || !std::isfinite(slope) || !std::isfinite(offset)) {
    throw ConfigError("wetting.slope: must be finite and positive");
  }
  return WettingCurve(LinearWetting{offset, slope}, slope, slope);
}

WettingCurve WettingCurve::tabulated(std::vector<double> saturation, std::vector<double> pressure) {
  std::vector<std::string> problems;
  if (saturation.size() != pressure.size()) {
    problems.push_back("wetting.pressure: must have as many entries as wetting.saturation");
  }
  if (saturation.size() < 2) {
    problems.push_back("wetting.saturation: at least two breakpoints required");
  }
  if (!problems.empty()) throw ConfigError(problems);
  if (saturation.front() != 0.0 || saturation.back() != 1.0) {
    problems.push_back("wetting.saturation: breakpoints must start at 0 and end at 1");
  }
  double lo = INFINITY;
  double hi = 0.0;
  for (std::size_t i = 0; i + 1 < saturation.size(); ++i) {
    if (!(saturation[i + 1] > saturation[i])) {
      problems.push_back("wetting.saturation: breakpoints must be strictly increasing");
      break;
    }
    const double slope = (pressure[i + 1] - pressure[i]) / (saturation[i + 1] - saturation[i]);
    if (!(slope > 0.0) || !std::isfinite(slope)) {
      problems.push_back("wetting.pressure: curve must be strictly increasing (segment " +
                         std::to_string(i) + ")");
      break;
    }
    lo = std::min(lo, slope);
    hi = std::max(hi, slope);
  }
  if (!problems.empty()) throw ConfigError(problems);
  return WettingCurve(TabulatedWetting{std::move(saturation), std::move(pressure)}, lo, hi);
}

double WettingCurve::operator()(double s) const {
  return std::visit(overloaded{
                        [s](const LinearWetting& l) { return l.offset + l.slope * s; },
                        [s](const TabulatedWetting& t) {
                          if (s < 0.0) return t.pressure.front() + segment_slope(t, 0) * s;
                          const std::size_t last = t.saturation.size() - 2;
                          if (s > 1.0) return t.pressure.back() + segment_slope(t, last) * (s - 1.0);
                          const std::size_t i = segment_of(t, s);
                          return t.pressure[i] + segment_slope(t, i) * (s - t.saturation[i]);
                        },
                    },
                    form_);
}

double WettingCurve::derivative(double s) const {
  return std::visit(overloaded{
                        [](const LinearWetting& l) { return l.slope; },
                        [s](const TabulatedWetting& t) {
                          if (s < 0.0) return segment_slope(t, 0);
                          return segment_slope(t, segment_of(t, s));
                        },
                    },
                    form_);
}

double eval_wetting_extended(const WettingCurve& curve, double s) { return curve(s); }

PermeabilityLaw PermeabilityLaw::constant(double k0) {
  if (!(k0 > 0.0) || !std::isfinite(k0)) {
    throw ConfigError("permeability.k0: must be finite and positive");
  }
  return PermeabilityLaw(ConstantPermeability{k0});
}

PermeabilityLaw PermeabilityLaw::exp_decay(double k0, double rate, double floor) {
  std::vector<std::string> problems;
  if (!(k0 > 0.0) || !std::isfinite(k0)) problems.push_back("permeability.k0: must be finite and positive");
  if (!(rate >= 0.0) || !std::isfinite(rate)) problems.push_back("permeability.rate: must be finite and nonnegative");
  if (!(floor > 0.0) || !(floor <= k0)) problems.push_back("permeability.floor: must lie in (0, k0]");
  if (!problems.empty()) throw ConfigError(problems);
  return PermeabilityLaw(ExpDecayPermeability{k0, rate, floor});
}

double PermeabilityLaw::operator()(double c) const {
  if (c < 0.0 || std::isnan(c)) {
    throw std::domain_error("permeability evaluated at negative precipitate");
  }
  return std::visit(overloaded{
                        [](const ConstantPermeability& p) { return p.k0; },
                        [c](const ExpDecayPermeability& p) {
                          return p.floor + (p.k0 - p.floor) * std::exp(-p.rate * c);
                        },
                    },
                    form_);
}

double PermeabilityLaw::k_flat() const noexcept {
  return std::visit(overloaded{
                        [](const ConstantPermeability& p) { return p.k0; },
                        [](const ExpDecayPermeability& p) { return p.rate > 0.0 ? p.floor : p.k0; },
                    },
                    form_);
}

double PermeabilityLaw::k_sharp() const noexcept {
  return std::visit([](const auto& p) { return p.k0; }, form_);
}

double eval_permeability(const PermeabilityLaw& law, double precipitate) { return law(precipitate); }

std::vector<std::string> PhysParams::validate(const std::string& prefix) const {
  std::vector<std::string> problems;
  auto positive = [&](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) problems.push_back(prefix + "." + name + ": must be finite and positive");
  };
  positive(rho_w, "rho_w");
  positive(rho_h, "rho_h");
  positive(m_w, "m_w");
  positive(m_h, "m_h");
  positive(m_p, "m_p");
  positive(m_g, "m_g");
  positive(kappa, "kappa");
  positive(h_sharp, "h_sharp");
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
    problems.push_back(prefix + ".gamma: must be finite and nonnegative");
  }
  if (!(s_flat >= 0.0 && s_flat <= 1.0)) {
    problems.push_back(prefix + ".s_flat: lower saturation bound must lie in [0, 1]");
  }
  if (!(truncation >= 1.0) || !std::isfinite(truncation)) {
    problems.push_back(prefix + ".truncation: cut-off level must be finite and at least 1");
  }
  return problems;
}

double default_truncation_level(double h_sharp) noexcept {
  return std::max(1.0, 10.0 * std::max(h_sharp, 1.0));
}

double truncate_Q(double v, double R) noexcept { return std::min(std::max(v, 0.0), R); }

double reaction_rate_P(double h, double s, double gamma, double m_p) noexcept {
  return gamma * m_p * h * s * (1.0 - s);
}

StoichiometricRates stoichiometric_rates(double rate, const PhysParams& p) noexcept {
  const double molar = rate / p.m_p;
  return {p.m_w * molar, -p.m_h * molar, -p.m_g * molar};
}

}  // namespace lime
