#pragma once

#include <cmath>
#include <functional>
#include <memory>

#include "oamp/spectrum.hpp"

namespace oamp {

// Semicircle law on [-2, 2].
class SemicircleLaw final : public SpectralLaw {
public:
  SpectrumKind kind() const override { return SpectrumKind::symmetric; }
  double lower_edge() const override { return -2.0; }
  double upper_edge() const override { return 2.0; }
  double cauchy(double z) const override;
  double cauchy_prime(double z) const override;
  std::vector<double> moments(int order) const override;
};

// Singular values of an m×n matrix with i.i.d. N(0, 1/n) entries, γ = m/n.
class MarchenkoPasturSqrtLaw final : public SpectralLaw {
public:
  explicit MarchenkoPasturSqrtLaw(double gamma);
  SpectrumKind kind() const override { return SpectrumKind::rectangular; }
  double gamma() const override { return gamma_; }
  double lower_edge() const override { return 1.0 - std::sqrt(gamma_); }
  double upper_edge() const override { return 1.0 + std::sqrt(gamma_); }
  double phi(double z) const override;
  double phi_prime(double z) const override;
  std::vector<double> moments(int order) const override;

private:
  double gamma_;
};

// Law with a bounded density, integrated by graded composite Gauss–Legendre.
class DensityLaw final : public SpectralLaw {
public:
  DensityLaw(double lo, double hi, const std::function<double(double)>& density, SpectrumKind kind,
             double gamma = 1.0);
  SpectrumKind kind() const override { return kind_; }
  double gamma() const override { return gamma_; }
  double lower_edge() const override { return lo_; }
  double upper_edge() const override { return hi_; }
  double cauchy(double z) const override;
  double cauchy_prime(double z) const override;
  double phi(double z) const override;
  double phi_prime(double z) const override;
  std::vector<double> moments(int order) const override;

private:
  void check_outside(double z) const;
  double lo_, hi_;
  SpectrumKind kind_;
  double gamma_;
  std::vector<double> x_, w_;
};

// x ~ Uniform[lo, hi].
std::unique_ptr<SpectralLaw> uniform_law(double lo, double hi, SpectrumKind kind, double gamma = 1.0);
// x = scale·(B − shift) with B ~ Beta(a, b).
std::unique_ptr<SpectralLaw> beta_law(double a, double b, double scale, double shift, SpectrumKind kind,
                                      double gamma = 1.0);

} // namespace oamp
