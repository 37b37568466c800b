#pragma once

#include <memory>
#include <string>
#include <vector>

#include "oamp/block_matrix.hpp"

namespace oamp {

enum class SpectrumKind { symmetric, rectangular };

// Transform evaluators shared by empirical samples and closed-form laws.
// Symmetric laws provide G; rectangular laws provide φ(z) = E[z/(z²−Λ²)].
class SpectralLaw {
public:
  virtual ~SpectralLaw() = default;
  virtual SpectrumKind kind() const = 0;
  virtual double gamma() const { return 1.0; }
  virtual double lower_edge() const = 0;
  virtual double upper_edge() const = 0;
  virtual double cauchy(double z) const;
  virtual double cauchy_prime(double z) const;
  virtual double phi(double z) const;
  virtual double phi_prime(double z) const;
  // m_1..m_order (symmetric) or moments of Λ², m_2..m_{2·order} (rectangular).
  virtual std::vector<double> moments(int order) const = 0;
};

class SpectralSample final : public SpectralLaw {
public:
  SpectralSample(std::vector<double> values, SpectrumKind kind, double gamma = 1.0);

  SpectrumKind kind() const override { return kind_; }
  double gamma() const override { return gamma_; }
  double lower_edge() const override { return lo_; }
  double upper_edge() const override { return hi_; }
  double cauchy(double z) const override;
  double cauchy_prime(double z) const override;
  double phi(double z) const override;
  double phi_prime(double z) const override;
  std::vector<double> moments(int order) const override;

  const std::vector<double>& values() const { return values_; }
  size_t size() const { return values_.size(); }

private:
  void check_outside(double z) const;
  std::vector<double> values_;
  SpectrumKind kind_;
  double gamma_;
  double lo_, hi_;
};

std::vector<double> empirical_moments(const SpectralSample& s, int order);

// κ_1..κ_J from m_1..m_J.
std::vector<double> free_cumulants_from_moments(const std::vector<double>& m);
std::vector<double> moments_from_free_cumulants(const std::vector<double>& kappa);
// κ_2..κ_{2J} from moments of Λ² (m_2..m_{2J}).
std::vector<double> rect_cumulants_from_moments(const std::vector<double>& m2, double gamma);
std::vector<double> rect_moments_from_cumulants(const std::vector<double>& kappa2, double gamma);

struct CumulantModel {
  SpectrumKind kind = SpectrumKind::symmetric;
  // kappa[j-1] = κ_j (symmetric) or κ_{2j} (rectangular)
  std::vector<double> kappa;
  double gamma = 1.0;
  double support_min = 0.0;
  double support_max = 0.0;
  // Zero beyond the stored order.
  double at(int j) const { return j >= 1 && j <= static_cast<int>(kappa.size()) ? kappa[j - 1] : 0.0; }
};

CumulantModel cumulants_of(const SpectralLaw& law, int order);
CumulantModel semicircle_cumulants(int order);
CumulantModel marchenko_pastur_cumulants(int order, double gamma);

double cauchy_G(const SpectralLaw& s, double z);
double cauchy_G_prime(const SpectralLaw& s, double z);

enum class Side { upper, lower };
double invert_cauchy(const SpectralLaw& s, double g, Side side = Side::upper);

struct DTransform {
  double phi, phibar, D, Dprime;
};
DTransform d_transform(const SpectralLaw& s, double z);
double invert_D(const SpectralLaw& s, double d);

// Rectangular R-transform helpers: T(z) = (1+z)(1+γz) and its inverse branch.
double rect_T(double z, double gamma);
double rect_T_prime(double z, double gamma);
double rect_T_inverse(double w, double gamma);

// κ̃_s, κ̂_s for s = 1..order (symmetric), or κ̃_{2s}, κ̂_{2s} (rectangular, stored at index s).
struct KappaSeriesTables {
  SpectrumKind kind = SpectrumKind::symmetric;
  std::vector<DiagScaler> tilde, hat;  // index 0 unused
  DiagScaler S;
  bool near_divergent = false;
  int order() const { return static_cast<int>(tilde.size()) - 1; }
  const DiagScaler& kt(int s) const;
  const DiagScaler& kh(int s) const;
};

KappaSeriesTables kappa_series_tables(const CumulantModel& kappa, const Vec& R_at, const Vec& Rprime_at,
                                      const DiagScaler& S, int order);

SpectralSample read_spectrum_csv(const std::string& path, SpectrumKind kind, double gamma = 1.0);

} // namespace oamp
