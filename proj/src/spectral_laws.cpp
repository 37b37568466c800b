#include "oamp/spectral_laws.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace oamp {

double SemicircleLaw::cauchy(double z) const {
  if (std::abs(z) <= 2.0) throw std::domain_error("semicircle transform inside the support");
  double s = std::copysign(std::sqrt(z * z - 4.0), z);
  return 0.5 * (z - s);
}

double SemicircleLaw::cauchy_prime(double z) const {
  if (std::abs(z) <= 2.0) throw std::domain_error("semicircle transform inside the support");
  return 0.5 * (1.0 - std::abs(z) / std::sqrt(z * z - 4.0));
}

std::vector<double> SemicircleLaw::moments(int order) const {
  std::vector<double> m(order, 0.0);
  double catalan = 1.0;
  for (int k = 1; 2 * k <= order; ++k) {
    catalan = catalan * 2.0 * (2.0 * k - 1.0) / (k + 1.0);
    m[2 * k - 1] = catalan;
  }
  return m;
}

MarchenkoPasturSqrtLaw::MarchenkoPasturSqrtLaw(double gamma) : gamma_(gamma) {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("aspect ratio must lie in (0,1]");
}

namespace {
// Stieltjes transform of the Marchenko–Pastur law (ratio y, unit scale) and its derivative, w above the edge.
void mp_stieltjes(double w, double y, double& g, double& gp) {
  double a = w - 1.0 - y;
  double s = std::sqrt(a * a - 4.0 * y);
  double num = w + y - 1.0 - s;
  g = num / (2.0 * y * w);
  double ds = a / s;
  gp = ((1.0 - ds) * w - num) / (2.0 * y * w * w);
}
} // namespace

double MarchenkoPasturSqrtLaw::phi(double z) const {
  if (!(z > upper_edge())) throw std::domain_error("D-transform inside the support");
  double g, gp;
  mp_stieltjes(z * z, gamma_, g, gp);
  return z * g;
}

double MarchenkoPasturSqrtLaw::phi_prime(double z) const {
  if (!(z > upper_edge())) throw std::domain_error("D-transform inside the support");
  double g, gp;
  mp_stieltjes(z * z, gamma_, g, gp);
  return g + 2.0 * z * z * gp;
}

std::vector<double> MarchenkoPasturSqrtLaw::moments(int order) const {
  std::vector<double> k(order, 0.0);
  k[0] = 1.0;
  return rect_moments_from_cumulants(k, gamma_);
}

namespace {

void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p1 = 1.0, p2 = 0.0;
      for (int j = 1; j <= n; ++j) {
        double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
      }
      pp = n * (z * p1 - p2) / (z * z - 1.0);
      double dz = p1 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    x[i] = z;
    w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
  }
}

} // namespace

DensityLaw::DensityLaw(double lo, double hi, const std::function<double(double)>& density, SpectrumKind kind,
                       double gamma)
    : lo_(lo), hi_(hi), kind_(kind), gamma_(gamma) {
  if (!(hi > lo)) throw std::invalid_argument("DensityLaw: empty support");
  if (kind == SpectrumKind::rectangular && lo < 0.0) throw std::invalid_argument("DensityLaw: negative support");
  std::vector<double> gx, gw;
  gauss_legendre(16, gx, gw);
  const double half = 0.5 * (hi - lo);
  const int levels = 48;
  std::vector<double> cuts;  // panel boundaries measured from an edge
  cuts.push_back(0.0);
  for (int l = levels; l >= 0; --l) cuts.push_back(half * std::ldexp(1.0, -l));
  auto add_panel = [&](double a, double b) {
    double c = 0.5 * (a + b), r = 0.5 * (b - a);
    for (size_t i = 0; i < gx.size(); ++i) {
      double xi = c + r * gx[i];
      x_.push_back(xi);
      w_.push_back(r * gw[i] * density(xi));
    }
  };
  for (size_t i = 0; i + 1 < cuts.size(); ++i) {
    add_panel(lo + cuts[i], lo + cuts[i + 1]);
    add_panel(hi - cuts[i + 1], hi - cuts[i]);
  }
  double total = 0.0;
  for (double v : w_) total += v;
  if (!(total > 0.0)) throw std::invalid_argument("DensityLaw: density integrates to zero");
  for (double& v : w_) v /= total;
}

void DensityLaw::check_outside(double z) const {
  if (kind_ == SpectrumKind::symmetric ? (z >= lo_ && z <= hi_) : std::abs(z) <= hi_)
    throw std::domain_error("transform evaluated inside the spectral support");
}

double DensityLaw::cauchy(double z) const {
  if (kind_ != SpectrumKind::symmetric) return SpectralLaw::cauchy(z);
  check_outside(z);
  double s = 0.0;
  for (size_t i = 0; i < x_.size(); ++i) s += w_[i] / (z - x_[i]);
  return s;
}

double DensityLaw::cauchy_prime(double z) const {
  if (kind_ != SpectrumKind::symmetric) return SpectralLaw::cauchy_prime(z);
  check_outside(z);
  double s = 0.0;
  for (size_t i = 0; i < x_.size(); ++i) {
    double r = 1.0 / (z - x_[i]);
    s += w_[i] * r * r;
  }
  return -s;
}

double DensityLaw::phi(double z) const {
  if (kind_ != SpectrumKind::rectangular) return SpectralLaw::phi(z);
  check_outside(z);
  double s = 0.0;
  for (size_t i = 0; i < x_.size(); ++i) s += w_[i] * z / (z * z - x_[i] * x_[i]);
  return s;
}

double DensityLaw::phi_prime(double z) const {
  if (kind_ != SpectrumKind::rectangular) return SpectralLaw::phi_prime(z);
  check_outside(z);
  double s = 0.0;
  for (size_t i = 0; i < x_.size(); ++i) {
    double d = z * z - x_[i] * x_[i];
    s += w_[i] * (z * z + x_[i] * x_[i]) / (d * d);
  }
  return -s;
}

std::vector<double> DensityLaw::moments(int order) const {
  std::vector<double> m(order, 0.0);
  for (size_t i = 0; i < x_.size(); ++i) {
    double base = kind_ == SpectrumKind::symmetric ? x_[i] : x_[i] * x_[i];
    double p = 1.0;
    for (int k = 0; k < order; ++k) {
      p *= base;
      m[k] += w_[i] * p;
    }
  }
  return m;
}

std::unique_ptr<SpectralLaw> uniform_law(double lo, double hi, SpectrumKind kind, double gamma) {
  return std::make_unique<DensityLaw>(lo, hi, [](double) { return 1.0; }, kind, gamma);
}

std::unique_ptr<SpectralLaw> beta_law(double a, double b, double scale, double shift, SpectrumKind kind,
                                      double gamma) {
  if (!(a > 0.0 && b > 0.0 && scale > 0.0)) throw std::invalid_argument("beta_law: invalid parameters");
  double lo = scale * (0.0 - shift), hi = scale * (1.0 - shift);
  auto dens = [=](double x) {
    double u = x / scale + shift;
    if (u <= 0.0 || u >= 1.0) return 0.0;
    return std::pow(u, a - 1.0) * std::pow(1.0 - u, b - 1.0);
  };
  return std::make_unique<DensityLaw>(lo, hi, dens, kind, gamma);
}

} // namespace oamp
