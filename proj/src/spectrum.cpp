#include "oamp/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace oamp {

namespace {

// Neumaier-compensated running sum.
struct CompensatedSum {
  double sum = 0.0, c = 0.0;
  void add(double x) {
    double t = sum + x;
    if (std::abs(sum) >= std::abs(x)) c += (sum - t) + x;
    else c += (x - t) + sum;
    sum = t;
  }
  double value() const { return sum + c; }
};

using Poly = std::vector<double>;

// Truncated product of two power series up to degree deg.
Poly mul(const Poly& a, const Poly& b, int deg) {
  Poly c(deg + 1, 0.0);
  for (int i = 0; i <= deg && i < static_cast<int>(a.size()); ++i) {
    if (a[i] == 0.0) continue;
    for (int j = 0; i + j <= deg && j < static_cast<int>(b.size()); ++j) c[i + j] += a[i] * b[j];
  }
  return c;
}

// pw[s] = base^s truncated to degree deg, s = 0..smax.
std::vector<Poly> powers(const Poly& base, int smax, int deg) {
  std::vector<Poly> pw(smax + 1);
  pw[0] = Poly(deg + 1, 0.0);
  pw[0][0] = 1.0;
  for (int s = 1; s <= smax; ++s) pw[s] = mul(pw[s - 1], base, deg);
  return pw;
}

double coeff(const Poly& p, int i) { return i >= 0 && i < static_cast<int>(p.size()) ? p[i] : 0.0; }

// Y(z) = z(1+M)(1+γM) with M(z) = Σ_{k≥1} m[k-1] z^k.
Poly rect_argument(const std::vector<double>& m2, double gamma, int deg) {
  Poly one_m(deg + 1, 0.0), one_gm(deg + 1, 0.0);
  one_m[0] = one_gm[0] = 1.0;
  for (int k = 1; k <= deg && k <= static_cast<int>(m2.size()); ++k) {
    one_m[k] = m2[k - 1];
    one_gm[k] = gamma * m2[k - 1];
  }
  Poly prod = mul(one_m, one_gm, deg);
  Poly y(deg + 1, 0.0);
  for (int k = 0; k + 1 <= deg; ++k) y[k + 1] = prod[k];
  return y;
}

double bisect(const std::function<double(double)>& f, double target, double lo, double hi, bool decreasing,
              double tol) {
  // f monotone on [lo, hi] with target bracketed.
  for (int it = 0; it < 400; ++it) {
    double mid = 0.5 * (lo + hi);
    double fm = f(mid);
    if (std::abs(fm - target) <= tol) return mid;
    bool go_right = decreasing ? (fm > target) : (fm < target);
    if (go_right) lo = mid;
    else hi = mid;
    if (hi - lo <= 4 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(mid))) return mid;
  }
  return 0.5 * (lo + hi);
}

} // namespace

double SpectralLaw::cauchy(double) const { throw std::logic_error("Cauchy transform requires a symmetric law"); }
double SpectralLaw::cauchy_prime(double) const {
  throw std::logic_error("Cauchy transform requires a symmetric law");
}
double SpectralLaw::phi(double) const { throw std::logic_error("D-transform requires a rectangular law"); }
double SpectralLaw::phi_prime(double) const { throw std::logic_error("D-transform requires a rectangular law"); }

SpectralSample::SpectralSample(std::vector<double> values, SpectrumKind kind, double gamma)
    : values_(std::move(values)), kind_(kind), gamma_(gamma) {
  if (values_.empty()) throw std::invalid_argument("SpectralSample: empty sample");
  for (double v : values_) {
    if (!std::isfinite(v)) throw std::invalid_argument("SpectralSample: non-finite value");
    if (kind_ == SpectrumKind::rectangular && v < 0.0)
      throw std::invalid_argument("SpectralSample: negative singular value");
  }
  if (kind_ == SpectrumKind::rectangular && !(gamma_ > 0.0 && gamma_ <= 1.0))
    throw std::invalid_argument("SpectralSample: aspect ratio must lie in (0,1]");
  auto [mn, mx] = std::minmax_element(values_.begin(), values_.end());
  lo_ = *mn;
  hi_ = *mx;
}

void SpectralSample::check_outside(double z) const {
  if (kind_ == SpectrumKind::symmetric) {
    if (z >= lo_ && z <= hi_) throw std::domain_error("transform evaluated inside the spectral support");
  } else if (std::abs(z) <= hi_) {
    throw std::domain_error("transform evaluated inside the spectral support");
  }
}

double SpectralSample::cauchy(double z) const {
  if (kind_ != SpectrumKind::symmetric) return SpectralLaw::cauchy(z);
  check_outside(z);
  CompensatedSum s;
  for (double v : values_) s.add(1.0 / (z - v));
  return s.value() / values_.size();
}

double SpectralSample::cauchy_prime(double z) const {
  if (kind_ != SpectrumKind::symmetric) return SpectralLaw::cauchy_prime(z);
  check_outside(z);
  CompensatedSum s;
  for (double v : values_) {
    double r = 1.0 / (z - v);
    s.add(r * r);
  }
  return -s.value() / values_.size();
}

double SpectralSample::phi(double z) const {
  if (kind_ != SpectrumKind::rectangular) return SpectralLaw::phi(z);
  check_outside(z);
  CompensatedSum s;
  for (double v : values_) s.add(z / (z * z - v * v));
  return s.value() / values_.size();
}

double SpectralSample::phi_prime(double z) const {
  if (kind_ != SpectrumKind::rectangular) return SpectralLaw::phi_prime(z);
  check_outside(z);
  CompensatedSum s;
  for (double v : values_) {
    double d = z * z - v * v;
    s.add((z * z + v * v) / (d * d));
  }
  return -s.value() / values_.size();
}

std::vector<double> SpectralSample::moments(int order) const {
  if (order < 1) throw std::invalid_argument("moments: order must be >= 1");
  std::vector<CompensatedSum> acc(order);
  for (double v : values_) {
    double base = kind_ == SpectrumKind::symmetric ? v : v * v;
    double p = 1.0;
    for (int k = 0; k < order; ++k) {
      p *= base;
      acc[k].add(p);
    }
  }
  std::vector<double> m(order);
  for (int k = 0; k < order; ++k) m[k] = acc[k].value() / values_.size();
  return m;
}

std::vector<double> empirical_moments(const SpectralSample& s, int order) { return s.moments(order); }

std::vector<double> free_cumulants_from_moments(const std::vector<double>& m) {
  const int J = static_cast<int>(m.size());
  Poly M(J + 1, 0.0);
  M[0] = 1.0;
  for (int i = 1; i <= J; ++i) M[i] = m[i - 1];
  auto pw = powers(M, J, J);
  std::vector<double> kappa(J, 0.0);
  for (int n = 1; n <= J; ++n) {
    double rest = 0.0;
    for (int s = 1; s < n; ++s) rest += kappa[s - 1] * coeff(pw[s], n - s);
    kappa[n - 1] = m[n - 1] - rest;
  }
  return kappa;
}

std::vector<double> moments_from_free_cumulants(const std::vector<double>& kappa) {
  const int J = static_cast<int>(kappa.size());
  std::vector<double> m(J, 0.0);
  for (int n = 1; n <= J; ++n) {
    // [z^{n-s}] M^s only involves m_1..m_{n-1}.
    Poly M(n, 0.0);
    M[0] = 1.0;
    for (int i = 1; i < n; ++i) M[i] = m[i - 1];
    auto pw = powers(M, n, n - 1);
    double v = 0.0;
    for (int s = 1; s <= n; ++s) v += kappa[s - 1] * coeff(pw[s], n - s);
    m[n - 1] = v;
  }
  return m;
}

std::vector<double> rect_cumulants_from_moments(const std::vector<double>& m2, double gamma) {
  const int J = static_cast<int>(m2.size());
  Poly Y = rect_argument(m2, gamma, J);
  auto pw = powers(Y, J, J);
  std::vector<double> kappa(J, 0.0);
  for (int n = 1; n <= J; ++n) {
    double rest = 0.0;
    for (int s = 1; s < n; ++s) rest += kappa[s - 1] * coeff(pw[s], n);
    kappa[n - 1] = m2[n - 1] - rest;  // [z^n] Y^n = 1
  }
  return kappa;
}

std::vector<double> rect_moments_from_cumulants(const std::vector<double>& kappa2, double gamma) {
  const int J = static_cast<int>(kappa2.size());
  std::vector<double> m(J, 0.0);
  for (int n = 1; n <= J; ++n) {
    std::vector<double> known(m.begin(), m.begin() + (n - 1));
    Poly Y = rect_argument(known, gamma, n);
    auto pw = powers(Y, n, n);
    double v = 0.0;
    for (int s = 1; s <= n; ++s) v += kappa2[s - 1] * coeff(pw[s], n);
    m[n - 1] = v;
  }
  return m;
}

CumulantModel cumulants_of(const SpectralLaw& law, int order) {
  CumulantModel cm;
  cm.kind = law.kind();
  cm.gamma = law.gamma();
  auto m = law.moments(order);
  cm.kappa = cm.kind == SpectrumKind::symmetric ? free_cumulants_from_moments(m)
                                                : rect_cumulants_from_moments(m, cm.gamma);
  cm.support_min = law.lower_edge();
  cm.support_max = law.upper_edge();
  return cm;
}

CumulantModel semicircle_cumulants(int order) {
  CumulantModel cm;
  cm.kind = SpectrumKind::symmetric;
  cm.kappa.assign(std::max(order, 2), 0.0);
  cm.kappa[1] = 1.0;
  cm.support_min = -2.0;
  cm.support_max = 2.0;
  return cm;
}

CumulantModel marchenko_pastur_cumulants(int order, double gamma) {
  CumulantModel cm;
  cm.kind = SpectrumKind::rectangular;
  cm.gamma = gamma;
  cm.kappa.assign(std::max(order, 1), 0.0);
  cm.kappa[0] = 1.0;
  cm.support_min = 1.0 - std::sqrt(gamma);
  cm.support_max = 1.0 + std::sqrt(gamma);
  return cm;
}

double cauchy_G(const SpectralLaw& s, double z) { return s.cauchy(z); }
double cauchy_G_prime(const SpectralLaw& s, double z) { return s.cauchy_prime(z); }

double invert_cauchy(const SpectralLaw& s, double g, Side side) {
  if (s.kind() != SpectrumKind::symmetric) throw std::invalid_argument("invert_cauchy: symmetric law required");
  // Reflect the lower branch onto an upper-branch search in w = -z.
  const bool up = side == Side::upper;
  if (up ? !(g > 0.0) : !(g < 0.0)) throw std::domain_error("invert_cauchy: value outside the invertible range");
  const double edge = up ? s.upper_edge() : -s.lower_edge();
  auto f = [&](double w) { return up ? s.cauchy(w) : -s.cauchy(-w); };
  const double target = up ? g : -g;
  double lo = edge + 1e-9;
  double hi = edge + 10.0 * (1.0 + std::abs(edge));
  double flo = f(lo);
  if (!(flo > target))
    throw std::domain_error("invert_cauchy: value outside the invertible range (sub-critical spike)");
  for (int it = 0; f(hi) > target; ++it) {
    if (it > 200) throw std::domain_error("invert_cauchy: failed to bracket");
    hi = edge + 2.0 * (hi - edge);
  }
  double w = bisect(f, target, lo, hi, true, 1e-13 * std::max(1.0, std::abs(target)));
  return up ? w : -w;
}

DTransform d_transform(const SpectralLaw& s, double z) {
  if (s.kind() != SpectrumKind::rectangular) throw std::invalid_argument("d_transform: rectangular law required");
  if (!(z > s.upper_edge())) throw std::domain_error("d_transform: argument inside the spectral support");
  const double g = s.gamma();
  DTransform d;
  d.phi = s.phi(z);
  double dphi = s.phi_prime(z);
  d.phibar = g * d.phi + (1.0 - g) / z;
  double dphibar = g * dphi - (1.0 - g) / (z * z);
  d.D = d.phi * d.phibar;
  d.Dprime = dphi * d.phibar + d.phi * dphibar;
  return d;
}

double invert_D(const SpectralLaw& s, double d) {
  if (!(d > 0.0)) throw std::domain_error("invert_D: value outside the invertible range");
  const double edge = s.upper_edge();
  auto f = [&](double z) { return d_transform(s, z).D; };
  double lo = edge + 1e-9;
  double hi = edge + 10.0 * (1.0 + std::abs(edge));
  if (!(f(lo) > d)) throw std::domain_error("invert_D: value at or above D at the edge (sub-critical spike)");
  for (int it = 0; f(hi) > d; ++it) {
    if (it > 200) throw std::domain_error("invert_D: failed to bracket");
    hi = edge + 2.0 * (hi - edge);
  }
  return bisect(f, d, lo, hi, true, 1e-13 * std::max(1.0, d));
}

double rect_T(double z, double gamma) { return (1.0 + z) * (1.0 + gamma * z); }
double rect_T_prime(double z, double gamma) { return 1.0 + gamma + 2.0 * gamma * z; }
double rect_T_inverse(double w, double gamma) {
  // Root of (1+z)(1+γz) = 1 + w on the branch through z = 0.
  return (-gamma - 1.0 + std::sqrt((1.0 + gamma) * (1.0 + gamma) + 4.0 * gamma * w)) / (2.0 * gamma);
}

const DiagScaler& KappaSeriesTables::kt(int s) const {
  if (s < 1 || s > order()) throw std::out_of_range("kappa tilde table order insufficient");
  return tilde[s];
}

const DiagScaler& KappaSeriesTables::kh(int s) const {
  if (s < 1 || s > order()) throw std::out_of_range("kappa hat table order insufficient");
  return hat[s];
}

KappaSeriesTables kappa_series_tables(const CumulantModel& kappa, const Vec& R_at, const Vec& Rprime_at,
                                      const DiagScaler& S, int order) {
  const Eigen::Index K = S.size();
  if (R_at.size() != K || Rprime_at.size() != K) throw std::invalid_argument("kappa_series_tables: size mismatch");
  if (order < 2) throw std::invalid_argument("kappa_series_tables: order must be >= 2");
  KappaSeriesTables t;
  t.kind = kappa.kind;
  t.S = S;
  t.tilde.assign(order + 1, DiagScaler::Zero(K));
  t.hat.assign(order + 1, DiagScaler::Zero(K));
  for (Eigen::Index k = 0; k < K; ++k)
    if (std::abs(S(k)) <= 1.05) t.near_divergent = true;

  if (kappa.kind == SpectrumKind::symmetric) {
    t.tilde[1] = R_at;
    for (int s = 1; s < order; ++s) t.tilde[s + 1] = (t.tilde[s].array() - kappa.at(s)) * S.array();
    t.hat[2] = Rprime_at;
    for (int s = 2; s < order; ++s) t.hat[s + 1] = (t.hat[s] - t.tilde[s]).cwiseProduct(S);
    t.hat[1] = t.tilde[1] + t.hat[2].cwiseQuotient(S);
  } else {
    const DiagScaler S2 = S.cwiseProduct(S);
    t.tilde[1] = S2.cwiseProduct(R_at);
    for (int s = 1; s < order; ++s) t.tilde[s + 1] = (t.tilde[s].array() - kappa.at(s)) * S2.array();
    t.hat[1] = Rprime_at;
    for (int s = 1; s < order; ++s) t.hat[s + 1] = (t.hat[s] - t.tilde[s]).cwiseProduct(S2);
  }
  return t;
}

SpectralSample read_spectrum_csv(const std::string& path, SpectrumKind kind, double gamma) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  std::vector<double> v;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (first) {
      first = false;
      if (line == "value") continue;
    }
    try {
      size_t pos = 0;
      v.push_back(std::stod(line, &pos));
    } catch (const std::exception&) {
      throw std::runtime_error("unparseable spectrum entry '" + line + "' in " + path);
    }
  }
  return SpectralSample(std::move(v), kind, gamma);
}

} // namespace oamp
