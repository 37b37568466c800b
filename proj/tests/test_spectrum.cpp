#include <doctest.h>

#include <cmath>
#include <random>

#include "oamp/linalg.hpp"
#include "oamp/model_gen.hpp"
#include "oamp/spectral_laws.hpp"
#include "oamp/spectrum.hpp"

using namespace oamp;

namespace {

std::vector<double> goe_eigenvalues(int n, std::uint64_t seed) {
  Rng rng(seed);
  NoiseDraw d = sample_noise(goe_spec(n), rng);
  PartialEigen e = sym_eigen_extremes(d.W, 0, 0);
  return std::vector<double>(e.values.data(), e.values.data() + e.values.size());
}

std::vector<double> mp_singular_values(int m, int n, std::uint64_t seed) {
  Rng rng(seed);
  NoiseDraw d = sample_noise(iid_rect_spec(m, n), rng);
  PartialSvd s = svd_top(d.W, 1);
  return std::vector<double>(s.values.data(), s.values.data() + s.values.size());
}

} // namespace

TEST_CASE("empirical moments of small samples") {
  auto z = SpectralSample({0, 0, 0}, SpectrumKind::symmetric).moments(4);
  for (double v : z) CHECK(v == 0.0);
  auto m = SpectralSample({-1, 1}, SpectrumKind::symmetric).moments(4);
  CHECK(m[0] == 0.0);
  CHECK(m[1] == 1.0);
  CHECK(m[2] == 0.0);
  CHECK(m[3] == 1.0);
}

TEST_CASE("uniform draws reproduce the closed-form even moments") {
  std::mt19937_64 g(11);
  std::uniform_real_distribution<double> u(-std::sqrt(3.0), std::sqrt(3.0));
  std::vector<double> v(1000000);
  for (double& x : v) x = u(g);
  auto m = SpectralSample(v, SpectrumKind::symmetric).moments(4);
  CHECK(std::abs(m[1] - 1.0) < 0.01);
  CHECK(std::abs(m[3] - 9.0 / 5.0) < 0.01);
}

TEST_CASE("free cumulants of known laws") {
  auto k = free_cumulants_from_moments({0, 1, 0, 2, 0, 5});
  std::vector<double> expect{0, 1, 0, 0, 0, 0};
  for (int i = 0; i < 6; ++i) CHECK(k[i] == doctest::Approx(expect[i]).epsilon(1e-14));

  const double c = 1.7;
  std::vector<double> pm;
  for (int j = 1; j <= 8; ++j) pm.push_back(std::pow(c, j));
  auto kc = free_cumulants_from_moments(pm);
  CHECK(kc[0] == doctest::Approx(c));
  for (int j = 1; j < 8; ++j) CHECK(std::abs(kc[j]) < 1e-11);

  auto ku = free_cumulants_from_moments({0, 1, 0, 9.0 / 5.0});
  CHECK(ku[3] == doctest::Approx(-0.2).epsilon(1e-14));
}

TEST_CASE("moments from free cumulants") {
  std::vector<double> semi(8, 0.0);
  semi[1] = 1.0;
  auto m = moments_from_free_cumulants(semi);
  std::vector<double> catalan{0, 1, 0, 2, 0, 5, 0, 14};
  for (int i = 0; i < 8; ++i) CHECK(m[i] == doctest::Approx(catalan[i]).epsilon(1e-14));

  auto mc = moments_from_free_cumulants({-0.6, 0, 0, 0, 0});
  for (int j = 1; j <= 5; ++j) CHECK(mc[j - 1] == doctest::Approx(std::pow(-0.6, j)).epsilon(1e-14));
}

TEST_CASE("free cumulant round trip on random input") {
  std::mt19937_64 g(12);
  std::normal_distribution<double> n(0.0, 0.5);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<double> k(8);
    for (double& x : k) x = n(g);
    auto back = free_cumulants_from_moments(moments_from_free_cumulants(k));
    for (int i = 0; i < 8; ++i) CHECK(std::abs(back[i] - k[i]) < 1e-12 * std::max(1.0, std::abs(k[i])));
  }
}

TEST_CASE("rectangular cumulant round trip and leading coefficient") {
  std::mt19937_64 g(13);
  std::uniform_real_distribution<double> u(0.0, 1.5);
  for (int rep = 0; rep < 20; ++rep) {
    const double gamma = std::uniform_real_distribution<double>(0.1, 1.0)(g);
    // even moments of a five-atom law
    std::vector<double> atoms(5);
    for (double& a : atoms) a = u(g);
    std::vector<double> m2(10, 0.0);
    for (int i = 0; i < 10; ++i)
      for (double a : atoms) m2[i] += std::pow(a, 2 * (i + 1)) / 5.0;
    auto k = rect_cumulants_from_moments(m2, gamma);
    CHECK(k[0] == m2[0]);
    auto back = rect_moments_from_cumulants(k, gamma);
    for (int i = 0; i < 10; ++i) CHECK(std::abs(back[i] - m2[i]) < 1e-10 * std::max(1.0, std::abs(m2[i])));
  }
}

TEST_CASE("closed-form laws have the expected cumulants") {
  auto ks = cumulants_of(SemicircleLaw(), 8);
  CHECK(std::abs(ks.at(2) - 1.0) < 1e-12);
  for (int j : {1, 3, 4, 5, 6, 7, 8}) CHECK(std::abs(ks.at(j)) < 1e-12);

  for (double gamma : {0.3, 0.75, 1.0}) {
    auto km = cumulants_of(MarchenkoPasturSqrtLaw(gamma), 6);
    CHECK(std::abs(km.at(1) - 1.0) < 1e-9);
    for (int j = 2; j <= 6; ++j) CHECK(std::abs(km.at(j)) < 1e-9);
  }

  auto uni = uniform_law(-std::sqrt(3.0), std::sqrt(3.0), SpectrumKind::symmetric);
  auto m = uni->moments(6);
  CHECK(m[1] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(m[3] == doctest::Approx(9.0 / 5.0).epsilon(1e-12));
  CHECK(m[5] == doctest::Approx(27.0 / 7.0).epsilon(1e-12));
  CHECK(std::abs(m[0]) < 1e-13);
}

TEST_CASE("cumulants estimated from a large semicircle sample") {
  SpectralSample s(goe_eigenvalues(1500, 14), SpectrumKind::symmetric);
  auto k = cumulants_of(s, 4);
  CHECK(std::abs(k.at(2) - 1.0) < 0.05);
  CHECK(std::abs(k.at(3)) < 0.1);
  CHECK(std::abs(k.at(4)) < 0.1);
}

TEST_CASE("rectangular cumulants of i.i.d. Gaussian singular values") {
  SpectralSample s(mp_singular_values(1500, 2000, 15), SpectrumKind::rectangular, 0.75);
  auto k = cumulants_of(s, 3);
  CHECK(std::abs(k.at(1) - 1.0) < 0.05);
  CHECK(std::abs(k.at(2)) < 0.1);
  CHECK(std::abs(k.at(3)) < 0.1);
}

TEST_CASE("Cauchy transform of small samples") {
  SpectralSample zero({0.0}, SpectrumKind::symmetric);
  CHECK(zero.cauchy(2.0) == doctest::Approx(0.5));
  CHECK(zero.cauchy_prime(2.0) == doctest::Approx(-0.25));
  SpectralSample two({-1.0, 1.0}, SpectrumKind::symmetric);
  CHECK(two.cauchy(2.0) == doctest::Approx(2.0 / 3.0));
  CHECK_THROWS_AS(two.cauchy(0.5), std::domain_error);
}

TEST_CASE("Cauchy transform of a semicircle sample") {
  SpectralSample s(goe_eigenvalues(1500, 16), SpectrumKind::symmetric);
  CHECK(std::abs(s.cauchy(2.5) - 0.5) < 0.01);
  CHECK(std::abs(invert_cauchy(s, 0.5) - 2.5) < 0.02);
  SemicircleLaw law;
  CHECK(law.cauchy(2.5) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(invert_cauchy(law, 0.5) == doctest::Approx(2.5).epsilon(1e-10));
  CHECK(invert_cauchy(law, -0.5, Side::lower) == doctest::Approx(-2.5).epsilon(1e-10));
}

TEST_CASE("inverse Cauchy transform") {
  SpectralSample zero({0.0}, SpectrumKind::symmetric);
  CHECK(invert_cauchy(zero, 1.0 / 3.0) == doctest::Approx(3.0).epsilon(1e-10));
  std::mt19937_64 g(17);
  std::vector<double> v(300);
  std::normal_distribution<double> n(0.0, 1.0);
  for (double& x : v) x = n(g);
  SpectralSample s(v, SpectrumKind::symmetric);
  for (double z : {s.upper_edge() + 0.3, s.upper_edge() + 2.0}) {
    double gz = s.cauchy(z);
    CHECK(std::abs(s.cauchy(invert_cauchy(s, gz)) - gz) < 1e-9);
  }
  double gl = s.cauchy(s.lower_edge() - 0.5);
  CHECK(std::abs(s.cauchy(invert_cauchy(s, gl, Side::lower)) - gl) < 1e-9);
}

TEST_CASE("D-transform of small samples") {
  SpectralSample zero({0.0}, SpectrumKind::rectangular, 1.0);
  auto d = d_transform(zero, 2.0);
  CHECK(d.phi == doctest::Approx(0.5));
  CHECK(d.phibar == doctest::Approx(0.5));
  CHECK(d.D == doctest::Approx(0.25));
  SpectralSample ones({1.0, 1.0}, SpectrumKind::rectangular, 1.0);
  auto d1 = d_transform(ones, 2.0);
  CHECK(d1.phi == doctest::Approx(2.0 / 3.0));
  CHECK(d1.phibar == doctest::Approx(2.0 / 3.0));
  CHECK(d1.D == doctest::Approx(4.0 / 9.0));
}

TEST_CASE("D-transform decreases and inverts") {
  std::mt19937_64 g(18);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  std::vector<double> v(200);
  for (double& x : v) x = u(g);
  SpectralSample s(v, SpectrumKind::rectangular, 0.6);
  double prev = d_transform(s, s.upper_edge() + 1e-3).D;
  for (int i = 1; i < 200; ++i) {
    auto d = d_transform(s, s.upper_edge() + 1e-3 + 0.05 * i);
    CHECK(d.D < prev);
    CHECK(d.Dprime < 0.0);
    prev = d.D;
  }
  for (double target : {0.05, 0.2}) {
    double z = invert_D(s, target);
    CHECK(std::abs(d_transform(s, z).D - target) < 1e-9);
  }
  SpectralSample zero({0.0}, SpectrumKind::rectangular, 1.0);
  CHECK(invert_D(zero, 1.0 / 4.0) == doctest::Approx(2.0).epsilon(1e-10));
}

TEST_CASE("inverse D-transform on Gaussian singular values") {
  SpectralSample s(mp_singular_values(750, 1000, 19), SpectrumKind::rectangular, 0.75);
  double z = invert_D(s, 0.25);
  CHECK(std::isfinite(z));
  CHECK(z > s.upper_edge());
}

TEST_CASE("coefficient tables under semicircle noise") {
  auto kappa = semicircle_cumulants(8);
  Vec S(1), R(1), Rp(1);
  S << 2.0;
  R << 0.5;
  Rp << 1.0;
  auto t = kappa_series_tables(kappa, R, Rp, S, 6);
  CHECK(t.kt(1)(0) == doctest::Approx(0.5));
  CHECK(t.kt(2)(0) == doctest::Approx(1.0));
  CHECK(std::abs(t.kt(3)(0)) < 1e-15);
  CHECK(t.kh(2)(0) == doctest::Approx(1.0));
  CHECK(std::abs(t.kh(3)(0)) < 1e-15);
}

TEST_CASE("coefficient tables for a point-mass law") {
  CumulantModel km;
  km.kappa = {1.3, 0, 0, 0, 0, 0};
  Vec S(2), R(2), Rp(2);
  S << 2.0, 3.0;
  R << 1.3, 1.3;
  Rp << 0.0, 0.0;
  auto t = kappa_series_tables(km, R, Rp, S, 5);
  CHECK(t.kt(1)(1) == doctest::Approx(1.3));
  for (int s = 2; s <= 5; ++s) CHECK(t.kt(s).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(t.kh(1)(0) == doctest::Approx(1.3));
}

TEST_CASE("table recursion equals the truncated direct series") {
  auto uni = uniform_law(-std::sqrt(3.0), std::sqrt(3.0), SpectrumKind::symmetric);
  const int J = 16;
  auto km = cumulants_of(*uni, J);
  const double theta = 2.0;
  double r = 0.0;
  for (int j = 0; j < J; ++j) r += km.at(j + 1) * std::pow(theta, -j);
  Vec S(1), R(1), Rp(1);
  S << theta;
  R << r;
  Rp << 0.0;
  auto t = kappa_series_tables(km, R, Rp, S, 6);
  for (int s = 1; s <= 6; ++s) {
    double direct = 0.0;
    for (int j = 0; j + s <= J; ++j) direct += km.at(j + s) * std::pow(theta, -j);
    CHECK(std::abs(t.kt(s)(0) - direct) < 1e-8);
  }
}

TEST_CASE("rectangular tables with Marchenko-Pastur cumulants") {
  auto km = marchenko_pastur_cumulants(6, 0.75);
  const double theta = 2.0;
  Vec S(1), R(1), Rp(1);
  S << theta;
  R << 1.0 / (theta * theta);
  Rp << 1.0;
  auto t = kappa_series_tables(km, R, Rp, S, 4);
  CHECK(t.kt(1)(0) == doctest::Approx(1.0));
  CHECK(std::abs(t.kt(2)(0)) < 1e-14);
}

TEST_CASE("sample validation") {
  CHECK_THROWS_AS(SpectralSample({}, SpectrumKind::symmetric), std::invalid_argument);
  CHECK_THROWS_AS(SpectralSample({1.0, NAN}, SpectrumKind::symmetric), std::invalid_argument);
  CHECK_THROWS_AS(SpectralSample({-1.0}, SpectrumKind::rectangular, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(SpectralSample({1.0}, SpectrumKind::rectangular, 1.5), std::invalid_argument);
  CHECK_NOTHROW(SpectralSample({1.0}, SpectrumKind::symmetric));
}
