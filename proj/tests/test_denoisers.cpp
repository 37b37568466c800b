#include <doctest.h>

#include <cmath>

#include "oamp/denoisers.hpp"
#include "test_util.hpp"

using namespace oamp;
using oamp::test::random_mat;
using oamp::test::random_spd;

namespace {

// Direct sum over atoms of the Gaussian likelihood.
Vec enumerate_posterior_mean(const Vec& f, const Mat& mu, const Mat& sigma, const DiscretePrior& prior) {
  Eigen::LLT<Mat> llt(sigma);
  double z = 0.0;
  Vec num = Vec::Zero(prior.dim());
  for (int a = 0; a < prior.size(); ++a) {
    Vec r = f - mu * prior.atoms()[a];
    double like = prior.weights()[a] * std::exp(-0.5 * r.dot(llt.solve(r)));
    z += like;
    num += like * prior.atoms()[a];
  }
  return num / z;
}

Mat finite_difference_jacobian(const Vec& f, const DenoiserContext& ctx, const DiscretePrior& prior, double h) {
  Mat J(prior.dim(), f.size());
  for (int j = 0; j < f.size(); ++j) {
    Vec fp = f, fm = f;
    fp(j) += h;
    fm(j) -= h;
    J.col(j) = (posterior_mean(fp, ctx, prior) - posterior_mean(fm, ctx, prior)) / (2.0 * h);
  }
  return J;
}

DiscretePrior random_prior(int K, int atoms, std::mt19937_64& g) {
  std::uniform_real_distribution<double> u(0.1, 1.0);
  std::vector<Vec> a;
  std::vector<double> w;
  double tot = 0.0;
  for (int i = 0; i < atoms; ++i) {
    a.push_back(random_mat(K, 1, g));
    w.push_back(u(g));
    tot += w.back();
  }
  for (double& x : w) x /= tot;
  w.back() = 1.0 - std::accumulate(w.begin(), w.end() - 1, 0.0);
  return DiscretePrior(a, w);
}

} // namespace

TEST_CASE("standard priors") {
  auto two = two_point_prior();
  CHECK(two.size() == 2);
  CHECK(two.second_moment()(0, 0) == doctest::Approx(1.0));
  auto three = three_point_prior();
  CHECK(three.dim() == 2);
  CHECK((three.second_moment() - Mat::Identity(2, 2)).norm() < 1e-14);
  // atoms sorted lexicographically
  CHECK(three.atoms()[0](0) < three.atoms()[1](0));
  CHECK(three.atoms()[1](0) < three.atoms()[2](0));
}

TEST_CASE("prior validation") {
  CHECK_THROWS_AS(DiscretePrior({Vec::Ones(1)}, {0.5}), std::invalid_argument);
  CHECK_THROWS_AS(DiscretePrior({Vec::Ones(1), Vec::Ones(2)}, {0.5, 0.5}), std::invalid_argument);
  CHECK_THROWS_AS(DiscretePrior({Vec::Ones(1), -Vec::Ones(1)}, {1.5, -0.5}), std::invalid_argument);
  CHECK_THROWS_AS(DiscretePrior({Vec::Constant(1, 2.0)}, {1.0}, true), std::invalid_argument);
}

TEST_CASE("a single-atom prior is a constant denoiser") {
  std::mt19937_64 g(31);
  Vec atom(2);
  atom << 0.3, -1.2;
  DiscretePrior prior({atom}, {1.0});
  DenoiserContext ctx(random_mat(2, 2, g), random_spd(2, g));
  for (int rep = 0; rep < 5; ++rep) {
    Vec f = random_mat(2, 1, g);
    CHECK((posterior_mean(f, ctx, prior) - atom).norm() == 0.0);
    CHECK(posterior_jacobian(f, ctx, prior).norm() == 0.0);
  }
}

TEST_CASE("two-point prior has the hyperbolic tangent form") {
  const double m = 1.3, s2 = 0.7;
  DenoiserContext ctx(Mat::Constant(1, 1, m), Mat::Constant(1, 1, s2), 0.0);
  for (double f : {-2.0, -0.3, 0.0, 0.8, 3.1}) {
    Vec fv = Vec::Constant(1, f);
    double t = std::tanh(m * f / s2);
    CHECK(posterior_mean(fv, ctx, two_point_prior())(0) == doctest::Approx(t).epsilon(1e-14));
    CHECK(posterior_jacobian(fv, ctx, two_point_prior())(0, 0) ==
          doctest::Approx(m / s2 * (1.0 - t * t)).epsilon(1e-12));
    CHECK(single_iterate_posterior_mean(fv, ctx.B() * s2, Mat::Constant(1, 1, s2), two_point_prior())(0) ==
          doctest::Approx(t).epsilon(1e-12));
  }
}

TEST_CASE("three-point prior matches direct enumeration") {
  std::mt19937_64 g(32);
  auto prior = three_point_prior();
  for (int rep = 0; rep < 50; ++rep) {
    const int d = 2 * (1 + rep % 3);
    Mat mu = random_mat(d, 2, g, 0.5);
    Mat sigma = random_spd(d, g);
    Vec f = random_mat(d, 1, g);
    DenoiserContext ctx(mu, sigma, 0.0);
    Vec direct = enumerate_posterior_mean(f, mu, sigma, prior);
    CHECK((posterior_mean(f, ctx, prior) - direct).norm() < 1e-12);
  }
}

TEST_CASE("Jacobian matches central differences") {
  std::mt19937_64 g(33);
  for (int rep = 0; rep < 30; ++rep) {
    const int K = 1 + rep % 2, blocks = 1 + rep % 3;
    auto prior = random_prior(K, 2 + rep % 4, g);
    Mat mu = random_mat(K * blocks, K, g, 0.6);
    DenoiserContext ctx(mu, random_spd(K * blocks, g), 0.0);
    Vec f = random_mat(K * blocks, 1, g);
    Mat J = posterior_jacobian(f, ctx, prior);
    Mat fd = finite_difference_jacobian(f, ctx, prior, 1e-5);
    CHECK((J - fd).norm() <= 1e-5 * std::max(J.norm(), 1e-3));
  }
}

TEST_CASE("row-wise denoising agrees with the per-row functions") {
  std::mt19937_64 g(34);
  auto prior = three_point_prior();
  Mat mu = random_mat(4, 2, g, 0.8);
  DenoiserContext ctx(mu, random_spd(4, g));
  Mat F = random_mat(40, 4, g);
  RowDenoise out = denoise_rows(F, ctx, prior);
  Mat jac = Mat::Zero(2, 4);
  for (int i = 0; i < 40; ++i) {
    Vec f = F.row(i).transpose();
    CHECK((out.U.row(i).transpose() - posterior_mean(f, ctx, prior)).norm() < 1e-13);
    jac += posterior_jacobian(f, ctx, prior);
  }
  CHECK((out.mean_jacobian - jac / 40.0).norm() < 1e-12);
}

TEST_CASE("last-block context ignores earlier inputs") {
  std::mt19937_64 g(35);
  auto prior = three_point_prior();
  Mat mu = random_mat(6, 2, g);
  Mat sigma = random_spd(6, g);
  DenoiserContext ctx = DenoiserContext::last_block(mu, sigma);
  CHECK(ctx.first_used() == 4);
  Vec f = random_mat(6, 1, g);
  Vec f2 = f;
  f2.head(4).setRandom();
  CHECK((posterior_mean(f, ctx, prior) - posterior_mean(f2, ctx, prior)).norm() == 0.0);
  Mat J = posterior_jacobian(f, ctx, prior);
  CHECK(J.leftCols(4).norm() == 0.0);
  Vec direct = enumerate_posterior_mean(f.tail(2), mu.bottomRows(2), sigma.bottomRightCorner(2, 2), prior);
  CHECK((posterior_mean(f, ctx, prior) - direct).norm() < 1e-8);
}

TEST_CASE("the newest iterate is sufficient under a martingale covariance") {
  // f_s = Q_s S u + z_s with Cov(z_s, z_r) = Q_min(s,r) and increasing Q_s.
  std::mt19937_64 g(36);
  for (int K : {1, 2}) {
    auto prior = K == 1 ? two_point_prior() : three_point_prior();
    const int T = 4;
    std::vector<Mat> Q;
    Mat acc = Mat::Zero(K, K);
    for (int s = 0; s < T; ++s) {
      acc += 0.3 * random_spd(K, g);
      Q.push_back(acc);
    }
    Vec S = Vec::LinSpaced(K, 1.5, 2.0);
    Mat mu(T * K, K), sigma(T * K, T * K);
    for (int s = 0; s < T; ++s) {
      mu.middleRows(s * K, K) = Q[s] * S.asDiagonal();
      for (int r = 0; r < T; ++r) sigma.block(s * K, r * K, K, K) = Q[std::min(s, r)];
    }
    DenoiserContext full(mu, sigma, 0.0);
    for (int rep = 0; rep < 20; ++rep) {
      Vec f = random_mat(T * K, 1, g);
      Vec last = single_iterate_posterior_mean(f.tail(K), mu.bottomRows(K), Q.back(), prior);
      CHECK((posterior_mean(f, full, prior) - last).norm() < 1e-6);
    }
  }
}

TEST_CASE("noiseless channel uses an absolute ridge") {
  DenoiserContext ctx(Mat::Identity(1, 1), Mat::Zero(1, 1));
  CHECK(ctx.ridge() > 0.0);
  CHECK(posterior_mean(Vec::Constant(1, 0.9), ctx, two_point_prior())(0) == doctest::Approx(1.0));
  CHECK(posterior_mean(Vec::Constant(1, -0.2), ctx, two_point_prior())(0) == doctest::Approx(-1.0));
}

TEST_CASE("linear denoiser") {
  Vec f(2), S(2);
  f << 2, 3;
  S << 2, 3;
  CHECK(linear_denoiser(f, S) == Vec::Ones(2));
  CHECK(linear_denoiser(f, Vec::Ones(2)) == f);
  Mat F(2, 2);
  F << 2, 3, 4, 6;
  Mat expect(2, 2);
  expect << 1, 1, 2, 2;
  CHECK(linear_denoiser_rows(F, S) == expect);
  // u = f·S⁻¹ is linear with Jacobian S⁻¹.
  Vec e0 = Vec::Unit(2, 0);
  CHECK(linear_denoiser(e0, S) == Vec::Unit(2, 0) / 2.0);
  CHECK_THROWS_AS(linear_denoiser(f, Vec::Zero(2)), std::invalid_argument);
}
