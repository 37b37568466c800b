#include <doctest.h>

#include <cmath>

#include "oamp/amp_engine.hpp"
#include "oamp/metrics.hpp"
#include "oamp/model_gen.hpp"
#include "oamp/spectral_laws.hpp"

using namespace oamp;

namespace {

double metric_at(const Trajectory& tr, int t, const std::string& name) {
  for (const auto& p : tr.metrics)
    if (p.iteration == t && p.metric == name) return p.value;
  return std::nan("");
}

double row_rms(const Mat& a, const Mat& b) { return (a - b).norm() / std::sqrt(static_cast<double>(a.rows())); }

// u = tanh(last block), elementwise.
RowMap tanh_chain(int k) {
  return [k](const Mat& args, int) {
    RowDenoise out;
    Mat z = args.rightCols(k);
    out.U = z.array().tanh().matrix();
    out.mean_jacobian = Mat::Zero(k, args.cols());
    for (int c = 0; c < k; ++c)
      out.mean_jacobian(c, args.cols() - k + c) = (1.0 - out.U.col(c).array().square()).mean();
    return out;
  };
}

} // namespace

TEST_CASE("algorithm names round trip") {
  for (Algorithm a : {Algorithm::bayes_oamp, Algorithm::single_iterate, Algorithm::gaussian_bayes_amp, Algorithm::linear})
    CHECK(parse_algorithm(algorithm_name(a)) == a);
  CHECK_THROWS_AS(parse_algorithm("nope"), std::invalid_argument);
}

TEST_CASE("noiseless symmetric model is recovered in one step") {
  Rng rng(81);
  const int n = 200;
  Mat u = sample_signals(two_point_prior(), n, rng);
  SpikedInstance inst = build_spiked(u, Vec::Constant(1, 2.0), NoiseDraw{Mat::Zero(n, n), {}});
  for (Algorithm a : {Algorithm::bayes_oamp, Algorithm::single_iterate}) {
    AmpConfig cfg;
    cfg.algorithm = a;
    cfg.max_iters = 1;
    Trajectory tr = run_sym_spectral(inst.X, two_point_prior(), cfg, &u);
    REQUIRE(tr.completed == 1);
    CHECK(tr.estimates.theta(0) == doctest::Approx(2.0));
    CHECK(mse(tr.U[1], u) < 1e-28);
    CHECK(metric_at(tr, 1, "subspace_distance") < 1e-7);
    CHECK(metric_at(tr, 0, "mse_u") < 1e-20);
  }
}

TEST_CASE("noiseless rectangular model is recovered in one round") {
  Rng rng(82);
  const int m = 120, n = 160;
  Mat u = sample_signals(two_point_prior(), m, rng);
  Mat v = sample_signals(two_point_prior(), n, rng);
  SpikedInstance inst = build_spiked(u, v, Vec::Constant(1, 2.0), NoiseDraw{Mat::Zero(m, n), {}});
  AmpConfig cfg;
  cfg.max_iters = 1;
  Trajectory tr = run_rect_spectral(inst.X, two_point_prior(), two_point_prior(), cfg, &u, &v);
  REQUIRE(tr.completed == 1);
  CHECK(mse(tr.U.back(), u) < 1e-28);
  CHECK(mse(tr.V.back(), v) < 1e-28);
}

TEST_CASE("configuration checks") {
  Mat X = Mat::Identity(5, 5);
  AmpConfig cfg;
  cfg.algorithm = Algorithm::linear;
  CHECK_THROWS_AS(run_sym_spectral(X, two_point_prior(), cfg), std::invalid_argument);
  cfg.algorithm = Algorithm::bayes_oamp;
  cfg.cumulant_source = CumulantSource::exact;
  CHECK_THROWS_AS(run_sym_spectral(X, two_point_prior(), cfg), std::invalid_argument);
  cfg.cumulant_source = CumulantSource::estimated;
  cfg.max_iters = 0;
  CHECK_THROWS_AS(run_sym_spectral(X, two_point_prior(), cfg), std::invalid_argument);
  cfg.max_iters = 2;
  cfg.K = 2;
  CHECK_THROWS_AS(run_sym_spectral(X, two_point_prior(), cfg), std::invalid_argument);
}

TEST_CASE("Bayes-OAMP and single-iterate stay close under GOE noise") {
  Rng rng(83);
  const int n = 1500;
  Mat u = sample_signals(two_point_prior(), n, rng);
  SpikedInstance inst = build_spiked(u, Vec::Constant(1, 2.0), sample_noise(goe_spec(n), rng));
  SymSpikes sp = extract_sym_spikes(inst.X, 1, 0);
  AmpConfig cfg;
  cfg.max_iters = 5;
  Trajectory full = run_sym_spectral(inst.X, sp, two_point_prior(), cfg, &u);
  cfg.algorithm = Algorithm::single_iterate;
  Trajectory last = run_sym_spectral(inst.X, sp, two_point_prior(), cfg, &u);
  REQUIRE(full.completed == 5);
  REQUIRE(last.completed == 5);
  CHECK(row_rms(full.U[1], last.U[1]) == 0.0);
  // Gram fluctuations of order n^{-1/2} separate them afterwards.
  for (int t = 2; t <= 5; ++t) CHECK(row_rms(full.U[t], last.U[t]) < 0.05);
}

TEST_CASE("spectral runs track their state evolution") {
  Rng rng(84);
  const int n = 2000;
  Mat u = sample_signals(three_point_prior(), n, rng);
  Vec theta(2);
  theta << 2.0, 1.6;
  SpikedInstance inst = build_spiked(u, theta, sample_noise(uniform_sym_spec(n), rng));
  AmpConfig cfg;
  cfg.K = 2;
  cfg.max_iters = 4;
  Trajectory tr = run_sym_spectral(inst.X, three_point_prior(), cfg, &u);
  REQUIRE(tr.completed == 4);
  for (int t = 1; t <= 4; ++t) {
    CHECK(metric_at(tr, t, "se_cov_error") < 0.15);
    CHECK(metric_at(tr, t, "subspace_distance") < metric_at(tr, 0, "subspace_distance"));
  }
  REQUIRE(tr.se_states.size() == 5);
  CHECK(tr.se_states[3].sigma.rows() == 8);
  CHECK(tr.se_states[3].mu.rows() == 8);
}

TEST_CASE("negative outliers are handled") {
  Rng rng(85);
  const int n = 1000;
  Mat u = sample_signals(three_point_prior(), n, rng);
  Vec theta(2);
  theta << 2.0, -2.5;
  SpikedInstance inst = build_spiked(u, theta, sample_noise(goe_spec(n), rng));
  AmpConfig cfg;
  cfg.K = 1;
  cfg.k_minus = 1;
  cfg.max_iters = 3;
  Trajectory tr = run_sym_spectral(inst.X, three_point_prior(), cfg, &u);
  CHECK(tr.estimates.theta(1) < 0.0);
  CHECK(metric_at(tr, 3, "subspace_distance") < metric_at(tr, 0, "subspace_distance"));
}

TEST_CASE("rectangular algorithms agree under Gaussian noise") {
  Rng rng(86);
  const int m = 1500, n = 2000;
  Mat u = sample_signals(three_point_prior(), m, rng);
  Mat v = sample_signals(three_point_prior(), n, rng);
  Vec theta(2);
  theta << 2.0, 1.5;
  SpikedInstance inst = build_spiked(u, v, theta, sample_noise(iid_rect_spec(m, n), rng));
  RectSpikes sp = extract_rect_spikes(inst.X, 2);
  AmpConfig cfg;
  cfg.K = 2;
  cfg.max_iters = 5;
  std::vector<double> finals;
  for (Algorithm a : {Algorithm::bayes_oamp, Algorithm::single_iterate, Algorithm::gaussian_bayes_amp}) {
    cfg.algorithm = a;
    Trajectory tr = run_rect_spectral(inst.X, sp, three_point_prior(), three_point_prior(), cfg, &u, &v);
    finals.push_back(metric_at(tr, tr.completed, "subspace_distance"));
    CHECK(metric_at(tr, 1, "se_cov_error") < 0.15);
  }
  CHECK(std::abs(finals[0] - finals[1]) < 1e-2);
  CHECK(std::abs(finals[0] - finals[2]) < 1e-2);
}

TEST_CASE("independent initialization: first residual covariance") {
  Rng rng(87);
  const int n = 4000;
  NoiseSpec spec = uniform_sym_spec(n);
  spec.lo = -1.0;
  spec.hi = 2.0;
  NoiseDraw w = sample_noise(spec, rng);
  auto law = population_law(spec);
  CumulantModel kappa = cumulants_of(*law, 8);
  CHECK(kappa.at(1) == doctest::Approx(0.5));
  Mat U1 = gaussian_matrix(n, 2, rng);
  U1.col(1) += 0.5 * U1.col(0);
  Trajectory tr = run_sym_independent(w.W, U1, identity_chain(2), kappa, 1);
  Mat delta = U1.transpose() * U1 / double(n);
  CHECK((tr.se_states[0].sigma - kappa.at(2) * delta).norm() < 1e-12);
  CHECK(metric_at(tr, 1, "se_cov_error") < 0.1);
}

TEST_CASE("identity chain under semicircle cumulants is the classical recursion") {
  Rng rng(88);
  const int n = 300;
  Mat W = sample_noise(goe_spec(n), rng).W;
  Mat U1 = gaussian_matrix(n, 1, rng);
  Trajectory tr = run_sym_independent(W, U1, identity_chain(1), semicircle_cumulants(12), 4);
  // x_{t+1} = W x_t − x_{t−1}
  std::vector<Mat> x{U1, W * U1};
  for (int t = 2; t <= 4; ++t) x.push_back(W * x[t - 1] - x[t - 2]);
  for (int t = 1; t <= 4; ++t) CHECK((tr.F[t - 1] - x[t]).norm() < 1e-9 * x[t].norm());
}

TEST_CASE("independent initialization tracks exact state evolution") {
  Rng rng(89);
  const int n = 3000;
  NoiseSpec spec = uniform_sym_spec(n);
  NoiseDraw w = sample_noise(spec, rng);
  auto law = population_law(spec);
  Mat U1 = Mat::Ones(n, 1) + 0.5 * gaussian_matrix(n, 1, rng);
  Trajectory tr = run_sym_independent(w.W, U1, tanh_chain(1), cumulants_of(*law, 12), 3);
  REQUIRE(tr.completed == 3);
  for (int t = 1; t <= 3; ++t) CHECK(metric_at(tr, t, "se_cov_error") < 0.1);
}

TEST_CASE("rectangular independent initialization tracks state evolution") {
  Rng rng(90);
  const int m = 1500, n = 2000;
  Mat U1 = Mat::Ones(m, 1) + 0.5 * gaussian_matrix(m, 1, rng);
  NoiseSpec iid = iid_rect_spec(m, n);
  Trajectory tr = run_rect_independent(sample_noise(iid, rng).W, U1, tanh_chain(1), tanh_chain(1),
                                       cumulants_of(*population_law(iid), 12), 3);
  REQUIRE(tr.completed == 3);
  for (int t = 1; t <= 3; ++t) {
    CHECK(metric_at(tr, t, "se_cov_error") < 0.1);
    CHECK(metric_at(tr, t, "se_cov_error_v") < 0.1);
  }
  // With higher cumulants the left covariance is a small difference of large
  // terms at this size, so only the right side is checked.
  NoiseSpec beta = beta_rect_spec(m, n);
  Trajectory tb = run_rect_independent(sample_noise(beta, rng).W, U1, tanh_chain(1), tanh_chain(1),
                                       cumulants_of(*population_law(beta), 12), 3);
  REQUIRE(tb.completed == 3);
  for (int t = 1; t <= 3; ++t) CHECK(metric_at(tb, t, "se_cov_error_v") < 0.2);
}

TEST_CASE("diverging row maps are reported with their iteration") {
  Rng rng(91);
  const int n = 50;
  Mat W = sample_noise(goe_spec(n), rng).W;
  RowMap blow = [](const Mat& args, int) {
    RowDenoise out;
    out.U = args.rightCols(1) * 1e9;
    out.mean_jacobian = Mat::Zero(1, args.cols());
    return out;
  };
  try {
    run_sym_independent(W, Mat::Ones(n, 1), blow, semicircle_cumulants(10), 4);
    FAIL("expected a divergence");
  } catch (const AmpError& e) {
    CHECK(e.iteration == 2);
  }
}

TEST_CASE("linear AMP in the noiseless model") {
  Rng rng(92);
  const int n = 100;
  Mat u = sample_signals(two_point_prior(), n, rng);
  const double theta = 3.0;
  SpikedInstance inst = build_spiked(u, Vec::Constant(1, theta), NoiseDraw{Mat::Zero(n, n), {}});
  Mat z = gaussian_matrix(n, 1, rng);
  Mat U1 = (0.6 * u + 0.8 * z) / theta;
  CumulantModel zero;
  zero.kappa.assign(4, 0.0);
  Trajectory tr = run_linear_amp(inst.X, Vec::Constant(1, theta), zero, 2, U1, u);
  CHECK(subspace_distance(tr.F[1], u) < 1e-7);
}

TEST_CASE("linear AMP approaches the spectral estimate") {
  Rng rng(93);
  const int n = 1000;
  const double theta = 3.0;
  Mat u = sample_signals(two_point_prior(), n, rng);
  SpikedInstance inst = build_spiked(u, Vec::Constant(1, theta), sample_noise(goe_spec(n), rng));
  SymSpikes sp = extract_sym_spikes(inst.X, 1, 0);
  align_signs(sp.vectors, u);
  const double mu = std::sqrt(1.0 - 1.0 / (theta * theta));
  Mat U1 = (mu * u + std::sqrt(1.0 - mu * mu) * gaussian_matrix(n, 1, rng)) / theta;
  Trajectory tr = run_linear_amp(inst.X, Vec::Constant(1, theta), semicircle_cumulants(40), 30, U1, sp.vectors);
  REQUIRE(tr.completed == 30);
  CHECK(tr.linear_error.back() < 0.1);
  CHECK(tr.linear_error.back() < tr.linear_error.front());
}

TEST_CASE("linear AMP flags divergence") {
  const int n = 20;
  Mat X = 10.0 * Mat::Identity(n, n);
  CumulantModel zero;
  zero.kappa.assign(4, 0.0);
  Trajectory tr = run_linear_amp(X, Vec::Constant(1, 0.5), zero, 40, Mat::Ones(n, 1), Mat::Ones(n, 1));
  CHECK(tr.stop_reason == StopReason::diverged);
  CHECK(tr.completed < 40);
}
