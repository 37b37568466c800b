#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <set>
#include <sstream>

#include "oamp/csv.hpp"
#include "oamp/experiment.hpp"
#include "oamp/metrics.hpp"
#include "test_util.hpp"

using namespace oamp;
using oamp::test::random_mat;

namespace {

std::string small_config(const std::string& extra, const std::string& noise = R"({"family": "goe"})") {
  return R"({"schema_version": 1, "name": "t", "n": 300, "noise": )" + noise +
         R"(, "theta": [2.0, 1.6], "prior": "three_point",
             "algorithms": ["bayes_oamp", "single_iterate", "gaussian_bayes_amp"],
             "trials": 2, "max_iters": 3, "base_seed": 5)" +
         extra + "}";
}

std::string csv_of(const ExperimentResult& r) {
  std::ostringstream os;
  write_records_csv(os, r.records);
  return os.str();
}

} // namespace

TEST_CASE("subspace distance") {
  std::mt19937_64 g(101);
  Mat a = random_mat(20, 2, g);
  CHECK(subspace_distance(a, a) < 1e-14);
  Mat mixed = a * (Mat(2, 2) << 1.0, 2.0, -0.5, 3.0).finished();
  CHECK(subspace_distance(a, mixed) < 1e-14);
  Vec e1 = Vec::Unit(5, 0), e2 = Vec::Unit(5, 1);
  CHECK(subspace_distance(e1, e2) == doctest::Approx(1.0));
  for (int rep = 0; rep < 20; ++rep) {
    Mat A = random_mat(5, 2, g), B = random_mat(5, 2, g);
    Mat Pa = A * (A.transpose() * A).inverse() * A.transpose();
    Mat Pb = B * (B.transpose() * B).inverse() * B.transpose();
    Eigen::JacobiSVD<Mat> svd(Pa - Pb);
    CHECK(subspace_distance(A, B) == doctest::Approx(svd.singularValues()(0)).epsilon(1e-10));
  }
  CHECK_THROWS_AS(subspace_distance(Mat::Zero(5, 1), e1), std::invalid_argument);
}

TEST_CASE("mean squared error and alignment") {
  std::mt19937_64 g(102);
  Mat u = random_mat(50, 2, g);
  CHECK(mse(u, u) == 0.0);
  Mat q = Eigen::HouseholderQR<Mat>(u).householderQ() * Mat::Identity(50, 2) * std::sqrt(50.0);
  CHECK(mse(Mat::Zero(50, 2), q) == doctest::Approx(2.0));
  CHECK(align_sq(-3.0 * u, u) == doctest::Approx(1.0));
  CHECK(align_sq(Mat::Zero(50, 2), u) == 0.0);
}

TEST_CASE("covariance errors") {
  std::mt19937_64 g(103);
  Mat z = random_mat(200000, 2, g);
  CHECK(cov_error(z, Mat::Identity(2, 2)) < 0.02);
  Mat truth = random_mat(200000, 2, g);
  Mat f = truth * (Mat(2, 2) << 0.8, 0.1, 0.0, 0.6).finished() + z * 0.5;
  CHECK(residual_cov_error(f, truth, 0.25 * Mat::Identity(2, 2)) < 0.02);
  CHECK(cov_error(Mat::Zero(10, 1), Mat::Zero(1, 1)) == 0.0);
}

TEST_CASE("doubles print with round-trip precision") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 12345.678901234567}) CHECK(std::stod(format_double(v)) == v);
  CHECK(format_double(0.5) == "0.5");
}

TEST_CASE("config parsing") {
  ExperimentConfig c = parse_config(small_config(""));
  CHECK(c.n == 300);
  CHECK(c.theta_grid.size() == 1);
  CHECK(c.algorithms.size() == 3);
  CHECK(c.u_prior->dim() == 2);
  CHECK(c.total_trials() == 2);

  CHECK_THROWS_AS(parse_config("{"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config(R"({"n": 10})"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config(small_config(R"(, "schema_version": 2)")), std::invalid_argument);
  CHECK_THROWS_AS(parse_config(small_config("", R"({"family": "nope"})")), std::invalid_argument);
  CHECK_THROWS_AS(parse_config(small_config(R"(, "trials": 0)")), std::invalid_argument);
  std::string bad_theta = small_config("");
  bad_theta.replace(bad_theta.find("[2.0, 1.6]"), 10, "[1.6, 2.0]");
  CHECK_THROWS_AS(parse_config(bad_theta), std::invalid_argument);
  std::string linear = small_config("");
  linear.replace(linear.find("\"gaussian_bayes_amp\""), 20, "\"linear\"");
  CHECK_THROWS_AS(parse_config(linear), std::invalid_argument);
}

TEST_CASE("shipped presets parse") {
  const std::filesystem::path dir = std::filesystem::path(OAMP_SOURCE_DIR) / "configs";
  std::set<std::string> names;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    ExperimentConfig c = load_config(entry.path().string());
    names.insert(c.name);
    CHECK(c.trials == 50);
    CHECK(c.algorithms.size() == 3);
    CHECK(c.n == 4000);
    if (c.rectangular) CHECK(c.m == 3000);
  }
  for (const char* n : {"fig1-goe", "fig1-uniform", "fig1-beta", "fig3-theta-sweep", "fig4-mp", "fig4-uniform",
                        "fig4-beta"})
    CHECK(names.count(n) == 1);
  ExperimentConfig sweep = load_config((dir / "fig3-theta-sweep.json").string());
  CHECK(sweep.theta_grid.size() == 20);
  CHECK(sweep.theta_grid.front()(0) == doctest::Approx(0.1));
  CHECK(sweep.theta_grid.back()(0) == doctest::Approx(2.0));
}

TEST_CASE("thread count precedence") {
  CHECK(resolve_threads(3, nullptr, 0) == 3);
  CHECK(resolve_threads(3, "5", 0) == 5);
  CHECK(resolve_threads(3, "5", 2) == 2);
  CHECK(resolve_threads(3, "", 0) == 3);
  CHECK_THROWS_AS(resolve_threads(3, "abc", 0), std::invalid_argument);
  CHECK_THROWS_AS(resolve_threads(3, "0", 0), std::invalid_argument);
}

TEST_CASE("trial seeds and grid points") {
  ExperimentConfig c = parse_config(small_config(R"(, "theta_grid": [[2.0, 1.6], [3.0, 1.0]])"));
  CHECK(c.total_trials() == 4);
  CHECK(trial_setup(c, 1).grid_point == 0);
  CHECK(trial_setup(c, 2).grid_point == 1);
  CHECK(trial_setup(c, 3).theta(0) == 3.0);
  CHECK(trial_setup(c, 0).seed != trial_setup(c, 1).seed);
  CHECK_THROWS_AS(trial_setup(c, 4), std::invalid_argument);
}

TEST_CASE("noiseless one-step run") {
  std::string zeros = "[";
  for (int i = 0; i < 300; ++i) zeros += i ? ",0" : "0";
  zeros += "]";
  ExperimentConfig c = parse_config(small_config(R"(, "max_iters": 1, "trials": 1)",
                                                 R"({"family": "haar_diag", "law": "custom", "values": )" + zeros + "}"));
  c.algorithms = {Algorithm::bayes_oamp};
  ExperimentResult r = run_experiment(c);
  CHECK(r.failures() == 0);
  std::set<int> iters;
  for (const auto& rec : r.records) {
    iters.insert(rec.iteration);
    if (rec.iteration == 1 && rec.metric == "subspace_distance") CHECK(rec.value < 1e-10);
  }
  CHECK(iters == std::set<int>{0, 1});
}

TEST_CASE("runs are reproducible and thread-independent") {
  ExperimentConfig c = parse_config(small_config(""));
  const std::string a = csv_of(run_experiment(c));
  CHECK(a == csv_of(run_experiment(c)));
  c.threads = 2;
  CHECK(a == csv_of(run_experiment(c)));
  c.base_seed = 6;
  CHECK(a != csv_of(run_experiment(c)));

  std::istringstream is(a);
  std::string line;
  std::getline(is, line);
  CHECK(line == "trial,iteration,algorithm,metric,value");
  std::set<std::string> metrics;
  while (std::getline(is, line)) {
    std::vector<std::string> cols;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cols.push_back(cell);
    REQUIRE(cols.size() == 5);
    metrics.insert(cols[3]);
  }
  for (const char* m : {"subspace_distance", "mse_u", "align_sq", "se_cov_error"}) CHECK(metrics.count(m) == 1);
}

TEST_CASE("rectangular runs log both sides") {
  ExperimentConfig c = parse_config(R"({"schema_version": 1, "model": "rect", "n": 400, "m": 300,
      "noise": {"family": "haar_diag", "law": "centered_beta"}, "theta": [2.0, 1.5], "prior": "three_point",
      "algorithms": ["bayes_oamp"], "trials": 1, "max_iters": 3, "base_seed": 1})");
  ExperimentResult r = run_experiment(c);
  CHECK(r.failures() == 0);
  std::set<std::string> metrics;
  for (const auto& rec : r.records) metrics.insert(rec.metric);
  CHECK(metrics.count("subspace_distance_v") == 1);
  CHECK(metrics.count("mse_v") == 1);
}

TEST_CASE("subcritical trials are reported, not failed") {
  ExperimentConfig c = parse_config(small_config(R"(, "trials": 1)"));
  c.theta_grid = {Vec::Constant(2, 0.2)};
  c.theta_grid[0](1) = 0.1;
  ExperimentResult r = run_experiment(c);
  CHECK(r.failures() == 0);
  REQUIRE(!r.issues.empty());
  CHECK(r.issues.front().kind == "subcritical");
  const std::string js = issues_json(c, r);
  CHECK(js.find("\"subcritical\"") != std::string::npos);
}

TEST_CASE("trials sidecar") {
  ExperimentConfig c = parse_config(small_config(R"(, "theta_grid": [[2.0, 1.6], [3.0, 1.0]])"));
  std::ostringstream os;
  write_trials_csv(os, c);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "trial,grid_point,seed,theta_1,theta_2");
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  CHECK(rows == 4);
}

TEST_CASE("resizing keeps the noise in sync") {
  ExperimentConfig c = parse_config(small_config(""));
  resize_config(c, 120, 120);
  CHECK(c.noise.n == 120);
  Rng rng(1);
  CHECK(make_instance(c, trial_setup(c, 0)).X.rows() == 120);
}
