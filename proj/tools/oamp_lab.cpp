#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "oamp/csv.hpp"
#include "oamp/experiment.hpp"
#include "oamp/spike_estimation.hpp"
#include "oamp/state_evolution.hpp"

namespace fs = std::filesystem;
using namespace oamp;

namespace {

struct RunArgs {
  std::string config, out, dump_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int trials = 0, threads = 0, n = 0, m = 0, max_iters = 0, dump_trial = -1;
};

void apply_overrides(ExperimentConfig& cfg, const RunArgs& a) {
  if (a.seed_set) cfg.base_seed = a.seed;
  if (a.trials > 0) cfg.trials = a.trials;
  if (a.max_iters > 0) cfg.max_iters = a.max_iters;
  if (a.n > 0 || a.m > 0) {
    const int n = a.n > 0 ? a.n : cfg.n;
    int m = a.m > 0 ? a.m : cfg.m;
    if (cfg.rectangular && a.m <= 0) m = std::max(1, static_cast<int>(std::lround(static_cast<double>(cfg.m) * n / cfg.n)));
    resize_config(cfg, n, m);
  }
}

void dump_trial(const ExperimentConfig& cfg, int trial, const std::string& dir) {
  fs::create_directories(dir);
  TrialResult r = run_trial(cfg, trial, true);
  SpikedInstance inst = make_instance(cfg, trial_setup(cfg, trial));
  write_matrix_csv((fs::path(dir) / "U_star.csv").string(), inst.U_star);
  if (inst.V_star.size()) write_matrix_csv((fs::path(dir) / "V_star.csv").string(), inst.V_star);
  const int K = static_cast<int>(cfg.theta_grid.front().size());
  for (const auto& [name, tr] : r.trajectories) {
    std::ofstream se(fs::path(dir) / (name + "_se.csv"), std::ios::binary);
    write_se_csv(se, tr.se_states, K);
    for (size_t t = 0; t < tr.F.size(); ++t)
      write_matrix_csv((fs::path(dir) / (name + "_F" + std::to_string(t) + ".csv")).string(), tr.F[t]);
    for (size_t t = 0; t < tr.G.size(); ++t)
      write_matrix_csv((fs::path(dir) / (name + "_G" + std::to_string(t) + ".csv")).string(), tr.G[t]);
  }
}

int cmd_run(const RunArgs& a) {
  ExperimentConfig cfg = load_config(a.config);
  apply_overrides(cfg, a);
  cfg.threads = resolve_threads(cfg.threads, std::getenv("OAMP_LAB_THREADS"), a.threads);
  const std::string out = !a.out.empty() ? a.out : (!cfg.output.empty() ? cfg.output : "-");

  if (a.dump_trial >= 0) {
    if (a.dump_dir.empty()) throw std::invalid_argument("--dump-trial needs --dump-dir");
    dump_trial(cfg, a.dump_trial, a.dump_dir);
  }

  ExperimentResult result = run_experiment(cfg);
  if (out == "-") {
    write_records_csv(std::cout, result.records);
  } else {
    if (fs::path(out).has_parent_path()) fs::create_directories(fs::path(out).parent_path());
    std::ofstream f(out, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + out);
    write_records_csv(f, result.records);
    std::ofstream t(out + ".trials.csv", std::ios::binary);
    write_trials_csv(t, cfg);
    std::ofstream s(out + ".summary.json", std::ios::binary);
    s << issues_json(cfg, result) << '\n';
    if (!f || !t || !s) throw std::runtime_error("write failed for " + out);
  }
  if (result.failures() > 0) {
    std::cerr << issues_json(cfg, result) << '\n';
    return 1;
  }
  return 0;
}

int cmd_spikes(const std::string& input, int k_plus, int k_minus, int rank) {
  Mat X = read_matrix_csv(input);
  std::cout << "component,lambda,theta,mu_pca,nu_pca,R,R_prime,theta_u,theta_v\n";
  SpikeEstimates e;
  if (rank > 0) {
    const bool transposed = X.rows() > X.cols();
    if (transposed) X.transposeInPlace();
    RectSpikes s = extract_rect_spikes(X, rank);
    const double gamma = static_cast<double>(X.rows()) / static_cast<double>(X.cols());
    e = estimate_rect(s, rect_noise_sample(s, gamma));
    if (transposed) {
      std::swap(e.mu_pca, e.nu_pca);
      std::swap(e.theta_u, e.theta_v);
    }
  } else {
    SymSpikes s = extract_sym_spikes(X, k_plus, k_minus);
    e = estimate_sym(s, sym_noise_sample(s));
  }
  for (int k = 0; k < e.size(); ++k) {
    std::cout << k + 1 << ',' << format_double(e.lambda_pca(k)) << ',' << format_double(e.theta(k)) << ','
              << format_double(e.mu_pca(k)) << ',' << format_double(e.nu_pca(k)) << ',' << format_double(e.R_val(k))
              << ',' << format_double(e.Rprime_val(k)) << ',' << format_double(e.theta_u(k)) << ','
              << format_double(e.theta_v(k)) << '\n';
  }
  return 0;
}

int cmd_cumulants(const std::string& input, int order, bool rect, double gamma) {
  SpectralSample s = read_spectrum_csv(input, rect ? SpectrumKind::rectangular : SpectrumKind::symmetric, gamma);
  CumulantModel c = cumulants_of(s, order);
  std::cout << "order,kappa\n";
  for (int j = 1; j <= order; ++j) std::cout << (rect ? 2 * j : j) << ',' << format_double(c.at(j)) << '\n';
  return 0;
}

int cmd_se_predict(const RunArgs& a, const std::string& algorithm, int grid_point, int samples,
                   const std::string& mse_out) {
  ExperimentConfig cfg = load_config(a.config);
  apply_overrides(cfg, a);
  if (grid_point < 0 || grid_point >= static_cast<int>(cfg.theta_grid.size()))
    throw std::invalid_argument("--grid-point out of range");
  const Algorithm alg = algorithm.empty() ? cfg.algorithms.front() : parse_algorithm(algorithm);
  if (alg != Algorithm::bayes_oamp && alg != Algorithm::single_iterate)
    throw std::invalid_argument("se-predict supports bayes_oamp and single_iterate");
  const DenoiserKind kind = alg == Algorithm::bayes_oamp ? DenoiserKind::full : DenoiserKind::last_block;
  const int N = samples > 0 ? samples : cfg.se_samples;
  const Vec& theta = cfg.theta_grid[static_cast<size_t>(grid_point)];
  std::unique_ptr<SpectralLaw> law = population_law(cfg.noise);
  SEPrediction p = cfg.rectangular
                       ? predict_rect_spectral(*law, theta, *cfg.u_prior, *cfg.v_prior, cfg.max_iters, kind, N, cfg.base_seed)
                       : predict_sym_spectral(*law, theta, *cfg.u_prior, cfg.max_iters, kind, N, cfg.base_seed);
  const int K = static_cast<int>(theta.size());
  if (a.out.empty() || a.out == "-") {
    write_se_csv(std::cout, p.states, K);
  } else {
    std::ofstream f(a.out, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + a.out);
    write_se_csv(f, p.states, K);
  }
  if (!mse_out.empty()) {
    std::vector<MetricRecord> recs;
    for (size_t t = 0; t < p.mse_u.size(); ++t) recs.push_back({0, static_cast<int>(t), algorithm_name(alg), "mse_u", p.mse_u[t]});
    for (size_t t = 0; t < p.mse_v.size(); ++t) recs.push_back({0, static_cast<int>(t), algorithm_name(alg), "mse_v", p.mse_v[t]});
    std::ofstream f(mse_out, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + mse_out);
    write_records_csv(f, recs);
  }
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectrally initialized AMP experiments"};
  app.require_subcommand(1);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Run an experiment config and write the metric log");
  run_cmd->add_option("--config", run.config, "JSON experiment config")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--seed", run.seed, "Base seed override")->each([&](const std::string&) { run.seed_set = true; });
  run_cmd->add_option("--trials", run.trials, "Trials per grid point");
  run_cmd->add_option("--threads", run.threads, "Worker threads");
  run_cmd->add_option("--out", run.out, "Output CSV ('-' for stdout)");
  run_cmd->add_option("--n", run.n, "Override n");
  run_cmd->add_option("--m", run.m, "Override m (rectangular)");
  run_cmd->add_option("--max-iters", run.max_iters, "Override the iteration count");
  run_cmd->add_option("--dump-trial", run.dump_trial, "Also write iterates and SE states of this trial");
  run_cmd->add_option("--dump-dir", run.dump_dir, "Directory for --dump-trial");

  std::string spikes_in;
  int k_plus = 1, k_minus = 0, rank = 0;
  auto* spikes_cmd = app.add_subcommand("spikes", "Estimate spike parameters of a data matrix");
  spikes_cmd->add_option("--input", spikes_in, "Matrix CSV")->required()->check(CLI::ExistingFile);
  spikes_cmd->add_option("--k-plus", k_plus, "Top outliers (symmetric)");
  spikes_cmd->add_option("--k-minus", k_minus, "Bottom outliers (symmetric)");
  spikes_cmd->add_option("--rank", rank, "Treat the input as rectangular with this rank");

  std::string spec_in;
  int order = 8;
  bool rect = false;
  double gamma = 1.0;
  auto* cum_cmd = app.add_subcommand("cumulants", "Free cumulants of an empirical spectrum");
  cum_cmd->add_option("--input", spec_in, "Spectrum CSV (one value per line)")->required()->check(CLI::ExistingFile);
  cum_cmd->add_option("--order", order, "Number of cumulants")->check(CLI::PositiveNumber);
  cum_cmd->add_flag("--rect", rect, "Singular values of a rectangular matrix");
  cum_cmd->add_option("--gamma", gamma, "Aspect ratio m/n (rectangular)");

  RunArgs se;
  std::string se_alg, mse_out;
  int grid_point = 0, samples = 0;
  auto* se_cmd = app.add_subcommand("se-predict", "Population state evolution under the exact noise law");
  se_cmd->add_option("--config", se.config, "JSON experiment config")->required()->check(CLI::ExistingFile);
  se_cmd->add_option("--algorithm", se_alg, "bayes_oamp or single_iterate");
  se_cmd->add_option("--grid-point", grid_point, "Index into theta_grid");
  se_cmd->add_option("--samples", samples, "Monte Carlo sample size");
  se_cmd->add_option("--seed", se.seed, "Seed")->each([&](const std::string&) { se.seed_set = true; });
  se_cmd->add_option("--max-iters", se.max_iters, "Override the iteration count");
  se_cmd->add_option("--out", se.out, "SE CSV ('-' for stdout)");
  se_cmd->add_option("--mse-out", mse_out, "Predicted MSE in the metric-log format");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run_cmd) return cmd_run(run);
    if (*spikes_cmd) return cmd_spikes(spikes_in, k_plus, k_minus, rank);
    if (*cum_cmd) return cmd_cumulants(spec_in, order, rect, gamma);
    if (*se_cmd) return cmd_se_predict(se, se_alg, grid_point, samples, mse_out);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
