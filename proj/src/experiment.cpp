#include "oamp/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "oamp/csv.hpp"

namespace oamp {

using nlohmann::json;

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument("config: " + what);
}

Vec to_vec(const json& j, const std::string& what) {
  require(j.is_array() && !j.empty(), what + " must be a non-empty array");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (size_t i = 0; i < j.size(); ++i) {
    require(j[i].is_number(), what + " entries must be numbers");
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

DiscretePrior parse_prior(const json& j) {
  if (j.is_string()) return parse_prior_name(j.get<std::string>());
  require(j.is_object() && j.contains("atoms") && j.contains("weights"), "prior needs a name or atoms and weights");
  std::vector<Vec> atoms;
  for (const json& a : j.at("atoms")) atoms.push_back(to_vec(a, "prior atom"));
  std::vector<double> weights;
  for (const json& w : j.at("weights")) {
    require(w.is_number(), "prior weights must be numbers");
    weights.push_back(w.get<double>());
  }
  return DiscretePrior(std::move(atoms), std::move(weights), j.value("normalized", false));
}

NoiseSpec parse_noise(const json& j, bool rect, int n, int m) {
  require(j.is_object() && j.contains("family"), "noise needs a family");
  const std::string family = j.at("family").get<std::string>();
  NoiseSpec s;
  if (family == "goe") {
    require(!rect, "goe noise needs a symmetric model");
    s = goe_spec(n);
  } else if (family == "iid_gaussian_rect") {
    require(rect, "iid_gaussian_rect noise needs a rectangular model");
    s = iid_rect_spec(m, n);
  } else if (family == "haar_diag") {
    const std::string law = j.value("law", std::string());
    if (law == "uniform") {
      s = rect ? uniform_rect_spec(m, n) : uniform_sym_spec(n);
      s.lo = j.value("lo", s.lo);
      s.hi = j.value("hi", s.hi);
    } else if (law == "centered_beta") {
      s = rect ? beta_rect_spec(m, n) : centered_beta_sym_spec(n);
      s.a = j.value("a", s.a);
      s.b = j.value("b", s.b);
      s.scale = j.value("scale", s.scale);
      s.shift = j.value("shift", s.shift);
    } else if (law == "custom") {
      s = rect ? uniform_rect_spec(m, n) : uniform_sym_spec(n);
      s.law = DiagLaw::custom;
      require(j.contains("values"), "custom law needs values");
      s.custom = j.at("values").get<std::vector<double>>();
    } else {
      require(false, "unknown haar_diag law '" + law + "'");
    }
  } else {
    require(false, "unknown noise family '" + family + "'");
  }
  return s;
}

void check_theta_order(const Vec& theta, bool rect) {
  for (Eigen::Index k = 0; k < theta.size(); ++k) require(theta(k) != 0.0, "theta entries must be nonzero");
  if (rect) {
    for (Eigen::Index k = 0; k < theta.size(); ++k) require(theta(k) > 0.0, "rectangular theta must be positive");
    for (Eigen::Index k = 1; k < theta.size(); ++k)
      require(theta(k) <= theta(k - 1), "rectangular theta must be non-increasing");
    return;
  }
  // positive entries descending, then negative entries ascending
  Eigen::Index k = 0;
  for (; k < theta.size() && theta(k) > 0.0; ++k)
    if (k > 0) require(theta(k) <= theta(k - 1), "positive theta must be non-increasing");
  for (Eigen::Index j = k; j < theta.size(); ++j) {
    require(theta(j) < 0.0, "negative theta must follow the positive ones");
    if (j > k) require(theta(j) >= theta(j - 1), "negative theta must be non-decreasing");
  }
}

int count_positive(const Vec& theta) {
  int c = 0;
  for (Eigen::Index k = 0; k < theta.size(); ++k) c += theta(k) > 0.0;
  return c;
}

} // namespace

DiscretePrior parse_prior_name(const std::string& name) {
  if (name == "two_point") return two_point_prior();
  if (name == "three_point") return three_point_prior();
  throw std::invalid_argument("config: unknown prior '" + name + "'");
}

ExperimentConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  try {
    require(j.is_object(), "top level must be an object");
    require(j.contains("schema_version"), "missing schema_version");
    ExperimentConfig c;
    c.schema_version = j.at("schema_version").get<int>();
    require(c.schema_version == 1, "unsupported schema_version " + std::to_string(c.schema_version));
    c.name = j.value("name", std::string());
    const std::string model = j.value("model", std::string("sym"));
    require(model == "sym" || model == "rect", "model must be sym or rect");
    c.rectangular = model == "rect";
    c.n = j.at("n").get<int>();
    c.m = c.rectangular ? j.at("m").get<int>() : c.n;
    require(c.n >= 1 && c.m >= 1, "dimensions must be positive");
    require(!c.rectangular || c.m <= c.n, "rectangular model needs m <= n");
    c.noise = parse_noise(j.at("noise"), c.rectangular, c.n, c.m);

    if (j.contains("theta_grid")) {
      for (const json& t : j.at("theta_grid")) c.theta_grid.push_back(t.is_number() ? Vec::Constant(1, t.get<double>())
                                                                                     : to_vec(t, "theta_grid entry"));
    } else {
      require(j.contains("theta"), "missing theta or theta_grid");
      c.theta_grid.push_back(to_vec(j.at("theta"), "theta"));
    }
    require(!c.theta_grid.empty(), "theta_grid is empty");
    const Eigen::Index K = c.theta_grid.front().size();
    for (const Vec& t : c.theta_grid) {
      require(t.size() == K, "every theta must have the same length");
      check_theta_order(t, c.rectangular);
    }

    require(j.contains("prior"), "missing prior");
    c.u_prior = parse_prior(j.at("prior"));
    require(c.u_prior->dim() == K, "prior dimension must match theta length");
    if (c.rectangular) {
      c.v_prior = j.contains("v_prior") ? parse_prior(j.at("v_prior")) : *c.u_prior;
      require(c.v_prior->dim() == K, "v_prior dimension must match theta length");
    }

    require(j.contains("algorithms") && j.at("algorithms").is_array() && !j.at("algorithms").empty(),
            "algorithms must be a non-empty array");
    for (const json& a : j.at("algorithms")) {
      Algorithm alg = parse_algorithm(a.get<std::string>());
      require(alg != Algorithm::linear, "the linear algorithm is not a harness algorithm");
      c.algorithms.push_back(alg);
    }
    c.trials = j.value("trials", 1);
    c.max_iters = j.value("max_iters", 10);
    c.base_seed = j.value("base_seed", std::uint64_t{0});
    c.output = j.value("output", std::string());
    c.threads = j.value("threads", 1);
    const std::string source = j.value("cumulant_source", std::string("estimated"));
    require(source == "estimated" || source == "exact", "cumulant_source must be estimated or exact");
    c.cumulant_source = source == "exact" ? CumulantSource::exact : CumulantSource::estimated;
    c.early_stop_ratio = j.value("early_stop_ratio", 1e-9);
    c.schur_early_stop = j.value("schur_early_stop", false);
    c.se_samples = j.value("se_samples", 200000);
    require(c.trials >= 1, "trials must be >= 1");
    require(c.max_iters >= 1, "max_iters must be >= 1");
    require(c.threads >= 1, "threads must be >= 1");
    require(c.se_samples >= 100, "se_samples must be >= 100");
    require(c.early_stop_ratio >= 0.0, "early_stop_ratio must be >= 0");
    require(K <= c.m, "rank exceeds the dimension");
    return c;
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void resize_config(ExperimentConfig& cfg, int n, int m) {
  require(n >= 1 && m >= 1 && (!cfg.rectangular || m <= n), "invalid resize");
  require(cfg.noise.law != DiagLaw::custom || cfg.noise.family != NoiseFamily::haar_diag,
          "a custom spectrum cannot be resized");
  cfg.n = n;
  cfg.m = cfg.rectangular ? m : n;
  cfg.noise.n = n;
  cfg.noise.m = cfg.rectangular ? m : 0;
}

int ExperimentResult::failures() const {
  return static_cast<int>(std::count_if(issues.begin(), issues.end(),
                                        [](const TrialIssue& i) { return i.kind == "failure"; }));
}

TrialSetup trial_setup(const ExperimentConfig& cfg, int trial) {
  require(trial >= 0 && trial < cfg.total_trials(), "trial index out of range");
  const int grid = trial / cfg.trials;
  return {trial, grid, cfg.theta_grid[static_cast<size_t>(grid)], mix_seed(cfg.base_seed, static_cast<std::uint64_t>(trial))};
}

SpikedInstance make_instance(const ExperimentConfig& cfg, const TrialSetup& setup) {
  Rng rng(setup.seed);
  if (!cfg.rectangular) {
    Mat U = sample_signals(*cfg.u_prior, cfg.n, rng);
    return build_spiked(U, setup.theta, sample_noise(cfg.noise, rng));
  }
  Mat U = sample_signals(*cfg.u_prior, cfg.m, rng);
  Mat V = sample_signals(*cfg.v_prior, cfg.n, rng);
  return build_spiked(U, V, setup.theta, sample_noise(cfg.noise, rng));
}

TrialResult run_trial(const ExperimentConfig& cfg, int trial, bool keep_trajectories) {
  TrialResult out;
  const TrialSetup setup = trial_setup(cfg, trial);
  SpikedInstance inst;
  try {
    inst = make_instance(cfg, setup);
  } catch (const std::exception& e) {
    out.issues.push_back({trial, "", -1, "failure", std::string("instance generation: ") + e.what()});
    return out;
  }
  std::unique_ptr<SpectralLaw> law;
  if (cfg.cumulant_source == CumulantSource::exact) law = population_law(cfg.noise);
  const int K = static_cast<int>(setup.theta.size());
  const int k_plus = cfg.rectangular ? K : count_positive(setup.theta);
  std::optional<SymSpikes> sym_spikes;
  std::optional<RectSpikes> rect_spikes;
  try {
    if (cfg.rectangular)
      rect_spikes = extract_rect_spikes(inst.X, K);
    else
      sym_spikes = extract_sym_spikes(inst.X, k_plus, K - k_plus);
  } catch (const std::exception& e) {
    out.issues.push_back({trial, "", -1, "failure", std::string("outlier extraction: ") + e.what()});
    return out;
  }

  for (Algorithm alg : cfg.algorithms) {
    AmpConfig ac;
    ac.algorithm = alg;
    ac.max_iters = cfg.max_iters;
    ac.early_stop_ratio = cfg.early_stop_ratio;
    ac.schur_early_stop = cfg.schur_early_stop;
    ac.cumulant_source = cfg.cumulant_source;
    ac.exact_law = law.get();
    ac.seed = setup.seed;
    const char* name = algorithm_name(alg);
    try {
      Trajectory tr;
      ac.K = k_plus;
      ac.k_minus = K - k_plus;
      if (cfg.rectangular)
        tr = run_rect_spectral(inst.X, *rect_spikes, *cfg.u_prior, *cfg.v_prior, ac, &inst.U_star, &inst.V_star);
      else
        tr = run_sym_spectral(inst.X, *sym_spikes, *cfg.u_prior, ac, &inst.U_star);
      for (const MetricPoint& p : tr.metrics) out.records.push_back({trial, p.iteration, name, p.metric, p.value});
      if (keep_trajectories) out.trajectories.emplace_back(name, std::move(tr));
    } catch (const SubcriticalError& e) {
      out.issues.push_back({trial, name, -1, "subcritical", e.what()});
    } catch (const AmpError& e) {
      out.issues.push_back({trial, name, e.iteration, "failure", e.what()});
    } catch (const std::exception& e) {
      out.issues.push_back({trial, name, -1, "failure", e.what()});
    }
  }
  return out;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  const int total = cfg.total_trials();
  std::vector<TrialResult> results(static_cast<size_t>(total));
  const int workers = std::max(1, std::min(cfg.threads, total));
  if (workers == 1) {
    for (int t = 0; t < total; ++t) results[static_cast<size_t>(t)] = run_trial(cfg, t);
  } else {
    std::mutex mtx;
    int next = 0;
    auto work = [&]() {
      for (;;) {
        int t;
        {
          std::lock_guard<std::mutex> lock(mtx);
          if (next >= total) return;
          t = next++;
        }
        TrialResult r = run_trial(cfg, t);
        results[static_cast<size_t>(t)] = std::move(r);
      }
    };
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (std::thread& th : pool) th.join();
  }
  ExperimentResult out;
  for (TrialResult& r : results) {
    out.records.insert(out.records.end(), r.records.begin(), r.records.end());
    out.issues.insert(out.issues.end(), r.issues.begin(), r.issues.end());
  }
  return out;
}

void write_records_csv(std::ostream& out, const std::vector<MetricRecord>& records) {
  out << "trial,iteration,algorithm,metric,value\n";
  for (const MetricRecord& r : records)
    out << r.trial << ',' << r.iteration << ',' << r.algorithm << ',' << r.metric << ',' << format_double(r.value)
        << '\n';
}

void write_trials_csv(std::ostream& out, const ExperimentConfig& cfg) {
  const Eigen::Index K = cfg.theta_grid.front().size();
  out << "trial,grid_point,seed";
  for (Eigen::Index k = 0; k < K; ++k) out << ",theta_" << k + 1;
  out << '\n';
  for (int t = 0; t < cfg.total_trials(); ++t) {
    TrialSetup s = trial_setup(cfg, t);
    out << t << ',' << s.grid_point << ',' << s.seed;
    for (Eigen::Index k = 0; k < K; ++k) out << ',' << format_double(s.theta(k));
    out << '\n';
  }
}

std::string issues_json(const ExperimentConfig& cfg, const ExperimentResult& result) {
  json j;
  j["name"] = cfg.name;
  j["trials"] = cfg.total_trials();
  j["failures"] = result.failures();
  j["issues"] = json::array();
  for (const TrialIssue& i : result.issues) {
    json e{{"trial", i.trial}, {"algorithm", i.algorithm}, {"kind", i.kind}, {"message", i.message}};
    if (i.iteration >= 0) e["iteration"] = i.iteration;
    j["issues"].push_back(e);
  }
  return j.dump(2);
}

int resolve_threads(int config_threads, const char* env_value, int cli_threads) {
  if (cli_threads > 0) return cli_threads;
  if (env_value && *env_value) {
    char* end = nullptr;
    const long v = std::strtol(env_value, &end, 10);
    if (*end != '\0' || v < 1 || v > 4096) throw std::invalid_argument("OAMP_LAB_THREADS must be a positive integer");
    return static_cast<int>(v);
  }
  return std::max(1, config_threads);
}

} // namespace oamp
