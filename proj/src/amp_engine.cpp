#include "oamp/amp_engine.hpp"

#include <cmath>
#include <limits>

#include "oamp/metrics.hpp"
#include "oamp/onsager.hpp"

namespace oamp {

const char* algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::bayes_oamp: return "bayes_oamp";
    case Algorithm::single_iterate: return "single_iterate";
    case Algorithm::gaussian_bayes_amp: return "gaussian_bayes_amp";
    case Algorithm::linear: return "linear";
  }
  return "unknown";
}

Algorithm parse_algorithm(const std::string& name) {
  if (name == "bayes_oamp") return Algorithm::bayes_oamp;
  if (name == "single_iterate") return Algorithm::single_iterate;
  if (name == "gaussian_bayes_amp") return Algorithm::gaussian_bayes_amp;
  if (name == "linear") return Algorithm::linear;
  throw std::invalid_argument("unknown algorithm: " + name);
}

namespace {

constexpr double kDivergence = 1e6;

int table_order(int T) { return 2 * (T + 3); }

void check_config(const AmpConfig& cfg) {
  if (cfg.max_iters < 1) throw std::invalid_argument("amp: max_iters must be >= 1");
  if (cfg.K < 0 || cfg.k_minus < 0 || cfg.rank() < 1) throw std::invalid_argument("amp: rank must be >= 1");
  if (cfg.algorithm == Algorithm::linear)
    throw std::invalid_argument("amp: the linear algorithm runs through run_linear_amp");
  if (cfg.cumulant_source == CumulantSource::exact && !cfg.exact_law)
    throw std::invalid_argument("amp: exact cumulants need a noise law");
}

struct Setup {
  SpikeEstimates est;
  CumulantModel kappa;
  KappaSeriesTables tables;
};

Setup sym_setup(const SymSpikes& spikes, const AmpConfig& cfg) {
  const int order = table_order(cfg.max_iters);
  Setup s;
  if (cfg.algorithm == Algorithm::gaussian_bayes_amp) {
    s.kappa = semicircle_cumulants(order + 2);
    s.est = estimate_sym_semicircle(spikes.lambdas);
  } else if (cfg.cumulant_source == CumulantSource::exact) {
    s.kappa = cumulants_of(*cfg.exact_law, order + 2);
    s.est = estimate_sym_at(spikes.lambdas, *cfg.exact_law);
  } else {
    SpectralSample noise = sym_noise_sample(spikes);
    s.kappa = cumulants_of(noise, order + 2);
    s.est = estimate_sym(spikes, noise, cfg.edge_margin);
  }
  s.tables = kappa_series_tables(s.kappa, s.est.R_val, s.est.Rprime_val, s.est.theta, order);
  return s;
}

Setup rect_setup(const RectSpikes& spikes, const AmpConfig& cfg, double gamma) {
  const int order = table_order(cfg.max_iters);
  Setup s;
  if (cfg.algorithm == Algorithm::gaussian_bayes_amp) {
    s.kappa = marchenko_pastur_cumulants(order + 2, gamma);
    s.est = estimate_rect_mp(spikes.lambdas, gamma);
  } else if (cfg.cumulant_source == CumulantSource::exact) {
    s.kappa = cumulants_of(*cfg.exact_law, order + 2);
    s.est = estimate_rect_at(spikes.lambdas, *cfg.exact_law);
  } else {
    SpectralSample noise = rect_noise_sample(spikes, gamma);
    s.kappa = cumulants_of(noise, order + 2);
    s.est = estimate_rect(spikes, noise, cfg.edge_margin);
  }
  s.tables = kappa_series_tables(s.kappa, s.est.R_val, s.est.Rprime_val, s.est.theta, order);
  return s;
}

DenoiserContext context(const Mat& mu, const Mat& sigma, const AmpConfig& cfg) {
  if (cfg.algorithm == Algorithm::bayes_oamp) return DenoiserContext(mu, sigma, cfg.ridge_ratio);
  return DenoiserContext::last_block(mu, sigma, cfg.ridge_ratio);
}

// Noise variance negligible next to the weakest spike: Σ is roundoff and the
// relative stopping threshold would fire on it.
bool noiseless(const CumulantModel& kappa, const DiagScaler& theta) {
  const double var = kappa.kind == SpectrumKind::symmetric ? kappa.at(2) : kappa.at(1);
  return std::sqrt(std::abs(var)) <= 1e-6 * theta.cwiseAbs().minCoeff();
}

bool should_stop(const Mat& sigma, const AmpConfig& cfg, int K) {
  if (cfg.algorithm == Algorithm::bayes_oamp)
    return check_early_stop(sigma, cfg.early_stop_ratio, K, cfg.schur_early_stop);
  return check_early_stop(sigma.bottomRightCorner(K, K), cfg.early_stop_ratio);
}

void guard(const Mat& denoised, const Mat& debiased, int t) {
  if (!denoised.allFinite() || !debiased.allFinite()) throw AmpError(t, "non-finite iterate");
  if (denoised.norm() / std::sqrt(static_cast<double>(denoised.rows())) > kDivergence)
    throw AmpError(t, "iterate norm exceeds the divergence bound");
}

Mat hstack(const std::vector<Mat>& blocks, size_t from, size_t to) {
  const Eigen::Index rows = blocks[from].rows(), k = blocks[from].cols();
  Mat out(rows, static_cast<Eigen::Index>(to - from) * k);
  for (size_t i = from; i < to; ++i) out.middleCols(static_cast<Eigen::Index>(i - from) * k, k) = blocks[i];
  return out;
}

Mat append_block(const Mat& top, const Mat& block) {
  Mat out(top.rows() + block.rows(), top.cols());
  out << top, block;
  return out;
}

Mat diag(const Vec& v) { return v.asDiagonal(); }

Mat one_minus_sq(const Vec& v) { return (1.0 - v.array().square()).matrix().asDiagonal(); }

void record(Trajectory& tr, int t, const char* name, double value) {
  if (std::isfinite(value)) tr.metrics.push_back({t, name, value});
}

void sym_metrics(Trajectory& tr, int t, const Mat& estimate, const Mat& F, const Mat& sigma_last, const Mat& truth) {
  record(tr, t, "subspace_distance", subspace_distance(estimate, truth));
  record(tr, t, "mse_u", mse(estimate, truth));
  record(tr, t, "align_sq", align_sq(estimate, truth));
  record(tr, t, "se_cov_error", residual_cov_error(F, truth, sigma_last));
}

struct RectTruth {
  const Mat* u;
  const Mat* v;
};

void rect_metrics(Trajectory& tr, int t, const Mat& u_est, const Mat& v_est, const Mat& F, const Mat& sigma_last,
                  const RectTruth& truth) {
  if (truth.u) {
    record(tr, t, "subspace_distance", subspace_distance(u_est, *truth.u));
    record(tr, t, "mse_u", mse(u_est, *truth.u));
    record(tr, t, "align_sq", align_sq(u_est, *truth.u));
    record(tr, t, "se_cov_error", residual_cov_error(F, *truth.u, sigma_last));
  }
  if (truth.v) {
    record(tr, t, "subspace_distance_v", subspace_distance(v_est, *truth.v));
    record(tr, t, "mse_v", mse(v_est, *truth.v));
  }
}

} // namespace

Trajectory run_sym_spectral(const Mat& X, const DiscretePrior& prior, const AmpConfig& cfg, const Mat* u_truth) {
  check_config(cfg);
  return run_sym_spectral(X, extract_sym_spikes(X, cfg.K, cfg.k_minus), prior, cfg, u_truth);
}

Trajectory run_sym_spectral(const Mat& X, SymSpikes spikes, const DiscretePrior& prior, const AmpConfig& cfg,
                            const Mat* u_truth) {
  check_config(cfg);
  const int K = cfg.rank();
  const Eigen::Index n = X.rows();
  if (X.cols() != n) throw std::invalid_argument("run_sym_spectral: X must be square");
  if (prior.dim() != K) throw std::invalid_argument("run_sym_spectral: prior dimension must equal the rank");
  if (u_truth && (u_truth->rows() != n || u_truth->cols() != K))
    throw std::invalid_argument("run_sym_spectral: truth has the wrong shape");

  if (spikes.k_plus != cfg.K || spikes.k_minus != cfg.k_minus || spikes.vectors.rows() != n)
    throw std::invalid_argument("run_sym_spectral: outliers do not match the configuration");
  if (u_truth) align_signs(spikes.vectors, *u_truth);
  Setup s = sym_setup(spikes, cfg);
  const DiagScaler& S = s.est.theta;
  const double dn = static_cast<double>(n);

  Trajectory tr;
  tr.estimates = s.est;
  tr.kappa = s.kappa;
  Mat mu = diag(s.est.mu_pca);
  Mat sigma = one_minus_sq(s.est.mu_pca);
  tr.F.push_back(spikes.vectors);
  tr.U.push_back(spikes.vectors * S.cwiseInverse().asDiagonal());
  tr.se_states.push_back({0, mu, sigma, Mat(), Mat()});
  if (u_truth) sym_metrics(tr, 0, tr.F[0], tr.F[0], sigma, *u_truth);
  DerivativeLedger ledger{K, {Mat()}, {}};

  for (int t = 1; t <= cfg.max_iters; ++t) {
    try {
      RowDenoise rd = denoise_rows(hstack(tr.F, 0, static_cast<size_t>(t)), context(mu, sigma, cfg), prior);
      ledger.u.push_back(rd.mean_jacobian);
      tr.U.push_back(std::move(rd.U));
      const Mat& Ut = tr.U.back();
      BlockMatrix phi = assemble_phi_sym_spectral(ledger, t);
      BlockMatrix b = debias_sym_spectral(phi, s.kappa, s.tables);
      Mat Ft = X * Ut;
      for (int j = 0; j <= t; ++j) Ft.noalias() -= tr.U[j] * b.block(t, j).transpose();
      guard(Ut, Ft, t);
      tr.F.push_back(std::move(Ft));
      sigma = se_sigma_sym(phi, gram_table(tr.U, t + 1, dn), s.kappa, s.tables).dense();
      mu = append_block(mu, se_mu_block(martingale_moment(Ut), S, MeanMode::sym));
      if (!sigma.allFinite() || !mu.allFinite()) throw AmpError(t, "non-finite state evolution");
    } catch (const AmpError&) {
      throw;
    } catch (const std::exception& e) {
      throw AmpError(t, e.what());
    }
    tr.se_states.push_back({t, mu, sigma, Mat(), Mat()});
    tr.completed = t;
    if (u_truth) sym_metrics(tr, t, tr.U[t], tr.F[t], sigma.bottomRightCorner(K, K), *u_truth);
    if (t < cfg.max_iters && !noiseless(s.kappa, S) && should_stop(sigma, cfg, K)) {
      tr.stop_reason = StopReason::early_stop;
      break;
    }
  }
  return tr;
}

Trajectory run_rect_spectral(const Mat& X, const DiscretePrior& u_prior, const DiscretePrior& v_prior,
                             const AmpConfig& cfg, const Mat* u_truth, const Mat* v_truth) {
  check_config(cfg);
  if (X.rows() > X.cols()) throw std::invalid_argument("run_rect_spectral: need m <= n");
  return run_rect_spectral(X, extract_rect_spikes(X, cfg.K), u_prior, v_prior, cfg, u_truth, v_truth);
}

Trajectory run_rect_spectral(const Mat& X, RectSpikes spikes, const DiscretePrior& u_prior,
                             const DiscretePrior& v_prior, const AmpConfig& cfg, const Mat* u_truth,
                             const Mat* v_truth) {
  check_config(cfg);
  if (cfg.k_minus != 0) throw std::invalid_argument("run_rect_spectral: k_minus applies to symmetric models only");
  const int K = cfg.K;
  const Eigen::Index m = X.rows(), n = X.cols();
  if (m > n) throw std::invalid_argument("run_rect_spectral: need m <= n");
  if (u_prior.dim() != K || v_prior.dim() != K)
    throw std::invalid_argument("run_rect_spectral: prior dimension must equal the rank");
  if (u_truth && (u_truth->rows() != m || u_truth->cols() != K))
    throw std::invalid_argument("run_rect_spectral: left truth has the wrong shape");
  if (v_truth && (v_truth->rows() != n || v_truth->cols() != K))
    throw std::invalid_argument("run_rect_spectral: right truth has the wrong shape");
  const double dm = static_cast<double>(m), dn = static_cast<double>(n), gamma = dm / dn;

  if (spikes.lambdas.size() != K || spikes.left_vectors.rows() != m || spikes.right_vectors.rows() != n)
    throw std::invalid_argument("run_rect_spectral: outliers do not match the configuration");
  if (u_truth && v_truth) {
    align_signs(spikes, *u_truth, *v_truth);
  } else if (u_truth || v_truth) {
    throw std::invalid_argument("run_rect_spectral: supply both truths or neither");
  }
  Setup s = rect_setup(spikes, cfg, gamma);
  const DiagScaler& S = s.est.theta;
  const RectTruth truth{u_truth, v_truth};

  Trajectory tr;
  tr.estimates = s.est;
  tr.kappa = s.kappa;
  Mat mu = diag(s.est.mu_pca);
  Mat sigma = one_minus_sq(s.est.mu_pca);
  Mat nu = append_block(diag(s.est.nu_pca), diag(s.est.nu_pca));
  const Mat om = one_minus_sq(s.est.nu_pca);
  Mat omega(2 * K, 2 * K);
  omega << om, om, om, om;

  const Mat& F_pca = spikes.left_vectors;
  const Mat& G_pca = spikes.right_vectors;
  Mat U0 = F_pca * s.est.theta_u.cwiseInverse().asDiagonal();
  tr.F.push_back(F_pca);
  tr.G = {G_pca, G_pca};
  tr.U = {U0, U0};
  tr.V.push_back(G_pca * s.est.theta_v.cwiseInverse().asDiagonal());
  tr.se_states.push_back({0, mu, sigma, nu, omega});
  rect_metrics(tr, 0, F_pca, G_pca, F_pca, sigma, truth);
  DerivativeLedger ledger{K, {Mat(), Mat()}, {Mat()}};

  for (int t = 1; t <= cfg.max_iters; ++t) {
    Mat mu_next, sigma_next;
    try {
      // V_t from G_1..G_t
      const Eigen::Index d = static_cast<Eigen::Index>(t) * K;
      RowDenoise rv = denoise_rows(hstack(tr.G, 1, static_cast<size_t>(t) + 1),
                                   context(nu.bottomRows(d), omega.bottomRightCorner(d, d), cfg), v_prior);
      ledger.v.push_back(rv.mean_jacobian);
      tr.V.push_back(std::move(rv.U));
      const Mat& Vt = tr.V.back();
      BlockMatrix phi = assemble_phi_rect_spectral(ledger, s.est.theta_u, t);
      BlockMatrix psi = assemble_psi_rect_spectral(ledger, s.est.theta_v, t);
      RectCoefficients co = debias_rect_spectral(phi, psi, s.kappa, s.tables, gamma);
      Mat Ft = X * Vt;
      for (int j = 0; j <= t; ++j) Ft.noalias() -= tr.U[j] * co.a.block(t, j).transpose();
      guard(Vt, Ft, t);
      tr.F.push_back(std::move(Ft));
      sigma_next = se_sigma_rect(phi, psi, gram_table(tr.U, t + 1, dm), gram_table(tr.V, t + 1, dn), s.kappa,
                                 s.tables).dense();
      mu_next = append_block(mu, se_mu_block(martingale_moment(Vt), S, MeanMode::rect_mu, gamma));
      if (!sigma_next.allFinite() || !mu_next.allFinite()) throw AmpError(t, "non-finite state evolution");
    } catch (const AmpError&) {
      throw;
    } catch (const std::exception& e) {
      throw AmpError(t, e.what());
    }
    if (!noiseless(s.kappa, S) && should_stop(sigma_next, cfg, K)) {
      tr.stop_reason = StopReason::early_stop;
      break;
    }
    sigma = std::move(sigma_next);
    mu = std::move(mu_next);

    try {
      // U_{t+1} from F_0..F_t
      RowDenoise ru = denoise_rows(hstack(tr.F, 0, static_cast<size_t>(t) + 1), context(mu, sigma, cfg), u_prior);
      ledger.u.push_back(ru.mean_jacobian);
      tr.U.push_back(std::move(ru.U));
      const Mat& Un = tr.U.back();
      BlockMatrix phi = assemble_phi_rect_spectral(ledger, s.est.theta_u, t + 1);
      BlockMatrix psi = assemble_psi_rect_spectral(ledger, s.est.theta_v, t + 1);
      RectCoefficients co = debias_rect_spectral(phi, psi, s.kappa, s.tables, gamma);
      Mat Gn = X.transpose() * Un;
      for (int j = 0; j <= t; ++j) Gn.noalias() -= tr.V[j] * co.b.block(t + 1, j).transpose();
      guard(Un, Gn, t);
      tr.G.push_back(std::move(Gn));
      omega = se_omega_rect(phi, psi, gram_table(tr.U, t + 2, dm), gram_table(tr.V, t + 2, dn), s.kappa, s.tables,
                            gamma).dense();
      nu = append_block(nu, se_mu_block(martingale_moment(Un), S, MeanMode::rect_nu, gamma));
      if (!omega.allFinite() || !nu.allFinite()) throw AmpError(t, "non-finite state evolution");
    } catch (const AmpError&) {
      throw;
    } catch (const std::exception& e) {
      throw AmpError(t, e.what());
    }
    tr.se_states.push_back({t, mu, sigma, nu, omega});
    tr.completed = t;
    rect_metrics(tr, t, tr.U[t + 1], tr.V[t], tr.F[t], sigma.bottomRightCorner(K, K), truth);
    // G_0 duplicates G_1 and is never a denoiser input.
    const Eigen::Index used = static_cast<Eigen::Index>(t + 1) * K;
    if (t < cfg.max_iters && !noiseless(s.kappa, S) && should_stop(omega.bottomRightCorner(used, used), cfg, K)) {
      tr.stop_reason = StopReason::early_stop;
      break;
    }
  }
  return tr;
}

RowMap identity_chain(int k) {
  return [k](const Mat& args, int) {
    RowDenoise out;
    out.U = args.rightCols(k);
    out.mean_jacobian = Mat::Zero(k, args.cols());
    out.mean_jacobian.rightCols(k).setIdentity();
    return out;
  };
}

namespace {

void check_map_output(const RowDenoise& rd, Eigen::Index rows, int k, Eigen::Index arg_cols, int t) {
  if (rd.U.rows() != rows || rd.U.cols() != k || rd.mean_jacobian.rows() != k || rd.mean_jacobian.cols() != arg_cols)
    throw AmpError(t, "row map returned the wrong shape");
}

} // namespace

Trajectory run_sym_independent(const Mat& W, const Mat& U1, const RowMap& u_map, const CumulantModel& kappa, int T) {
  if (T < 1) throw std::invalid_argument("run_sym_independent: T must be >= 1");
  const Eigen::Index n = W.rows();
  if (W.cols() != n || U1.rows() != n || U1.cols() < 1) throw std::invalid_argument("run_sym_independent: shape mismatch");
  const int K = static_cast<int>(U1.cols());
  const double dn = static_cast<double>(n);
  Trajectory tr;
  tr.kappa = kappa;
  tr.U.push_back(U1);
  DerivativeLedger ledger{K, {Mat()}, {}};
  for (int t = 1; t <= T; ++t) {
    try {
      BlockMatrix phi = assemble_phi(ledger, t);
      BlockMatrix b = debias_sym_independent(phi, kappa);
      Mat Z = W * tr.U[t - 1];
      for (int s = 1; s <= t; ++s) Z.noalias() -= tr.U[s - 1] * b.block(t - 1, s - 1).transpose();
      guard(tr.U[t - 1], Z, t);
      tr.F.push_back(std::move(Z));
      Mat sigma = se_sigma_sym_independent(phi, gram_table(tr.U, t, dn), kappa).dense();
      tr.se_states.push_back({t, Mat(), sigma, Mat(), Mat()});
      record(tr, t, "se_cov_error", cov_error(tr.F.back(), sigma.bottomRightCorner(K, K)));
      tr.completed = t;
      if (t == T) break;
      Mat args = hstack(tr.F, 0, tr.F.size());
      RowDenoise rd = u_map(args, t + 1);
      check_map_output(rd, n, K, args.cols(), t);
      ledger.u.push_back(rd.mean_jacobian);
      tr.U.push_back(std::move(rd.U));
    } catch (const AmpError&) {
      throw;
    } catch (const std::exception& e) {
      throw AmpError(t, e.what());
    }
  }
  return tr;
}

Trajectory run_rect_independent(const Mat& W, const Mat& U1, const RowMap& u_map, const RowMap& v_map,
                                const CumulantModel& kappa, int T) {
  if (T < 1) throw std::invalid_argument("run_rect_independent: T must be >= 1");
  const Eigen::Index m = W.rows(), n = W.cols();
  if (U1.rows() != m || U1.cols() < 1) throw std::invalid_argument("run_rect_independent: shape mismatch");
  const int K = static_cast<int>(U1.cols());
  const double dm = static_cast<double>(m), dn = static_cast<double>(n), gamma = dm / dn;
  Trajectory tr;
  tr.kappa = kappa;
  tr.U.push_back(U1);
  DerivativeLedger ledger{K, {Mat()}, {}};
  for (int t = 1; t <= T; ++t) {
    try {
      BlockMatrix phi = assemble_phi(ledger, t);
      BlockMatrix psi = assemble_psi(ledger, t);
      RectCoefficients co = debias_rect_independent(phi, psi, kappa, gamma);
      Mat Z = W.transpose() * tr.U[t - 1];
      for (int s = 1; s < t; ++s) Z.noalias() -= tr.V[s - 1] * co.b.block(t - 1, s - 1).transpose();
      guard(tr.U[t - 1], Z, t);
      tr.G.push_back(std::move(Z));
      Mat omega = se_omega_rect_independent(phi, psi, gram_table(tr.U, t, dm), gram_table(tr.V, t, dn, K), kappa, gamma)
                      .dense();

      Mat zargs = hstack(tr.G, 0, tr.G.size());
      RowDenoise rv = v_map(zargs, t);
      check_map_output(rv, n, K, zargs.cols(), t);
      ledger.v.push_back(rv.mean_jacobian);
      tr.V.push_back(std::move(rv.U));

      psi = assemble_psi(ledger, t);
      co = debias_rect_independent(phi, psi, kappa, gamma);
      Mat Y = W * tr.V[t - 1];
      for (int s = 1; s <= t; ++s) Y.noalias() -= tr.U[s - 1] * co.a.block(t - 1, s - 1).transpose();
      guard(tr.V[t - 1], Y, t);
      tr.F.push_back(std::move(Y));
      Mat sigma = se_sigma_rect_independent(phi, psi, gram_table(tr.U, t, dm), gram_table(tr.V, t, dn), kappa).dense();
      tr.se_states.push_back({t, Mat(), sigma, Mat(), omega});
      record(tr, t, "se_cov_error", cov_error(tr.F.back(), sigma.bottomRightCorner(K, K)));
      record(tr, t, "se_cov_error_v", cov_error(tr.G.back(), omega.bottomRightCorner(K, K)));
      tr.completed = t;
      if (t == T) break;

      Mat yargs = hstack(tr.F, 0, tr.F.size());
      RowDenoise ru = u_map(yargs, t + 1);
      check_map_output(ru, m, K, yargs.cols(), t);
      ledger.u.push_back(ru.mean_jacobian);
      tr.U.push_back(std::move(ru.U));
    } catch (const AmpError&) {
      throw;
    } catch (const std::exception& e) {
      throw AmpError(t, e.what());
    }
  }
  return tr;
}

Trajectory run_linear_amp(const Mat& X, const DiagScaler& S, const CumulantModel& kappa, int tau, const Mat& U1,
                          const Mat& F_pca) {
  if (tau < 1) throw std::invalid_argument("run_linear_amp: tau must be >= 1");
  const Eigen::Index n = X.rows();
  if (X.cols() != n || U1.rows() != n || U1.cols() != S.size() || F_pca.rows() != n || F_pca.cols() != S.size())
    throw std::invalid_argument("run_linear_amp: shape mismatch");
  const double root_n = std::sqrt(static_cast<double>(n));
  const Vec S_inv = S.cwiseInverse();
  Trajectory tr;
  tr.kappa = kappa;
  tr.U.push_back(U1);
  tr.F.push_back(U1 * S.asDiagonal());
  tr.linear_error.push_back((tr.F[0] - F_pca).norm() / root_n);
  record(tr, 0, "linear_error", tr.linear_error.back());
  for (int t = 1; t <= tau; ++t) {
    Mat Ft = X * tr.U[t - 1];
    for (int i = 1; i <= t; ++i) {
      const double c = kappa.at(t - i + 1);
      if (c == 0.0) continue;
      Vec scale = S_inv.array().pow(t - i).matrix() * c;
      Ft.noalias() -= tr.U[i - 1] * scale.asDiagonal();
    }
    if (!Ft.allFinite() || Ft.norm() / root_n > kDivergence) {
      tr.stop_reason = StopReason::diverged;
      break;
    }
    tr.F.push_back(Ft);
    tr.U.push_back(Ft * S_inv.asDiagonal());
    tr.linear_error.push_back((Ft - F_pca).norm() / root_n);
    record(tr, t, "linear_error", tr.linear_error.back());
    tr.completed = t;
  }
  return tr;
}

} // namespace oamp
