#include "oamp/state_evolution.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "oamp/csv.hpp"
#include "oamp/onsager.hpp"
#include "oamp/spike_estimation.hpp"

namespace oamp {

DeltaParts decompose_delta(const BlockMatrix& delta) {
  if (!delta.square()) throw std::invalid_argument("decompose_delta: square grid required");
  const int nb = delta.row_blocks(), k = delta.block_dim();
  DeltaParts p{BlockMatrix::zeros(nb, nb, k), BlockMatrix::zeros(nb, nb, k), BlockMatrix::zeros(nb, nb, k),
               BlockMatrix::zeros(nb, nb, k)};
  for (int r = 0; r < nb; ++r)
    for (int c = 0; c < nb; ++c) {
      BlockMatrix* dst = r == 0 ? (c == 0 ? &p.hat : &p.tilde) : (c == 0 ? &p.tilde_t : &p.bar);
      dst->set_block(r, c, delta.block(r, c));
    }
  return p;
}

BlockMatrix weighted_delta(const DeltaParts& p, double kappa, const DiagScaler& kt, const DiagScaler& kh) {
  BlockMatrix out = kappa * p.bar;
  out += block_left_scale(kt, p.tilde);
  out += block_right_scale(p.tilde_t, kt);
  out += block_left_scale(kh, p.hat);
  return out;
}

BlockMatrix gram_table(const std::vector<Mat>& iterates, int blocks, double denom, int k) {
  if (iterates.empty() && k < 1) throw std::invalid_argument("gram_table: no iterates");
  if (!iterates.empty()) k = static_cast<int>(iterates.front().cols());
  BlockMatrix g(blocks, blocks, k);
  g.dense().setConstant(std::numeric_limits<double>::quiet_NaN());
  const int have = std::min(blocks, static_cast<int>(iterates.size()));
  for (int r = 0; r < have; ++r)
    for (int c = r; c < have; ++c) {
      Mat b = iterates[r].transpose() * iterates[c] / denom;
      g.set_block(r, c, b);
      g.set_block(c, r, b.transpose());
    }
  return g;
}

namespace {

void check_pair(const BlockMatrix& a, const BlockMatrix& b) {
  if (!a.square() || !b.square() || a.row_blocks() != b.row_blocks() || a.block_dim() != b.block_dim())
    throw std::invalid_argument("state evolution: grid shape mismatch");
}

Mat symmetrized(const BlockMatrix& m) { return 0.5 * (m.dense() + m.dense().transpose()); }

// Largest j at which Θ/Ξ terms can be non-zero for a grid of nb blocks.
int sym_j_max(int nb) { return 2 * (nb - 1); }
int rect_j_max(int nb) { return 2 * nb - 1; }

} // namespace

BlockMatrix se_sigma_sym_independent(const BlockMatrix& phi, const BlockMatrix& delta, const CumulantModel& kappa) {
  check_pair(phi, delta);
  const int nb = phi.row_blocks();
  BlockMatrix out = BlockMatrix::zeros(nb, nb, phi.block_dim());
  for (int j = 0; j <= sym_j_max(nb); ++j) {
    const double kj = kappa.at(j + 2);
    if (kj == 0.0) continue;
    out += theta_sym(phi, kj * delta, j);
  }
  return BlockMatrix(symmetrized(out), phi.block_dim());
}

BlockMatrix se_sigma_sym(const BlockMatrix& phi, const BlockMatrix& delta, const CumulantModel& kappa,
                         const KappaSeriesTables& tables) {
  check_pair(phi, delta);
  const int nb = phi.row_blocks();
  DeltaParts parts = decompose_delta(delta);
  BlockMatrix out = BlockMatrix::zeros(nb, nb, phi.block_dim());
  for (int j = 0; j <= sym_j_max(nb); ++j)
    out += theta_sym(phi, weighted_delta(parts, kappa.at(j + 2), tables.kt(j + 2), tables.kh(j + 2)), j);
  return BlockMatrix(symmetrized(out), phi.block_dim());
}

namespace {

BlockMatrix rect_sum(const BlockMatrix& phi, const BlockMatrix& psi, const BlockMatrix& delta, const BlockMatrix& gv,
                     const CumulantModel& kappa, const KappaSeriesTables* tables, bool omega) {
  check_pair(phi, psi);
  check_pair(phi, delta);
  check_pair(phi, gv);
  const int nb = phi.row_blocks();
  BlockMatrix out = BlockMatrix::zeros(nb, nb, phi.block_dim());
  DeltaParts pd, pg;
  if (tables) {
    pd = decompose_delta(delta);
    pg = decompose_delta(gv);
  }
  for (int j = 0; j <= rect_j_max(nb); ++j) {
    const double kj = kappa.at(j + 1);
    BlockMatrix md, mg;
    if (tables) {
      md = weighted_delta(pd, kj, tables->kt(j + 1), tables->kh(j + 1));
      mg = weighted_delta(pg, kj, tables->kt(j + 1), tables->kh(j + 1));
    } else {
      if (kj == 0.0) continue;
      md = kj * delta;
      mg = kj * gv;
    }
    out += omega ? theta_rect(phi, psi, md, mg, j) : xi_rect(phi, psi, md, mg, j);
  }
  if (out.has_nan()) throw std::logic_error("state evolution: an undefined block leaked into the covariance");
  return BlockMatrix(symmetrized(out), phi.block_dim());
}

} // namespace

BlockMatrix se_omega_rect_independent(const BlockMatrix& phi, const BlockMatrix& psi, const BlockMatrix& delta,
                                      const BlockMatrix& gram_v, const CumulantModel& kappa, double gamma) {
  return gamma * rect_sum(phi, psi, delta, gram_v, kappa, nullptr, true);
}

BlockMatrix se_sigma_rect_independent(const BlockMatrix& phi, const BlockMatrix& psi, const BlockMatrix& delta,
                                      const BlockMatrix& gram_v, const CumulantModel& kappa) {
  return rect_sum(phi, psi, delta, gram_v, kappa, nullptr, false);
}

BlockMatrix se_sigma_rect(const BlockMatrix& phi, const BlockMatrix& psi, const BlockMatrix& delta,
                          const BlockMatrix& gram_v, const CumulantModel& kappa, const KappaSeriesTables& tables) {
  return rect_sum(phi, psi, delta, gram_v, kappa, &tables, false);
}

BlockMatrix se_omega_rect(const BlockMatrix& phi, const BlockMatrix& psi, const BlockMatrix& delta,
                          const BlockMatrix& gram_v, const CumulantModel& kappa, const KappaSeriesTables& tables,
                          double gamma) {
  BlockMatrix om = gamma * rect_sum(phi, psi, delta, gram_v, kappa, &tables, true);
  // G_0 duplicates G_1.
  const int nb = om.row_blocks();
  if (nb >= 2) {
    for (int s = 1; s < nb; ++s) {
      om.set_block(0, s, om.block(1, s));
      om.set_block(s, 0, om.block(s, 1));
    }
    om.set_block(0, 0, om.block(1, 1));
  }
  return om;
}

RectCovariances se_sigma_omega_rect(const BlockMatrix& phi_next, const BlockMatrix& psi_next,
                                    const BlockMatrix& delta_next, const BlockMatrix& gram_v_next,
                                    const CumulantModel& kappa, const KappaSeriesTables& tables, double gamma) {
  const int nb = phi_next.row_blocks();
  if (nb < 2) throw std::invalid_argument("se_sigma_omega_rect: need at least two blocks");
  RectCovariances out;
  out.sigma = se_sigma_rect(phi_next.leading(nb - 1, nb - 1), psi_next.leading(nb - 1, nb - 1),
                            delta_next.leading(nb - 1, nb - 1), gram_v_next.leading(nb - 1, nb - 1), kappa, tables);
  out.omega = se_omega_rect(phi_next, psi_next, delta_next, gram_v_next, kappa, tables, gamma);
  return out;
}

Mat se_mu_block(const Mat& cross_moment, const DiagScaler& S, MeanMode mode, double gamma) {
  if (cross_moment.cols() != S.size()) throw std::invalid_argument("se_mu_block: dimension mismatch");
  Mat out = cross_moment * S.asDiagonal();
  if (mode == MeanMode::rect_mu) out /= std::sqrt(gamma);
  if (mode == MeanMode::rect_nu) out *= std::sqrt(gamma);
  return out;
}

Mat martingale_moment(const Mat& iterate) {
  return iterate.transpose() * iterate / static_cast<double>(iterate.rows());
}

bool check_early_stop(const Mat& sigma, double threshold_ratio, int k, bool schur) {
  Mat s = 0.5 * (sigma + sigma.transpose());
  const double mean_diag = s.diagonal().mean();
  if (!std::isfinite(mean_diag)) return true;
  Mat target = s;
  if (schur && k > 0 && s.rows() > k) {
    const Eigen::Index lead = s.rows() - k;
    Mat a = s.topLeftCorner(lead, lead);
    Eigen::LDLT<Mat> ldlt(a);
    target = s.bottomRightCorner(k, k) - s.bottomLeftCorner(k, lead) * ldlt.solve(s.topRightCorner(lead, k));
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(target, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0) < threshold_ratio * mean_diag;
}

Mat lower_factor(const Mat& sigma) {
  const Eigen::Index d = sigma.rows();
  Mat L = Mat::Zero(d, d);
  const double scale = std::max(sigma.diagonal().cwiseAbs().maxCoeff(), 1e-300);
  for (Eigen::Index j = 0; j < d; ++j) {
    double diag = sigma(j, j) - L.row(j).head(j).squaredNorm();
    if (diag <= 1e-12 * scale) continue;
    const double ljj = std::sqrt(diag);
    L(j, j) = ljj;
    for (Eigen::Index i = j + 1; i < d; ++i)
      L(i, j) = (sigma(i, j) - L.row(i).head(j).dot(L.row(j).head(j))) / ljj;
  }
  return L;
}

void write_se_csv(std::ostream& out, const std::vector<SEState>& states, int k) {
  out << "iter,matrix,row_block,col_block,i,j,value\n";
  auto dump = [&](int iter, const char* name, const Mat& m) {
    if (m.size() == 0) return;
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c)
        out << iter << ',' << name << ',' << r / k << ',' << c / k << ',' << r % k << ',' << c % k << ','
            << format_double(m(r, c)) << '\n';
  };
  for (const SEState& s : states) {
    dump(s.iteration, "mu", s.mu);
    dump(s.iteration, "sigma", s.sigma);
    dump(s.iteration, "nu", s.nu);
    dump(s.iteration, "omega", s.omega);
  }
}

Mat sample_prior_rows(const DiscretePrior& prior, int n, Rng& rng) {
  std::discrete_distribution<int> pick(prior.weights().begin(), prior.weights().end());
  Mat out(n, prior.dim());
  for (int i = 0; i < n; ++i) out.row(i) = prior.atoms()[pick(rng)].transpose();
  return out;
}

namespace {

DenoiserContext make_context(const Mat& mu, const Mat& sigma, DenoiserKind kind) {
  return kind == DenoiserKind::full ? DenoiserContext(mu, sigma) : DenoiserContext::last_block(mu, sigma);
}

Mat hstack(const std::vector<Mat>& blocks, size_t from, size_t to) {
  const Eigen::Index rows = blocks[from].rows(), k = blocks[from].cols();
  Mat out(rows, static_cast<Eigen::Index>(to - from) * k);
  for (size_t i = from; i < to; ++i) out.middleCols(static_cast<Eigen::Index>(i - from) * k, k) = blocks[i];
  return out;
}

// Gaussian rows with mean truth·μᵀ and covariance LLᵀ, from fixed standard normals.
std::vector<Mat> gaussian_blocks(const Mat& truth, const Mat& mu, const Mat& sigma, const Mat& normals, int k) {
  const Eigen::Index d = sigma.rows();
  Mat L = lower_factor(0.5 * (sigma + sigma.transpose()));
  Mat F = truth * mu.transpose() + normals.leftCols(d) * L.transpose();
  std::vector<Mat> out;
  for (Eigen::Index b = 0; b < d / k; ++b) out.push_back(F.middleCols(b * k, k));
  return out;
}

int table_order(int T) { return 2 * (T + 3); }

} // namespace

SEPrediction predict_sym_spectral(const SpectralLaw& law, const Vec& theta, const DiscretePrior& prior, int T,
                                  DenoiserKind kind, int samples, std::uint64_t seed) {
  if (law.kind() != SpectrumKind::symmetric) throw std::invalid_argument("predict_sym_spectral: symmetric law required");
  const int K = static_cast<int>(theta.size());
  if (prior.dim() != K) throw std::invalid_argument("predict_sym_spectral: prior dimension mismatch");
  SpikeEstimates est = exact_sym(theta, law);
  CumulantModel kappa = cumulants_of(law, table_order(T) + 2);
  const DiagScaler S = est.theta;
  KappaSeriesTables tables = kappa_series_tables(kappa, est.R_val, est.Rprime_val, S, table_order(T));

  Rng rng = make_stream(seed, 0);
  Mat truth = sample_prior_rows(prior, samples, rng);
  Mat normals = gaussian_matrix(samples, (T + 1) * K, rng);
  const double N = samples;

  Mat mu = est.mu_pca.asDiagonal();
  Mat sigma = Mat((1.0 - est.mu_pca.array().square()).matrix().asDiagonal());
  std::vector<Mat> F = gaussian_blocks(truth, mu, sigma, normals, K);
  std::vector<Mat> U{F[0] * S.cwiseInverse().asDiagonal()};
  DerivativeLedger ledger{K, {Mat()}, {}};

  SEPrediction out;
  out.states.push_back({0, mu, sigma, Mat(), Mat()});
  out.mse_u.push_back((F[0] - truth).squaredNorm() / N);
  for (int t = 1; t <= T; ++t) {
    RowDenoise rd = denoise_rows(hstack(F, 0, t), make_context(mu, sigma, kind), prior);
    U.push_back(rd.U);
    ledger.u.push_back(rd.mean_jacobian);
    BlockMatrix phi = assemble_phi_sym_spectral(ledger, t);
    BlockMatrix delta = gram_table(U, t + 1, N);
    sigma = se_sigma_sym(phi, delta, kappa, tables).dense();
    Mat mu_next(mu.rows() + K, K);
    mu_next << mu, se_mu_block(rd.U.transpose() * truth / N, S, MeanMode::sym);
    mu = mu_next;
    F = gaussian_blocks(truth, mu, sigma, normals, K);
    out.states.push_back({t, mu, sigma, Mat(), Mat()});
    out.mse_u.push_back((rd.U - truth).squaredNorm() / N);
  }
  return out;
}

SEPrediction predict_rect_spectral(const SpectralLaw& law, const Vec& theta, const DiscretePrior& u_prior,
                                   const DiscretePrior& v_prior, int T, DenoiserKind kind, int samples,
                                   std::uint64_t seed) {
  if (law.kind() != SpectrumKind::rectangular)
    throw std::invalid_argument("predict_rect_spectral: rectangular law required");
  const int K = static_cast<int>(theta.size());
  if (u_prior.dim() != K || v_prior.dim() != K) throw std::invalid_argument("predict_rect_spectral: prior dimension mismatch");
  const double gamma = law.gamma();
  SpikeEstimates est = exact_rect(theta, law);
  CumulantModel kappa = cumulants_of(law, table_order(T) + 2);
  const DiagScaler S = est.theta;
  KappaSeriesTables tables = kappa_series_tables(kappa, est.R_val, est.Rprime_val, S, table_order(T));

  Rng rng = make_stream(seed, 0);
  Mat u_truth = sample_prior_rows(u_prior, samples, rng);
  Mat v_truth = sample_prior_rows(v_prior, samples, rng);
  Mat f_normals = gaussian_matrix(samples, (T + 1) * K, rng);
  Mat g_normals = gaussian_matrix(samples, (T + 2) * K, rng);
  const double N = samples;

  Mat mu = est.mu_pca.asDiagonal();
  Mat sigma = Mat((1.0 - est.mu_pca.array().square()).matrix().asDiagonal());
  Mat nu(2 * K, K);
  nu << Mat(est.nu_pca.asDiagonal()), Mat(est.nu_pca.asDiagonal());
  Mat om1 = (1.0 - est.nu_pca.array().square()).matrix().asDiagonal();
  Mat omega(2 * K, 2 * K);
  omega << om1, om1, om1, om1;

  std::vector<Mat> F = gaussian_blocks(u_truth, mu, sigma, f_normals, K);
  std::vector<Mat> G = gaussian_blocks(v_truth, nu, omega, g_normals, K);
  Mat U0 = F[0] * est.theta_u.cwiseInverse().asDiagonal();
  std::vector<Mat> U{U0, U0};
  std::vector<Mat> V{G[0] * est.theta_v.cwiseInverse().asDiagonal()};
  DerivativeLedger ledger{K, {Mat(), Mat()}, {Mat()}};

  SEPrediction out;
  out.states.push_back({0, mu, sigma, nu, omega});
  out.mse_u.push_back((F[0] - u_truth).squaredNorm() / N);
  out.mse_v.push_back((G[0] - v_truth).squaredNorm() / N);
  for (int t = 1; t <= T; ++t) {
    // V_t from G_1..G_t
    RowDenoise rv = denoise_rows(hstack(G, 1, t + 1), make_context(nu.bottomRows(t * K),
                                                                   omega.bottomRightCorner(t * K, t * K), kind),
                                 v_prior);
    V.push_back(rv.U);
    ledger.v.push_back(rv.mean_jacobian);
    BlockMatrix phi = assemble_phi_rect_spectral(ledger, est.theta_u, t);
    BlockMatrix psi = assemble_psi_rect_spectral(ledger, est.theta_v, t);
    sigma = se_sigma_rect(phi, psi, gram_table(U, t + 1, N), gram_table(V, t + 1, N), kappa, tables).dense();
    Mat mu_next(mu.rows() + K, K);
    mu_next << mu, se_mu_block(rv.U.transpose() * v_truth / N, S, MeanMode::rect_mu, gamma);
    mu = mu_next;
    F = gaussian_blocks(u_truth, mu, sigma, f_normals, K);

    RowDenoise ru = denoise_rows(hstack(F, 0, t + 1), make_context(mu, sigma, kind), u_prior);
    U.push_back(ru.U);
    ledger.u.push_back(ru.mean_jacobian);
    BlockMatrix phi1 = assemble_phi_rect_spectral(ledger, est.theta_u, t + 1);
    BlockMatrix psi1 = assemble_psi_rect_spectral(ledger, est.theta_v, t + 1);
    omega = se_omega_rect(phi1, psi1, gram_table(U, t + 2, N), gram_table(V, t + 2, N), kappa, tables, gamma).dense();
    Mat nu_next(nu.rows() + K, K);
    nu_next << nu, se_mu_block(ru.U.transpose() * u_truth / N, S, MeanMode::rect_nu, gamma);
    nu = nu_next;
    G = gaussian_blocks(v_truth, nu, omega, g_normals, K);

    out.states.push_back({t, mu, sigma, nu, omega});
    out.mse_u.push_back((ru.U - u_truth).squaredNorm() / N);
    out.mse_v.push_back((rv.U - v_truth).squaredNorm() / N);
  }
  return out;
}

} // namespace oamp
