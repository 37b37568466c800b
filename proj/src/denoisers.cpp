#include "oamp/denoisers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace oamp {

DiscretePrior::DiscretePrior(std::vector<Vec> atoms, std::vector<double> weights, bool normalized) {
  if (atoms.empty() || atoms.size() != weights.size()) throw std::invalid_argument("prior: atoms/weights mismatch");
  const Eigen::Index K = atoms.front().size();
  if (K < 1) throw std::invalid_argument("prior: empty atom");
  double total = 0.0;
  for (size_t a = 0; a < atoms.size(); ++a) {
    if (atoms[a].size() != K) throw std::invalid_argument("prior: atoms of different dimension");
    if (!atoms[a].allFinite()) throw std::invalid_argument("prior: non-finite atom");
    if (!(weights[a] >= 0.0) || !std::isfinite(weights[a])) throw std::invalid_argument("prior: negative weight");
    total += weights[a];
  }
  if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("prior: weights do not sum to 1");

  std::vector<size_t> order(atoms.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](size_t i, size_t j) {
    for (Eigen::Index k = 0; k < K; ++k)
      if (atoms[i](k) != atoms[j](k)) return atoms[i](k) < atoms[j](k);
    return weights[i] < weights[j];
  });
  for (size_t i : order) {
    atoms_.push_back(atoms[i]);
    weights_.push_back(weights[i]);
  }
  atom_matrix_.resize(K, static_cast<Eigen::Index>(atoms_.size()));
  for (size_t a = 0; a < atoms_.size(); ++a) atom_matrix_.col(static_cast<Eigen::Index>(a)) = atoms_[a];

  if (normalized) {
    Mat m2 = second_moment();
    if ((m2 - Mat::Identity(K, K)).cwiseAbs().maxCoeff() > 1e-8)
      throw std::invalid_argument("prior: second moment is not the identity");
  }
}

Mat DiscretePrior::second_moment() const {
  const Eigen::Index K = dim();
  Mat m = Mat::Zero(K, K);
  for (size_t a = 0; a < atoms_.size(); ++a) m += weights_[a] * atoms_[a] * atoms_[a].transpose();
  return m;
}

DiscretePrior two_point_prior() {
  return DiscretePrior({Vec::Constant(1, -1.0), Vec::Constant(1, 1.0)}, {0.5, 0.5}, true);
}

DiscretePrior three_point_prior() {
  const double r2 = std::sqrt(2.0);
  Vec a(2), b(2), c(2);
  a << 0.0, 1.0;
  b << r2, -1.0;
  c << -r2, -1.0;
  return DiscretePrior({a, b, c}, {0.5, 0.25, 0.25}, true);
}

DenoiserContext::DenoiserContext(const Mat& mu, const Mat& sigma, double ridge_ratio) {
  input_dim_ = static_cast<int>(mu.rows());
  first_used_ = 0;
  factor(mu, sigma, ridge_ratio);
}

DenoiserContext DenoiserContext::last_block(const Mat& mu, const Mat& sigma, double ridge_ratio) {
  const Eigen::Index K = mu.cols();
  const Eigen::Index d = mu.rows();
  if (d < K || sigma.rows() != d || sigma.cols() != d) throw std::invalid_argument("denoiser: shape mismatch");
  DenoiserContext c;
  c.input_dim_ = static_cast<int>(d);
  c.first_used_ = static_cast<int>(d - K);
  c.factor(mu.bottomRows(K), sigma.bottomRightCorner(K, K), ridge_ratio);
  return c;
}

void DenoiserContext::factor(const Mat& mu, const Mat& sigma, double ridge_ratio) {
  const Eigen::Index d = mu.rows();
  if (sigma.rows() != d || sigma.cols() != d) throw std::invalid_argument("denoiser: shape mismatch");
  if (!sigma.allFinite() || !mu.allFinite()) throw std::runtime_error("denoiser: non-finite state evolution");
  Mat s = 0.5 * (sigma + sigma.transpose());
  const double mean_diag = s.diagonal().mean();
  ridge_ = 0.0;
  if (ridge_ratio > 0.0) {
    Eigen::SelfAdjointEigenSolver<Mat> es(s, Eigen::EigenvaluesOnly);
    // A vanishing covariance (noiseless channel) gets an absolute ridge.
    const double scale = mean_diag > 0.0 ? mean_diag : 1.0;
    if (es.eigenvalues()(0) <= ridge_ratio * mean_diag) ridge_ = ridge_ratio * scale;
  }
  s.diagonal().array() += ridge_;
  Eigen::LLT<Mat> llt(s);
  if (llt.info() != Eigen::Success) throw std::runtime_error("denoiser: covariance is not positive definite");
  B_ = llt.solve(mu);
  C_ = mu.transpose() * B_;
  C_ = 0.5 * (C_ + C_.transpose());
}

namespace {

// Posterior weights over atoms from the projected statistic h = Bᵀf.
Vec atom_weights(const Vec& h, const DenoiserContext& ctx, const DiscretePrior& prior) {
  const Mat& A = prior.atom_matrix();
  const Eigen::Index na = A.cols();
  Vec score(na);
  for (Eigen::Index a = 0; a < na; ++a) {
    const double w = prior.weights()[a];
    if (w == 0.0) {
      score(a) = -std::numeric_limits<double>::infinity();
      continue;
    }
    auto u = A.col(a);
    score(a) = h.dot(u) - 0.5 * u.dot(ctx.C() * u) + std::log(w);
  }
  const double mx = score.maxCoeff();
  Vec p = (score.array() - mx).exp();
  return p / p.sum();
}

Vec projected(const Vec& f, const DenoiserContext& ctx) {
  if (f.size() != ctx.input_dim()) throw std::invalid_argument("denoiser: input dimension mismatch");
  return ctx.B().transpose() * f.tail(ctx.input_dim() - ctx.first_used());
}

} // namespace

Vec posterior_mean(const Vec& f, const DenoiserContext& ctx, const DiscretePrior& prior) {
  if (prior.dim() != ctx.k()) throw std::invalid_argument("denoiser: prior dimension mismatch");
  Vec p = atom_weights(projected(f, ctx), ctx, prior);
  return prior.atom_matrix() * p;
}

Mat posterior_jacobian(const Vec& f, const DenoiserContext& ctx, const DiscretePrior& prior) {
  if (prior.dim() != ctx.k()) throw std::invalid_argument("denoiser: prior dimension mismatch");
  const Mat& A = prior.atom_matrix();
  Vec p = atom_weights(projected(f, ctx), ctx, prior);
  Vec m = A * p;
  Mat cov = A * p.asDiagonal() * A.transpose() - m * m.transpose();
  Mat J = Mat::Zero(ctx.k(), ctx.input_dim());
  J.rightCols(ctx.input_dim() - ctx.first_used()) = cov * ctx.B().transpose();
  return J;
}

RowDenoise denoise_rows(const Mat& F, const DenoiserContext& ctx, const DiscretePrior& prior) {
  if (F.cols() != ctx.input_dim()) throw std::invalid_argument("denoise_rows: input dimension mismatch");
  if (prior.dim() != ctx.k()) throw std::invalid_argument("denoise_rows: prior dimension mismatch");
  const Mat& A = prior.atom_matrix();
  const Eigen::Index n = F.rows(), K = ctx.k(), na = A.cols();
  Mat H = F.rightCols(ctx.input_dim() - ctx.first_used()) * ctx.B();  // n × K
  Vec offset(na);
  for (Eigen::Index a = 0; a < na; ++a) {
    const double w = prior.weights()[a];
    offset(a) = w == 0.0 ? -std::numeric_limits<double>::infinity()
                         : -0.5 * A.col(a).dot(ctx.C() * A.col(a)) + std::log(w);
  }
  Mat scores = H * A;  // n × na
  scores.rowwise() += offset.transpose();

  RowDenoise out;
  out.U.resize(n, K);
  Mat second = Mat::Zero(K, K);  // Σ_i E_post[uuᵀ] − m_i m_iᵀ
  Vec p(na);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double mx = scores.row(i).maxCoeff();
    p = (scores.row(i).transpose().array() - mx).exp();
    p /= p.sum();
    Vec m = A * p;
    out.U.row(i) = m.transpose();
    second.noalias() += A * p.asDiagonal() * A.transpose() - m * m.transpose();
  }
  second /= static_cast<double>(n);
  out.mean_jacobian = Mat::Zero(K, ctx.input_dim());
  out.mean_jacobian.rightCols(ctx.input_dim() - ctx.first_used()) = second * ctx.B().transpose();
  return out;
}

Vec single_iterate_posterior_mean(const Vec& f_last, const Mat& mu_last, const Mat& sigma_last,
                                  const DiscretePrior& prior) {
  return posterior_mean(f_last, DenoiserContext(mu_last, sigma_last), prior);
}

Vec linear_denoiser(const Vec& f, const DiagScaler& S) {
  if (f.size() != S.size()) throw std::invalid_argument("linear_denoiser: dimension mismatch");
  if ((S.array() == 0.0).any()) throw std::invalid_argument("linear_denoiser: zero signal strength");
  return f.cwiseQuotient(S);
}

Mat linear_denoiser_rows(const Mat& F, const DiagScaler& S) {
  if (F.cols() != S.size()) throw std::invalid_argument("linear_denoiser: dimension mismatch");
  if ((S.array() == 0.0).any()) throw std::invalid_argument("linear_denoiser: zero signal strength");
  return F * S.cwiseInverse().asDiagonal();
}

} // namespace oamp
