#include "oamp/spike_estimation.hpp"

#include <cmath>

#include "oamp/linalg.hpp"

namespace oamp {

SymSpikes extract_sym_spikes(const Mat& X, int k_plus, int k_minus) {
  if (k_plus < 0 || k_minus < 0 || k_plus + k_minus < 1) throw std::invalid_argument("extract_sym_spikes: need K >= 1");
  if (X.rows() != X.cols()) throw std::invalid_argument("extract_sym_spikes: matrix not square");
  double asym = (X - X.transpose()).norm();
  if (asym > 1e-10 * std::max(1.0, X.norm())) throw std::invalid_argument("extract_sym_spikes: matrix not symmetric");
  const double n = static_cast<double>(X.rows());
  PartialEigen pe = sym_eigen_extremes(X, k_plus, k_minus);
  SymSpikes s;
  s.k_plus = k_plus;
  s.k_minus = k_minus;
  s.all_eigenvalues = pe.values;
  s.lambdas.resize(k_plus + k_minus);
  s.vectors.resize(X.rows(), k_plus + k_minus);
  s.lambdas.head(k_plus) = pe.top_values;
  s.lambdas.tail(k_minus) = pe.bottom_values;
  s.vectors.leftCols(k_plus) = pe.top * std::sqrt(n);
  s.vectors.rightCols(k_minus) = pe.bottom * std::sqrt(n);
  canonical_signs(s.vectors);
  return s;
}

RectSpikes extract_rect_spikes(const Mat& X, int K) {
  if (K < 1) throw std::invalid_argument("extract_rect_spikes: need K >= 1");
  if (X.rows() > X.cols()) throw std::invalid_argument("extract_rect_spikes: expects m <= n (transpose first)");
  PartialSvd sv = svd_top(X, K);
  RectSpikes s;
  s.all_singular_values = sv.values;
  s.lambdas = sv.values.head(K);
  s.left_vectors = sv.left * std::sqrt(static_cast<double>(X.rows()));
  s.right_vectors = sv.right * std::sqrt(static_cast<double>(X.cols()));
  canonical_signs(s);
  return s;
}

SpectralSample sym_noise_sample(const SymSpikes& s) {
  const Eigen::Index n = s.all_eigenvalues.size();
  std::vector<double> v;
  for (Eigen::Index i = s.k_minus; i < n - s.k_plus; ++i) v.push_back(s.all_eigenvalues(i));
  return SpectralSample(std::move(v), SpectrumKind::symmetric);
}

SpectralSample rect_noise_sample(const RectSpikes& s, double gamma) {
  std::vector<double> v;
  for (Eigen::Index i = s.lambdas.size(); i < s.all_singular_values.size(); ++i) v.push_back(s.all_singular_values(i));
  return SpectralSample(std::move(v), SpectrumKind::rectangular, gamma);
}

void align_signs(Mat& vectors, const Mat& truth) {
  const Eigen::Index K = std::min(vectors.cols(), truth.cols());
  for (Eigen::Index k = 0; k < K; ++k)
    if (vectors.col(k).dot(truth.col(k)) < 0.0) vectors.col(k) = -vectors.col(k);
}

void align_signs(RectSpikes& s, const Mat& u_truth, const Mat& v_truth) {
  // Flip singular pairs jointly; the left vector decides.
  const Eigen::Index K = std::min(s.left_vectors.cols(), u_truth.cols());
  for (Eigen::Index k = 0; k < K; ++k) {
    double su = s.left_vectors.col(k).dot(u_truth.col(k));
    bool flip = su < 0.0 || (su == 0.0 && s.right_vectors.col(k).dot(v_truth.col(k)) < 0.0);
    if (flip) {
      s.left_vectors.col(k) = -s.left_vectors.col(k);
      s.right_vectors.col(k) = -s.right_vectors.col(k);
    }
  }
}

static bool canonical_flip(const Eigen::Ref<const Vec>& v) {
  Eigen::Index idx = 0;
  v.cwiseAbs().maxCoeff(&idx);
  return v(idx) < 0.0;
}

void canonical_signs(Mat& vectors) {
  for (Eigen::Index k = 0; k < vectors.cols(); ++k)
    if (canonical_flip(vectors.col(k))) vectors.col(k) = -vectors.col(k);
}

void canonical_signs(RectSpikes& s) {
  for (Eigen::Index k = 0; k < s.left_vectors.cols(); ++k)
    if (canonical_flip(s.left_vectors.col(k))) {
      s.left_vectors.col(k) = -s.left_vectors.col(k);
      s.right_vectors.col(k) = -s.right_vectors.col(k);
    }
}

double default_edge_margin(const SpectralSample& noise) {
  double spread = noise.upper_edge() - noise.lower_edge();
  return spread * std::pow(static_cast<double>(noise.size()), -2.0 / 3.0);
}

static SpikeEstimates allocate(Eigen::Index K) {
  SpikeEstimates e;
  for (Vec* v : {&e.lambda_pca, &e.theta, &e.mu_pca, &e.nu_pca, &e.R_val, &e.Rprime_val, &e.theta_u, &e.theta_v})
    *v = Vec::Zero(K);
  return e;
}

SpikeEstimates estimate_sym_at(const Vec& lambdas, const SpectralLaw& law) {
  SpikeEstimates e = allocate(lambdas.size());
  for (Eigen::Index k = 0; k < lambdas.size(); ++k) {
    const double lam = lambdas(k);
    double g, gp;
    try {
      g = law.cauchy(lam);
      gp = law.cauchy_prime(lam);
    } catch (const std::domain_error&) {
      throw SubcriticalError(static_cast<int>(k), "outlier lies inside the bulk spectrum");
    }
    const double theta = 1.0 / g;
    const double mu2 = -1.0 / (theta * theta * gp);
    if (!(mu2 > 0.0) || !std::isfinite(theta)) throw SubcriticalError(static_cast<int>(k), "degenerate estimate");
    e.lambda_pca(k) = lam;
    e.theta(k) = theta;
    e.mu_pca(k) = std::sqrt(std::min(mu2, 1.0));
    e.R_val(k) = lam - theta;
    e.Rprime_val(k) = theta * theta * (1.0 - mu2);
    e.theta_u(k) = e.theta_v(k) = theta;
    e.nu_pca(k) = e.mu_pca(k);
  }
  return e;
}

SpikeEstimates estimate_rect_at(const Vec& lambdas, const SpectralLaw& law) {
  const double gamma = law.gamma();
  SpikeEstimates e = allocate(lambdas.size());
  for (Eigen::Index k = 0; k < lambdas.size(); ++k) {
    const double lam = lambdas(k);
    DTransform d;
    try {
      d = d_transform(law, lam);
    } catch (const std::domain_error&) {
      throw SubcriticalError(static_cast<int>(k), "outlier lies inside the bulk spectrum");
    }
    if (!(d.D > 0.0) || !(d.Dprime < 0.0)) throw SubcriticalError(static_cast<int>(k), "degenerate D-transform");
    const double theta = 1.0 / std::sqrt(d.D);
    const double t2 = theta * theta;
    const double mu2 = -2.0 * d.phi / (t2 * d.Dprime);
    const double nu2 = -2.0 * d.phibar / (t2 * d.Dprime);
    const double R = rect_T_inverse(lam * lam / t2 - 1.0, gamma);
    // μ²(1+γR) = T(R) − θ^{-2} T'(R) R'
    const double Rp = (rect_T(R, gamma) - mu2 * (1.0 + gamma * R)) * t2 / rect_T_prime(R, gamma);
    e.lambda_pca(k) = lam;
    e.theta(k) = theta;
    e.mu_pca(k) = std::sqrt(std::clamp(mu2, 0.0, 1.0));
    e.nu_pca(k) = std::sqrt(std::clamp(nu2, 0.0, 1.0));
    e.R_val(k) = R;
    e.Rprime_val(k) = Rp;
    e.theta_v(k) = lam / (std::sqrt(gamma) * (1.0 + R));
    e.theta_u(k) = t2 / e.theta_v(k);
  }
  return e;
}

SpikeEstimates estimate_sym(const SymSpikes& spikes, const SpectralSample& noise, double edge_margin) {
  if (edge_margin < 0.0) edge_margin = default_edge_margin(noise);
  for (Eigen::Index k = 0; k < spikes.lambdas.size(); ++k) {
    const double lam = spikes.lambdas(k);
    const bool upper = k < spikes.k_plus;
    double gap = upper ? lam - noise.upper_edge() : noise.lower_edge() - lam;
    if (!(gap > edge_margin))
      throw SubcriticalError(static_cast<int>(k), "outlier not separated from the bulk edge");
  }
  return estimate_sym_at(spikes.lambdas, noise);
}

SpikeEstimates estimate_rect(const RectSpikes& spikes, const SpectralSample& noise, double edge_margin) {
  if (edge_margin < 0.0) edge_margin = default_edge_margin(noise);
  for (Eigen::Index k = 0; k < spikes.lambdas.size(); ++k)
    if (!(spikes.lambdas(k) - noise.upper_edge() > edge_margin))
      throw SubcriticalError(static_cast<int>(k), "outlier not separated from the bulk edge");
  return estimate_rect_at(spikes.lambdas, noise);
}

SpikeEstimates exact_sym(const Vec& theta, const SpectralLaw& law) {
  Vec lam(theta.size());
  for (Eigen::Index k = 0; k < theta.size(); ++k) {
    try {
      lam(k) = invert_cauchy(law, 1.0 / theta(k), theta(k) > 0 ? Side::upper : Side::lower);
    } catch (const std::domain_error&) {
      throw SubcriticalError(static_cast<int>(k), "signal strength below the phase transition");
    }
  }
  return estimate_sym_at(lam, law);
}

SpikeEstimates exact_rect(const Vec& theta, const SpectralLaw& law) {
  Vec lam(theta.size());
  for (Eigen::Index k = 0; k < theta.size(); ++k) {
    try {
      lam(k) = invert_D(law, 1.0 / (theta(k) * theta(k)));
    } catch (const std::domain_error&) {
      throw SubcriticalError(static_cast<int>(k), "signal strength below the phase transition");
    }
  }
  return estimate_rect_at(lam, law);
}

SpikeEstimates estimate_sym_semicircle(const Vec& lambdas) {
  SpikeEstimates e = allocate(lambdas.size());
  for (Eigen::Index k = 0; k < lambdas.size(); ++k) {
    const double lam = lambdas(k);
    if (!(std::abs(lam) > 2.0)) throw SubcriticalError(static_cast<int>(k), "outlier inside the semicircle support");
    // λ = θ + 1/θ
    const double theta = 0.5 * (lam + std::copysign(std::sqrt(lam * lam - 4.0), lam));
    e.lambda_pca(k) = lam;
    e.theta(k) = theta;
    e.mu_pca(k) = std::sqrt(1.0 - 1.0 / (theta * theta));
    e.nu_pca(k) = e.mu_pca(k);
    e.R_val(k) = 1.0 / theta;
    e.Rprime_val(k) = 1.0;
    e.theta_u(k) = e.theta_v(k) = theta;
  }
  return e;
}

SpikeEstimates estimate_rect_mp(const Vec& lambdas, double gamma) {
  SpikeEstimates e = allocate(lambdas.size());
  for (Eigen::Index k = 0; k < lambdas.size(); ++k) {
    const double lam = lambdas(k);
    if (!(lam > 1.0 + std::sqrt(gamma)))
      throw SubcriticalError(static_cast<int>(k), "outlier inside the Marchenko-Pastur support");
    // λ² = (θ²+1)(θ²+γ)/θ²
    const double b = lam * lam - 1.0 - gamma;
    const double t2 = 0.5 * (b + std::sqrt(std::max(b * b - 4.0 * gamma, 0.0)));
    const double a = 1.0 / t2;
    const double num = 1.0 - gamma * a * a;
    e.lambda_pca(k) = lam;
    e.theta(k) = std::sqrt(t2);
    e.mu_pca(k) = std::sqrt(std::max(num / (1.0 + gamma * a), 0.0));
    e.nu_pca(k) = std::sqrt(std::max(num / (1.0 + a), 0.0));
    e.R_val(k) = a;
    e.Rprime_val(k) = 1.0;
    e.theta_v(k) = lam / (std::sqrt(gamma) * (1.0 + a));
    e.theta_u(k) = t2 / e.theta_v(k);
  }
  return e;
}

} // namespace oamp
