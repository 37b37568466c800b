#include "oamp/model_gen.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "oamp/csv.hpp"
#include "oamp/spectral_laws.hpp"

namespace oamp {

Mat haar_orthogonal(int n, Rng& rng) {
  if (n < 1) throw std::invalid_argument("haar_orthogonal: n must be >= 1");
  return orthonormal_q(gaussian_matrix(n, n, rng));
}

Mat haar_columns(int n, int cols, Rng& rng) {
  if (n < 1 || cols < 1 || cols > n) throw std::invalid_argument("haar_columns: invalid shape");
  return orthonormal_q(gaussian_matrix(n, cols, rng));
}

NoiseSpec goe_spec(int n) {
  NoiseSpec s;
  s.family = NoiseFamily::goe;
  s.n = n;
  return s;
}

NoiseSpec iid_rect_spec(int m, int n) {
  NoiseSpec s;
  s.family = NoiseFamily::iid_gaussian_rect;
  s.rectangular = true;
  s.m = m;
  s.n = n;
  return s;
}

NoiseSpec uniform_sym_spec(int n) {
  NoiseSpec s;
  s.family = NoiseFamily::haar_diag;
  s.n = n;
  s.law = DiagLaw::uniform;
  s.lo = -std::sqrt(3.0);
  s.hi = std::sqrt(3.0);
  return s;
}

NoiseSpec centered_beta_sym_spec(int n) {
  NoiseSpec s;
  s.family = NoiseFamily::haar_diag;
  s.n = n;
  s.law = DiagLaw::centered_beta;
  s.a = 3.0;
  s.b = 1.0;
  s.scale = std::sqrt(80.0 / 3.0);
  s.shift = 0.75;
  return s;
}

NoiseSpec uniform_rect_spec(int m, int n) {
  NoiseSpec s;
  s.family = NoiseFamily::haar_diag;
  s.rectangular = true;
  s.m = m;
  s.n = n;
  s.law = DiagLaw::uniform;
  s.lo = std::sqrt(3.0 / 7.0);
  s.hi = 2.0 * std::sqrt(3.0 / 7.0);
  return s;
}

NoiseSpec beta_rect_spec(int m, int n) {
  NoiseSpec s;
  s.family = NoiseFamily::haar_diag;
  s.rectangular = true;
  s.m = m;
  s.n = n;
  s.law = DiagLaw::centered_beta;
  s.a = 3.0;
  s.b = 1.0;
  s.scale = std::sqrt(5.0 / 3.0);
  s.shift = 0.0;
  return s;
}

namespace {

void validate(const NoiseSpec& s) {
  if (s.n < 1) throw std::invalid_argument("noise: n must be >= 1");
  if (s.rectangular && (s.m < 1 || s.m > s.n)) throw std::invalid_argument("noise: need 1 <= m <= n");
  if (s.family == NoiseFamily::goe && s.rectangular) throw std::invalid_argument("noise: GOE is square");
  if (s.family == NoiseFamily::iid_gaussian_rect && !s.rectangular)
    throw std::invalid_argument("noise: i.i.d. Gaussian family is rectangular");
  if (s.family != NoiseFamily::haar_diag) return;
  const size_t d = static_cast<size_t>(s.rectangular ? s.m : s.n);
  switch (s.law) {
    case DiagLaw::uniform:
      if (!(s.hi > s.lo)) throw std::invalid_argument("noise: uniform law needs lo < hi");
      if (s.rectangular && s.lo < 0.0) throw std::invalid_argument("noise: singular values must be >= 0");
      break;
    case DiagLaw::centered_beta:
      if (!(s.a > 0.0 && s.b > 0.0 && s.scale > 0.0)) throw std::invalid_argument("noise: invalid Beta parameters");
      if (s.rectangular && s.shift > 0.0) throw std::invalid_argument("noise: singular values must be >= 0");
      break;
    case DiagLaw::custom:
      if (s.custom.size() != d) throw std::invalid_argument("noise: custom diagonal has the wrong length");
      for (double v : s.custom)
        if (!std::isfinite(v) || (s.rectangular && v < 0.0)) throw std::invalid_argument("noise: invalid custom value");
      break;
  }
}

std::vector<double> draw_diagonal(const NoiseSpec& s, size_t d, Rng& rng) {
  std::vector<double> out(d);
  switch (s.law) {
    case DiagLaw::uniform: {
      std::uniform_real_distribution<double> u(s.lo, s.hi);
      for (double& v : out) v = u(rng);
      break;
    }
    case DiagLaw::centered_beta: {
      std::gamma_distribution<double> ga(s.a, 1.0), gb(s.b, 1.0);
      for (double& v : out) {
        double x = ga(rng), y = gb(rng);
        v = s.scale * (x / (x + y) - s.shift);
      }
      break;
    }
    case DiagLaw::custom:
      out = s.custom;
      break;
  }
  return out;
}

} // namespace

NoiseDraw sample_noise(const NoiseSpec& spec, Rng& rng) {
  validate(spec);
  NoiseDraw d;
  switch (spec.family) {
    case NoiseFamily::goe: {
      Mat g = gaussian_matrix(spec.n, spec.n, rng);
      d.W = (g + g.transpose()) / std::sqrt(2.0 * spec.n);
      break;
    }
    case NoiseFamily::iid_gaussian_rect:
      d.W = gaussian_matrix(spec.m, spec.n, rng) / std::sqrt(static_cast<double>(spec.n));
      break;
    case NoiseFamily::haar_diag: {
      const int dim = spec.rectangular ? spec.m : spec.n;
      d.spectrum = draw_diagonal(spec, static_cast<size_t>(dim), rng);
      Vec lam = Eigen::Map<const Vec>(d.spectrum.data(), dim);
      Mat O = haar_orthogonal(dim, rng);
      if (!spec.rectangular) {
        d.W = congruence(O, lam);
      } else {
        Mat Q = haar_columns(spec.n, spec.m, rng);  // n×m
        d.W = O.transpose() * lam.asDiagonal() * Q.transpose();
      }
      break;
    }
  }
  return d;
}

std::unique_ptr<SpectralLaw> population_law(const NoiseSpec& spec) {
  validate(spec);
  const SpectrumKind kind = spec.rectangular ? SpectrumKind::rectangular : SpectrumKind::symmetric;
  switch (spec.family) {
    case NoiseFamily::goe:
      return std::make_unique<SemicircleLaw>();
    case NoiseFamily::iid_gaussian_rect:
      return std::make_unique<MarchenkoPasturSqrtLaw>(spec.gamma());
    case NoiseFamily::haar_diag:
      switch (spec.law) {
        case DiagLaw::uniform:
          return uniform_law(spec.lo, spec.hi, kind, spec.gamma());
        case DiagLaw::centered_beta:
          return beta_law(spec.a, spec.b, spec.scale, spec.shift, kind, spec.gamma());
        case DiagLaw::custom:
          return std::make_unique<SpectralSample>(spec.custom, kind, spec.gamma());
      }
  }
  throw std::logic_error("population_law: unknown family");
}

Mat sample_signals(const DiscretePrior& prior, int n, Rng& rng) {
  const int K = prior.dim();
  if (n < K) throw std::invalid_argument("sample_signals: n must be >= K");
  Eigen::SelfAdjointEigenSolver<Mat> es(prior.second_moment(), Eigen::EigenvaluesOnly);
  if (!(es.eigenvalues()(0) > 1e-12)) throw std::invalid_argument("sample_signals: degenerate prior");
  std::discrete_distribution<int> pick(prior.weights().begin(), prior.weights().end());
  Mat raw(n, K);
  for (int i = 0; i < n; ++i) raw.row(i) = prior.atoms()[pick(rng)].transpose();
  Eigen::JacobiSVD<Mat> svd(raw);
  const Vec& sv = svd.singularValues();
  if (!(sv(K - 1) > 1e-8 * sv(0))) throw std::invalid_argument("sample_signals: sampled signal is rank deficient");
  return orthonormal_q(raw) * std::sqrt(static_cast<double>(n));
}

SpikedInstance build_spiked(const Mat& U, const Vec& theta, NoiseDraw noise) {
  const Eigen::Index n = noise.W.rows();
  if (noise.W.cols() != n || U.rows() != n || U.cols() != theta.size())
    throw std::invalid_argument("build_spiked: dimension mismatch");
  SpikedInstance inst;
  inst.X = std::move(noise.W);
  inst.X.noalias() += U * theta.asDiagonal() * U.transpose() / static_cast<double>(n);
  inst.U_star = U;
  inst.theta = theta;
  inst.W_spectrum = std::move(noise.spectrum);
  return inst;
}

SpikedInstance build_spiked(const Mat& U, const Mat& V, const Vec& theta, NoiseDraw noise) {
  const Eigen::Index m = noise.W.rows(), n = noise.W.cols();
  if (U.rows() != m || V.rows() != n || U.cols() != theta.size() || V.cols() != theta.size())
    throw std::invalid_argument("build_spiked: dimension mismatch");
  SpikedInstance inst;
  inst.X = std::move(noise.W);
  inst.X.noalias() += U * theta.asDiagonal() * V.transpose() / std::sqrt(static_cast<double>(m) * n);
  inst.U_star = U;
  inst.V_star = V;
  inst.theta = theta;
  inst.W_spectrum = std::move(noise.spectrum);
  return inst;
}

void export_instance(const SpikedInstance& inst, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  write_matrix_csv((fs::path(dir) / "X.csv").string(), inst.X);
  write_matrix_csv((fs::path(dir) / "U_star.csv").string(), inst.U_star);
  if (inst.V_star.size()) write_matrix_csv((fs::path(dir) / "V_star.csv").string(), inst.V_star);
  write_matrix_csv((fs::path(dir) / "theta.csv").string(), inst.theta);
  if (!inst.W_spectrum.empty()) {
    std::ofstream out(fs::path(dir) / "spectrum.csv", std::ios::binary);
    out << "value\n";
    for (double v : inst.W_spectrum) out << format_double(v) << '\n';
  }
}

} // namespace oamp
