#pragma once

#include <vector>

#include "oamp/block_matrix.hpp"

namespace oamp {

// Finite-atom law on ℝ^K. Atoms are stored in a canonical (lexicographic) order.
class DiscretePrior {
public:
  DiscretePrior(std::vector<Vec> atoms, std::vector<double> weights, bool normalized = false);

  int dim() const { return static_cast<int>(atoms_.front().size()); }
  int size() const { return static_cast<int>(atoms_.size()); }
  const std::vector<Vec>& atoms() const { return atoms_; }
  const std::vector<double>& weights() const { return weights_; }
  // K × (#atoms)
  const Mat& atom_matrix() const { return atom_matrix_; }
  Mat second_moment() const;

private:
  std::vector<Vec> atoms_;
  std::vector<double> weights_;
  Mat atom_matrix_;
};

// ½δ_{-1} + ½δ_{+1}
DiscretePrior two_point_prior();
// ½δ_{(0,1)} + ¼δ_{(√2,−1)} + ¼δ_{(−√2,−1)}
DiscretePrior three_point_prior();

// Gaussian channel f | u ~ N(μu, Σ) with cached B = Σ⁻¹μ and C = μᵀΣ⁻¹μ.
// A context built with last_block() only looks at the trailing K coordinates of f.
class DenoiserContext {
public:
  DenoiserContext(const Mat& mu, const Mat& sigma, double ridge_ratio = 1e-9);
  static DenoiserContext last_block(const Mat& mu, const Mat& sigma, double ridge_ratio = 1e-9);

  int input_dim() const { return input_dim_; }
  int k() const { return static_cast<int>(B_.cols()); }
  // Leading input coordinates ignored by this context.
  int first_used() const { return first_used_; }
  const Mat& B() const { return B_; }
  const Mat& C() const { return C_; }
  double ridge() const { return ridge_; }

private:
  DenoiserContext() = default;
  void factor(const Mat& mu, const Mat& sigma, double ridge_ratio);
  int input_dim_ = 0, first_used_ = 0;
  Mat B_, C_;
  double ridge_ = 0.0;
};

Vec posterior_mean(const Vec& f, const DenoiserContext& ctx, const DiscretePrior& prior);
// K × input_dim; block s holds ∂u/∂f_s.
Mat posterior_jacobian(const Vec& f, const DenoiserContext& ctx, const DiscretePrior& prior);

struct RowDenoise {
  Mat U;             // n × K
  Mat mean_jacobian; // K × input_dim, averaged over rows
};

// Posterior mean applied to each row of F (n × input_dim).
RowDenoise denoise_rows(const Mat& F, const DenoiserContext& ctx, const DiscretePrior& prior);

Vec single_iterate_posterior_mean(const Vec& f_last, const Mat& mu_last, const Mat& sigma_last,
                                  const DiscretePrior& prior);

// u = f·S⁻¹
Vec linear_denoiser(const Vec& f, const DiagScaler& S);
Mat linear_denoiser_rows(const Mat& F, const DiagScaler& S);

} // namespace oamp
