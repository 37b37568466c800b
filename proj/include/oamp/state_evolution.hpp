#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "oamp/block_matrix.hpp"
#include "oamp/denoisers.hpp"
#include "oamp/linalg.hpp"
#include "oamp/spectrum.hpp"

namespace oamp {

struct DeltaParts {
  BlockMatrix bar, tilde, tilde_t, hat;
};

// bar: rows/columns ≥ 1; tilde: row 0, columns ≥ 1; tilde_t: column 0, rows ≥ 1; hat: block [0,0].
DeltaParts decompose_delta(const BlockMatrix& delta);

// κ·bar + κ̃⊙tilde + tildeᵀ⊙κ̃ + κ̂⊙hat
BlockMatrix weighted_delta(const DeltaParts& p, double kappa, const DiagScaler& kt, const DiagScaler& kh);

// Blocks denom⁻¹ A_rᵀ A_s for r, s < blocks. Rows/columns past the supplied
// iterates are NaN (not yet defined). k gives the block width when no iterate exists yet.
BlockMatrix gram_table(const std::vector<Mat>& iterates, int blocks, double denom, int k = -1);

// Independent initialization.
BlockMatrix se_sigma_sym_independent(const BlockMatrix& phi, const BlockMatrix& delta, const CumulantModel& kappa);
BlockMatrix se_omega_rect_independent(const BlockMatrix& phi, const BlockMatrix& psi, const BlockMatrix& delta,
                                      const BlockMatrix& gram_v, const CumulantModel& kappa, double gamma);
BlockMatrix se_sigma_rect_independent(const BlockMatrix& phi, const BlockMatrix& psi, const BlockMatrix& delta,
                                      const BlockMatrix& gram_v, const CumulantModel& kappa);

// Spectral initialization.
BlockMatrix se_sigma_sym(const BlockMatrix& phi, const BlockMatrix& delta, const CumulantModel& kappa,
                         const KappaSeriesTables& tables);
BlockMatrix se_sigma_rect(const BlockMatrix& phi, const BlockMatrix& psi, const BlockMatrix& delta,
                          const BlockMatrix& gram_v, const CumulantModel& kappa, const KappaSeriesTables& tables);
BlockMatrix se_omega_rect(const BlockMatrix& phi, const BlockMatrix& psi, const BlockMatrix& delta,
                          const BlockMatrix& gram_v, const CumulantModel& kappa, const KappaSeriesTables& tables,
                          double gamma);

struct RectCovariances {
  BlockMatrix sigma, omega;
};
// From the t+1 grids (ψ's last row and Γ's last row/column may be undefined):
// Σ_t on the leading t×t grids and Ω_{t+1} on the full grids.
RectCovariances se_sigma_omega_rect(const BlockMatrix& phi_next, const BlockMatrix& psi_next,
                                    const BlockMatrix& delta_next, const BlockMatrix& gram_v_next,
                                    const CumulantModel& kappa, const KappaSeriesTables& tables, double gamma);

enum class MeanMode { sym, rect_mu, rect_nu };

// Mean block from E[A_s A_*ᵀ]: ·S (sym), ·S/√γ (rect_mu), ·S√γ (rect_nu).
Mat se_mu_block(const Mat& cross_moment, const DiagScaler& S, MeanMode mode, double gamma = 1.0);
// rows⁻¹ AᵀA, standing in for E[A A_*ᵀ] under the martingale identity.
Mat martingale_moment(const Mat& iterate);

// Smallest eigenvalue of Σ (or of the Schur complement of its trailing K×K block)
// below ratio · mean diagonal.
bool check_early_stop(const Mat& sigma, double threshold_ratio, int k = 0, bool schur = false);

// Lower-triangular L with LLᵀ = Σ, zero columns at numerically null pivots.
Mat lower_factor(const Mat& sigma);

struct SEState {
  int iteration = 0;
  Mat mu, sigma;  // (t+1)K × K, (t+1)K × (t+1)K
  Mat nu, omega;  // rectangular only
};

// Long format: iter,matrix,row_block,col_block,i,j,value
void write_se_csv(std::ostream& out, const std::vector<SEState>& states, int k);

// Population state evolution evaluated by Monte Carlo over the Gaussian SE laws,
// using exact spectral quantities of the noise law.
enum class DenoiserKind { full, last_block };

struct SEPrediction {
  std::vector<SEState> states;
  std::vector<double> mse_u, mse_v;  // per iteration (rectangular: iteration t ↔ U_{t+1}, V_t)
};

SEPrediction predict_sym_spectral(const SpectralLaw& law, const Vec& theta, const DiscretePrior& prior, int T,
                                  DenoiserKind kind, int samples, std::uint64_t seed);
SEPrediction predict_rect_spectral(const SpectralLaw& law, const Vec& theta, const DiscretePrior& u_prior,
                                   const DiscretePrior& v_prior, int T, DenoiserKind kind, int samples,
                                   std::uint64_t seed);

// Rows sampled i.i.d. from the prior (no orthogonalization).
Mat sample_prior_rows(const DiscretePrior& prior, int n, Rng& rng);

} // namespace oamp
