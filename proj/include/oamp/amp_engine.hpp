#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "oamp/denoisers.hpp"
#include "oamp/spectrum.hpp"
#include "oamp/spike_estimation.hpp"
#include "oamp/state_evolution.hpp"

namespace oamp {

enum class Algorithm { bayes_oamp, single_iterate, gaussian_bayes_amp, linear };
enum class CumulantSource { estimated, exact };
enum class StopReason { max_iters, early_stop, diverged };

const char* algorithm_name(Algorithm a);
Algorithm parse_algorithm(const std::string& name);

struct AmpConfig {
  Algorithm algorithm = Algorithm::bayes_oamp;
  int max_iters = 10;
  int K = 1;        // symmetric: number of top outliers; rectangular: rank
  int k_minus = 0;  // symmetric: number of bottom outliers
  double early_stop_ratio = 1e-9;
  bool schur_early_stop = false;
  CumulantSource cumulant_source = CumulantSource::estimated;
  const SpectralLaw* exact_law = nullptr;  // noise law for CumulantSource::exact
  std::uint64_t seed = 0;
  double edge_margin = -1.0;  // < 0: default rule
  double ridge_ratio = 1e-9;

  int rank() const { return K + k_minus; }
};

struct MetricPoint {
  int iteration;
  std::string metric;
  double value;
};

struct Trajectory {
  std::vector<Mat> U, F, V, G;
  std::vector<SEState> se_states;
  std::vector<MetricPoint> metrics;
  StopReason stop_reason = StopReason::max_iters;
  int completed = 0;  // iterations after the initialization
  SpikeEstimates estimates;
  CumulantModel kappa;
  std::vector<double> linear_error;  // ‖F_t − F_pca‖_F/√n, linear AMP only
};

// Carries the iteration at which a run failed.
struct AmpError : std::runtime_error {
  int iteration;
  AmpError(int t, const std::string& what)
      : std::runtime_error("iteration " + std::to_string(t) + ": " + what), iteration(t) {}
};

// Spectrally initialized loops. With truth supplied, signs of the sample
// vectors follow the truth and metrics are recorded:
//   symmetric: iteration t ↔ U_t (iteration 0 ↔ F_pca);
//   rectangular: iteration t ↔ (U_{t+1}, V_t) (iteration 0 ↔ (F_pca, G_pca)).
Trajectory run_sym_spectral(const Mat& X, const DiscretePrior& prior, const AmpConfig& cfg,
                            const Mat* u_truth = nullptr);
Trajectory run_rect_spectral(const Mat& X, const DiscretePrior& u_prior, const DiscretePrior& v_prior,
                             const AmpConfig& cfg, const Mat* u_truth = nullptr, const Mat* v_truth = nullptr);
// Same, reusing outliers already extracted from X (signs are re-aligned when truth is given).
Trajectory run_sym_spectral(const Mat& X, SymSpikes spikes, const DiscretePrior& prior, const AmpConfig& cfg,
                            const Mat* u_truth = nullptr);
Trajectory run_rect_spectral(const Mat& X, RectSpikes spikes, const DiscretePrior& u_prior,
                             const DiscretePrior& v_prior, const AmpConfig& cfg, const Mat* u_truth = nullptr,
                             const Mat* v_truth = nullptr);

// Row-wise map used by the independent-initialization loops: arguments are the
// stacked iterates (rows × cK), t is the index of the produced iterate. Side
// information, if any, is captured by the map itself.
using RowMap = std::function<RowDenoise(const Mat& args, int t)>;

// Identity in the newest argument block.
RowMap identity_chain(int k);

// Z_t = W U_t − Σ_{s≤t} U_s b_tsᵀ, U_{t+1} = u(Z_1..Z_t). Records Σ_t.
Trajectory run_sym_independent(const Mat& W, const Mat& U1, const RowMap& u_map, const CumulantModel& kappa, int T);
// Z_t = Wᵀ U_t − Σ_{s<t} V_s b_tsᵀ, V_t = v(Z_1..Z_t),
// Y_t = W V_t − Σ_{s≤t} U_s a_tsᵀ, U_{t+1} = u(Y_1..Y_t). G holds Z_t, F holds Y_t.
Trajectory run_rect_independent(const Mat& W, const Mat& U1, const RowMap& u_map, const RowMap& v_map,
                                const CumulantModel& kappa, int T);

// F_t = X U_t − Σ_i κ_{t−i+1} U_i S^{−(t−i)}, U_{t+1} = F_t S⁻¹, starting from U_1.
Trajectory run_linear_amp(const Mat& X, const DiagScaler& S, const CumulantModel& kappa, int tau, const Mat& U1,
                          const Mat& F_pca);

} // namespace oamp
