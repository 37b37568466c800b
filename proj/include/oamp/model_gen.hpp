#pragma once

#include <memory>
#include <string>
#include <vector>

#include "oamp/denoisers.hpp"
#include "oamp/linalg.hpp"
#include "oamp/spectrum.hpp"

namespace oamp {

// Q of a sign-fixed QR of an n×n standard Gaussian matrix.
Mat haar_orthogonal(int n, Rng& rng);
// First `cols` columns of a Haar orthogonal n×n matrix.
Mat haar_columns(int n, int cols, Rng& rng);

enum class NoiseFamily { goe, iid_gaussian_rect, haar_diag };
enum class DiagLaw { uniform, centered_beta, custom };

struct NoiseSpec {
  NoiseFamily family = NoiseFamily::goe;
  bool rectangular = false;
  int n = 0;  // columns (and rows when symmetric)
  int m = 0;  // rows, rectangular only
  DiagLaw law = DiagLaw::uniform;
  double lo = 0.0, hi = 0.0;                  // uniform
  double a = 3.0, b = 1.0, scale = 1.0, shift = 0.0;  // x = scale·(Beta(a,b) − shift)
  std::vector<double> custom;                 // diagonal used as given

  double gamma() const { return rectangular ? static_cast<double>(m) / n : 1.0; }
};

// Settings used in the experiments.
NoiseSpec goe_spec(int n);
NoiseSpec iid_rect_spec(int m, int n);
NoiseSpec uniform_sym_spec(int n);          // Uniform[−√3, √3]
NoiseSpec centered_beta_sym_spec(int n);    // √(80/3)·(Beta(3,1) − 3/4)
NoiseSpec uniform_rect_spec(int m, int n);  // Uniform[√(3/7), 2√(3/7)]
NoiseSpec beta_rect_spec(int m, int n);     // √(5/3)·Beta(3,1)

struct NoiseDraw {
  Mat W;
  std::vector<double> spectrum;  // realized diagonal for haar_diag, empty otherwise
};

NoiseDraw sample_noise(const NoiseSpec& spec, Rng& rng);

// Limiting eigenvalue / singular value law of the noise family.
std::unique_ptr<SpectralLaw> population_law(const NoiseSpec& spec);

// n×K rows i.i.d. from the prior, columns orthogonalized with ‖·‖² = n.
Mat sample_signals(const DiscretePrior& prior, int n, Rng& rng);

struct SpikedInstance {
  Mat X;
  Mat U_star, V_star;  // V_star empty when symmetric
  Vec theta;
  std::vector<double> W_spectrum;
};

// X = Σ θ_k/n u_k u_kᵀ + W
SpikedInstance build_spiked(const Mat& U, const Vec& theta, NoiseDraw noise);
// X = Σ θ_k/√(mn) u_k v_kᵀ + W
SpikedInstance build_spiked(const Mat& U, const Mat& V, const Vec& theta, NoiseDraw noise);

// X.csv, U_star.csv, V_star.csv (rectangular), theta.csv, spectrum.csv (if known) in dir.
void export_instance(const SpikedInstance& inst, const std::string& dir);

} // namespace oamp
