#pragma once

#include <stdexcept>
#include <string>

#include "oamp/spectrum.hpp"

namespace oamp {

struct SubcriticalError : std::runtime_error {
  int component;
  SubcriticalError(int k, const std::string& what)
      : std::runtime_error("component " + std::to_string(k) + ": " + what), component(k) {}
};

struct SymSpikes {
  Vec lambdas;          // K_+ largest (descending) then K_- smallest (ascending)
  Mat vectors;          // n×K, ‖f‖² = n
  Vec all_eigenvalues;  // ascending
  int k_plus = 0, k_minus = 0;
};

struct RectSpikes {
  Vec lambdas;             // descending
  Mat left_vectors;        // m×K, ‖f‖² = m
  Mat right_vectors;       // n×K, ‖g‖² = n
  Vec all_singular_values; // descending
};

struct SpikeEstimates {
  Vec lambda_pca, theta, mu_pca, nu_pca, R_val, Rprime_val, theta_u, theta_v;
  int size() const { return static_cast<int>(theta.size()); }
};

SymSpikes extract_sym_spikes(const Mat& X, int k_plus, int k_minus);
RectSpikes extract_rect_spikes(const Mat& X, int K);

// Eigenvalues with the extracted outliers removed.
SpectralSample sym_noise_sample(const SymSpikes& s);
SpectralSample rect_noise_sample(const RectSpikes& s, double gamma);

// Flip columns so that f_kᵀ u_*^k ≥ 0.
void align_signs(Mat& vectors, const Mat& truth);
void align_signs(RectSpikes& s, const Mat& u_truth, const Mat& v_truth);
// Largest-magnitude coordinate of each column made positive.
void canonical_signs(Mat& vectors);
void canonical_signs(RectSpikes& s);

// Minimum distance between an outlier and the bulk edge for it to count as
// separated; zero disables the check. Default: spread · count^{-2/3}.
double default_edge_margin(const SpectralSample& noise);

SpikeEstimates estimate_sym(const SymSpikes& spikes, const SpectralSample& noise, double edge_margin = -1.0);
SpikeEstimates estimate_rect(const RectSpikes& spikes, const SpectralSample& noise, double edge_margin = -1.0);

// Same formulas evaluated at given outlier locations under an arbitrary law.
SpikeEstimates estimate_sym_at(const Vec& lambdas, const SpectralLaw& law);
SpikeEstimates estimate_rect_at(const Vec& lambdas, const SpectralLaw& law);

// Population quantities for a known signal strength: outlier location from the inverse transform.
SpikeEstimates exact_sym(const Vec& theta, const SpectralLaw& law);
SpikeEstimates exact_rect(const Vec& theta, const SpectralLaw& law);

// Closed forms under semicircle / Marchenko–Pastur noise.
SpikeEstimates estimate_sym_semicircle(const Vec& lambdas);
SpikeEstimates estimate_rect_mp(const Vec& lambdas, double gamma);

} // namespace oamp
