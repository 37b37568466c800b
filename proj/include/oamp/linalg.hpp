#pragma once

#include <random>

#include "oamp/block_matrix.hpp"

namespace oamp {

using Rng = std::mt19937_64;

// Independent generator for (base_seed, stream) via splitmix64 mixing.
Rng make_stream(std::uint64_t base_seed, std::uint64_t stream);
std::uint64_t mix_seed(std::uint64_t base_seed, std::uint64_t stream);

Mat gaussian_matrix(int rows, int cols, Rng& rng);

struct PartialEigen {
  Vec values;      // all eigenvalues, ascending
  Mat top;         // eigenvectors of the k_top largest, largest first
  Vec top_values;
  Mat bottom;      // eigenvectors of the k_bottom smallest, smallest first
  Vec bottom_values;
};

// Dense symmetric eigendecomposition returning every eigenvalue but only the
// requested extreme eigenvectors (unit norm). Reads the lower triangle.
PartialEigen sym_eigen_extremes(const Mat& a, int k_top, int k_bottom);

struct PartialSvd {
  Vec values;  // all singular values of the m×n (m ≤ n) input, descending
  Mat left;    // m×k unit left vectors
  Mat right;   // n×k unit right vectors
};

// Top-k singular triplets and every singular value, through the m×m Gram matrix.
PartialSvd svd_top(const Mat& x, int k);

// Q factor of a Householder QR with columns sign-fixed so diag(R) > 0.
Mat orthonormal_q(Mat a);

// Aᵀ diag(d) A computed as a difference of two rank updates.
Mat congruence(const Mat& a, const Vec& d);

} // namespace oamp
