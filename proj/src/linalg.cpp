#include "oamp/linalg.hpp"

#include <lapacke.h>

#include <stdexcept>
#include <string>

namespace oamp {

std::uint64_t mix_seed(std::uint64_t base_seed, std::uint64_t stream) {
  auto splitmix = [](std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  };
  return splitmix(splitmix(base_seed) ^ (stream * 0xd1b54a32d192ed03ULL + 0x8cb92ba72f3d8dd7ULL));
}

Rng make_stream(std::uint64_t base_seed, std::uint64_t stream) {
  std::uint64_t s = mix_seed(base_seed, stream);
  std::seed_seq seq{static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(s >> 32)};
  return Rng(seq);
}

Mat gaussian_matrix(int rows, int cols, Rng& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Mat g(rows, cols);
  for (Eigen::Index j = 0; j < g.cols(); ++j)
    for (Eigen::Index i = 0; i < g.rows(); ++i) g(i, j) = nd(rng);
  return g;
}

static void check_info(lapack_int info, const char* what) {
  if (info != 0) throw std::runtime_error(std::string(what) + " failed with info " + std::to_string(info));
}

// Eigenvectors for the 1-based index range [il, iu] of the tridiagonal (d, e).
static Mat tridiag_vectors(const Vec& d, const Vec& e, int il, int iu, Vec& w) {
  const lapack_int n = static_cast<lapack_int>(d.size());
  const lapack_int cnt = iu - il + 1;
  Vec dd = d, ee(n);
  ee.head(n - 1) = e;
  ee(n - 1) = 0.0;
  Mat z(n, cnt);
  Vec wall(n);
  std::vector<lapack_int> isuppz(2 * static_cast<size_t>(cnt));
  lapack_int m = 0;
  lapack_logical tryrac = 1;
  lapack_int info = LAPACKE_dstemr(LAPACK_COL_MAJOR, 'V', 'I', n, dd.data(), ee.data(), 0.0, 0.0, il, iu, &m,
                                   wall.data(), z.data(), n, cnt, isuppz.data(), &tryrac);
  check_info(info, "dstemr");
  if (m != cnt) throw std::runtime_error("dstemr returned an unexpected eigenvalue count");
  w = wall.head(cnt);
  return z;
}

PartialEigen sym_eigen_extremes(const Mat& a_in, int k_top, int k_bottom) {
  const lapack_int n = static_cast<lapack_int>(a_in.rows());
  if (a_in.cols() != n) throw std::invalid_argument("sym_eigen_extremes: matrix not square");
  if (k_top < 0 || k_bottom < 0 || k_top + k_bottom > n) throw std::invalid_argument("sym_eigen_extremes: bad counts");
  PartialEigen out;
  if (n == 1) {
    out.values = a_in.col(0);
    out.top = Mat::Ones(1, k_top);
    out.top_values = Vec::Constant(k_top, a_in(0, 0));
    out.bottom = Mat::Ones(1, k_bottom);
    out.bottom_values = Vec::Constant(k_bottom, a_in(0, 0));
    return out;
  }
  Mat a = a_in;
  Vec d(n), e(n - 1), tau(n - 1);
  check_info(LAPACKE_dsytrd(LAPACK_COL_MAJOR, 'L', n, a.data(), n, d.data(), e.data(), tau.data()), "dsytrd");

  Vec dv = d, ev = e;
  check_info(LAPACKE_dsterf(n, dv.data(), ev.data()), "dsterf");
  out.values = dv;

  auto back_transform = [&](Mat& z) {
    if (z.cols() == 0) return;
    check_info(LAPACKE_dormtr(LAPACK_COL_MAJOR, 'L', 'L', 'N', n, static_cast<lapack_int>(z.cols()), a.data(), n,
                              tau.data(), z.data(), n),
               "dormtr");
  };

  if (k_top > 0) {
    Vec w;
    Mat z = tridiag_vectors(d, e, n - k_top + 1, n, w);
    back_transform(z);
    out.top = z.rowwise().reverse();
    out.top_values = w.reverse();
  } else {
    out.top = Mat(n, 0);
    out.top_values = Vec(0);
  }
  if (k_bottom > 0) {
    Vec w;
    Mat z = tridiag_vectors(d, e, 1, k_bottom, w);
    back_transform(z);
    out.bottom = z;
    out.bottom_values = w;
  } else {
    out.bottom = Mat(n, 0);
    out.bottom_values = Vec(0);
  }
  return out;
}

static Mat gram_lower(const Mat& x) {
  // x xᵀ, lower triangle from dsyrk then mirrored.
  const int m = static_cast<int>(x.rows()), n = static_cast<int>(x.cols());
  Mat c = Mat::Zero(m, m);
  const double one = 1.0, zero = 0.0;
  dsyrk_("L", "N", &m, &n, &one, x.data(), &m, &zero, c.data(), &m);
  c.triangularView<Eigen::StrictlyUpper>() = c.transpose();
  return c;
}

PartialSvd svd_top(const Mat& x, int k) {
  const int m = static_cast<int>(x.rows());
  if (m > x.cols()) throw std::invalid_argument("svd_top: expects rows <= cols");
  if (k < 0 || k > m) throw std::invalid_argument("svd_top: bad k");
  Mat g = gram_lower(x);
  PartialEigen pe = sym_eigen_extremes(g, k, 0);
  PartialSvd out;
  out.values = pe.values.reverse().cwiseMax(0.0).cwiseSqrt();
  out.left = pe.top;
  out.right = x.transpose() * pe.top;
  for (int j = 0; j < k; ++j) {
    double s = out.right.col(j).norm();
    if (!(s > 0.0)) throw std::runtime_error("svd_top: zero singular value among requested triplets");
    out.right.col(j) /= s;
  }
  return out;
}

Mat orthonormal_q(Mat a) {
  const lapack_int m = static_cast<lapack_int>(a.rows()), n = static_cast<lapack_int>(a.cols());
  if (n > m) throw std::invalid_argument("orthonormal_q: more columns than rows");
  Vec tau(n);
  check_info(LAPACKE_dgeqrf(LAPACK_COL_MAJOR, m, n, a.data(), m, tau.data()), "dgeqrf");
  Vec sign(n);
  for (lapack_int j = 0; j < n; ++j) sign(j) = a(j, j) < 0.0 ? -1.0 : 1.0;
  check_info(LAPACKE_dorgqr(LAPACK_COL_MAJOR, m, n, n, a.data(), m, tau.data()), "dorgqr");
  for (lapack_int j = 0; j < n; ++j)
    if (sign(j) < 0.0) a.col(j) = -a.col(j);
  return a;
}

Mat congruence(const Mat& a, const Vec& d) {
  const int n = static_cast<int>(a.cols());
  if (d.size() != a.rows()) throw std::invalid_argument("congruence: size mismatch");
  int np = 0, nn = 0;
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    if (d(i) > 0) ++np;
    else if (d(i) < 0) ++nn;
  }
  Mat pos(np, n), neg(nn, n);
  int ip = 0, in = 0;
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    if (d(i) > 0) pos.row(ip++) = std::sqrt(d(i)) * a.row(i);
    else if (d(i) < 0) neg.row(in++) = std::sqrt(-d(i)) * a.row(i);
  }
  Mat c = Mat::Zero(n, n);
  const double one = 1.0, mone = -1.0;
  if (np > 0) dsyrk_("L", "T", &n, &np, &one, pos.data(), &np, &one, c.data(), &n);
  if (nn > 0) dsyrk_("L", "T", &n, &nn, &mone, neg.data(), &nn, &one, c.data(), &n);
  c.triangularView<Eigen::StrictlyUpper>() = c.transpose();
  return c;
}

} // namespace oamp
