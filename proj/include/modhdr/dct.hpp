#pragma once

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

namespace modhdr {

/// Orthonormal DCT-II basis for one dimension. B[u*n + i] =
/// s_u * cos(pi*u*(2i+1)/(2n)) with s_0 = sqrt(1/n), s_u = sqrt(2/n),
/// so forward (DCT-II) and inverse (DCT-III) are exact transposes.
class DctBasis {
 public:
  explicit DctBasis(int n) : n_(n), b_(static_cast<std::size_t>(n) * n) {
    const double pi = 3.14159265358979323846264338327950288;
    for (int u = 0; u < n; ++u) {
      double s = (u == 0) ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
      for (int i = 0; i < n; ++i)
        b_[static_cast<std::size_t>(u) * n + i] = s * std::cos(pi * u * (2 * i + 1) / (2.0 * n));
    }
  }

  int n() const { return n_; }
  const double* data() const { return b_.data(); }

 private:
  int n_;
  std::vector<double> b_;
};

/// Process-wide basis cache; solves at a repeated size (training inner
/// loops) reuse the cosine tables.
inline const DctBasis& dct_basis(int n) {
  static std::mutex mu;
  static std::map<int, std::unique_ptr<DctBasis>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, std::make_unique<DctBasis>(n)).first;
  return *it->second;
}

namespace detail {

// dst(M x N) = B(M x M) * src(M x N), plain ikj loops.
inline void matmul_basis_left(const double* basis, const double* src, double* dst, int m, int n) {
  for (int u = 0; u < m; ++u) {
    double* row = dst + static_cast<std::size_t>(u) * n;
    for (int j = 0; j < n; ++j) row[j] = 0.0;
    for (int i = 0; i < m; ++i) {
      const double bui = basis[static_cast<std::size_t>(u) * m + i];
      const double* srow = src + static_cast<std::size_t>(i) * n;
      for (int j = 0; j < n; ++j) row[j] += bui * srow[j];
    }
  }
}

// dst(M x N) = src(M x N) * B(N x N)^T
inline void matmul_basis_right_t(const double* src, const double* basis, double* dst, int m, int n) {
  for (int i = 0; i < m; ++i) {
    const double* srow = src + static_cast<std::size_t>(i) * n;
    double* drow = dst + static_cast<std::size_t>(i) * n;
    for (int v = 0; v < n; ++v) {
      const double* brow = basis + static_cast<std::size_t>(v) * n;
      double acc = 0.0;
      for (int j = 0; j < n; ++j) acc += srow[j] * brow[j];
      drow[v] = acc;
    }
  }
}

// dst(M x N) = B(M x M)^T * src(M x N)
inline void matmul_basis_left_t(const double* basis, const double* src, double* dst, int m, int n) {
  for (int i = 0; i < m; ++i) {
    double* row = dst + static_cast<std::size_t>(i) * n;
    for (int j = 0; j < n; ++j) row[j] = 0.0;
  }
  for (int u = 0; u < m; ++u) {
    const double* srow = src + static_cast<std::size_t>(u) * n;
    for (int i = 0; i < m; ++i) {
      const double bui = basis[static_cast<std::size_t>(u) * m + i];
      double* drow = dst + static_cast<std::size_t>(i) * n;
      for (int j = 0; j < n; ++j) drow[j] += bui * srow[j];
    }
  }
}

// dst(M x N) = src(M x N) * B(N x N)
inline void matmul_basis_right(const double* src, const double* basis, double* dst, int m, int n) {
  for (int i = 0; i < m; ++i) {
    const double* srow = src + static_cast<std::size_t>(i) * n;
    double* drow = dst + static_cast<std::size_t>(i) * n;
    for (int v = 0; v < n; ++v) drow[v] = 0.0;
    for (int j = 0; j < n; ++j) {
      const double s = srow[j];
      const double* brow = basis + static_cast<std::size_t>(j) * n;
      for (int v = 0; v < n; ++v) drow[v] += s * brow[v];
    }
  }
}

}  // namespace detail

/// Separable 2D orthonormal DCT-II of an M x N row-major buffer.
inline std::vector<double> dct2(const std::vector<double>& src, int m, int n) {
  const DctBasis& bm = dct_basis(m);
  const DctBasis& bn = dct_basis(n);
  std::vector<double> tmp(src.size()), out(src.size());
  detail::matmul_basis_left(bm.data(), src.data(), tmp.data(), m, n);
  detail::matmul_basis_right_t(tmp.data(), bn.data(), out.data(), m, n);
  return out;
}

/// Inverse of dct2 (2D orthonormal DCT-III).
inline std::vector<double> idct2(const std::vector<double>& src, int m, int n) {
  const DctBasis& bm = dct_basis(m);
  const DctBasis& bn = dct_basis(n);
  std::vector<double> tmp(src.size()), out(src.size());
  detail::matmul_basis_left_t(bm.data(), src.data(), tmp.data(), m, n);
  detail::matmul_basis_right(tmp.data(), bn.data(), out.data(), m, n);
  return out;
}

}  // namespace modhdr
