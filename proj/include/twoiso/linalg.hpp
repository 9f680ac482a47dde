#ifndef TWOISO_LINALG_HPP
#define TWOISO_LINALG_HPP

// Dense complex linear algebra on coordinate vectors of a (truncated)
// Hilbert space. Vectors carry an implicit zero tail: coordinates past
// size() are zero, so vectors of different lengths combine freely.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "twoiso/error.hpp"

namespace twoiso {

using cplx = std::complex<double>;

class Vector {
 public:
  Vector() : coords_(1) {}

  explicit Vector(std::size_t length, std::uint64_t space_id = 0)
      : coords_(std::max<std::size_t>(length, 1)), space_id_(space_id) {}

  Vector(std::initializer_list<cplx> coords, std::uint64_t space_id = 0)
      : coords_(coords), space_id_(space_id) {
    if (coords_.empty()) coords_.resize(1);
  }

  explicit Vector(std::vector<cplx> coords, std::uint64_t space_id = 0)
      : coords_(std::move(coords)), space_id_(space_id) {
    if (coords_.empty()) coords_.resize(1);
  }

  static Vector unit(std::size_t length, std::size_t index, std::uint64_t space_id = 0) {
    Vector v(std::max(length, index + 1), space_id);
    v.coords_[index] = 1.0;
    return v;
  }

  std::size_t size() const noexcept { return coords_.size(); }
  std::uint64_t space_id() const noexcept { return space_id_; }
  void set_space_id(std::uint64_t id) noexcept { space_id_ = id; }

  cplx& operator[](std::size_t i) { return coords_[i]; }
  const cplx& operator[](std::size_t i) const { return coords_[i]; }

  /// Coordinate i, zero past the stored length.
  cplx at(std::size_t i) const noexcept { return i < coords_.size() ? coords_[i] : cplx{}; }

  std::span<const cplx> coords() const noexcept { return coords_; }

  void resize(std::size_t length) { coords_.resize(std::max<std::size_t>(length, 1)); }

  /// Index one past the last nonzero coordinate (0 for the zero vector).
  std::size_t support_end() const noexcept {
    std::size_t end = coords_.size();
    while (end > 0 && coords_[end - 1] == cplx{}) --end;
    return end;
  }

  bool is_finite() const noexcept {
    return std::all_of(coords_.begin(), coords_.end(), [](const cplx& z) {
      return std::isfinite(z.real()) && std::isfinite(z.imag());
    });
  }

  /// this += a * x
  Vector& axpy(cplx a, const Vector& x) {
    adopt_space(x);
    if (x.size() > size()) coords_.resize(x.size());
    const double ar = a.real(), ai = a.imag();
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double xr = x.coords_[i].real(), xi = x.coords_[i].imag();
      coords_[i] += cplx(ar * xr - ai * xi, ar * xi + ai * xr);
    }
    return *this;
  }

  Vector& operator+=(const Vector& x) { return axpy(1.0, x); }
  Vector& operator-=(const Vector& x) { return axpy(-1.0, x); }
  Vector& operator*=(cplx a) {
    for (auto& z : coords_) z *= a;
    return *this;
  }

 private:
  void adopt_space(const Vector& x) {
    if (space_id_ != 0 && x.space_id_ != 0 && space_id_ != x.space_id_) {
      throw Error(ErrorCode::DomainMismatch, "vectors belong to different spaces");
    }
    if (space_id_ == 0) space_id_ = x.space_id_;
  }

  std::vector<cplx> coords_;
  std::uint64_t space_id_ = 0;
};

inline Vector operator+(Vector a, const Vector& b) { return a += b; }
inline Vector operator-(Vector a, const Vector& b) { return a -= b; }
inline Vector operator*(cplx s, Vector a) { return a *= s; }
inline Vector operator*(Vector a, cplx s) { return a *= s; }

/// <a, b>, conjugate-linear in the first argument.
inline cplx inner(const Vector& a, const Vector& b) {
  if (a.space_id() != 0 && b.space_id() != 0 && a.space_id() != b.space_id()) {
    throw Error(ErrorCode::DomainMismatch, "inner product across spaces");
  }
  const std::size_t n = std::min(a.size(), b.size());
  double re = 0.0, im = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double ar = a[i].real(), ai = a[i].imag(), br = b[i].real(), bi = b[i].imag();
    re += ar * br + ai * bi;
    im += ar * bi - ai * br;
  }
  return {re, im};
}

inline double squared_norm(const Vector& a) noexcept {
  double acc = 0.0;
  for (const auto& z : a.coords()) acc += std::norm(z);
  return acc;
}

inline double norm(const Vector& a) noexcept { return std::sqrt(squared_norm(a)); }

/// Copy of v with its coordinates shifted up by offset (direct-sum placement).
inline Vector shifted(const Vector& v, std::size_t offset, std::uint64_t space_id = 0) {
  Vector out(offset + v.size(), space_id != 0 ? space_id : v.space_id());
  for (std::size_t i = 0; i < v.size(); ++i) out[offset + i] = v[i];
  return out;
}

/// Coordinates [offset, offset + length) of v as a standalone vector.
inline Vector slice(const Vector& v, std::size_t offset, std::size_t length) {
  Vector out(length);
  for (std::size_t i = 0; i < length; ++i) out[i] = v.at(offset + i);
  return out;
}

class DenseMatrix {
 public:
  DenseMatrix() = default;

  DenseMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

  DenseMatrix(std::initializer_list<std::initializer_list<cplx>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& row : rows) {
      if (row.size() != cols_) throw Error(ErrorCode::InvalidArgument, "ragged matrix literal");
      data_.insert(data_.end(), row.begin(), row.end());
    }
  }

  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<cplx> row_major)
      : rows_(rows), cols_(cols), data_(std::move(row_major)) {
    if (data_.size() != rows_ * cols_) {
      throw Error(ErrorCode::InvalidArgument, "entry count does not match rows*cols");
    }
  }

  static DenseMatrix identity(std::size_t n) {
    DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    m.hermitian_ = true;
    return m;
  }

  static DenseMatrix diagonal(std::span<const double> d) {
    DenseMatrix m(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
    m.hermitian_ = true;
    return m;
  }

  /// Matrix whose columns are the given vectors, truncated or padded to `rows`.
  static DenseMatrix from_columns(std::span<const Vector> columns, std::size_t rows) {
    DenseMatrix m(rows, columns.size());
    for (std::size_t j = 0; j < columns.size(); ++j) {
      for (std::size_t i = 0; i < rows; ++i) m(i, j) = columns[j].at(i);
    }
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool hermitian() const noexcept { return hermitian_; }

  cplx& operator()(std::size_t i, std::size_t j) {
    hermitian_ = false;
    return data_[i * cols_ + j];
  }
  const cplx& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<const cplx> entries() const noexcept { return data_; }

  double maxabs() const noexcept {
    double m = 0.0;
    for (const auto& z : data_) m = std::max(m, std::abs(z));
    return m;
  }

  bool is_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](const cplx& z) {
      return std::isfinite(z.real()) && std::isfinite(z.imag());
    });
  }

  /// max |M - M^H| entrywise.
  double hermitian_deviation() const {
    if (rows_ != cols_) return INFINITY;
    double dev = 0.0;
    for (std::size_t i = 0; i < rows_; ++i) {
      for (std::size_t j = i; j < cols_; ++j) {
        dev = std::max(dev, std::abs((*this)(i, j) - std::conj((*this)(j, i))));
      }
    }
    return dev;
  }

  /// Sets the Hermitian flag; the flag requires deviation <= 1e-12 maxabs.
  DenseMatrix& mark_hermitian() {
    if (hermitian_deviation() > 1e-12 * maxabs()) {
      throw Error(ErrorCode::NotHermitian, "matrix is not Hermitian to 1e-12 relative");
    }
    hermitian_ = true;
    return *this;
  }

  DenseMatrix adjoint() const {
    DenseMatrix out(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i) {
      for (std::size_t j = 0; j < cols_; ++j) out.data_[j * rows_ + i] = std::conj((*this)(i, j));
    }
    out.hermitian_ = hermitian_;
    return out;
  }

  /// M x. Coordinates of x past cols() must be zero.
  Vector apply(const Vector& x) const {
    if (x.support_end() > cols_) {
      throw Error(ErrorCode::DomainMismatch, "vector has support outside the matrix domain");
    }
    Vector out(rows_, x.space_id());
    const std::size_t n = std::min(cols_, x.size());
    for (std::size_t i = 0; i < rows_; ++i) {
      cplx acc{};
      const cplx* row = data_.data() + i * cols_;
      for (std::size_t j = 0; j < n; ++j) acc += row[j] * x[j];
      out[i] = acc;
    }
    return out;
  }

  friend DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.cols_ != b.rows_) throw Error(ErrorCode::DomainMismatch, "matrix product shape mismatch");
    DenseMatrix out(a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i) {
      for (std::size_t k = 0; k < a.cols_; ++k) {
        const cplx aik = a(i, k);
        if (aik == cplx{}) continue;
        for (std::size_t j = 0; j < b.cols_; ++j) out.data_[i * b.cols_ + j] += aik * b(k, j);
      }
    }
    return out;
  }

  friend DenseMatrix operator+(DenseMatrix a, const DenseMatrix& b) {
    if (a.rows_ != b.rows_ || a.cols_ != b.cols_) {
      throw Error(ErrorCode::DomainMismatch, "matrix sum shape mismatch");
    }
    for (std::size_t i = 0; i < a.data_.size(); ++i) a.data_[i] += b.data_[i];
    a.hermitian_ = a.hermitian_ && b.hermitian_;
    return a;
  }

  friend DenseMatrix operator-(DenseMatrix a, const DenseMatrix& b) {
    if (a.rows_ != b.rows_ || a.cols_ != b.cols_) {
      throw Error(ErrorCode::DomainMismatch, "matrix difference shape mismatch");
    }
    for (std::size_t i = 0; i < a.data_.size(); ++i) a.data_[i] -= b.data_[i];
    a.hermitian_ = a.hermitian_ && b.hermitian_;
    return a;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<cplx> data_;
  bool hermitian_ = false;
};

/// max |G - I| entrywise; the basic orthonormality residual.
inline double identity_deviation(const DenseMatrix& g) {
  double dev = 0.0;
  for (std::size_t i = 0; i < g.rows(); ++i) {
    for (std::size_t j = 0; j < g.cols(); ++j) {
      dev = std::max(dev, std::abs(g(i, j) - (i == j ? cplx{1.0} : cplx{})));
    }
  }
  return dev;
}

inline double max_offdiagonal(const DenseMatrix& g) {
  double dev = 0.0;
  for (std::size_t i = 0; i < g.rows(); ++i) {
    for (std::size_t j = 0; j < g.cols(); ++j) {
      if (i != j) dev = std::max(dev, std::abs(g(i, j)));
    }
  }
  return dev;
}

inline DenseMatrix gram_matrix(std::span<const Vector> vectors) {
  if (vectors.empty()) throw Error(ErrorCode::InvalidArgument, "gram_matrix of an empty list");
  const std::size_t n = vectors.size();
  DenseMatrix g(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    g(i, i) = squared_norm(vectors[i]);
    for (std::size_t j = i + 1; j < n; ++j) {
      const cplx v = inner(vectors[i], vectors[j]);
      g(i, j) = v;
      g(j, i) = std::conj(v);
    }
  }
  g.mark_hermitian();
  return g;
}

/// Orthonormal basis of span(vectors), two-pass classical Gram-Schmidt.
/// A vector is dropped when its residual is at most rank_tol * (max input norm).
inline std::vector<Vector> gram_schmidt(std::span<const Vector> vectors, double rank_tol = 1e-10) {
  if (rank_tol < 0.0) throw Error(ErrorCode::InvalidArgument, "rank_tol must be nonnegative");
  double max_norm = 0.0;
  for (const auto& v : vectors) max_norm = std::max(max_norm, norm(v));
  std::vector<Vector> basis;
  if (max_norm > 0.0) {
    for (const auto& v : vectors) {
      Vector r = v;
      for (int pass = 0; pass < 2; ++pass) {
        for (const auto& q : basis) r.axpy(-inner(q, r), q);
      }
      const double rn = norm(r);
      if (rn <= rank_tol * max_norm || rn == 0.0) continue;
      r *= 1.0 / rn;
      basis.push_back(std::move(r));
    }
  }
  if (basis.empty()) throw Error(ErrorCode::AllVectorsNegligible, "every input vector was dropped");
  return basis;
}

inline std::vector<Vector> gram_schmidt(std::initializer_list<Vector> vectors, double rank_tol = 1e-10) {
  return gram_schmidt(std::span<const Vector>(vectors.begin(), vectors.size()), rank_tol);
}

struct EigenDecomposition {
  std::vector<double> values;   // descending
  std::vector<Vector> vectors;  // orthonormal, vectors[k] belongs to values[k]
};

/// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi rotations.
inline EigenDecomposition hermitian_eig(const DenseMatrix& m) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw Error(ErrorCode::NotHermitian, "hermitian_eig needs a nonempty square matrix");
  }
  const double scale = m.maxabs();
  if (!m.is_finite() || m.hermitian_deviation() > 1e-10 * scale) {
    throw Error(ErrorCode::NotHermitian, "matrix is not Hermitian to 1e-10 relative");
  }
  const std::size_t n = m.rows();
  std::vector<cplx> a(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) a[i * n + j] = 0.5 * (m(i, j) + std::conj(m(j, i)));
  }
  std::vector<cplx> v(n * n);
  for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;
  auto A = [&](std::size_t i, std::size_t j) -> cplx& { return a[i * n + j]; };
  auto Q = [&](std::size_t i, std::size_t j) -> cplx& { return v[i * n + j]; };

  double frob = 0.0;
  for (const auto& z : a) frob += std::norm(z);
  frob = std::sqrt(frob);

  for (int sweep = 0; sweep < 100 && frob > 0.0; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) off += std::norm(A(p, q));
    }
    if (std::sqrt(2.0 * off) <= 1e-16 * frob) break;

    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const cplx apq = A(p, q);
        const double g = std::abs(apq);
        if (g <= 1e-300 || g <= 1e-18 * frob) continue;
        const cplx phase = apq / g;
        const double app = A(p, p).real();
        const double aqq = A(q, q).real();
        const double theta = (aqq - app) / (2.0 * g);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        // U = diag(1, conj(phase)) * [[c, s], [-s, c]] restricted to (p, q)
        const cplx u_pp = c;
        const cplx u_pq = s;
        const cplx u_qp = -s * std::conj(phase);
        const cplx u_qq = c * std::conj(phase);
        for (std::size_t k = 0; k < n; ++k) {
          const cplx akp = A(k, p), akq = A(k, q);
          A(k, p) = akp * u_pp + akq * u_qp;
          A(k, q) = akp * u_pq + akq * u_qq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const cplx apk = A(p, k), aqk = A(q, k);
          A(p, k) = std::conj(u_pp) * apk + std::conj(u_qp) * aqk;
          A(q, k) = std::conj(u_pq) * apk + std::conj(u_qq) * aqk;
        }
        A(p, q) = 0.0;
        A(q, p) = 0.0;
        A(p, p) = A(p, p).real();
        A(q, q) = A(q, q).real();
        for (std::size_t k = 0; k < n; ++k) {
          const cplx vkp = Q(k, p), vkq = Q(k, q);
          Q(k, p) = vkp * u_pp + vkq * u_qp;
          Q(k, q) = vkp * u_pq + vkq * u_qq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return A(i, i).real() > A(j, j).real(); });
  EigenDecomposition out;
  out.values.reserve(n);
  out.vectors.reserve(n);
  for (std::size_t k : order) {
    out.values.push_back(A(k, k).real());
    Vector col(n);
    for (std::size_t i = 0; i < n; ++i) col[i] = Q(i, k);
    out.vectors.push_back(std::move(col));
  }
  return out;
}

/// Largest singular value.
inline double spectral_norm(const DenseMatrix& m) {
  if (m.rows() == 0 || m.cols() == 0) return 0.0;
  DenseMatrix g = m.adjoint() * m;
  g.mark_hermitian();
  return std::sqrt(std::max(0.0, hermitian_eig(g).values.front()));
}

/// Smallest singular value of a matrix with rows >= cols.
inline double min_singular_value(const DenseMatrix& m) {
  if (m.rows() == 0 || m.cols() == 0) return 0.0;
  DenseMatrix g = m.adjoint() * m;
  g.mark_hermitian();
  return std::sqrt(std::max(0.0, hermitian_eig(g).values.back()));
}

}  // namespace twoiso

#endif  // TWOISO_LINALG_HPP
