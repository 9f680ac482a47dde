#ifndef TWOISO_OPERATORS_HPP
#define TWOISO_OPERATORS_HPP

// Operators that act exactly on instantiated vectors of an
// infinite-dimensional space. Only forward application is ever needed:
// every identity checked here reduces to norms and inner products of
// images B^k x.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "twoiso/error.hpp"
#include "twoiso/linalg.hpp"
#include "twoiso/space.hpp"

namespace twoiso {

template <class Op>
concept ForwardOperator = requires(Op& op, const Vector& x) {
  { op.apply(x) } -> std::convertible_to<Vector>;
};

template <ForwardOperator Op>
Vector apply(Op& op, const Vector& x) {
  return op.apply(x);
}

/// Explicit matrix acting on coordinates [0, cols) of whatever space its
/// argument lives in. Immutable.
class DenseOperator {
 public:
  DenseOperator() = default;
  explicit DenseOperator(DenseMatrix m) : matrix_(std::move(m)) {
    if (!matrix_.is_finite()) throw Error(ErrorCode::InvalidArgument, "operator entries must be finite");
  }

  const DenseMatrix& matrix() const noexcept { return matrix_; }
  std::size_t rows() const noexcept { return matrix_.rows(); }
  std::size_t cols() const noexcept { return matrix_.cols(); }
  bool square() const noexcept { return rows() == cols(); }

  Vector apply(const Vector& x) const { return matrix_.apply(x); }

  double operator_norm() const { return spectral_norm(matrix_); }

 private:
  DenseMatrix matrix_;
};

/// Block-diagonal operator with k copies of T (T^(2) = T + T, T^(4) = T^(2) + T^(2)).
inline DenseOperator direct_sum_power(const DenseOperator& t, std::size_t k) {
  if (!t.square()) throw Error(ErrorCode::InvalidArgument, "direct_sum_power needs a square operator");
  if (k == 0) throw Error(ErrorCode::InvalidArgument, "direct_sum_power needs k >= 1");
  const std::size_t n = t.rows();
  DenseMatrix m(k * n, k * n);
  for (std::size_t b = 0; b < k; ++b) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) m(b * n + i, b * n + j) = t.matrix()(i, j);
    }
  }
  return DenseOperator(std::move(m));
}

/// x |-> sum_j <basis_j, x> images_j for an orthonormal domain basis.
class FiniteRankOperator {
 public:
  FiniteRankOperator() = default;
  FiniteRankOperator(std::vector<Vector> domain_basis, std::vector<Vector> images)
      : basis_(std::move(domain_basis)), images_(std::move(images)) {
    if (basis_.size() != images_.size()) {
      throw Error(ErrorCode::InvalidArgument, "domain basis and images differ in length");
    }
  }

  const std::vector<Vector>& domain_basis() const noexcept { return basis_; }
  const std::vector<Vector>& images() const noexcept { return images_; }
  std::size_t rank() const noexcept { return basis_.size(); }

  std::vector<cplx> coefficients(const Vector& x) const {
    std::vector<cplx> c(basis_.size());
    for (std::size_t j = 0; j < basis_.size(); ++j) c[j] = inner(basis_[j], x);
    return c;
  }

  Vector combine(std::span<const cplx> coeffs, std::uint64_t space_id) const {
    Vector out(1, space_id);
    for (std::size_t j = 0; j < images_.size(); ++j) out.axpy(coeffs[j], images_[j]);
    return out;
  }

  Vector apply(const Vector& x) const { return combine(coefficients(x), x.space_id()); }

  /// Exact operator norm: sqrt of the top eigenvalue of the image Gram matrix.
  double operator_norm() const {
    if (images_.empty()) return 0.0;
    return std::sqrt(std::max(0.0, hermitian_eig(gram_matrix(images_)).values.front()));
  }

 private:
  std::vector<Vector> basis_;
  std::vector<Vector> images_;
};

/// Isometry defined on a growing orthonormal input list. An input direction
/// not seen before is mapped to a freshly allocated coordinate, which is
/// orthogonal to everything instantiated so far (outputs, constraint set).
class LazyIsometry {
 public:
  LazyIsometry(std::shared_ptr<AmbientSpace> space, std::vector<Vector> inputs, std::vector<Vector> outputs,
               std::vector<Vector> constraint = {}, double tol = 1e-10)
      : space_(std::move(space)),
        inputs_(std::move(inputs)),
        outputs_(std::move(outputs)),
        constraint_(std::move(constraint)) {
    if (!space_) throw Error(ErrorCode::InvalidArgument, "LazyIsometry needs a space");
    if (inputs_.size() != outputs_.size()) {
      throw Error(ErrorCode::InvalidArgument, "inputs and outputs differ in length");
    }
    if (!inputs_.empty()) {
      if (identity_deviation(gram_matrix(inputs_)) > tol) {
        throw Error(ErrorCode::NotOrthonormal, "LazyIsometry inputs are not orthonormal");
      }
      if (identity_deviation(gram_matrix(outputs_)) > tol) {
        throw Error(ErrorCode::NotOrthonormal, "LazyIsometry outputs are not orthonormal");
      }
    }
    if (constraint_residual() > tol) {
      throw Error(ErrorCode::NotOrthonormal, "LazyIsometry outputs are not orthogonal to the constraint set");
    }
  }

  const std::vector<Vector>& inputs() const noexcept { return inputs_; }
  const std::vector<Vector>& outputs() const noexcept { return outputs_; }
  const std::vector<Vector>& constraint() const noexcept { return constraint_; }
  std::size_t defined_dimension() const noexcept { return inputs_.size(); }
  std::size_t extensions() const noexcept { return extensions_; }
  const AmbientSpace& space() const noexcept { return *space_; }

  Vector apply(const Vector& x) {
    const double xn = norm(x);
    Vector out(1, space_->id());
    if (xn == 0.0) return out;
    std::vector<cplx> c(inputs_.size());
    Vector r = x;
    // second pass only when the first one cancelled most of x
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t j = 0; j < inputs_.size(); ++j) {
        const cplx cj = inner(inputs_[j], r);
        c[j] += cj;
        r.axpy(-cj, inputs_[j]);
      }
      if (norm(r) > 0.5 * xn) break;
    }
    for (std::size_t j = 0; j < outputs_.size(); ++j) {
      if (j < fresh_index_.size() && fresh_index_[j]) {
        add_at(out, *fresh_index_[j], c[j]);
      } else {
        out.axpy(c[j], outputs_[j]);
      }
    }
    const double rn = norm(r);
    if (rn > 1e-12 * xn) {
      Vector fresh = space_->fresh_unit();
      const std::size_t at = fresh.size() - 1;
      r *= 1.0 / rn;
      r.set_space_id(space_->id());
      inputs_.push_back(std::move(r));
      outputs_.push_back(std::move(fresh));
      fresh_index_.resize(outputs_.size());
      fresh_index_.back() = at;
      ++extensions_;
      add_at(out, at, rn);
    }
    return out;
  }

  /// max over Gram(inputs) and Gram(outputs) of |G - I|.
  double isometry_residual() const {
    if (inputs_.empty()) return 0.0;
    return std::max(identity_deviation(gram_matrix(inputs_)), identity_deviation(gram_matrix(outputs_)));
  }

  /// max |<output, c>| over defined outputs and constraint vectors.
  double constraint_residual() const {
    double m = 0.0;
    for (const auto& o : outputs_) {
      for (const auto& c : constraint_) m = std::max(m, std::abs(inner(o, c)));
    }
    return m;
  }

 private:
  std::shared_ptr<AmbientSpace> space_;
  std::vector<Vector> inputs_;
  std::vector<Vector> outputs_;
  std::vector<Vector> constraint_;
  std::size_t extensions_ = 0;
  std::vector<std::optional<std::size_t>> fresh_index_;  // set for outputs that are fresh unit vectors

  static void add_at(Vector& v, std::size_t i, cplx a) {
    if (v.size() <= i) v.resize(i + 1);
    v[i] += a;
  }
};

inline Vector lazy_extend(LazyIsometry& r, const Vector& x) { return r.apply(x); }

/// B = [[R, s V], [0, id_K]] on L + K, L the orthogonal complement of K,
/// with s = sigma_scale (1 when absent).
class BrownianBlock {
 public:
  BrownianBlock(LazyIsometry r, std::vector<Vector> k_basis, std::vector<Vector> v_images,
                std::optional<double> sigma_scale = std::nullopt)
      : r_(std::move(r)), v_(k_basis, std::move(v_images)), sigma_(sigma_scale) {
    if (sigma_ && *sigma_ < 0.0) throw Error(ErrorCode::InvalidArgument, "sigma_scale must be nonnegative");
    if (!v_.domain_basis().empty() && identity_deviation(gram_matrix(v_.domain_basis())) > 1e-10) {
      throw Error(ErrorCode::NotOrthonormal, "K basis is not orthonormal");
    }
  }

  Vector apply(const Vector& x) {
    const auto c = v_.coefficients(x);
    Vector x_k(1, x.space_id());
    for (std::size_t j = 0; j < c.size(); ++j) x_k.axpy(c[j], v_.domain_basis()[j]);
    Vector out = r_.apply(x - x_k);
    out.axpy(scale(), v_.combine(c, x.space_id()));
    out += x_k;
    return out;
  }

  /// ||B||^2 = 1 + ||s V||^2, since B*B = id_L + (id_K + s^2 V*V) when R*V = 0.
  double operator_norm() const {
    const double v = scale() * v_.operator_norm();
    return std::sqrt(1.0 + v * v);
  }

  /// max |<R e, V f>| over instantiated R outputs e and V images f (R*V = 0).
  double hypothesis_residual() const {
    double m = 0.0;
    for (const auto& e : r_.outputs()) {
      for (const auto& f : v_.images()) m = std::max(m, std::abs(inner(e, f)) * scale());
    }
    return m;
  }

  /// max |<R e, k>| over R outputs and K basis vectors (Im R inside L).
  double range_residual() const {
    double m = 0.0;
    for (const auto& e : r_.outputs()) {
      for (const auto& k : v_.domain_basis()) m = std::max(m, std::abs(inner(e, k)));
    }
    return m;
  }

  double upper_right_norm() const { return scale() * v_.operator_norm(); }

  const LazyIsometry& isometry() const noexcept { return r_; }
  const FiniteRankOperator& upper_right() const noexcept { return v_; }
  const std::vector<Vector>& k_basis() const noexcept { return v_.domain_basis(); }
  std::optional<double> sigma_scale() const noexcept { return sigma_; }

 private:
  double scale() const noexcept { return sigma_.value_or(1.0); }

  LazyIsometry r_;
  FiniteRankOperator v_;
  std::optional<double> sigma_;
};

inline double binomial(int m, int k) {
  double b = 1.0;
  for (int i = 1; i <= k; ++i) b = b * (m - k + i) / i;
  return b;
}

struct DefectValue {
  double value = 0.0;      // sum_k (-1)^(m-k) C(m,k) ||B^k x||^2
  double magnitude = 0.0;  // sum_k C(m,k) ||B^k x||^2
};

template <ForwardOperator Op>
DefectValue defect_form_detailed(Op& b, const Vector& x, int m) {
  if (m < 1) throw Error(ErrorCode::InvalidArgument, "defect order must be >= 1");
  DefectValue d;
  Vector v = x;
  for (int k = 0; k <= m; ++k) {
    if (k > 0) v = b.apply(v);
    const double nk = squared_norm(v);
    const double w = binomial(m, k);
    d.value += ((m - k) % 2 == 0 ? w : -w) * nk;
    d.magnitude += w * nk;
  }
  return d;
}

/// Quadratic form of the m-isometry defect at x, from forward applications only.
template <ForwardOperator Op>
double defect_form(Op& b, const Vector& x, int m) {
  return defect_form_detailed(b, x, m).value;
}

/// Matrix of P_S B*B|_S: G[i][j] = <B s_i, B s_j>.
template <ForwardOperator Op>
DenseMatrix compressed_gram(Op& b, std::span<const Vector> s) {
  std::vector<Vector> images;
  images.reserve(s.size());
  for (const auto& v : s) images.push_back(b.apply(v));
  return gram_matrix(images);
}

struct DefectReport {
  int m = 2;
  std::size_t samples = 0;
  double max_abs_defect = 0.0;  // over unit sample vectors
  double scale = 1.0;           // max(1, ||B||^2)^m

  double relative() const noexcept { return max_abs_defect / scale; }
};

/// Defect of order m over the given sample vectors (each normalized first).
template <ForwardOperator Op>
DefectReport defect_suite(Op& b, std::span<const Vector> samples, int m, double op_norm) {
  DefectReport rep;
  rep.m = m;
  rep.samples = samples.size();
  rep.scale = std::pow(std::max(1.0, op_norm * op_norm), m);
  for (const auto& x : samples) {
    const double xn = norm(x);
    if (xn == 0.0) continue;
    rep.max_abs_defect = std::max(rep.max_abs_defect, std::abs(defect_form(b, (1.0 / xn) * x, m)));
  }
  return rep;
}

}  // namespace twoiso

#endif  // TWOISO_OPERATORS_HPP
