#ifndef TWOISO_GENERATORS_HPP
#define TWOISO_GENERATORS_HPP

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "twoiso/error.hpp"
#include "twoiso/linalg.hpp"
#include "twoiso/operators.hpp"
#include "twoiso/random.hpp"

namespace twoiso {

namespace family {
struct Scalar {
  double t = 2.0;
};
/// Diagonal entries, repeated cyclically when dim exceeds the list length.
struct Diagonal {
  std::vector<double> d;
};
/// U diag(s) W^H with seeded random unitaries and s uniform in [1, 3].
struct SvdRandom {
  std::uint64_t seed = 0;
};
/// id + G G^H / dim for a seeded Gaussian G.
struct IdentityPlusPsd {
  std::uint64_t seed = 0;
};
}  // namespace family

using Family = std::variant<family::Scalar, family::Diagonal, family::SvdRandom, family::IdentityPlusPsd>;

inline std::string describe(const Family& f) {
  struct {
    std::string operator()(const family::Scalar& s) const { return "scalar:" + std::to_string(s.t); }
    std::string operator()(const family::Diagonal& d) const {
      std::string out = "diag:";
      for (std::size_t i = 0; i < d.d.size(); ++i) out += (i ? "," : "") + std::to_string(d.d[i]);
      return out;
    }
    std::string operator()(const family::SvdRandom& s) const { return "svd-random(seed=" + std::to_string(s.seed) + ")"; }
    std::string operator()(const family::IdentityPlusPsd& s) const {
      return "id-plus-psd(seed=" + std::to_string(s.seed) + ")";
    }
  } v;
  return std::visit(v, f);
}

/// Smallest singular value certified through the eigensolver on T^H T.
inline bool certify_expansive(const DenseOperator& t, double tol = 1e-10) {
  return min_singular_value(t.matrix()) >= 1.0 - tol;
}

inline DenseOperator expansive_generator(std::size_t dim, const Family& fam) {
  if (dim == 0) throw Error(ErrorCode::InvalidArgument, "dim must be >= 1");
  DenseMatrix m;
  if (const auto* s = std::get_if<family::Scalar>(&fam)) {
    if (!(s->t >= 1.0)) throw Error(ErrorCode::InvalidFamilyParameter, "scalar t must be >= 1");
    m = DenseMatrix(dim, dim);
    for (std::size_t i = 0; i < dim; ++i) m(i, i) = s->t;
  } else if (const auto* d = std::get_if<family::Diagonal>(&fam)) {
    if (d->d.empty()) throw Error(ErrorCode::InvalidFamilyParameter, "diagonal list is empty");
    for (double v : d->d) {
      if (!(v >= 1.0)) throw Error(ErrorCode::InvalidFamilyParameter, "diagonal entry " + std::to_string(v) + " < 1");
    }
    m = DenseMatrix(dim, dim);
    for (std::size_t i = 0; i < dim; ++i) m(i, i) = d->d[i % d->d.size()];
  } else if (const auto* r = std::get_if<family::SvdRandom>(&fam)) {
    Rng rng(r->seed);
    const DenseMatrix u = rng.unitary(dim);
    const DenseMatrix w = rng.unitary(dim);
    DenseMatrix s(dim, dim);
    for (std::size_t i = 0; i < dim; ++i) s(i, i) = rng.uniform(1.0, 3.0);
    m = u * s * w.adjoint();
  } else {
    const auto& p = std::get<family::IdentityPlusPsd>(fam);
    Rng rng(p.seed);
    DenseMatrix g(dim, dim);
    for (std::size_t i = 0; i < dim; ++i) {
      for (std::size_t j = 0; j < dim; ++j) g(i, j) = rng.gaussian();
    }
    m = g * g.adjoint();
    for (std::size_t i = 0; i < dim; ++i) {
      for (std::size_t j = 0; j < dim; ++j) m(i, j) /= static_cast<double>(dim);
      m(i, i) += 1.0;
    }
  }
  DenseOperator t(std::move(m));
  if (!certify_expansive(t)) {
    throw Error(ErrorCode::InvalidFamilyParameter, "generated operator failed the expansivity certificate");
  }
  return t;
}

/// [[0, X], [0, 0]] with X a seeded Gaussian block; A^2 is structurally zero.
inline DenseOperator random_2nilpotent(std::size_t dim, std::uint64_t seed) {
  if (dim == 0 || dim % 2 != 0) throw Error(ErrorCode::OddDimension, "2-nilpotent generator needs an even dim");
  const std::size_t h = dim / 2;
  Rng rng(seed);
  DenseMatrix a(dim, dim);
  for (std::size_t i = 0; i < h; ++i) {
    for (std::size_t j = 0; j < h; ++j) a(i, h + j) = rng.gaussian();
  }
  return DenseOperator(std::move(a));
}

/// [[0, id], [0, 0]].
inline DenseOperator canonical_2nilpotent(std::size_t dim) {
  if (dim == 0 || dim % 2 != 0) throw Error(ErrorCode::OddDimension, "2-nilpotent generator needs an even dim");
  const std::size_t h = dim / 2;
  DenseMatrix a(dim, dim);
  for (std::size_t i = 0; i < h; ++i) a(i, h + i) = 1.0;
  return DenseOperator(std::move(a));
}

inline DenseOperator three_isometry_from_nilpotent(const DenseOperator& a) {
  if (!a.square()) throw Error(ErrorCode::NotNilpotent, "operator is not square");
  const DenseMatrix sq = a.matrix() * a.matrix();
  if (sq.maxabs() != 0.0) throw Error(ErrorCode::NotNilpotent, "A^2 is not exactly zero");
  return DenseOperator(DenseMatrix::identity(a.rows()) + a.matrix());
}

}  // namespace twoiso

#endif  // TWOISO_GENERATORS_HPP
