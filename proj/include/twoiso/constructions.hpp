#ifndef TWOISO_CONSTRUCTIONS_HPP
#define TWOISO_CONSTRUCTIONS_HPP

// 2-isometric approximants on the finite-dimensional subspace F:
//
//  * theorem1_construct: a Brownian block I_F with ||(I_F - 2 id)x|| = ||x|| / dim F
//    for x in F, so the net (I_F)_F converges strongly to 2 id.
//  * theorem2_construct: for an expansive T, a block I_F on H^(4) with
//    ||(T^(4) - I_F)|_{F+0+0+0}|| <= (||T|| + 1) / dim F.
//
// H^(4) is laid out as four consecutive copies of the truncated H, so
// x + 0 + 0 + 0 has the same coordinates as x. The unitary identification
// H ~ H^(4) is norm preserving and is never materialized.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "twoiso/error.hpp"
#include "twoiso/linalg.hpp"
#include "twoiso/operators.hpp"
#include "twoiso/random.hpp"
#include "twoiso/space.hpp"

namespace twoiso {

struct ConstructionParams {
  std::optional<double> epsilon;  // 1/dim F when absent
  double tol_build = 1e-12;
  double tol_verify = 1e-9;
  double tol_defect = 1e-8;        // relative to max(1, ||I_F||^2)^2
  std::size_t samples = 200;       // certificate sample count
  std::size_t expansivity_sets = 20;
  std::uint64_t seed = 0;
};

struct ConstructionTrace {
  std::size_t n = 0;
  double epsilon = 0.0;
  std::size_t h_dim = 0;  // dimension of the truncated H

  std::vector<Vector> x;  // ONB of F (diagonalizing for T in the expansive pipeline)
  std::vector<Vector> y1, y2;

  // Brownian-unitary net only.
  std::vector<Vector> x_tilde;
  std::vector<Vector> y1_tilde;

  // Expansive pipeline only; yhat1 and yhat2 coincide with y1, y2 inside H^(4).
  std::vector<Vector> yhat1, yhat1_shift, yhat2;

  std::vector<Vector> z1, z2;
  std::vector<double> sigmas;
  std::vector<double> norms_Tx;
};

struct Certificate {
  std::size_t n = 0;
  double epsilon = 0.0;
  double operator_norm_T = 0.0;
  double bound_theoretical = 0.0;
  double bound_measured = 0.0;
  DefectReport defect_report;
  double expansivity_min = 0.0;
  double orthogonality_max = 0.0;      // max |<T^(4) z, yhat^(2)>| (Im R vs the constraint set for the Brownian net)
  double residual_identity_max = 0.0;  // exact error formula, per basis vector of F
  double hypothesis_residual = 0.0;    // max |<R e, V f>|
  double operator_norm_block = 0.0;

  double tol_verify = 1e-9;
  double tol_defect = 1e-8;

  bool bound_ok() const { return bound_measured <= bound_theoretical * (1.0 + tol_verify); }
  bool defect_ok() const { return defect_report.relative() <= tol_defect; }
  bool expansive_ok() const { return expansivity_min >= 1.0 - tol_verify; }
  bool orthogonality_ok() const { return orthogonality_max <= 1e-10 * std::max(1.0, operator_norm_T); }
  bool residual_ok() const { return residual_identity_max <= tol_verify * (operator_norm_T + 1.0); }
  bool hypothesis_ok() const { return hypothesis_residual <= 1e-10 * std::max(1.0, operator_norm_block); }
  bool passed() const {
    return bound_ok() && defect_ok() && expansive_ok() && orthogonality_ok() && residual_ok() && hypothesis_ok();
  }
};

inline double resolve_epsilon(const ConstructionParams& p, std::size_t n) {
  const double eps = p.epsilon.value_or(1.0 / static_cast<double>(n));
  if (!(eps > 0.0 && eps <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "epsilon must lie in (0, 1]");
  }
  return eps;
}

/// ONB x_1..x_n of span(F_basis) with <T x_i, T x_j> = 0 for i != j:
/// the eigenbasis of the compression P_F T*T|_F.
inline std::vector<Vector> diagonalizing_basis(const DenseOperator& t, std::span<const Vector> f_basis) {
  const auto q = gram_schmidt(f_basis);
  const DenseMatrix g = compressed_gram(t, std::span<const Vector>(q));
  const auto eig = hermitian_eig(g);
  std::vector<Vector> x;
  x.reserve(q.size());
  for (const auto& w : eig.vectors) {
    Vector v(1, q.front().space_id());
    for (std::size_t j = 0; j < q.size(); ++j) v.axpy(w[j], q[j]);
    x.push_back(std::move(v));
  }
  return x;
}

struct SplitPair {
  std::vector<Vector> first;   // y_i^(1) = sqrt(1-c_i^2)(x_i + 0) + c_i (0 + x_i)
  std::vector<Vector> second;  // y_i^(2) = c_i (x_i + 0) - sqrt(1-c_i^2)(0 + x_i)
};

/// Doubling of an ONS with orthogonal T-images into the block-diagonal
/// copy of `block_dim` coordinates, one coefficient per vector.
inline SplitPair split_pair(std::span<const Vector> x, std::span<const double> c, std::size_t block_dim) {
  if (c.size() != x.size()) throw Error(ErrorCode::InvalidArgument, "one coefficient per vector");
  SplitPair out;
  out.first.reserve(x.size());
  out.second.reserve(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(c[i] >= 0.0 && c[i] <= 1.0)) throw Error(ErrorCode::InvalidArgument, "split coefficient outside [0, 1]");
    if (x[i].support_end() > block_dim) {
      throw Error(ErrorCode::DomainMismatch, "split input has support outside the block");
    }
    const double s = std::sqrt(1.0 - c[i] * c[i]);
    const Vector lo = slice(x[i], 0, block_dim);
    const Vector hi = shifted(lo, block_dim);
    Vector y1 = s * lo;
    y1.axpy(c[i], hi);
    Vector y2 = c[i] * lo;
    y2.axpy(-s, hi);
    y1.set_space_id(x[i].space_id());
    y2.set_space_id(x[i].space_id());
    out.first.push_back(std::move(y1));
    out.second.push_back(std::move(y2));
  }
  return out;
}

/// Single-coefficient doubling for T on its own space, with the input checks.
inline SplitPair split_pair(std::span<const Vector> x, double c, const DenseOperator& t) {
  if (!(c >= 0.0 && c <= 1.0)) throw Error(ErrorCode::InvalidArgument, "c must lie in [0, 1]");
  if (x.empty()) throw Error(ErrorCode::InvalidArgument, "split_pair of an empty list");
  if (identity_deviation(gram_matrix(x)) > 1e-10) {
    throw Error(ErrorCode::NotOrthonormal, "split_pair input is not orthonormal");
  }
  std::vector<Vector> images;
  double scale = 0.0;
  for (const auto& v : x) {
    images.push_back(t.apply(v));
    scale = std::max(scale, squared_norm(images.back()));
  }
  if (max_offdiagonal(gram_matrix(images)) > 1e-9 * std::max(1.0, scale)) {
    throw Error(ErrorCode::InvalidArgument, "split_pair inputs have non-orthogonal images");
  }
  const std::vector<double> cs(x.size(), c);
  return split_pair(x, cs, t.cols());
}

struct Theorem1Result {
  BrownianBlock block;
  ConstructionTrace trace;
};

/// Brownian unitary [[R, sigma V], [0, id_K]] approximating 2 id on F.
inline Theorem1Result theorem1_construct(std::span<const Vector> f_basis, const std::shared_ptr<AmbientSpace>& space,
                                         const ConstructionParams& params = {}) {
  if (!space) throw Error(ErrorCode::InvalidArgument, "theorem1_construct needs a space");
  if (f_basis.empty()) throw Error(ErrorCode::AllVectorsNegligible, "F is the zero subspace");
  std::size_t support = 0;
  for (const auto& v : f_basis) support = std::max(support, v.support_end());
  if (space->next_free() == 0) space->allocate_labeled("H", std::max<std::size_t>(support, 1));

  std::vector<Vector> adopted;
  for (const auto& v : f_basis) adopted.push_back(space->adopt(v));

  ConstructionTrace tr;
  tr.x = gram_schmidt(adopted);
  tr.n = tr.x.size();
  tr.h_dim = space->next_free();
  const double eps = resolve_epsilon(params, tr.n);
  tr.epsilon = eps;
  const double a = std::sqrt(1.0 - eps * eps);

  tr.x_tilde = extend_ons(tr.x, tr.n, *space);
  for (std::size_t i = 0; i < tr.n; ++i) {
    Vector y1 = a * tr.x[i];
    y1.axpy(eps, tr.x_tilde[i]);
    Vector y2 = eps * tr.x[i];
    y2.axpy(-a, tr.x_tilde[i]);
    tr.y1.push_back(std::move(y1));
    tr.y2.push_back(std::move(y2));
  }

  // Second splitting inside L = K^perp, K = span{y_i^(2)}.
  std::vector<Vector> ys = tr.y1;
  ys.insert(ys.end(), tr.y2.begin(), tr.y2.end());
  tr.y1_tilde = extend_ons(ys, tr.n, *space, ExtendPolicy::FreshOnly);
  const double r3 = std::sqrt(3.0) / 2.0;
  for (std::size_t i = 0; i < tr.n; ++i) {
    Vector z1 = 0.5 * tr.y1[i];
    z1.axpy(-r3, tr.y1_tilde[i]);
    Vector z2 = r3 * tr.y1[i];
    z2.axpy(0.5, tr.y1_tilde[i]);
    tr.z1.push_back(std::move(z1));
    tr.z2.push_back(std::move(z2));
  }

  const double sigma = std::sqrt(3.0 * (1.0 - eps * eps)) / eps;
  tr.sigmas.assign(tr.n, sigma);

  std::vector<Vector> constraint = tr.y2;
  constraint.insert(constraint.end(), tr.z2.begin(), tr.z2.end());
  LazyIsometry r(space, tr.y1, tr.z1, std::move(constraint));
  BrownianBlock block(std::move(r), tr.y2, tr.z2, sigma);
  return {std::move(block), std::move(tr)};
}

struct Theorem2Result {
  BrownianBlock block;
  ConstructionTrace trace;
  Certificate certificate;
};

namespace detail {

inline std::vector<Vector> embed_all(const AmbientSpace& space, std::span<const Vector> vs) {
  std::vector<Vector> out;
  out.reserve(vs.size());
  for (const auto& v : vs) out.push_back(space.adopt(v));
  return out;
}

/// Orthonormal basis of the test subspace G, checked to lie inside span(x).
inline std::vector<Vector> contained_basis(std::span<const Vector> g_basis, std::span<const Vector> x, double tol) {
  auto q = gram_schmidt(g_basis);
  for (const auto& v : q) {
    Vector r = v;
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& b : x) r.axpy(-inner(b, r), b);
    }
    if (norm(r) > tol) throw Error(ErrorCode::SubspaceNotContained, "G is not contained in F");
  }
  return q;
}

/// Restriction norm of `residual` on span(onb): exact top singular value
/// plus random unit samples from the same subspace.
inline double restriction_norm(const std::function<Vector(const Vector&)>& residual, std::span<const Vector> onb,
                               std::size_t samples, Rng& rng) {
  std::vector<Vector> images;
  images.reserve(onb.size());
  for (const auto& q : onb) images.push_back(residual(q));
  const auto eig = hermitian_eig(gram_matrix(images));
  Vector top(1, onb.front().space_id());
  for (std::size_t j = 0; j < onb.size(); ++j) top.axpy(eig.vectors.front()[j], onb[j]);
  top *= 1.0 / norm(top);
  double best = norm(residual(top));
  for (std::size_t s = 0; s < samples; ++s) best = std::max(best, norm(residual(rng.unit_vector_in(onb))));
  return best;
}

/// Defect samples: every fourth vector from G, the rest spread over every
/// instantiated coordinate, which forces lazy extension for B and B^2.
inline std::vector<Vector> defect_samples(const AmbientSpace& space, std::span<const Vector> g_onb, std::size_t count,
                                          Rng& rng) {
  const std::size_t live = space.next_free();
  std::vector<Vector> out;
  out.reserve(count);
  for (std::size_t s = 0; s < count; ++s) {
    if (s % 4 == 0) {
      out.push_back(rng.unit_vector_in(g_onb));
    } else {
      out.push_back(rng.unit_vector(live, space.id()));
    }
  }
  return out;
}

inline double expansivity_min(BrownianBlock& block, const AmbientSpace& space, std::size_t sets, Rng& rng) {
  double lo = std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < sets; ++s) {
    const std::size_t live = space.next_free();
    const std::size_t k = std::min<std::size_t>(6, live);
    const auto onb = rng.orthonormal_set(live, k, space.id());
    const auto g = compressed_gram(block, std::span<const Vector>(onb));
    lo = std::min(lo, hermitian_eig(g).values.back());
  }
  return lo;
}

}  // namespace detail

/// Certificate for the Brownian net against 2 id on the test subspace G of F.
inline Certificate theorem1_certificate(BrownianBlock& block, const ConstructionTrace& tr,
                                        std::span<const Vector> g_basis, const ConstructionParams& params,
                                        const AmbientSpace& space) {
  Rng rng(params.seed ^ 0x9e3779b97f4a7c15ULL);
  const auto g_vecs = detail::embed_all(space, g_basis);
  const auto g_onb = detail::contained_basis(g_vecs, tr.x, params.tol_verify);

  Certificate c;
  c.n = tr.n;
  c.epsilon = tr.epsilon;
  c.operator_norm_T = 2.0;
  c.bound_theoretical = tr.epsilon;
  c.tol_verify = params.tol_verify;
  c.tol_defect = params.tol_defect;
  c.operator_norm_block = block.operator_norm();

  auto residual = [&](const Vector& x) { return block.apply(x) - 2.0 * x; };
  c.bound_measured = detail::restriction_norm(residual, g_onb, params.samples, rng);

  for (std::size_t i = 0; i < tr.n; ++i) {
    const Vector expected = -tr.epsilon * tr.y2[i];
    c.residual_identity_max = std::max(c.residual_identity_max, norm(residual(tr.x[i]) - expected));
  }
  c.orthogonality_max = block.isometry().constraint_residual();

  const auto samples = detail::defect_samples(space, g_onb, params.samples, rng);
  c.defect_report = defect_suite(block, std::span<const Vector>(samples), 2, c.operator_norm_block);
  c.expansivity_min = detail::expansivity_min(block, space, params.expansivity_sets, rng);
  c.hypothesis_residual = block.hypothesis_residual();
  return c;
}

/// Orthogonality residual max |<T^(4) z_i^(k), yhat_j^(2)>|.
inline double range_orthogonality(const DenseOperator& t4, const ConstructionTrace& tr) {
  double m = 0.0;
  for (const auto* zs : {&tr.z1, &tr.z2}) {
    for (const auto& z : *zs) {
      const Vector tz = t4.apply(z);
      for (const auto& y : tr.yhat2) m = std::max(m, std::abs(inner(tz, y)));
    }
  }
  return m;
}

/// Certificate for the expansive pipeline: bound of I_F - T^(4) on G + 0 + 0 + 0.
inline Certificate certificate_evaluate(const DenseOperator& t, BrownianBlock& block, const ConstructionTrace& tr,
                                        std::span<const Vector> g_basis, const ConstructionParams& params,
                                        const AmbientSpace& space) {
  Rng rng(params.seed ^ 0x9e3779b97f4a7c15ULL);
  const DenseOperator t4 = direct_sum_power(t, 4);
  const auto g_vecs = detail::embed_all(space, g_basis);
  const auto g_onb = detail::contained_basis(g_vecs, tr.x, params.tol_verify);

  Certificate c;
  c.n = tr.n;
  c.epsilon = tr.epsilon;
  c.operator_norm_T = t.operator_norm();
  c.bound_theoretical = tr.epsilon * (c.operator_norm_T + 1.0);
  c.tol_verify = params.tol_verify;
  c.tol_defect = params.tol_defect;
  c.operator_norm_block = block.operator_norm();

  auto residual = [&](const Vector& x) { return block.apply(x) - t4.apply(x); };
  c.bound_measured = detail::restriction_norm(residual, g_onb, params.samples, rng);

  // (T^(4) - I_F) x_i = eps (T^(4) - id) yhat_i^(2)
  for (std::size_t i = 0; i < tr.n; ++i) {
    const Vector lhs = t4.apply(tr.x[i]) - block.apply(tr.x[i]);
    const Vector rhs = tr.epsilon * (t4.apply(tr.yhat2[i]) - tr.yhat2[i]);
    c.residual_identity_max = std::max(c.residual_identity_max, norm(lhs - rhs));
  }
  c.orthogonality_max = range_orthogonality(t4, tr);

  const auto samples = detail::defect_samples(space, g_onb, params.samples, rng);
  c.defect_report = defect_suite(block, std::span<const Vector>(samples), 2, c.operator_norm_block);
  c.expansivity_min = detail::expansivity_min(block, space, params.expansivity_sets, rng);
  c.hypothesis_residual = block.hypothesis_residual();
  return c;
}

/// 2-isometry I_F on H^(4) with ||(T^(4) - I_F)|_{F+0+0+0}|| <= (||T|| + 1) eps.
/// `space` must be empty; the four copies of H are allocated here.
inline Theorem2Result theorem2_construct(const DenseOperator& t, std::span<const Vector> f_basis,
                                         const std::shared_ptr<AmbientSpace>& space,
                                         const ConstructionParams& params = {}) {
  if (!space) throw Error(ErrorCode::InvalidArgument, "theorem2_construct needs a space");
  if (!t.square()) throw Error(ErrorCode::InvalidArgument, "T must be square");
  if (space->next_free() != 0) throw Error(ErrorCode::InvalidArgument, "theorem2_construct needs an empty space");
  if (f_basis.empty()) throw Error(ErrorCode::AllVectorsNegligible, "F is the zero subspace");
  const std::size_t d = t.rows();
  for (const auto& v : f_basis) {
    if (v.support_end() > d) throw Error(ErrorCode::DomainMismatch, "F basis vector lies outside H");
  }
  if (min_singular_value(t.matrix()) < 1.0 - 1e-10) {
    throw Error(ErrorCode::NotExpansive, "smallest singular value of T is below 1");
  }
  for (int copy = 1; copy <= 4; ++copy) space->allocate_labeled("H" + std::to_string(copy), d);

  ConstructionTrace tr;
  tr.h_dim = d;
  {
    std::vector<Vector> adopted;
    for (const auto& v : f_basis) adopted.push_back(space->adopt(v));
    tr.x = diagonalizing_basis(t, adopted);
  }
  tr.n = tr.x.size();
  const double eps = resolve_epsilon(params, tr.n);
  tr.epsilon = eps;

  std::vector<double> gap(tr.n);  // 1 - 1/||T x_i||^2, clamped at 0
  for (std::size_t i = 0; i < tr.n; ++i) {
    const double nt = norm(t.apply(tr.x[i]));
    tr.norms_Tx.push_back(nt);
    double q = 1.0 - 1.0 / (nt * nt);
    if (q < -params.tol_build) {
      throw Error(ErrorCode::NotExpansive, "||T x_" + std::to_string(i) + "|| = " + std::to_string(nt) + " < 1");
    }
    gap[i] = std::max(q, 0.0);
  }

  // doubling on H + H with c = eps.
  {
    const std::vector<double> cs(tr.n, eps);
    auto sp = split_pair(tr.x, cs, d);
    tr.y1 = std::move(sp.first);
    tr.y2 = std::move(sp.second);
  }

  // doubling of y^(1) on H^(2) + H^(2) with c_i = sqrt(1 - 1/||T x_i||^2).
  {
    std::vector<double> cs(tr.n);
    for (std::size_t i = 0; i < tr.n; ++i) cs[i] = std::sqrt(gap[i]);
    auto sp = split_pair(tr.y1, cs, 2 * d);
    tr.z1 = std::move(sp.first);
    tr.z2 = std::move(sp.second);
    tr.yhat1 = tr.y1;
    tr.yhat2 = tr.y2;
    for (const auto& y : tr.y1) tr.yhat1_shift.push_back(shifted(y, 2 * d));
  }

  // V(yhat_i^(2)) = sigma_i T^(4) z_i^(2), R0(yhat_i^(1)) = T^(4) z_i^(1) / ||T x_i||.
  const DenseOperator t4 = direct_sum_power(t, 4);
  std::vector<Vector> v_images, r_outputs, constraint = tr.yhat2;
  for (std::size_t i = 0; i < tr.n; ++i) {
    const double sigma = std::sqrt((1.0 - eps * eps) * gap[i]) / eps;
    tr.sigmas.push_back(sigma);
    Vector tz2 = t4.apply(tr.z2[i]);
    v_images.push_back(sigma * tz2);
    tz2 *= 1.0 / norm(tz2);
    constraint.push_back(std::move(tz2));
    r_outputs.push_back((1.0 / tr.norms_Tx[i]) * t4.apply(tr.z1[i]));
  }
  LazyIsometry r(space, tr.yhat1, std::move(r_outputs), std::move(constraint));
  BrownianBlock block(std::move(r), tr.yhat2, std::move(v_images));

  Certificate cert = certificate_evaluate(t, block, tr, f_basis, params, *space);
  return {std::move(block), std::move(tr), cert};
}

}  // namespace twoiso

#endif  // TWOISO_CONSTRUCTIONS_HPP
