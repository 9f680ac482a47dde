#ifndef TWOISO_SPACE_HPP
#define TWOISO_SPACE_HPP

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "twoiso/error.hpp"
#include "twoiso/linalg.hpp"

namespace twoiso {

struct CoordRange {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const noexcept { return end - begin; }
  bool contains(std::size_t i) const noexcept { return i >= begin && i < end; }
  bool overlaps(const CoordRange& o) const noexcept { return begin < o.end && o.begin < end; }
};

/// Truncation of an infinite-dimensional Hilbert space: coordinates are
/// handed out by a monotone cursor, so a freshly allocated coordinate is
/// orthogonal to every vector built before it. Single writer.
class AmbientSpace {
 public:
  explicit AmbientSpace(std::size_t capacity) : capacity_(capacity), id_(next_id()) {
    if (capacity == 0) throw Error(ErrorCode::InvalidArgument, "capacity must be positive");
  }

  AmbientSpace(const AmbientSpace&) = delete;
  AmbientSpace& operator=(const AmbientSpace&) = delete;

  std::uint64_t id() const noexcept { return id_; }
  std::size_t capacity() const noexcept { return capacity_; }
  std::size_t next_free() const noexcept { return next_free_; }
  std::size_t remaining() const noexcept { return capacity_ - next_free_; }

  CoordRange allocate(std::size_t count) {
    if (count > remaining()) {
      throw Error(ErrorCode::CapacityExceeded,
                  "requested " + std::to_string(count) + " coordinates, " +
                      std::to_string(remaining()) + " of " + std::to_string(capacity_) + " left");
    }
    CoordRange r{next_free_, next_free_ + count};
    next_free_ += count;
    return r;
  }

  /// Allocates and records a named coordinate block (e.g. the copies of H in H^(4)).
  CoordRange allocate_labeled(const std::string& label, std::size_t count) {
    if (labels_.contains(label)) throw Error(ErrorCode::InvalidArgument, "duplicate label " + label);
    CoordRange r = allocate(count);
    labels_.emplace(label, r);
    return r;
  }

  /// Labels an already allocated block; labeled blocks stay pairwise disjoint.
  void label(const std::string& name, CoordRange r) {
    if (r.end > next_free_ || r.begin > r.end) {
      throw Error(ErrorCode::InvalidArgument, "label " + name + " covers unallocated coordinates");
    }
    for (const auto& [other, range] : labels_) {
      if (other == name) throw Error(ErrorCode::InvalidArgument, "duplicate label " + name);
      if (range.overlaps(r)) {
        throw Error(ErrorCode::InvalidArgument, "label " + name + " overlaps " + other);
      }
    }
    labels_.emplace(name, r);
  }

  const CoordRange& range(const std::string& name) const {
    auto it = labels_.find(name);
    if (it == labels_.end()) throw Error(ErrorCode::InvalidArgument, "unknown label " + name);
    return it->second;
  }

  const std::map<std::string, CoordRange>& labels() const noexcept { return labels_; }

  Vector zero() const { return Vector(std::max<std::size_t>(next_free_, 1), id_); }

  Vector unit(std::size_t index) const {
    if (index >= next_free_) {
      throw Error(ErrorCode::DomainMismatch, "coordinate " + std::to_string(index) + " not allocated");
    }
    return Vector::unit(next_free_, index, id_);
  }

  /// A single brand-new coordinate as a unit vector.
  Vector fresh_unit() {
    const CoordRange r = allocate(1);
    return Vector::unit(r.end, r.begin, id_);
  }

  /// Moves v into this space. Its support must lie in allocated coordinates.
  Vector adopt(Vector v) const {
    if (v.space_id() != 0 && v.space_id() != id_) {
      throw Error(ErrorCode::DomainMismatch, "vector belongs to another space");
    }
    if (v.support_end() > next_free_) {
      throw Error(ErrorCode::DomainMismatch, "vector has support on unallocated coordinates");
    }
    v.set_space_id(id_);
    return v;
  }

 private:
  static std::uint64_t next_id() {
    static std::atomic<std::uint64_t> counter{1};
    return counter.fetch_add(1);
  }

  std::size_t capacity_;
  std::size_t next_free_ = 0;
  std::uint64_t id_;
  std::map<std::string, CoordRange> labels_;
};

enum class ExtendPolicy {
  ReuseThenFresh,  // existing coordinates first, then fresh ones
  FreshOnly,
};

/// `count` unit vectors orthogonal to `ons` and to each other. Candidates are
/// allocated standard basis vectors in index order, then fresh coordinates.
inline std::vector<Vector> extend_ons(std::span<const Vector> ons, std::size_t count, AmbientSpace& space,
                                      ExtendPolicy policy = ExtendPolicy::ReuseThenFresh) {
  if (!ons.empty() && identity_deviation(gram_matrix(ons)) > 1e-10) {
    throw Error(ErrorCode::NotOrthonormal, "extend_ons input is not orthonormal to 1e-10");
  }
  for (const auto& v : ons) {
    if (v.support_end() > space.next_free()) {
      throw Error(ErrorCode::DomainMismatch, "extend_ons input has support on unallocated coordinates");
    }
  }
  std::vector<Vector> basis(ons.begin(), ons.end());
  std::vector<Vector> added;
  added.reserve(count);

  // A reused coordinate must keep a well-conditioned residual.
  constexpr double accept = 1e-3;
  if (policy == ExtendPolicy::ReuseThenFresh) {
    const std::size_t existing = space.next_free();
    for (std::size_t i = 0; i < existing && added.size() < count; ++i) {
      Vector r = space.unit(i);
      for (int pass = 0; pass < 2; ++pass) {
        for (const auto& q : basis) r.axpy(-inner(q, r), q);
      }
      const double rn = norm(r);
      if (rn <= accept) continue;
      r *= 1.0 / rn;
      basis.push_back(r);
      added.push_back(std::move(r));
    }
  }
  const std::size_t missing = count - added.size();
  if (missing > space.remaining()) {
    throw Error(ErrorCode::CapacityExceeded,
                "extend_ons needs " + std::to_string(missing) + " fresh coordinates, " +
                    std::to_string(space.remaining()) + " left");
  }
  while (added.size() < count) added.push_back(space.fresh_unit());
  for (auto& v : added) v.set_space_id(space.id());
  return added;
}

}  // namespace twoiso

#endif  // TWOISO_SPACE_HPP
