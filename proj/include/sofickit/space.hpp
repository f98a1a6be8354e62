#pragma once

#include <algorithm>
#include <memory>
#include <string>
#include <vector>

#include "sofickit/errors.hpp"
#include "sofickit/pbij.hpp"
#include "sofickit/rational.hpp"

namespace sofickit {

// Finite atomic probability space: ordered atoms with exact positive rational
// weights summing to one. Atoms carry stable string ids for serialization and
// are indexed by position everywhere else. Shared immutable payload, so
// copies are cheap and values are freely shareable.
class WeightedSpace {
public:
  WeightedSpace() = default;

  WeightedSpace(std::vector<std::string> ids, std::vector<Rational> weights) {
    if (ids.size() != weights.size()) throw SizeMismatch("ids/weights length mismatch");
    if (ids.empty()) throw SizeMismatch("space needs at least one atom");
    Rational total(0);
    for (const auto& w : weights) {
      if (!(w > Rational(0))) throw NotInvariant("atom weight must be positive");
      total += w;
    }
    if (total != Rational(1)) throw NotInvariant("weights must sum to 1, got " + total.str());
    for (std::size_t i = 0; i < ids.size(); ++i)
      for (std::size_t j = i + 1; j < ids.size(); ++j)
        if (ids[i] == ids[j]) throw NotPartition("duplicate atom id '" + ids[i] + "'");
    data_ = std::make_shared<const Data>(Data{std::move(ids), std::move(weights)});
  }

  static WeightedSpace uniform(int n, const std::string& prefix = "a") {
    std::vector<std::string> ids;
    std::vector<Rational> w;
    for (int i = 0; i < n; ++i) {
      ids.push_back(prefix + std::to_string(i));
      w.emplace_back(1, n);
    }
    return WeightedSpace(std::move(ids), std::move(w));
  }

  int size() const { return static_cast<int>(data_->ids.size()); }
  const std::string& id(int i) const { return data_->ids[static_cast<std::size_t>(i)]; }
  const Rational& weight(int i) const { return data_->weights[static_cast<std::size_t>(i)]; }
  const std::vector<std::string>& ids() const { return data_->ids; }
  const std::vector<Rational>& weights() const { return data_->weights; }

  int index_of(const std::string& id) const {
    for (int i = 0; i < size(); ++i)
      if (data_->ids[static_cast<std::size_t>(i)] == id) return i;
    throw IndexOutOfRange("unknown atom id '" + id + "'");
  }

  friend bool operator==(const WeightedSpace& a, const WeightedSpace& b) {
    if (a.data_ == b.data_) return true;
    if (!a.data_ || !b.data_) return false;
    return a.data_->ids == b.data_->ids && a.data_->weights == b.data_->weights;
  }
  friend bool operator!=(const WeightedSpace& a, const WeightedSpace& b) { return !(a == b); }

private:
  struct Data {
    std::vector<std::string> ids;
    std::vector<Rational> weights;
  };
  std::shared_ptr<const Data> data_;
};

// A measurable set: member atom indices of a WeightedSpace, kept sorted.
class MSubset {
public:
  MSubset() = default;

  MSubset(WeightedSpace space, std::vector<int> members)
      : space_(std::move(space)), members_(std::move(members)) {
    std::sort(members_.begin(), members_.end());
    members_.erase(std::unique(members_.begin(), members_.end()), members_.end());
    for (int m : members_)
      if (m < 0 || m >= space_.size()) throw IndexOutOfRange("member outside atom range");
  }

  static MSubset full(const WeightedSpace& space) {
    std::vector<int> all(static_cast<std::size_t>(space.size()));
    for (int i = 0; i < space.size(); ++i) all[static_cast<std::size_t>(i)] = i;
    return MSubset(space, std::move(all));
  }

  static MSubset empty(const WeightedSpace& space) { return MSubset(space, {}); }

  const WeightedSpace& space() const { return space_; }
  const std::vector<int>& members() const { return members_; }
  int count() const { return static_cast<int>(members_.size()); }

  bool contains(int atom) const {
    return std::binary_search(members_.begin(), members_.end(), atom);
  }

  MSubset complement() const {
    std::vector<int> out;
    for (int i = 0; i < space_.size(); ++i)
      if (!contains(i)) out.push_back(i);
    return MSubset(space_, std::move(out));
  }

  friend bool operator==(const MSubset& a, const MSubset& b) {
    return a.space_ == b.space_ && a.members_ == b.members_;
  }
  friend bool operator!=(const MSubset& a, const MSubset& b) { return !(a == b); }

private:
  WeightedSpace space_;
  std::vector<int> members_;
};

inline void require_same_space(const MSubset& a, const MSubset& b) {
  if (a.space() != b.space()) throw SpaceMismatch("sets live on different spaces");
}

inline Rational measure(const MSubset& a) {
  Rational total(0);
  for (int m : a.members()) total += a.space().weight(m);
  return total;
}

inline MSubset set_union(const MSubset& a, const MSubset& b) {
  require_same_space(a, b);
  std::vector<int> out;
  std::set_union(a.members().begin(), a.members().end(),
                 b.members().begin(), b.members().end(), std::back_inserter(out));
  return MSubset(a.space(), std::move(out));
}

inline MSubset set_intersection(const MSubset& a, const MSubset& b) {
  require_same_space(a, b);
  std::vector<int> out;
  std::set_intersection(a.members().begin(), a.members().end(),
                        b.members().begin(), b.members().end(), std::back_inserter(out));
  return MSubset(a.space(), std::move(out));
}

inline MSubset set_difference(const MSubset& a, const MSubset& b) {
  require_same_space(a, b);
  std::vector<int> out;
  std::set_difference(a.members().begin(), a.members().end(),
                      b.members().begin(), b.members().end(), std::back_inserter(out));
  return MSubset(a.space(), std::move(out));
}

// mu(A symdiff B), the measure-algebra metric.
inline Rational symdiff_distance(const MSubset& a, const MSubset& b) {
  require_same_space(a, b);
  Rational total(0);
  for (int m : a.members())
    if (!b.contains(m)) total += a.space().weight(m);
  for (int m : b.members())
    if (!a.contains(m)) total += a.space().weight(m);
  return total;
}

// Pointwise image of an index set under a full-domain partial bijection.
inline std::vector<int> perm_action(const PartialBijection& s, const std::vector<int>& a) {
  if (!s.is_full()) throw NotPermutation("action needs a full-domain permutation");
  std::vector<int> out;
  out.reserve(a.size());
  for (int x : a) {
    if (x < 0 || x >= s.n()) throw IndexOutOfRange("set member outside ground set");
    out.push_back(s[x]);
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline MSubset perm_action(const PartialBijection& s, const MSubset& a) {
  if (s.n() != a.space().size()) throw SizeMismatch("permutation size != atom count");
  return MSubset(a.space(), perm_action(s, a.members()));
}

}  // namespace sofickit
