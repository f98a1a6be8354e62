#pragma once

#include <algorithm>
#include <memory>
#include <numeric>
#include <vector>

#include "sofickit/errors.hpp"
#include "sofickit/pbij.hpp"
#include "sofickit/space.hpp"

namespace sofickit {

// A finite measure-preserving equivalence relation: a partition of the atoms
// of a WeightedSpace into classes with class-constant weights. The weight
// constraint is structural; it is exactly what makes every class-respecting
// partial injection measure-preserving on an atomic space.
class FiniteRelation {
public:
  FiniteRelation() = default;

  FiniteRelation(WeightedSpace space, std::vector<std::vector<int>> classes) {
    int n = space.size();
    std::vector<int> class_of(static_cast<std::size_t>(n), -1);
    for (std::size_t c = 0; c < classes.size(); ++c) {
      auto& blk = classes[c];
      if (blk.empty()) throw NotPartition("empty class");
      std::sort(blk.begin(), blk.end());
      for (int a : blk) {
        if (a < 0 || a >= n) throw IndexOutOfRange("class member outside atom range");
        if (class_of[static_cast<std::size_t>(a)] != -1)
          throw NotPartition("atom " + space.id(a) + " in two classes");
        class_of[static_cast<std::size_t>(a)] = static_cast<int>(c);
      }
      for (int a : blk)
        if (space.weight(a) != space.weight(blk[0]))
          throw NotInvariant("class of " + space.id(blk[0]) + " has non-constant weights");
    }
    for (int a = 0; a < n; ++a)
      if (class_of[static_cast<std::size_t>(a)] == -1)
        throw NotPartition("atom " + space.id(a) + " in no class");
    // canonical class order: by smallest member
    std::vector<std::size_t> order(classes.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t x, std::size_t y) { return classes[x][0] < classes[y][0]; });
    std::vector<std::vector<int>> sorted;
    sorted.reserve(classes.size());
    for (std::size_t c : order) sorted.push_back(std::move(classes[c]));
    for (std::size_t c = 0; c < sorted.size(); ++c)
      for (int a : sorted[c]) class_of[static_cast<std::size_t>(a)] = static_cast<int>(c);
    data_ = std::make_shared<const Data>(
        Data{std::move(space), std::move(sorted), std::move(class_of)});
  }

  // The full relation X^2: one class containing every atom.
  static FiniteRelation full(const WeightedSpace& space) {
    std::vector<int> all(static_cast<std::size_t>(space.size()));
    std::iota(all.begin(), all.end(), 0);
    return FiniteRelation(space, {all});
  }

  // The equality relation: singleton classes.
  static FiniteRelation equality(const WeightedSpace& space) {
    std::vector<std::vector<int>> cls;
    for (int i = 0; i < space.size(); ++i) cls.push_back({i});
    return FiniteRelation(space, std::move(cls));
  }

  const WeightedSpace& space() const { return data_->space; }
  int atom_count() const { return data_->space.size(); }
  const std::vector<std::vector<int>>& classes() const { return data_->classes; }
  int class_count() const { return static_cast<int>(data_->classes.size()); }
  int class_of(int atom) const { return data_->class_of[static_cast<std::size_t>(atom)]; }
  const std::vector<int>& class_members(int c) const {
    return data_->classes[static_cast<std::size_t>(c)];
  }

  bool related(int x, int y) const { return class_of(x) == class_of(y); }

  friend bool operator==(const FiniteRelation& a, const FiniteRelation& b) {
    if (a.data_ == b.data_) return true;
    if (!a.data_ || !b.data_) return false;
    return a.data_->space == b.data_->space && a.data_->classes == b.data_->classes;
  }
  friend bool operator!=(const FiniteRelation& a, const FiniteRelation& b) { return !(a == b); }

private:
  struct Data {
    WeightedSpace space;
    std::vector<std::vector<int>> classes;
    std::vector<int> class_of;
  };
  std::shared_ptr<const Data> data_;
};

inline FiniteRelation make_relation(const WeightedSpace& space,
                                    std::vector<std::vector<int>> classes) {
  return FiniteRelation(space, std::move(classes));
}

// An element of the full semigroup [[R]]: a partial injection of atoms moving
// each point within its class.
class LocalIso {
public:
  LocalIso() = default;

  LocalIso(FiniteRelation rel, PartialBijection map)
      : rel_(std::move(rel)), map_(std::move(map)) {
    if (map_.n() != rel_.atom_count()) throw SizeMismatch("map size != atom count");
    for (int x = 0; x < map_.n(); ++x)
      if (map_.defined(x) && !rel_.related(x, map_[x]))
        throw NotClassRespecting("moves " + rel_.space().id(x) + " out of its class");
  }

  static LocalIso identity(const FiniteRelation& r) {
    return LocalIso(r, PartialBijection::identity(r.atom_count()));
  }
  static LocalIso empty(const FiniteRelation& r) {
    return LocalIso(r, PartialBijection::empty(r.atom_count()));
  }
  static LocalIso indicator(const FiniteRelation& r, const MSubset& a) {
    if (a.space() != r.space()) throw SpaceMismatch("set lives on a different space");
    return LocalIso(r, PartialBijection::partial_identity(r.atom_count(), a.members()));
  }

  const FiniteRelation& relation() const { return rel_; }
  const PartialBijection& map() const { return map_; }
  bool is_full() const { return map_.is_full(); }

  MSubset dom_set() const { return MSubset(rel_.space(), parts(map_).dom); }
  MSubset fix_set() const { return MSubset(rel_.space(), parts(map_).fix); }
  MSubset supp_set() const { return MSubset(rel_.space(), parts(map_).supp); }

  friend bool operator==(const LocalIso& a, const LocalIso& b) {
    return a.rel_ == b.rel_ && a.map_ == b.map_;
  }
  friend bool operator!=(const LocalIso& a, const LocalIso& b) { return !(a == b); }

private:
  FiniteRelation rel_;
  PartialBijection map_;
};

inline void require_same_relation(const LocalIso& f, const LocalIso& g) {
  if (f.relation() != g.relation()) throw RelationMismatch("elements of different relations");
}

inline LocalIso compose(const LocalIso& f, const LocalIso& g) {
  require_same_relation(f, g);
  return LocalIso(f.relation(), compose(f.map(), g.map()));
}
inline LocalIso operator*(const LocalIso& f, const LocalIso& g) { return compose(f, g); }
inline LocalIso inverse(const LocalIso& f) { return LocalIso(f.relation(), inverse(f.map())); }
inline LocalIso join(const LocalIso& f, const LocalIso& g) {
  require_same_relation(f, g);
  return LocalIso(f.relation(), join(f.map(), g.map()));
}

// tr_mu f = mu(Fix f)
inline Rational trace_mu(const LocalIso& f) {
  Rational total(0);
  for (int x = 0; x < f.map().n(); ++x)
    if (f.map().defined(x) && f.map()[x] == x) total += f.relation().space().weight(x);
  return total;
}

// d_mu(f,g) = mu(dom f symdiff dom g) + mu{x in both doms : fx != gx}
inline Rational metric_mu(const LocalIso& f, const LocalIso& g) {
  require_same_relation(f, g);
  Rational total(0);
  const auto& fm = f.map();
  const auto& gm = g.map();
  for (int x = 0; x < fm.n(); ++x) {
    bool df = fm.defined(x), dg = gm.defined(x);
    if (df != dg || (df && fm[x] != gm[x])) total += f.relation().space().weight(x);
  }
  return total;
}

// Orbit equivalence relation of a list of weight-preserving atom permutations:
// classes are the connected components of the generator graph.
inline FiniteRelation orbit_relation(const WeightedSpace& space,
                                     const std::vector<PartialBijection>& generators) {
  int n = space.size();
  for (const auto& g : generators) {
    if (g.n() != n) throw SizeMismatch("generator size != atom count");
    if (!g.is_full()) throw NotPermutation("generator not a full-domain permutation");
    for (int x = 0; x < n; ++x)
      if (space.weight(x) != space.weight(g[x]))
        throw NotInvariant("generator not weight-preserving at " + space.id(x));
  }
  std::vector<int> parent(static_cast<std::size_t>(n));
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      parent[static_cast<std::size_t>(x)] =
          parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
      x = parent[static_cast<std::size_t>(x)];
    }
    return x;
  };
  for (const auto& g : generators)
    for (int x = 0; x < n; ++x) {
      int a = find(x), b = find(g[x]);
      if (a != b) parent[static_cast<std::size_t>(a)] = b;
    }
  std::vector<std::vector<int>> buckets(static_cast<std::size_t>(n));
  for (int x = 0; x < n; ++x) buckets[static_cast<std::size_t>(find(x))].push_back(x);
  std::vector<std::vector<int>> classes;
  for (auto& b : buckets)
    if (!b.empty()) classes.push_back(std::move(b));
  return FiniteRelation(space, std::move(classes));
}

// R|_A on (A, mu_A): weights renormalized by 1/mu(A), classes intersected
// with A. Atom order (and ids) inherited from the ambient space.
inline FiniteRelation restrict_relation(const FiniteRelation& r, const MSubset& a) {
  if (a.space() != r.space()) throw SpaceMismatch("set lives on a different space");
  if (a.members().empty()) throw NullRestriction("restriction to the empty set");
  Rational mass = measure(a);
  std::vector<std::string> ids;
  std::vector<Rational> weights;
  for (int x : a.members()) {
    ids.push_back(r.space().id(x));
    weights.push_back(r.space().weight(x) / mass);
  }
  WeightedSpace sub(std::move(ids), std::move(weights));
  // position of ambient atom within A
  std::vector<int> pos(static_cast<std::size_t>(r.atom_count()), -1);
  for (std::size_t i = 0; i < a.members().size(); ++i)
    pos[static_cast<std::size_t>(a.members()[i])] = static_cast<int>(i);
  std::vector<std::vector<int>> classes;
  for (const auto& cls : r.classes()) {
    std::vector<int> cut;
    for (int x : cls)
      if (pos[static_cast<std::size_t>(x)] != -1) cut.push_back(pos[static_cast<std::size_t>(x)]);
    if (!cut.empty()) classes.push_back(std::move(cut));
  }
  return FiniteRelation(sub, std::move(classes));
}

// Atom (x,y) of the product flattened row-major as x * |Y| + y; weights
// multiply, classes are products of classes.
inline FiniteRelation product_relation(const FiniteRelation& r, const FiniteRelation& s) {
  int ny = s.atom_count();
  std::vector<std::string> ids;
  std::vector<Rational> weights;
  for (int x = 0; x < r.atom_count(); ++x)
    for (int y = 0; y < ny; ++y) {
      ids.push_back("(" + r.space().id(x) + "," + s.space().id(y) + ")");
      weights.push_back(r.space().weight(x) * s.space().weight(y));
    }
  WeightedSpace prod(std::move(ids), std::move(weights));
  std::vector<std::vector<int>> classes;
  for (const auto& cr : r.classes())
    for (const auto& cs : s.classes()) {
      std::vector<int> blk;
      blk.reserve(cr.size() * cs.size());
      for (int x : cr)
        for (int y : cs) blk.push_back(x * ny + y);
      classes.push_back(std::move(blk));
    }
  return FiniteRelation(prod, std::move(classes));
}

// A nested pair R <= S on the same space: every R-class inside an S-class.
class SubrelationPair {
public:
  SubrelationPair(FiniteRelation fine, FiniteRelation coarse)
      : fine_(std::move(fine)), coarse_(std::move(coarse)) {
    if (fine_.space() != coarse_.space()) throw SpaceMismatch("pair on different spaces");
    for (const auto& cls : fine_.classes())
      for (std::size_t i = 1; i < cls.size(); ++i)
        if (coarse_.class_of(cls[i]) != coarse_.class_of(cls[0]))
          throw NestingViolated("fine class not inside a coarse class");
  }

  const FiniteRelation& fine() const { return fine_; }
  const FiniteRelation& coarse() const { return coarse_; }

  // R-subclasses of coarse class c, in canonical order (by smallest atom).
  std::vector<std::vector<int>> subclasses(int c) const {
    std::vector<int> seen;
    std::vector<std::vector<int>> out;
    for (int x : coarse_.class_members(c)) {
      int rc = fine_.class_of(x);
      if (std::find(seen.begin(), seen.end(), rc) == seen.end()) {
        seen.push_back(rc);
        out.push_back(fine_.class_members(rc));
      }
    }
    return out;
  }

private:
  FiniteRelation fine_;
  FiniteRelation coarse_;
};

// J per coarse class: the number of fine classes inside it.
inline std::vector<int> index_profile(const SubrelationPair& p) {
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(p.coarse().class_count()));
  for (int c = 0; c < p.coarse().class_count(); ++c)
    out.push_back(static_cast<int>(p.subclasses(c).size()));
  return out;
}

// Per_{>=2}(R): union of classes with at least two atoms.
inline MSubset periodic_part_ge2(const FiniteRelation& r) {
  std::vector<int> out;
  for (const auto& cls : r.classes())
    if (cls.size() >= 2)
      for (int x : cls) out.push_back(x);
  return MSubset(r.space(), std::move(out));
}

// A full-group element with support exactly A: the canonical cycle on each
// A-and-class intersection (ordered by atom index), identity elsewhere.
// Admissible iff no class meets A in exactly one atom.
inline LocalIso support_element(const FiniteRelation& r, const MSubset& a) {
  if (a.space() != r.space()) throw SpaceMismatch("set lives on a different space");
  int n = r.atom_count();
  std::vector<int> m(static_cast<std::size_t>(n));
  std::iota(m.begin(), m.end(), 0);
  for (int c = 0; c < r.class_count(); ++c) {
    std::vector<int> hit;
    for (int x : r.class_members(c))
      if (a.contains(x)) hit.push_back(x);
    if (hit.size() == 1)
      throw Inadmissible("class of " + r.space().id(hit[0]) + " meets the set in one atom");
    for (std::size_t i = 0; i < hit.size(); ++i)
      m[static_cast<std::size_t>(hit[i])] = hit[(i + 1) % hit.size()];
  }
  return LocalIso(r, PartialBijection(n, std::move(m)));
}

}  // namespace sofickit
