#pragma once

#include <string>
#include <vector>

#include "sofickit/relation.hpp"
#include "sofickit/rng.hpp"

namespace sofickit {

// Seeded generators for relations and full-semigroup elements. Everything is
// a pure function of the Rng state, so a run is reproducible from its seed.

struct RelationOptions {
  int min_atoms = 2;
  int max_atoms = 10;
  int max_weight_unit = 6;  // per-atom weight numerator before normalization
  int min_class_size = 1;
};

inline FiniteRelation random_relation(Rng& rng, const RelationOptions& opt = {}) {
  int n = static_cast<int>(rng.range(opt.min_atoms, opt.max_atoms));
  int want_classes = static_cast<int>(
      rng.range(1, std::max(1, n / std::max(1, opt.min_class_size))));
  std::vector<std::vector<int>> classes(static_cast<std::size_t>(want_classes));
  for (int x = 0; x < n; ++x)
    classes[static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(want_classes)))]
        .push_back(x);
  classes.erase(std::remove_if(classes.begin(), classes.end(),
                               [](const std::vector<int>& c) { return c.empty(); }),
                classes.end());
  // fold undersized classes into their neighbour until the floor holds
  for (bool moved = true; moved && classes.size() > 1;) {
    moved = false;
    for (std::size_t c = 0; c < classes.size(); ++c)
      if (static_cast<int>(classes[c].size()) < opt.min_class_size) {
        std::size_t to = (c + 1) % classes.size();
        classes[to].insert(classes[to].end(), classes[c].begin(), classes[c].end());
        classes.erase(classes.begin() + static_cast<std::ptrdiff_t>(c));
        moved = true;
        break;
      }
  }
  std::vector<std::int64_t> unit(classes.size());
  std::int64_t total = 0;
  for (std::size_t c = 0; c < classes.size(); ++c) {
    unit[c] = rng.range(1, opt.max_weight_unit);
    total += unit[c] * static_cast<std::int64_t>(classes[c].size());
  }
  std::vector<Rational> weights(static_cast<std::size_t>(n));
  for (std::size_t c = 0; c < classes.size(); ++c)
    for (int x : classes[c]) weights[static_cast<std::size_t>(x)] = Rational(unit[c], total);
  std::vector<std::string> ids;
  for (int x = 0; x < n; ++x) ids.push_back("a" + std::to_string(x));
  return FiniteRelation(WeightedSpace(std::move(ids), std::move(weights)),
                        std::move(classes));
}

// A uniformly-weighted relation whose classes all have the given size: the
// orbit relation of a free cyclic action of order `cycle`.
inline FiniteRelation free_cyclic_relation(int orbits, int cycle) {
  int n = orbits * cycle;
  std::vector<std::vector<int>> classes;
  for (int o = 0; o < orbits; ++o) {
    std::vector<int> cls;
    for (int t = 0; t < cycle; ++t) cls.push_back(o * cycle + t);
    classes.push_back(std::move(cls));
  }
  return FiniteRelation(WeightedSpace::uniform(n), std::move(classes));
}

inline LocalIso free_cyclic_generator(const FiniteRelation& r, int cycle) {
  int n = r.atom_count();
  std::vector<int> m(static_cast<std::size_t>(n));
  for (int x = 0; x < n; ++x) {
    int o = x / cycle, t = x % cycle;
    m[static_cast<std::size_t>(x)] = o * cycle + (t + 1) % cycle;
  }
  return LocalIso(r, PartialBijection(n, std::move(m)));
}

// A random element of [[n]].
inline PartialBijection random_pbij(Rng& rng, int n) {
  std::vector<int> targets(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) targets[static_cast<std::size_t>(i)] = i;
  rng.shuffle(targets);
  std::vector<int> m(static_cast<std::size_t>(n), PartialBijection::kUndef);
  std::size_t next = 0;
  for (int i = 0; i < n; ++i)
    if (rng.coin()) m[static_cast<std::size_t>(i)] = targets[next++];
  return PartialBijection(n, std::move(m));
}

// A random element of [[R]] (or of [R] when full_domain is set): per class,
// a random partial injection, assembled atomwise.
inline LocalIso random_local_iso(Rng& rng, const FiniteRelation& r, bool full_domain = false) {
  int n = r.atom_count();
  std::vector<int> m(static_cast<std::size_t>(n), PartialBijection::kUndef);
  for (const auto& cls : r.classes()) {
    std::vector<int> dom;
    if (full_domain) {
      dom = cls;
    } else {
      for (int x : cls)
        if (rng.coin()) dom.push_back(x);
    }
    std::vector<int> targets = cls;
    rng.shuffle(targets);
    for (std::size_t i = 0; i < dom.size(); ++i)
      m[static_cast<std::size_t>(dom[i])] = targets[i];
  }
  return LocalIso(r, PartialBijection(n, std::move(m)));
}

inline std::vector<LocalIso> sample_carrier(Rng& rng, const FiniteRelation& r, int count,
                                            bool full_domain = false) {
  std::vector<LocalIso> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) out.push_back(random_local_iso(rng, r, full_domain));
  return out;
}

inline MSubset random_subset(Rng& rng, const WeightedSpace& space, bool nonempty = false) {
  std::vector<int> members;
  for (int x = 0; x < space.size(); ++x)
    if (rng.coin()) members.push_back(x);
  if (nonempty && members.empty())
    members.push_back(static_cast<int>(rng.below(static_cast<std::uint64_t>(space.size()))));
  return MSubset(space, std::move(members));
}

// A set meeting every class in 0 or >= 2 atoms, so a support witness exists.
// A nonempty one exists only when some class has at least two atoms.
inline MSubset random_admissible_subset(Rng& rng, const FiniteRelation& r,
                                        bool nonempty = false) {
  bool possible = false;
  for (const auto& cls : r.classes()) possible = possible || cls.size() >= 2;
  if (nonempty && !possible)
    throw Inadmissible("all classes are singletons; no nonempty admissible subset");
  for (;;) {
    std::vector<int> members;
    for (const auto& cls : r.classes()) {
      std::int64_t take = rng.range(0, static_cast<std::int64_t>(cls.size()));
      if (take == 1) take = rng.coin() ? 0 : 2;
      if (take > static_cast<std::int64_t>(cls.size())) take = 0;
      std::vector<int> pool = cls;
      rng.shuffle(pool);
      for (std::int64_t i = 0; i < take; ++i) members.push_back(pool[static_cast<std::size_t>(i)]);
    }
    if (!nonempty || !members.empty()) return MSubset(r.space(), std::move(members));
  }
}

// Nested pair with constant index and equal subclass sizes: each coarse class
// is `index` subclasses of a common random size.
inline SubrelationPair random_nested_pair(Rng& rng, int index, int max_atoms,
                                          int max_weight_unit = 6) {
  std::vector<std::vector<int>> fine_classes, coarse_classes;
  std::vector<std::int64_t> unit;
  int cursor = 0;
  while (cursor == 0 || (cursor + index <= max_atoms && rng.coin())) {
    int sub_size = static_cast<int>(rng.range(1, std::max(1, (max_atoms - cursor) / index)));
    std::vector<int> coarse;
    for (int c = 0; c < index; ++c) {
      std::vector<int> sub;
      for (int t = 0; t < sub_size; ++t) sub.push_back(cursor++);
      coarse.insert(coarse.end(), sub.begin(), sub.end());
      fine_classes.push_back(std::move(sub));
    }
    coarse_classes.push_back(std::move(coarse));
    unit.push_back(rng.range(1, max_weight_unit));
  }
  std::int64_t total = 0;
  for (std::size_t c = 0; c < coarse_classes.size(); ++c)
    total += unit[c] * static_cast<std::int64_t>(coarse_classes[c].size());
  std::vector<Rational> weights(static_cast<std::size_t>(cursor));
  for (std::size_t c = 0; c < coarse_classes.size(); ++c)
    for (int x : coarse_classes[c]) weights[static_cast<std::size_t>(x)] = Rational(unit[c], total);
  std::vector<std::string> ids;
  for (int x = 0; x < cursor; ++x) ids.push_back("a" + std::to_string(x));
  WeightedSpace space(std::move(ids), std::move(weights));
  return SubrelationPair(FiniteRelation(space, std::move(fine_classes)),
                         FiniteRelation(space, std::move(coarse_classes)));
}

}  // namespace sofickit
