#pragma once

#include <cstdlib>
#include <functional>
#include <string>
#include <vector>

#include "sofickit/embed.hpp"
#include "sofickit/errors.hpp"
#include "sofickit/pbij.hpp"
#include "sofickit/relation.hpp"
#include "sofickit/rng.hpp"

namespace sofickit {

// Caps for the brute-force machinery; [[n]] grows super-exponentially, so
// everything here streams against an explicit budget.
struct EnumerationBudget {
  int max_n = 5;         // exhaustive [[n]]
  int max_atoms = 12;    // full-semigroup enumeration
  std::int64_t trials = 10000;
  std::uint64_t seed = 1;

  // SOFICKIT_BUDGET=<max_n> raises/lowers both enumeration caps.
  static EnumerationBudget from_env() {
    EnumerationBudget b;
    if (const char* v = std::getenv("SOFICKIT_BUDGET")) {
      int cap = std::atoi(v);
      if (cap > 0) {
        b.max_n = cap;
        b.max_atoms = cap * 2;
      }
    }
    return b;
  }
};

// sum_k C(n,k)^2 k!
inline std::int64_t pbij_count(int n) {
  std::int64_t total = 0;
  std::vector<std::vector<std::int64_t>> choose(
      static_cast<std::size_t>(n) + 1, std::vector<std::int64_t>(static_cast<std::size_t>(n) + 1, 0));
  for (int i = 0; i <= n; ++i) {
    choose[static_cast<std::size_t>(i)][0] = 1;
    for (int j = 1; j <= i; ++j)
      choose[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
          choose[static_cast<std::size_t>(i) - 1][static_cast<std::size_t>(j) - 1] +
          choose[static_cast<std::size_t>(i) - 1][static_cast<std::size_t>(j)];
  }
  std::int64_t fact = 1;
  for (int k = 0; k <= n; ++k) {
    if (k > 0) fact *= k;
    std::int64_t c = choose[static_cast<std::size_t>(n)][static_cast<std::size_t>(k)];
    total += c * c * fact;
  }
  return total;
}

namespace detail {

template <typename Fn>
void enumerate_pbij_rec(int n, int pos, std::vector<int>& map, std::vector<char>& used, Fn&& fn) {
  if (pos == n) {
    fn(PartialBijection(n, map));
    return;
  }
  map[static_cast<std::size_t>(pos)] = PartialBijection::kUndef;
  enumerate_pbij_rec(n, pos + 1, map, used, fn);
  for (int j = 0; j < n; ++j) {
    if (used[static_cast<std::size_t>(j)]) continue;
    used[static_cast<std::size_t>(j)] = 1;
    map[static_cast<std::size_t>(pos)] = j;
    enumerate_pbij_rec(n, pos + 1, map, used, fn);
    used[static_cast<std::size_t>(j)] = 0;
  }
  map[static_cast<std::size_t>(pos)] = PartialBijection::kUndef;
}

}  // namespace detail

// All of [[n]], each exactly once, deterministic order (undefined before
// ascending targets, position by position).
template <typename Fn>
void for_each_pbij(int n, Fn&& fn, const EnumerationBudget& budget = {}) {
  if (n > budget.max_n)
    throw BudgetExceeded("[[n]] enumeration capped at n = " + std::to_string(budget.max_n));
  std::vector<int> map(static_cast<std::size_t>(n), PartialBijection::kUndef);
  std::vector<char> used(static_cast<std::size_t>(n), 0);
  detail::enumerate_pbij_rec(n, 0, map, used, fn);
}

inline std::vector<PartialBijection> all_pbij(int n, const EnumerationBudget& budget = {}) {
  std::vector<PartialBijection> out;
  out.reserve(static_cast<std::size_t>(pbij_count(n)));
  for_each_pbij(n, [&](const PartialBijection& f) { out.push_back(f); }, budget);
  return out;
}

// All of [[R]]: per class, every partial bijection of the class, combined by
// an odometer over the classes. Streamed so only per-class lists are held.
template <typename Fn>
void for_each_full_semigroup(const FiniteRelation& r, Fn&& fn,
                             const EnumerationBudget& budget = {}) {
  if (r.atom_count() > budget.max_atoms)
    throw BudgetExceeded("full-semigroup enumeration capped at " +
                         std::to_string(budget.max_atoms) + " atoms");
  std::int64_t total = 1;
  for (const auto& cls : r.classes()) {
    if (static_cast<int>(cls.size()) > budget.max_n)
      throw BudgetExceeded("class too large for exhaustive enumeration");
    total *= pbij_count(static_cast<int>(cls.size()));
    if (total > 4'000'000) throw BudgetExceeded("full semigroup larger than 4e6 elements");
  }
  std::vector<std::vector<PartialBijection>> local;
  for (const auto& cls : r.classes())
    local.push_back(all_pbij(static_cast<int>(cls.size()), budget));
  std::vector<std::size_t> odo(local.size(), 0);
  int atoms = r.atom_count();
  while (true) {
    std::vector<int> m(static_cast<std::size_t>(atoms), PartialBijection::kUndef);
    for (std::size_t c = 0; c < local.size(); ++c) {
      const auto& cls = r.classes()[c];
      const PartialBijection& part = local[c][odo[c]];
      for (int i = 0; i < part.n(); ++i)
        if (part.defined(i))
          m[static_cast<std::size_t>(cls[static_cast<std::size_t>(i)])] =
              cls[static_cast<std::size_t>(part[i])];
    }
    fn(LocalIso(r, PartialBijection(atoms, std::move(m))));
    std::size_t c = 0;
    for (; c < odo.size(); ++c) {
      if (++odo[c] < local[c].size()) break;
      odo[c] = 0;
    }
    if (c == odo.size()) break;
  }
}

inline std::int64_t full_semigroup_count(const FiniteRelation& r) {
  std::int64_t total = 1;
  for (const auto& cls : r.classes()) total *= pbij_count(static_cast<int>(cls.size()));
  return total;
}

// Cross-check construction: the same replication embedding but with the copy
// blocks laid out in reverse atom order and the whole target relabeled by a
// fixed pseudorandom permutation. Still exact; raw images generally differ
// from ExactEmbedding while every trace and pairwise distance agrees.
class AltEmbedding {
public:
  explicit AltEmbedding(FiniteRelation r, std::uint64_t relabel_seed = 0xA17EDULL)
      : rel_(std::move(r)) {
    std::int64_t b = 1;
    for (int x = 0; x < rel_.atom_count(); ++x)
      b = lcm64(b, rel_.space().weight(x).den());
    b_ = static_cast<int>(b);
    offset_.resize(static_cast<std::size_t>(rel_.atom_count()), 0);
    int cursor = 0;
    for (int x = rel_.atom_count() - 1; x >= 0; --x) {
      offset_[static_cast<std::size_t>(x)] = cursor;
      cursor += copies_of(x);
    }
    relabel_.resize(static_cast<std::size_t>(b_));
    for (int i = 0; i < b_; ++i) relabel_[static_cast<std::size_t>(i)] = i;
    Rng rng(relabel_seed);
    rng.shuffle(relabel_);
  }

  const FiniteRelation& source() const { return rel_; }
  int target_n() const { return b_; }

  int copies_of(int atom) const {
    return static_cast<int>((rel_.space().weight(atom) * Rational(b_)).num());
  }

  PartialBijection image(const LocalIso& g) const {
    if (g.relation() != rel_) throw RelationMismatch("element of a different relation");
    std::vector<int> m(static_cast<std::size_t>(b_), PartialBijection::kUndef);
    const auto& am = g.map();
    for (int x = 0; x < am.n(); ++x) {
      if (!am.defined(x)) continue;
      int y = am[x];
      for (int k = 0; k < copies_of(x); ++k) {
        int src = relabel_[static_cast<std::size_t>(offset_[static_cast<std::size_t>(x)] + k)];
        int dst = relabel_[static_cast<std::size_t>(offset_[static_cast<std::size_t>(y)] + k)];
        m[static_cast<std::size_t>(src)] = dst;
      }
    }
    return PartialBijection(b_, std::move(m));
  }

  AlmostMorphism as_morphism(const std::vector<LocalIso>& k) const {
    return detail::tabulate_with_products(rel_, b_, k,
                                          [this](const LocalIso& g) { return image(g); });
  }

private:
  FiniteRelation rel_;
  int b_ = 1;
  std::vector<int> offset_;
  std::vector<int> relabel_;
};

inline AlmostMorphism alt_embedding(const FiniteRelation& r, const std::vector<LocalIso>& k) {
  return AltEmbedding(r).as_morphism(k);
}

}  // namespace sofickit
