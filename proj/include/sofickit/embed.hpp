#pragma once

#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "sofickit/errors.hpp"
#include "sofickit/pbij.hpp"
#include "sofickit/relation.hpp"
#include "sofickit/rng.hpp"

namespace sofickit {

// A (K,eps)-almost morphism: a finite carrier K of full-semigroup elements, a
// target size N, and an image table into [[N]]. The table may hold more
// entries than the carrier (the products needed by the defect computation).
// The identity and the empty map are always present, with their images pinned
// to 1_[N] and the empty map of [[N]].
class AlmostMorphism {
public:
  struct Entry {
    LocalIso element;
    PartialBijection image;
  };

  AlmostMorphism(FiniteRelation source, int target_n,
                 std::vector<Entry> carrier_entries,
                 std::vector<Entry> extra_entries = {})
      : source_(std::move(source)), target_n_(target_n) {
    if (target_n_ <= 0) throw SizeMismatch("target size must be positive");
    push(Entry{LocalIso::identity(source_), PartialBijection::identity(target_n_)});
    push(Entry{LocalIso::empty(source_), PartialBijection::empty(target_n_)});
    for (auto& e : carrier_entries) push(std::move(e));
    carrier_count_ = entries_.size();
    for (auto& e : extra_entries) push(std::move(e));
  }

  const FiniteRelation& source() const { return source_; }
  int target_n() const { return target_n_; }
  const std::vector<Entry>& entries() const { return entries_; }
  std::size_t carrier_count() const { return carrier_count_; }

  const Entry& entry(std::size_t i) const { return entries_[i]; }

  std::optional<std::size_t> find(const PartialBijection& element_map) const {
    auto it = index_.find(element_map.map());
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  const PartialBijection& image_of(const LocalIso& g) const {
    auto idx = find(g.map());
    if (!idx) throw MissingImage("no table entry for the requested element");
    return entries_[*idx].image;
  }

  // Rebuild with the same keys and new images (used by perturb / combinators).
  AlmostMorphism with_images(int new_target_n,
                             const std::vector<PartialBijection>& images) const {
    if (images.size() != entries_.size()) throw SizeMismatch("image list length mismatch");
    std::vector<Entry> carrier, extra;
    for (std::size_t i = 2; i < entries_.size(); ++i) {
      Entry e{entries_[i].element, images[i]};
      if (i < carrier_count_) carrier.push_back(std::move(e));
      else extra.push_back(std::move(e));
    }
    return AlmostMorphism(source_, new_target_n, std::move(carrier), std::move(extra));
  }

private:
  void push(Entry e) {
    if (e.element.relation() != source_) throw RelationMismatch("entry from a different relation");
    if (e.image.n() != target_n_) throw SizeMismatch("image size != target size");
    auto [it, fresh] = index_.try_emplace(e.element.map().map(), entries_.size());
    if (!fresh) return;  // first entry wins; identity/empty stay pinned
    entries_.push_back(std::move(e));
  }

  FiniteRelation source_;
  int target_n_;
  std::vector<Entry> entries_;
  std::size_t carrier_count_ = 0;
  std::map<std::vector<int>, std::size_t> index_;
};

struct DefectReport {
  Rational eps_mult;
  Rational eps_trace;
  std::size_t worst_pair_first = 0;   // carrier indices achieving eps_mult
  std::size_t worst_pair_second = 0;
  std::size_t worst_trace = 0;        // carrier index achieving eps_trace
};

// eps_mult = max over carrier pairs (f,g) of d_#(pi(fg), pi(f)pi(g));
// eps_trace = max over the carrier of |tr_mu(f) - tr_#(pi(f))|.
// Every product of carrier elements must already have a table entry.
inline DefectReport defect(const AlmostMorphism& m) {
  DefectReport rep;
  rep.eps_mult = Rational(0);
  rep.eps_trace = Rational(0);
  std::size_t k = m.carrier_count();
  for (std::size_t i = 0; i < k; ++i) {
    Rational dt = (trace_mu(m.entry(i).element) - trace(m.entry(i).image)).abs();
    if (dt > rep.eps_trace) { rep.eps_trace = dt; rep.worst_trace = i; }
    for (std::size_t j = 0; j < k; ++j) {
      PartialBijection prod = compose(m.entry(i).element.map(), m.entry(j).element.map());
      auto idx = m.find(prod);
      if (!idx) throw MissingImage("carrier not closed: product of entries " +
                                   std::to_string(i) + "," + std::to_string(j));
      Rational dm = hamming_distance(m.entry(*idx).image,
                                     compose(m.entry(i).image, m.entry(j).image));
      if (dm > rep.eps_mult) {
        rep.eps_mult = dm;
        rep.worst_pair_first = i;
        rep.worst_pair_second = j;
      }
    }
  }
  return rep;
}

// max over carrier pairs of |d_#(pi f, pi g) - d_mu(f, g)|.
inline Rational isometry_gap(const AlmostMorphism& m) {
  Rational gap(0);
  std::size_t k = m.carrier_count();
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i + 1; j < k; ++j) {
      Rational d_target = hamming_distance(m.entry(i).image, m.entry(j).image);
      Rational d_source = metric_mu(m.entry(i).element, m.entry(j).element);
      Rational g = (d_target - d_source).abs();
      if (g > gap) gap = g;
    }
  return gap;
}

namespace detail {

// Build a morphism over a carrier plus all pairwise products, images supplied
// by `image`. Every construction that emits a new morphism routes through
// this, so defect() is always computable on the result.
template <typename ImageFn>
AlmostMorphism tabulate_with_products(const FiniteRelation& source, int target_n,
                                      const std::vector<LocalIso>& carrier,
                                      ImageFn&& image) {
  std::vector<AlmostMorphism::Entry> carrier_entries, extra;
  std::map<std::vector<int>, char> seen;
  std::vector<LocalIso> base{LocalIso::identity(source), LocalIso::empty(source)};
  seen[base[0].map().map()] = 1;
  seen[base[1].map().map()] = 1;
  for (const auto& g : carrier)
    if (seen.try_emplace(g.map().map(), 1).second) {
      carrier_entries.push_back({g, image(g)});
      base.push_back(g);
    }
  for (const auto& f : base)
    for (const auto& g : base) {
      LocalIso prod = compose(f, g);
      if (seen.try_emplace(prod.map().map(), 1).second)
        extra.push_back({prod, image(prod)});
    }
  return AlmostMorphism(source, target_n, std::move(carrier_entries), std::move(extra));
}

}  // namespace detail

// Closure of a carrier under composition (a finite sub-inverse-semigroup once
// the inputs include inverses). Throws BudgetExceeded past max_size.
inline std::vector<LocalIso> semigroup_closure(const FiniteRelation& r,
                                               std::vector<LocalIso> elems,
                                               std::size_t max_size = 4096) {
  std::vector<LocalIso> out;
  std::map<std::vector<int>, std::size_t> seen;
  auto add = [&](const LocalIso& g) -> bool {
    auto [it, fresh] = seen.try_emplace(g.map().map(), out.size());
    if (fresh) {
      if (out.size() >= max_size) throw BudgetExceeded("closure budget exhausted");
      out.push_back(g);
    }
    return fresh;
  };
  add(LocalIso::identity(r));
  add(LocalIso::empty(r));
  for (auto& e : elems) add(e);
  for (std::size_t lo = 0; lo < out.size(); ++lo)
    for (std::size_t i = 0; i <= lo; ++i) {
      add(compose(out[lo], out[i]));
      if (i != lo) add(compose(out[i], out[lo]));
    }
  return out;
}

inline std::vector<LocalIso> inverse_closure(std::vector<LocalIso> elems) {
  std::size_t k = elems.size();
  for (std::size_t i = 0; i < k; ++i) elems.push_back(inverse(elems[i]));
  return elems;
}

// The replication embedding behind the periodic-implies-sofic construction:
// with b the lcm of the weight denominators, atom x becomes a_x = mu(x)*b
// contiguous copies ordered by atom index, and pi(g) sends copy k of x to
// copy k of g(x). Class-constant weights make a_x = a_{gx}, so this is
// well-defined, exactly multiplicative and trace-preserving on all of [[R]].
class ExactEmbedding {
public:
  explicit ExactEmbedding(FiniteRelation r) : rel_(std::move(r)) {
    std::int64_t b = 1;
    for (int x = 0; x < rel_.atom_count(); ++x)
      b = lcm64(b, rel_.space().weight(x).den());
    b_ = static_cast<int>(b);
    offset_.resize(static_cast<std::size_t>(rel_.atom_count()) + 1, 0);
    for (int x = 0; x < rel_.atom_count(); ++x) {
      Rational copies = rel_.space().weight(x) * Rational(b_);
      offset_[static_cast<std::size_t>(x) + 1] =
          offset_[static_cast<std::size_t>(x)] + static_cast<int>(copies.num());
    }
  }

  const FiniteRelation& source() const { return rel_; }
  int target_n() const { return b_; }

  int copies_of(int atom) const {
    return offset_[static_cast<std::size_t>(atom) + 1] - offset_[static_cast<std::size_t>(atom)];
  }
  int block_start(int atom) const { return offset_[static_cast<std::size_t>(atom)]; }

  std::vector<int> block(int atom) const {
    std::vector<int> out;
    for (int k = block_start(atom); k < block_start(atom) + copies_of(atom); ++k)
      out.push_back(k);
    return out;
  }

  std::vector<int> block_of_set(const MSubset& a) const {
    std::vector<int> out;
    for (int x : a.members())
      for (int k = block_start(x); k < block_start(x) + copies_of(x); ++k) out.push_back(k);
    return out;
  }

  PartialBijection image(const LocalIso& g) const {
    if (g.relation() != rel_) throw RelationMismatch("element of a different relation");
    return image(g.map());
  }

  PartialBijection image(const PartialBijection& atom_map) const {
    std::vector<int> m(static_cast<std::size_t>(b_), PartialBijection::kUndef);
    for (int x = 0; x < atom_map.n(); ++x) {
      if (!atom_map.defined(x)) continue;
      int y = atom_map[x];
      for (int k = 0; k < copies_of(x); ++k)
        m[static_cast<std::size_t>(block_start(x) + k)] = block_start(y) + k;
    }
    return PartialBijection(b_, std::move(m));
  }

  // Tabulate over K plus all pairwise products, so defect() is computable.
  AlmostMorphism as_morphism(const std::vector<LocalIso>& k) const {
    return detail::tabulate_with_products(rel_, b_, k,
                                          [this](const LocalIso& g) { return image(g); });
  }

private:
  FiniteRelation rel_;
  int b_ = 1;
  std::vector<int> offset_;
};

inline AlmostMorphism exact_embedding(const FiniteRelation& r, const std::vector<LocalIso>& k) {
  return ExactEmbedding(r).as_morphism(k);
}

// Tensor every image with 1_[k]. Traces, pairwise distances and the defect
// are unchanged; only the target grows, which gives fine-grained perturbation
// budgets room to act.
inline AlmostMorphism inflate(const AlmostMorphism& m, int k) {
  if (k <= 0) throw SizeMismatch("inflation factor must be positive");
  std::vector<PartialBijection> images;
  images.reserve(m.entries().size());
  for (const auto& e : m.entries())
    images.push_back(tensor(e.image, PartialBijection::identity(k)));
  return m.with_images(m.target_n() * k, images);
}

// Pre-compose every non-identity, non-empty table image with a seeded random
// permutation supported on at most floor(delta*N) points. The resulting
// defect satisfies eps_mult <= 3*delta and eps_trace <= delta.
inline AlmostMorphism perturb(const AlmostMorphism& m, const Rational& delta,
                              std::uint64_t seed) {
  if (delta < Rational(0) || delta > Rational(1))
    throw IndexOutOfRange("delta must lie in [0,1]");
  int n = m.target_n();
  std::int64_t budget = delta.floor_times(n);
  Rng master(seed);
  std::vector<PartialBijection> images;
  images.reserve(m.entries().size());
  for (std::size_t i = 0; i < m.entries().size(); ++i) {
    const auto& e = m.entry(i);
    bool pinned = e.element.map() == PartialBijection::identity(m.source().atom_count()) ||
                  e.element.map() == PartialBijection::empty(m.source().atom_count());
    if (pinned || budget < 2) {
      images.push_back(e.image);
      continue;
    }
    Rng rng = master.fork(i);
    std::vector<int> pts(static_cast<std::size_t>(n));
    for (int t = 0; t < n; ++t) pts[static_cast<std::size_t>(t)] = t;
    rng.shuffle(pts);
    pts.resize(static_cast<std::size_t>(budget));
    std::vector<int> shuffled = pts;
    rng.shuffle(shuffled);
    std::vector<int> rho(static_cast<std::size_t>(n));
    for (int t = 0; t < n; ++t) rho[static_cast<std::size_t>(t)] = t;
    for (std::size_t t = 0; t < pts.size(); ++t)
      rho[static_cast<std::size_t>(pts[t])] = shuffled[t];
    images.push_back(compose(e.image, PartialBijection(n, std::move(rho))));
  }
  return m.with_images(n, images);
}

}  // namespace sofickit
