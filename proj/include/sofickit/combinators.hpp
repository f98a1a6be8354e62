#pragma once

#include <functional>
#include <map>
#include <utility>
#include <vector>

#include "sofickit/embed.hpp"
#include "sofickit/errors.hpp"
#include "sofickit/relation.hpp"

namespace sofickit {

// Uniform way to ask a morphism for images: a strict table (MissingImage on
// absent keys) or an on-demand generator such as ExactEmbedding.
struct ImageOracle {
  FiniteRelation source;
  int target_n = 0;
  std::function<PartialBijection(const LocalIso&)> image;
};

inline ImageOracle oracle_from(const AlmostMorphism& m) {
  return ImageOracle{m.source(), m.target_n(),
                     [&m](const LocalIso& g) { return m.image_of(g); }};
}

inline ImageOracle oracle_from(const ExactEmbedding& e) {
  return ImageOracle{e.source(), e.target_n(),
                     [&e](const LocalIso& g) { return e.image(g); }};
}

// Table lookup first, falling back to the generator for absent keys.
inline ImageOracle hybrid_oracle(const AlmostMorphism& m, const ExactEmbedding& e) {
  if (m.source() != e.source() || m.target_n() != e.target_n())
    throw RelationMismatch("table and generator disagree on source or target");
  return ImageOracle{m.source(), m.target_n(), [&m, &e](const LocalIso& g) {
                       if (auto idx = m.find(g.map())) return m.entry(*idx).image;
                       return e.image(g);
                     }};
}

// ---------------------------------------------------------------------------
// Disintegration mix: theta(g) = direct sum over parts of theta_j(g) tensor
// 1_[p_j], after lifting all targets to the lcm size. Exact identities:
// tr theta(g) = (1/M) sum p_j tr theta_j(g) and eps_mult <= max_j eps_mult_j.
// ---------------------------------------------------------------------------
inline AlmostMorphism mix(const std::vector<std::pair<AlmostMorphism, std::int64_t>>& parts) {
  if (parts.empty()) throw CarrierMismatch("mix of an empty list");
  const AlmostMorphism& head = parts.front().first;
  std::int64_t big_m = 0;
  std::int64_t lifted_n = 1;
  for (const auto& [m, p] : parts) {
    if (p <= 0) throw IndexOutOfRange("mix weight must be positive");
    if (m.source() != head.source()) throw CarrierMismatch("parts on different relations");
    if (m.entries().size() != head.entries().size() ||
        m.carrier_count() != head.carrier_count())
      throw CarrierMismatch("parts tabulate different carriers");
    big_m += p;
    lifted_n = lcm64(lifted_n, m.target_n());
  }
  int out_n = static_cast<int>(lifted_n * big_m);
  std::vector<PartialBijection> images;
  images.reserve(head.entries().size());
  for (std::size_t i = 0; i < head.entries().size(); ++i) {
    const auto& key = head.entry(i).element;
    PartialBijection acc(0, {});
    for (const auto& [m, p] : parts) {
      auto idx = m.find(key.map());
      if (!idx) throw CarrierMismatch("part lacks entry for a carrier element");
      PartialBijection lifted =
          tensor(m.entry(*idx).image,
                 PartialBijection::identity(static_cast<int>(lifted_n / m.target_n())));
      acc = direct_sum(acc, tensor(lifted, PartialBijection::identity(static_cast<int>(p))));
    }
    images.push_back(std::move(acc));
  }
  return head.with_images(out_n, images);
}

// ---------------------------------------------------------------------------
// Restriction: theta_A(g) = pi(1_A) pi(g) pi(1_A) cut down to the fixed-point
// set Y of pi(1_A) and relabeled to [|Y|]. For exact inputs this is an exact
// morphism of R|_A with tr_Y(theta_A(g)) = tr(pi(1_A)pi(g)pi(1_A)) / mu_#(Y).
// ---------------------------------------------------------------------------
inline AlmostMorphism restrict_morphism(const ImageOracle& oracle, const MSubset& a,
                                        const std::vector<LocalIso>& k_a) {
  const FiniteRelation& r = oracle.source;
  if (a.space() != r.space()) throw SpaceMismatch("set lives on a different space");
  if (a.members().empty()) throw NullRestriction("restriction to a null set");
  LocalIso one_a = LocalIso::indicator(r, a);
  PartialBijection pi_a = oracle.image(one_a);
  std::vector<int> y = parts(pi_a).fix;
  if (y.empty()) throw NullRestriction("image of 1_A has no fixed points");
  std::vector<int> pos(static_cast<std::size_t>(oracle.target_n), -1);
  for (std::size_t i = 0; i < y.size(); ++i) pos[static_cast<std::size_t>(y[i])] = static_cast<int>(i);

  FiniteRelation r_a = restrict_relation(r, a);
  const std::vector<int>& atoms = a.members();

  auto unrestrict = [&](const LocalIso& g_sub) {
    std::vector<int> m(static_cast<std::size_t>(r.atom_count()), PartialBijection::kUndef);
    for (int i = 0; i < g_sub.map().n(); ++i)
      if (g_sub.map().defined(i))
        m[static_cast<std::size_t>(atoms[static_cast<std::size_t>(i)])] =
            atoms[static_cast<std::size_t>(g_sub.map()[i])];
    return LocalIso(r, PartialBijection(r.atom_count(), std::move(m)));
  };

  auto image = [&](const LocalIso& g_sub) {
    PartialBijection sandwich = compose(pi_a, compose(oracle.image(unrestrict(g_sub)), pi_a));
    std::vector<int> m(y.size(), PartialBijection::kUndef);
    for (int p : y) {
      if (!sandwich.defined(p)) continue;
      int q = sandwich[p];
      if (pos[static_cast<std::size_t>(q)] == -1) continue;
      m[static_cast<std::size_t>(pos[static_cast<std::size_t>(p)])] =
          pos[static_cast<std::size_t>(q)];
    }
    return PartialBijection(static_cast<int>(y.size()), std::move(m));
  };

  return detail::tabulate_with_products(r_a, static_cast<int>(y.size()), k_a, image);
}

inline AlmostMorphism restrict_morphism(const AlmostMorphism& m, const MSubset& a,
                                        const std::vector<LocalIso>& k_a) {
  return restrict_morphism(oracle_from(m), a, k_a);
}

// ---------------------------------------------------------------------------
// Covariant pairs: a group of full-group elements with target permutations
// theta_g, and a set map phi given on atoms by disjoint target blocks whose
// normalized sizes equal the atom weights. phi extends additively to sets.
// ---------------------------------------------------------------------------
class CovariantPair {
public:
  CovariantPair(FiniteRelation rel, int target_n, std::vector<LocalIso> group,
                std::vector<PartialBijection> theta, std::vector<std::vector<int>> phi_atom)
      : rel_(std::move(rel)), target_n_(target_n), group_(std::move(group)),
        theta_(std::move(theta)), phi_atom_(std::move(phi_atom)) {
    if (group_.size() != theta_.size()) throw SizeMismatch("group/theta length mismatch");
    if (static_cast<int>(phi_atom_.size()) != rel_.atom_count())
      throw SizeMismatch("phi must cover every atom");
    std::vector<char> used(static_cast<std::size_t>(target_n_), 0);
    int covered = 0;
    for (int x = 0; x < rel_.atom_count(); ++x) {
      const auto& blk = phi_atom_[static_cast<std::size_t>(x)];
      const Rational& w = rel_.space().weight(x);
      if (Rational(static_cast<std::int64_t>(blk.size()), target_n_) != w)
        throw NotInvariant("phi block of " + rel_.space().id(x) + " has wrong mass");
      for (int p : blk) {
        if (p < 0 || p >= target_n_) throw IndexOutOfRange("phi block outside target");
        if (used[static_cast<std::size_t>(p)]) throw NotInjective("phi blocks overlap");
        used[static_cast<std::size_t>(p)] = 1;
        ++covered;
      }
    }
    if (covered != target_n_) throw NotPartition("phi blocks do not cover the target");
    for (std::size_t i = 0; i < group_.size(); ++i) {
      if (group_[i].relation() != rel_) throw RelationMismatch("group element elsewhere");
      if (!group_[i].is_full()) throw NotPermutation("group element not in the full group");
      if (theta_[i].n() != target_n_ || !theta_[i].is_full())
        throw NotPermutation("theta image not a permutation of the target");
      if (group_[i].map() == PartialBijection::identity(rel_.atom_count()) &&
          theta_[i] != PartialBijection::identity(target_n_))
        throw NotInvariant("identity must map to the identity");
      for (int x = 0; x < rel_.atom_count(); ++x) {
        std::vector<int> lhs = perm_action(theta_[i], phi_atom_[static_cast<std::size_t>(x)]);
        std::vector<int> rhs = phi_atom_[static_cast<std::size_t>(group_[i].map()[x])];
        if (lhs != rhs)
          throw NotInvariant("pair not covariant at atom " + rel_.space().id(x));
      }
    }
  }

  const FiniteRelation& relation() const { return rel_; }
  int target_n() const { return target_n_; }
  std::size_t group_size() const { return group_.size(); }
  const LocalIso& group_element(std::size_t i) const { return group_[i]; }
  const PartialBijection& theta(std::size_t i) const { return theta_[i]; }

  std::vector<int> phi(const std::vector<int>& atoms) const {
    std::vector<int> out;
    for (int x : atoms)
      for (int p : phi_atom_[static_cast<std::size_t>(x)]) out.push_back(p);
    std::sort(out.begin(), out.end());
    return out;
  }
  std::vector<int> phi(const MSubset& a) const { return phi(a.members()); }

private:
  FiniteRelation rel_;
  int target_n_;
  std::vector<LocalIso> group_;
  std::vector<PartialBijection> theta_;
  std::vector<std::vector<int>> phi_atom_;
};

inline CovariantPair covariant_pair(const ExactEmbedding& e,
                                    const std::vector<LocalIso>& group) {
  std::vector<PartialBijection> theta;
  std::vector<std::vector<int>> phi_atom;
  theta.reserve(group.size());
  for (const auto& g : group) theta.push_back(e.image(g));
  for (int x = 0; x < e.source().atom_count(); ++x) phi_atom.push_back(e.block(x));
  return CovariantPair(e.source(), e.target_n(), group, std::move(theta), std::move(phi_atom));
}

// Phi(g) = join over the decomposition g = join of g_i 1_{A_i} of
// theta(g_i) 1_{phi(A_i)}, with A_i chosen greedily along `order`. For exact
// pairs the result does not depend on the enumeration order.
inline PartialBijection covariant_extension(const CovariantPair& cp, const LocalIso& g,
                                            const std::vector<std::size_t>& order) {
  if (g.relation() != cp.relation()) throw RelationMismatch("element of a different relation");
  int n = cp.relation().atom_count();
  std::vector<char> covered(static_cast<std::size_t>(n), 0);
  PartialBijection acc = PartialBijection::empty(cp.target_n());
  int remaining = g.map().dom_size();
  for (std::size_t oi = 0; oi < order.size() && remaining > 0; ++oi) {
    const LocalIso& gi = cp.group_element(order[oi]);
    std::vector<int> piece_atoms;
    for (int x = 0; x < n; ++x)
      if (!covered[static_cast<std::size_t>(x)] && g.map().defined(x) &&
          gi.map()[x] == g.map()[x])
        piece_atoms.push_back(x);
    if (piece_atoms.empty()) continue;
    for (int x : piece_atoms) covered[static_cast<std::size_t>(x)] = 1;
    remaining -= static_cast<int>(piece_atoms.size());
    PartialBijection indicator =
        PartialBijection::partial_identity(cp.target_n(), cp.phi(piece_atoms));
    acc = join(acc, compose(cp.theta(order[oi]), indicator));
  }
  if (remaining > 0) throw NotCovered("element not decomposable over the stored group");
  return acc;
}

inline PartialBijection covariant_extension(const CovariantPair& cp, const LocalIso& g) {
  std::vector<std::size_t> order(cp.group_size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  return covariant_extension(cp, g, order);
}

// ---------------------------------------------------------------------------
// Choice systems for a finite-index pair R <= S with constant index N and
// equal subclass sizes: atom (c,t) of an S-class moves to ((c+i) mod N, t)
// under psi_i, so psi_0 = id, every psi_i lies in [S], and the classes of
// psi_i(x) enumerate the N subclasses of S(x) without repetition.
// ---------------------------------------------------------------------------
class ChoiceSystem {
public:
  ChoiceSystem(SubrelationPair pair, int index, std::vector<LocalIso> psi,
               std::vector<int> subclass_of)
      : pair_(std::move(pair)), index_(index), psi_(std::move(psi)),
        subclass_of_(std::move(subclass_of)) {}

  const SubrelationPair& pair() const { return pair_; }
  int index() const { return index_; }
  const std::vector<LocalIso>& psi() const { return psi_; }
  int subclass_of(int atom) const { return subclass_of_[static_cast<std::size_t>(atom)]; }

private:
  SubrelationPair pair_;
  int index_;
  std::vector<LocalIso> psi_;
  std::vector<int> subclass_of_;
};

inline ChoiceSystem build_choice_system(const SubrelationPair& p) {
  std::vector<int> profile = index_profile(p);
  int n_index = profile.empty() ? 1 : profile[0];
  for (int j : profile)
    if (j != n_index)
      throw NestingViolated("index not constant across the space; restrict first");
  int atoms = p.fine().atom_count();
  std::vector<int> subclass_of(static_cast<std::size_t>(atoms), -1);
  std::vector<int> pos_in_subclass(static_cast<std::size_t>(atoms), -1);
  std::vector<std::vector<std::vector<int>>> layout;  // per coarse class
  for (int c = 0; c < p.coarse().class_count(); ++c) {
    auto subs = p.subclasses(c);
    std::size_t sz = subs[0].size();
    for (const auto& s : subs)
      if (s.size() != sz)
        throw UnequalSubclasses("subclass sizes differ inside a coarse class");
    for (std::size_t ci = 0; ci < subs.size(); ++ci)
      for (std::size_t t = 0; t < subs[ci].size(); ++t) {
        subclass_of[static_cast<std::size_t>(subs[ci][t])] = static_cast<int>(ci);
        pos_in_subclass[static_cast<std::size_t>(subs[ci][t])] = static_cast<int>(t);
      }
    layout.push_back(std::move(subs));
  }
  std::vector<LocalIso> psi;
  psi.reserve(static_cast<std::size_t>(n_index));
  for (int i = 0; i < n_index; ++i) {
    std::vector<int> m(static_cast<std::size_t>(atoms));
    for (int x = 0; x < atoms; ++x) {
      const auto& subs = layout[static_cast<std::size_t>(p.coarse().class_of(x))];
      int c = subclass_of[static_cast<std::size_t>(x)];
      int t = pos_in_subclass[static_cast<std::size_t>(x)];
      m[static_cast<std::size_t>(x)] =
          subs[static_cast<std::size_t>((c + i) % n_index)][static_cast<std::size_t>(t)];
    }
    psi.emplace_back(p.coarse(), PartialBijection(atoms, std::move(m)));
  }
  return ChoiceSystem(p, n_index, std::move(psi), std::move(subclass_of));
}

// sigma(y,x): the permutation of [N] with sigma(i) = j iff psi_i(x) R psi_j(y).
inline PartialBijection cocycle(const ChoiceSystem& cs, int y, int x) {
  const auto& s = cs.pair().coarse();
  if (!s.related(y, x)) throw NotRelated("arguments in different coarse classes");
  int n = cs.index();
  std::vector<int> m(static_cast<std::size_t>(n), PartialBijection::kUndef);
  for (int i = 0; i < n; ++i) {
    int xi = cs.psi()[static_cast<std::size_t>(i)].map()[x];
    for (int j = 0; j < n; ++j) {
      int yj = cs.psi()[static_cast<std::size_t>(j)].map()[y];
      if (cs.pair().fine().related(xi, yj)) {
        m[static_cast<std::size_t>(i)] = j;
        break;
      }
    }
    if (m[static_cast<std::size_t>(i)] == PartialBijection::kUndef)
      throw NotRelated("choice functions do not enumerate the subclasses at " +
                       s.space().id(x));
  }
  return PartialBijection(n, std::move(m));
}

namespace detail {

// One (i,j) term of Xi(f): psi_j f psi_i^{-1} on psi_i(A_{f;j,i}), as an
// element of the fine relation.
inline LocalIso xi_piece(const ChoiceSystem& cs, const LocalIso& f, int j, int i) {
  const FiniteRelation& fine = cs.pair().fine();
  int atoms = fine.atom_count();
  const auto& psi_i = cs.psi()[static_cast<std::size_t>(i)].map();
  const auto& psi_j = cs.psi()[static_cast<std::size_t>(j)].map();
  std::vector<int> m(static_cast<std::size_t>(atoms), PartialBijection::kUndef);
  for (int x = 0; x < atoms; ++x) {
    if (!f.map().defined(x)) continue;
    if (cocycle(cs, f.map()[x], x)[i] != j) continue;  // x in A_{f;j,i}
    m[static_cast<std::size_t>(psi_i[x])] = psi_j[f.map()[x]];
  }
  return LocalIso(fine, PartialBijection(atoms, std::move(m)));
}

}  // namespace detail

// All (i,j) blocks of Xi(f), already tensored into [[M*N]]; exposed so the
// pairwise-disjointness of their domains and ranges can be checked directly.
inline std::vector<PartialBijection> xi_blocks(const ImageOracle& phi, const ChoiceSystem& cs,
                                               const LocalIso& f) {
  int n = cs.index();
  std::vector<PartialBijection> blocks;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      LocalIso piece = detail::xi_piece(cs, f, j, i);
      blocks.push_back(tensor(phi.image(piece), PartialBijection::matrix_unit(n, j, i)));
    }
  return blocks;
}

// Finite-index extension Xi(f) = join over (i,j) of Phi(psi_j f psi_i^{-1}
// restricted) tensor E_{j,i}. Exact when Phi is exact.
inline AlmostMorphism extend_finite_index(const ImageOracle& phi, const ChoiceSystem& cs,
                                          const std::vector<LocalIso>& k_s) {
  if (phi.source != cs.pair().fine())
    throw RelationMismatch("Phi is not a morphism of the fine relation");
  int n = cs.index();
  int out_n = phi.target_n * n;
  auto image = [&](const LocalIso& f) {
    PartialBijection acc = PartialBijection::empty(out_n);
    for (const auto& blk : xi_blocks(phi, cs, f)) acc = join(acc, blk);
    return acc;
  };
  return detail::tabulate_with_products(cs.pair().coarse(), out_n, k_s, image);
}

inline AlmostMorphism extend_finite_index(const AlmostMorphism& phi, const ChoiceSystem& cs,
                                          const std::vector<LocalIso>& k_s) {
  return extend_finite_index(oracle_from(phi), cs, k_s);
}

// ---------------------------------------------------------------------------
// Products: carrier elements of R x S are finite joins of rectangle pieces
// g tensor h, mapped to pi_R(g) tensor pi_S(h). The canonical one-sided
// embedding T(g) = g tensor 1_Y is the companion for round-trip checks.
// ---------------------------------------------------------------------------
struct RectPiece {
  LocalIso g;  // piece of [[R]], any restriction baked in
  LocalIso h;  // piece of [[S]]
};
using RectJoin = std::vector<RectPiece>;

inline LocalIso rect_join_element(const FiniteRelation& prod, const RectJoin& pieces) {
  if (pieces.empty()) return LocalIso::empty(prod);
  PartialBijection acc =
      PartialBijection::empty(pieces[0].g.map().n() * pieces[0].h.map().n());
  try {
    for (const auto& piece : pieces) acc = join(acc, tensor(piece.g.map(), piece.h.map()));
  } catch (const JoinConflict&) {
    throw NotRectangleForm("rectangle pieces overlap inconsistently");
  }
  return LocalIso(prod, acc);
}

inline AlmostMorphism product_pair(const AlmostMorphism& mr, const AlmostMorphism& ms,
                                   const FiniteRelation& prod,
                                   const std::vector<RectJoin>& k) {
  if (prod != product_relation(mr.source(), ms.source()))
    throw RelationMismatch("prod is not the product of the two sources");
  int out_n = mr.target_n() * ms.target_n();

  auto image_of_join = [&](const RectJoin& pieces) {
    PartialBijection acc = PartialBijection::empty(out_n);
    for (const auto& piece : pieces)
      acc = join(acc, tensor(mr.image_of(piece.g), ms.image_of(piece.h)));
    return acc;
  };

  // (join_r a_r)(join_s b_s) = join_{r,s} a_r b_s, so products stay rectangles.
  auto product_join = [](const RectJoin& a, const RectJoin& b) {
    RectJoin out;
    for (const auto& pa : a)
      for (const auto& pb : b)
        out.push_back(RectPiece{compose(pa.g, pb.g), compose(pa.h, pb.h)});
    return out;
  };

  std::vector<AlmostMorphism::Entry> carrier, extra;
  std::map<std::vector<int>, char> seen;
  seen[LocalIso::identity(prod).map().map()] = 1;
  seen[LocalIso::empty(prod).map().map()] = 1;
  std::vector<RectJoin> base;
  base.push_back({RectPiece{LocalIso::identity(mr.source()), LocalIso::identity(ms.source())}});
  base.push_back({});
  for (const auto& join_spec : k) {
    LocalIso elem = rect_join_element(prod, join_spec);
    if (seen.try_emplace(elem.map().map(), 1).second) {
      carrier.push_back({elem, image_of_join(join_spec)});
      base.push_back(join_spec);
    }
  }
  for (const auto& a : base)
    for (const auto& b : base) {
      RectJoin pj = product_join(a, b);
      LocalIso elem = rect_join_element(prod, pj);
      if (seen.try_emplace(elem.map().map(), 1).second)
        extra.push_back({elem, image_of_join(pj)});
    }
  return AlmostMorphism(prod, out_n, std::move(carrier), std::move(extra));
}

// T(g)(x,y) = (g(x), y).
inline LocalIso product_embed_left(const FiniteRelation& prod, const LocalIso& g,
                                   const FiniteRelation& s) {
  return LocalIso(prod, tensor(g.map(), PartialBijection::identity(s.atom_count())));
}

inline LocalIso product_embed_right(const FiniteRelation& prod, const FiniteRelation& r,
                                    const LocalIso& h) {
  return LocalIso(prod, tensor(PartialBijection::identity(r.atom_count()), h.map()));
}

// ---------------------------------------------------------------------------
// Full-group reconstruction of the measure algebra: phi(A) = supp(theta(g))
// for any g in [R] with supp g = A; the canonical-cycle witness is used.
// Requires a singleton-free relation and |A intersect C| != 1 for every class.
// ---------------------------------------------------------------------------
inline std::vector<int> reconstruct_measure_algebra(const ImageOracle& theta, const MSubset& a) {
  for (const auto& cls : theta.source.classes())
    if (cls.size() < 2)
      throw Inadmissible("relation has singleton classes");
  LocalIso g = support_element(theta.source, a);
  return parts(theta.image(g)).supp;
}

inline std::vector<int> reconstruct_measure_algebra(const AlmostMorphism& theta, const MSubset& a) {
  return reconstruct_measure_algebra(oracle_from(theta), a);
}

// ---------------------------------------------------------------------------
// Periodic-part trimming: with alpha in [R] supported exactly on P and
// A_k = supp theta(alpha), eta(f) = theta(f v 1_P) restricted to the
// complement of A_k and relabeled. Exact when theta is exact; the trace on
// the trimmed side is (tr theta(f~) - #A_k/n) / (1 - #A_k/n).
// ---------------------------------------------------------------------------
inline AlmostMorphism trim_periodic(const ImageOracle& theta, const MSubset& p,
                                    const std::vector<LocalIso>& k_aper) {
  const FiniteRelation& r = theta.source;
  if (p.space() != r.space()) throw SpaceMismatch("set lives on a different space");
  for (const auto& cls : r.classes()) {
    int hit = 0;
    for (int x : cls) hit += p.contains(x);
    if (hit != 0 && hit != static_cast<int>(cls.size()))
      throw NoSupportWitness("P is not a union of classes");
    if (hit == 1) throw NoSupportWitness("singleton class inside P");
  }
  LocalIso alpha = support_element(r, p);
  std::vector<int> a_k = parts(theta.image(alpha)).supp;
  std::vector<char> in_ak(static_cast<std::size_t>(theta.target_n), 0);
  for (int q : a_k) in_ak[static_cast<std::size_t>(q)] = 1;
  std::vector<int> comp;
  for (int q = 0; q < theta.target_n; ++q)
    if (!in_ak[static_cast<std::size_t>(q)]) comp.push_back(q);
  if (comp.empty()) throw NullRestriction("support of theta(alpha) fills the target");
  std::vector<int> pos(static_cast<std::size_t>(theta.target_n), -1);
  for (std::size_t i = 0; i < comp.size(); ++i)
    pos[static_cast<std::size_t>(comp[i])] = static_cast<int>(i);

  MSubset aper = p.complement();
  if (aper.members().empty()) throw NullRestriction("P covers the whole space");
  FiniteRelation r_aper = restrict_relation(r, aper);
  const std::vector<int>& atoms = aper.members();

  auto extend_tilde = [&](const LocalIso& f) {
    if (!f.is_full()) throw NotPermutation("trim applies to full-group elements");
    std::vector<int> m(static_cast<std::size_t>(r.atom_count()));
    for (int x = 0; x < r.atom_count(); ++x) m[static_cast<std::size_t>(x)] = x;
    for (int i = 0; i < f.map().n(); ++i)
      m[static_cast<std::size_t>(atoms[static_cast<std::size_t>(i)])] =
          atoms[static_cast<std::size_t>(f.map()[i])];
    return LocalIso(r, PartialBijection(r.atom_count(), std::move(m)));
  };

  auto image = [&](const LocalIso& f) {
    PartialBijection big = theta.image(extend_tilde(f));
    std::vector<int> m(comp.size(), PartialBijection::kUndef);
    for (int q : comp) {
      if (!big.defined(q)) continue;
      int t = big[q];
      if (pos[static_cast<std::size_t>(t)] == -1) continue;
      m[static_cast<std::size_t>(pos[static_cast<std::size_t>(q)])] =
          pos[static_cast<std::size_t>(t)];
    }
    return PartialBijection(static_cast<int>(comp.size()), std::move(m));
  };

  return detail::tabulate_with_products(r_aper, static_cast<int>(comp.size()), k_aper, image);
}

inline AlmostMorphism trim_periodic(const AlmostMorphism& theta, const MSubset& p,
                                    const std::vector<LocalIso>& k_aper) {
  return trim_periodic(oracle_from(theta), p, k_aper);
}

}  // namespace sofickit
