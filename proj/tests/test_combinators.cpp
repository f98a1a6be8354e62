#include <doctest.h>

#include "sofickit/combinators.hpp"
#include "sofickit/oracle.hpp"
#include "sofickit/sampling.hpp"

using namespace sofickit;

namespace {

FiniteRelation quarter_relation() {
  WeightedSpace s({"a", "b", "c"}, {Rational(1, 4), Rational(1, 4), Rational(1, 2)});
  return make_relation(s, {{0, 1}, {2}});
}

SubrelationPair two_by_two_pair() {
  WeightedSpace u = WeightedSpace::uniform(4);
  return SubrelationPair(make_relation(u, {{0, 1}, {2, 3}}),
                         make_relation(u, {{0, 1, 2, 3}}));
}

}  // namespace

TEST_CASE("mix: single part with weight one is the part itself") {
  Rng rng(103);
  FiniteRelation r = random_relation(rng);
  AlmostMorphism m = exact_embedding(r, sample_carrier(rng, r, 5));
  AlmostMorphism mixed = mix({{m, 1}});
  CHECK(mixed.target_n() == m.target_n());
  for (std::size_t i = 0; i < m.entries().size(); ++i)
    CHECK(mixed.entry(i).image == m.entry(i).image);
}

TEST_CASE("mix of exact parts stays exact and averages traces") {
  Rng rng(107);
  FiniteRelation r = random_relation(rng);
  std::vector<LocalIso> k = sample_carrier(rng, r, 6);
  AlmostMorphism a = exact_embedding(r, k);
  AlmostMorphism b = alt_embedding(r, k);
  AlmostMorphism mixed = mix({{a, 1}, {b, 2}});
  DefectReport rep = defect(mixed);
  CHECK(rep.eps_mult == Rational(0));
  CHECK(rep.eps_trace == Rational(0));
  for (std::size_t i = 0; i < mixed.entries().size(); ++i) {
    Rational expected = (Rational(1) * trace(a.entry(i).image) +
                         Rational(2) * trace(b.entry(i).image)) /
                        Rational(3);
    CHECK(trace(mixed.entry(i).image) == expected);
  }
}

TEST_CASE("mix lifts parts with different target sizes to the lcm") {
  Rng rng(211);
  FiniteRelation r = random_relation(rng);
  std::vector<LocalIso> k = sample_carrier(rng, r, 4);
  AlmostMorphism a = exact_embedding(r, k);
  AlmostMorphism b = inflate(a, 3);
  AlmostMorphism mixed = mix({{a, 2}, {b, 1}});
  CHECK(mixed.target_n() == b.target_n() * 3);
  DefectReport rep = defect(mixed);
  CHECK(rep.eps_mult == Rational(0));
  CHECK(rep.eps_trace == Rational(0));
  for (std::size_t i = 0; i < mixed.entries().size(); ++i)
    CHECK(trace(mixed.entry(i).image) == trace(a.entry(i).image));
}

TEST_CASE("mix defect is bounded by the worst part") {
  Rng rng(109);
  FiniteRelation r = random_relation(rng);
  std::vector<LocalIso> k = sample_carrier(rng, r, 5);
  AlmostMorphism base = exact_embedding(r, k);
  AlmostMorphism p1 = perturb(base, Rational(1, 100), 1);
  AlmostMorphism p2 = perturb(base, Rational(1, 20), 2);
  DefectReport d1 = defect(p1), d2 = defect(p2);
  DefectReport dm = defect(mix({{p1, 1}, {p2, 1}}));
  Rational worst = d1.eps_mult > d2.eps_mult ? d1.eps_mult : d2.eps_mult;
  CHECK(dm.eps_mult <= worst);
}

TEST_CASE("mix rejects mismatched carriers and empty input") {
  Rng rng(113);
  FiniteRelation r = random_relation(rng);
  AlmostMorphism a = exact_embedding(r, sample_carrier(rng, r, 4));
  AlmostMorphism b = exact_embedding(r, sample_carrier(rng, r, 4));
  if (a.entries().size() != b.entries().size()) {
    CHECK_THROWS_AS(mix({{a, 1}, {b, 1}}), CarrierMismatch);
  } else {
    AlmostMorphism c = exact_embedding(r, sample_carrier(rng, r, 7));
    CHECK_THROWS_AS(mix({{a, 1}, {c, 1}}), CarrierMismatch);
  }
  CHECK_THROWS_AS(mix({}), CarrierMismatch);
}

TEST_CASE("restrict_morphism: full set is the identity restriction") {
  Rng rng(127);
  FiniteRelation r = random_relation(rng);
  std::vector<LocalIso> k = sample_carrier(rng, r, 4);
  ExactEmbedding e(r);
  AlmostMorphism whole = e.as_morphism(k);
  AlmostMorphism back = restrict_morphism(oracle_from(e), MSubset::full(r.space()), k);
  CHECK(back.target_n() == whole.target_n());
  for (const auto& g : k) CHECK(back.image_of(g) == whole.image_of(g));
}

TEST_CASE("restricting an exact morphism is exact with the trace quotient") {
  Rng rng(131);
  for (int run = 0; run < 25; ++run) {
    FiniteRelation r = random_relation(rng);
    MSubset a = random_subset(rng, r.space(), /*nonempty=*/true);
    FiniteRelation r_a = restrict_relation(r, a);
    Rng inner(rng.next());
    std::vector<LocalIso> k_a = sample_carrier(inner, r_a, 5);
    ExactEmbedding e(r);
    AlmostMorphism cut = restrict_morphism(oracle_from(e), a, k_a);
    DefectReport rep = defect(cut);
    CHECK(rep.eps_mult == Rational(0));
    CHECK(rep.eps_trace == Rational(0));
    // target mass of Y equals mu(A)
    Rational mu_y(cut.target_n(), e.target_n());
    CHECK(mu_y == measure(a));
    // tr_Y(theta_A(g)) = tr(pi(1_A) pi(g) pi(1_A)) / mu_#(Y), mirroring
    // tr_A(g) = tr_mu(g) / mu(A) on the source side
    PartialBijection pi_a = e.image(LocalIso::indicator(r, a));
    for (const auto& g_sub : k_a) {
      std::vector<int> m(static_cast<std::size_t>(r.atom_count()), PartialBijection::kUndef);
      for (int i = 0; i < g_sub.map().n(); ++i)
        if (g_sub.map().defined(i))
          m[static_cast<std::size_t>(a.members()[static_cast<std::size_t>(i)])] =
              a.members()[static_cast<std::size_t>(g_sub.map()[i])];
      LocalIso ambient(r, PartialBijection(r.atom_count(), std::move(m)));
      PartialBijection sandwich = compose(pi_a, compose(e.image(ambient), pi_a));
      CHECK(trace(cut.image_of(g_sub)) == trace(sandwich) / mu_y);
      CHECK(trace_mu(g_sub) == trace_mu(ambient) / measure(a));
    }
  }
}

TEST_CASE("restrict_morphism on the replication example") {
  FiniteRelation r = quarter_relation();
  ExactEmbedding e(r);
  MSubset a(r.space(), {2});
  FiniteRelation r_a = restrict_relation(r, a);
  AlmostMorphism cut = restrict_morphism(oracle_from(e), a, {LocalIso::identity(r_a)});
  CHECK(cut.target_n() == 2);
  CHECK(cut.image_of(LocalIso::identity(r_a)) == PartialBijection::identity(2));
  CHECK(trace(cut.image_of(LocalIso::identity(r_a))) == Rational(1));
}

TEST_CASE("restrict_morphism error paths") {
  FiniteRelation r = quarter_relation();
  ExactEmbedding e(r);
  CHECK_THROWS_AS(
      restrict_morphism(oracle_from(e), MSubset::empty(r.space()), {}), NullRestriction);
  // strict table without the 1_A entry
  AlmostMorphism bare = exact_embedding(r, {});
  MSubset a(r.space(), {0, 1});
  FiniteRelation r_a = restrict_relation(r, a);
  CHECK_THROWS_AS(restrict_morphism(bare, a, {LocalIso::identity(r_a)}), MissingImage);
}

TEST_CASE("covariant extension reproduces group elements and indicators") {
  FiniteRelation r = free_cyclic_relation(2, 3);
  LocalIso gen = free_cyclic_generator(r, 3);
  ExactEmbedding e(r);
  std::vector<LocalIso> group{LocalIso::identity(r), gen, compose(gen, gen)};
  CovariantPair cp = covariant_pair(e, group);

  CHECK(covariant_extension(cp, gen) == e.image(gen));
  MSubset a(r.space(), {0, 3, 4});
  LocalIso one_a = LocalIso::indicator(r, a);
  CHECK(covariant_extension(cp, one_a) ==
        PartialBijection::partial_identity(e.target_n(), cp.phi(a)));
}

TEST_CASE("covariant extension does not depend on the decomposition") {
  Rng rng(137);
  FiniteRelation r = free_cyclic_relation(2, 3);
  LocalIso gen = free_cyclic_generator(r, 3);
  ExactEmbedding e(r);
  CovariantPair cp = covariant_pair(e, {LocalIso::identity(r), gen, compose(gen, gen)});
  std::vector<std::vector<std::size_t>> orders{{0, 1, 2}, {2, 1, 0}, {1, 2, 0}};
  for (int i = 0; i < 100; ++i) {
    LocalIso g = random_local_iso(rng, r);
    PartialBijection first = covariant_extension(cp, g, orders[0]);
    for (std::size_t o = 1; o < orders.size(); ++o)
      CHECK(covariant_extension(cp, g, orders[o]) == first);
    CHECK(trace(first) == trace_mu(g));
  }
}

TEST_CASE("covariant extension is multiplicative for exact pairs") {
  Rng rng(139);
  FiniteRelation r = free_cyclic_relation(2, 2);
  LocalIso gen = free_cyclic_generator(r, 2);
  ExactEmbedding e(r);
  CovariantPair cp = covariant_pair(e, {LocalIso::identity(r), gen});
  for (int i = 0; i < 100; ++i) {
    LocalIso f = random_local_iso(rng, r);
    LocalIso g = random_local_iso(rng, r);
    CHECK(covariant_extension(cp, compose(f, g)) ==
          compose(covariant_extension(cp, f), covariant_extension(cp, g)));
  }
}

TEST_CASE("covariant extension agrees with the embedding on a full semigroup") {
  FiniteRelation r = free_cyclic_relation(2, 2);
  LocalIso gen = free_cyclic_generator(r, 2);
  ExactEmbedding e(r);
  CovariantPair cp = covariant_pair(e, {LocalIso::identity(r), gen});
  long long count = 0;
  for_each_full_semigroup(r, [&](const LocalIso& g) {
    ++count;
    CHECK(covariant_extension(cp, g) == e.image(g));
  });
  CHECK(count == 7 * 7);
}

TEST_CASE("covariant extension reports uncoverable elements") {
  FiniteRelation r = free_cyclic_relation(1, 3);
  ExactEmbedding e(r);
  CovariantPair cp = covariant_pair(e, {LocalIso::identity(r)});
  LocalIso gen = free_cyclic_generator(r, 3);
  CHECK_THROWS_AS(covariant_extension(cp, gen), NotCovered);
}

TEST_CASE("choice system basics") {
  WeightedSpace u = WeightedSpace::uniform(4);
  FiniteRelation s = make_relation(u, {{0, 1, 2, 3}});
  ChoiceSystem trivial = build_choice_system(SubrelationPair(s, s));
  CHECK(trivial.index() == 1);
  CHECK(trivial.psi()[0] == LocalIso::identity(s));

  ChoiceSystem cs = build_choice_system(two_by_two_pair());
  CHECK(cs.index() == 2);
  CHECK(cs.psi()[0].map() == PartialBijection::identity(4));
  CHECK(cs.psi()[1].map() ==
        PartialBijection::from_pairs(4, {{0, 2}, {1, 3}, {2, 0}, {3, 1}}));
}

TEST_CASE("choice functions partition every coarse class") {
  Rng rng(149);
  for (int run = 0; run < 20; ++run) {
    int index = static_cast<int>(rng.range(1, 3));
    SubrelationPair p = random_nested_pair(rng, index, 18);
    ChoiceSystem cs = build_choice_system(p);
    for (int x = 0; x < p.fine().atom_count(); ++x) {
      std::vector<int> seen;
      for (const auto& psi : cs.psi()) {
        CHECK(psi.is_full());
        int cls = p.fine().class_of(psi.map()[x]);
        CHECK(std::find(seen.begin(), seen.end(), cls) == seen.end());
        seen.push_back(cls);
      }
      CHECK(static_cast<int>(seen.size()) == cs.index());
    }
  }
}

TEST_CASE("choice system with interleaved subclasses") {
  WeightedSpace u = WeightedSpace::uniform(4);
  SubrelationPair p(make_relation(u, {{0, 2}, {1, 3}}), make_relation(u, {{0, 1, 2, 3}}));
  ChoiceSystem cs = build_choice_system(p);
  CHECK(cs.index() == 2);
  CHECK(cs.psi()[1].map() ==
        PartialBijection::from_pairs(4, {{0, 1}, {1, 0}, {2, 3}, {3, 2}}));
  CHECK(cocycle(cs, 1, 0) == PartialBijection::from_pairs(2, {{0, 1}, {1, 0}}));
  ExactEmbedding e(p.fine());
  AlmostMorphism xi = extend_finite_index(oracle_from(e), cs, {});
  DefectReport rep = defect(xi);
  CHECK(rep.eps_mult == Rational(0));
}

TEST_CASE("restricting a perturbed morphism uses the fixed-point set of pi(1_A)") {
  Rng rng(241);
  FiniteRelation r = random_relation(rng, {4, 8, 4, 2});
  MSubset a = random_subset(rng, r.space(), /*nonempty=*/true);
  FiniteRelation r_a = restrict_relation(r, a);
  std::vector<LocalIso> k_a = sample_carrier(rng, r_a, 3);
  // table over 1_A and the ambient versions of the restricted carrier
  std::vector<LocalIso> ambient{LocalIso::indicator(r, a)};
  for (const auto& g : k_a) {
    std::vector<int> m(static_cast<std::size_t>(r.atom_count()), PartialBijection::kUndef);
    for (int i = 0; i < g.map().n(); ++i)
      if (g.map().defined(i))
        m[static_cast<std::size_t>(a.members()[static_cast<std::size_t>(i)])] =
            a.members()[static_cast<std::size_t>(g.map()[i])];
    ambient.emplace_back(r, PartialBijection(r.atom_count(), std::move(m)));
  }
  AlmostMorphism base = inflate(exact_embedding(r, ambient), 5);
  AlmostMorphism cut0 = restrict_morphism(base, a, k_a);
  DefectReport exact_rep = defect(cut0);
  CHECK(exact_rep.eps_mult == Rational(0));
  CHECK(exact_rep.eps_trace == Rational(0));

  AlmostMorphism noisy = perturb(base, Rational(1, 10), 33);
  PartialBijection pi_a = noisy.image_of(LocalIso::indicator(r, a));
  std::vector<int> y = parts(pi_a).fix;
  if (!y.empty()) {
    AlmostMorphism cut = restrict_morphism(noisy, a, k_a);
    CHECK(cut.target_n() == static_cast<int>(y.size()));
    DefectReport rep = defect(cut);  // deviation lands in the reported defect
    CHECK(rep.eps_mult >= Rational(0));
  }
}

TEST_CASE("unequal subclass sizes have no invertible choice functions") {
  WeightedSpace u = WeightedSpace::uniform(6);
  SubrelationPair p(make_relation(u, {{0, 1}, {2, 3, 4, 5}}),
                    make_relation(u, {{0, 1, 2, 3, 4, 5}}));
  CHECK_THROWS_AS(build_choice_system(p), UnequalSubclasses);
}

TEST_CASE("cocycle values and identity") {
  ChoiceSystem cs = build_choice_system(two_by_two_pair());
  CHECK(cocycle(cs, 0, 0) == PartialBijection::identity(2));
  CHECK(cocycle(cs, 2, 0) == PartialBijection::from_pairs(2, {{0, 1}, {1, 0}}));
  for (int x = 0; x < 4; ++x)
    for (int y = 0; y < 4; ++y)
      for (int z = 0; z < 4; ++z)
        CHECK(compose(cocycle(cs, z, y), cocycle(cs, y, x)) == cocycle(cs, z, x));

  WeightedSpace u = WeightedSpace::uniform(4);
  SubrelationPair split(make_relation(u, {{0, 1}, {2, 3}}), make_relation(u, {{0, 1}, {2, 3}}));
  ChoiceSystem cs2 = build_choice_system(split);
  CHECK_THROWS_AS(cocycle(cs2, 0, 2), NotRelated);
}

TEST_CASE("finite-index extension with trivial index is the input") {
  Rng rng(151);
  FiniteRelation r = random_relation(rng);
  SubrelationPair p(r, r);
  ChoiceSystem cs = build_choice_system(p);
  ExactEmbedding e(r);
  std::vector<LocalIso> k = sample_carrier(rng, r, 5);
  AlmostMorphism xi = extend_finite_index(oracle_from(e), cs, k);
  for (const auto& g : k)
    CHECK(xi.image_of(g) == tensor(e.image(g), PartialBijection::identity(1)));
}

TEST_CASE("finite-index extension of an exact morphism is exact") {
  Rng rng(157);
  for (int run = 0; run < 10; ++run) {
    int index = static_cast<int>(rng.range(2, 3));
    SubrelationPair p = random_nested_pair(rng, index, 12);
    ChoiceSystem cs = build_choice_system(p);
    ExactEmbedding e(p.fine());
    Rng inner(rng.next());
    std::vector<LocalIso> k_s = sample_carrier(inner, p.coarse(), 5);
    AlmostMorphism xi = extend_finite_index(oracle_from(e), cs, k_s);
    DefectReport rep = defect(xi);
    CHECK(rep.eps_mult == Rational(0));
    CHECK(rep.eps_trace == Rational(0));
    for (const auto& entry : xi.entries())
      CHECK(trace(entry.image) == trace_mu(entry.element));
  }
}

TEST_CASE("xi blocks have pairwise disjoint domains and ranges") {
  Rng rng(163);
  SubrelationPair p = two_by_two_pair();
  ChoiceSystem cs = build_choice_system(p);
  ExactEmbedding e(p.fine());
  for (int i = 0; i < 100; ++i) {
    LocalIso f = random_local_iso(rng, p.coarse());
    auto blocks = xi_blocks(oracle_from(e), cs, f);
    for (std::size_t a = 0; a < blocks.size(); ++a)
      for (std::size_t b = a + 1; b < blocks.size(); ++b) {
        Parts pa = parts(blocks[a]), pb = parts(blocks[b]);
        std::vector<int> dd, rr;
        std::set_intersection(pa.dom.begin(), pa.dom.end(), pb.dom.begin(), pb.dom.end(),
                              std::back_inserter(dd));
        std::set_intersection(pa.ran.begin(), pa.ran.end(), pb.ran.begin(), pb.ran.end(),
                              std::back_inserter(rr));
        CHECK(dd.empty());
        CHECK(rr.empty());
      }
  }
}

TEST_CASE("xi is multiplicative on an entire small coarse semigroup") {
  SubrelationPair p = two_by_two_pair();
  ChoiceSystem cs = build_choice_system(p);
  ExactEmbedding e(p.fine());
  ImageOracle phi = oracle_from(e);
  auto xi_image = [&](const LocalIso& f) {
    PartialBijection acc = PartialBijection::empty(e.target_n() * cs.index());
    for (const auto& blk : xi_blocks(phi, cs, f)) acc = join(acc, blk);
    return acc;
  };
  std::vector<LocalIso> all;
  for_each_full_semigroup(p.coarse(), [&](const LocalIso& g) { all.push_back(g); });
  REQUIRE(all.size() == 209);  // [[4]] on the single coarse class
  std::vector<PartialBijection> images;
  images.reserve(all.size());
  for (const auto& f : all) {
    images.push_back(xi_image(f));
    CHECK(trace(images.back()) == trace_mu(f));
  }
  for (std::size_t i = 0; i < all.size(); ++i)
    for (std::size_t j = 0; j < all.size(); ++j)
      CHECK(xi_image(compose(all[i], all[j])) == compose(images[i], images[j]));
}

TEST_CASE("reconstruction preserves intersections, exhaustively") {
  FiniteRelation r = FiniteRelation::full(WeightedSpace::uniform(6));
  ExactEmbedding e(r);
  ImageOracle theta = oracle_from(e);
  auto admissible = [&](int mask) {
    int c = __builtin_popcount(static_cast<unsigned>(mask));
    return c != 1;
  };
  auto to_set = [&](int mask) {
    std::vector<int> m;
    for (int x = 0; x < 6; ++x)
      if (mask & (1 << x)) m.push_back(x);
    return MSubset(r.space(), std::move(m));
  };
  for (int a = 0; a < 64; ++a) {
    if (!admissible(a)) continue;
    for (int b = 0; b < 64; ++b) {
      if (!admissible(b) || !admissible(a & b)) continue;
      std::vector<int> phi_a = reconstruct_measure_algebra(theta, to_set(a));
      std::vector<int> phi_b = reconstruct_measure_algebra(theta, to_set(b));
      std::vector<int> meet;
      std::set_intersection(phi_a.begin(), phi_a.end(), phi_b.begin(), phi_b.end(),
                            std::back_inserter(meet));
      CHECK(meet == reconstruct_measure_algebra(theta, to_set(a & b)));
    }
  }
}

TEST_CASE("xi trace transport matches the fixed-point set image") {
  Rng rng(167);
  SubrelationPair p = two_by_two_pair();
  ChoiceSystem cs = build_choice_system(p);
  for (int run = 0; run < 50; ++run) {
    LocalIso f = random_local_iso(rng, p.coarse());
    std::vector<int> fix_f = parts(f.map()).fix;
    for (int i = 0; i < cs.index(); ++i) {
      LocalIso piece = detail::xi_piece(cs, f, i, i);
      std::vector<int> lhs = parts(piece.map()).fix;
      std::vector<int> rhs = perm_action(cs.psi()[static_cast<std::size_t>(i)].map(), fix_f);
      CHECK(lhs == rhs);
    }
  }
}

TEST_CASE("product morphism multiplies traces and stays exact") {
  Rng rng(173);
  for (int run = 0; run < 10; ++run) {
    FiniteRelation r = random_relation(rng, {2, 5, 4, 1});
    FiniteRelation s = random_relation(rng, {2, 5, 4, 1});
    FiniteRelation prod = product_relation(r, s);
    std::vector<LocalIso> kr = sample_carrier(rng, r, 3);
    std::vector<LocalIso> ks = sample_carrier(rng, s, 3);
    AlmostMorphism mr = exact_embedding(r, kr);
    AlmostMorphism ms = exact_embedding(s, ks);
    std::vector<RectJoin> k;
    for (const auto& g : kr)
      for (const auto& h : ks) k.push_back({RectPiece{g, h}});
    AlmostMorphism kappa = product_pair(mr, ms, prod, k);
    CHECK(kappa.image_of(LocalIso::identity(prod)) ==
          PartialBijection::identity(kappa.target_n()));
    DefectReport rep = defect(kappa);
    CHECK(rep.eps_mult == Rational(0));
    CHECK(rep.eps_trace == Rational(0));
    for (const auto& g : kr)
      for (const auto& h : ks) {
        LocalIso elem = rect_join_element(prod, {RectPiece{g, h}});
        CHECK(trace(kappa.image_of(elem)) == trace_mu(g) * trace_mu(h));
        CHECK(trace_mu(elem) == trace_mu(g) * trace_mu(h));
      }
  }
}

TEST_CASE("round trip through the canonical product embedding keeps traces") {
  Rng rng(179);
  FiniteRelation r = random_relation(rng, {2, 4, 4, 1});
  FiniteRelation s = random_relation(rng, {2, 4, 4, 1});
  FiniteRelation prod = product_relation(r, s);
  std::vector<LocalIso> kr = sample_carrier(rng, r, 4);
  AlmostMorphism mr = exact_embedding(r, kr);
  AlmostMorphism ms = exact_embedding(s, {});
  std::vector<RectJoin> k;
  for (const auto& g : kr) k.push_back({RectPiece{g, LocalIso::identity(s)}});
  AlmostMorphism kappa = product_pair(mr, ms, prod, k);
  for (const auto& g : kr) {
    LocalIso lifted = product_embed_left(prod, g, s);
    CHECK(trace_mu(lifted) == trace_mu(g));
    CHECK(trace(kappa.image_of(lifted)) == trace_mu(g));
  }
}

TEST_CASE("rectangle joins reject inconsistent overlaps") {
  FiniteRelation r = free_cyclic_relation(1, 2);
  FiniteRelation s = free_cyclic_relation(1, 2);
  FiniteRelation prod = product_relation(r, s);
  LocalIso gen = free_cyclic_generator(s, 2);
  RectJoin bad{RectPiece{LocalIso::identity(r), LocalIso::identity(s)},
               RectPiece{LocalIso::identity(r), gen}};
  CHECK_THROWS_AS(rect_join_element(prod, bad), NotRectangleForm);
}

TEST_CASE("measure-algebra reconstruction basics") {
  FiniteRelation r = FiniteRelation::full(WeightedSpace::uniform(5));
  ExactEmbedding e(r);
  ImageOracle theta = oracle_from(e);
  CHECK(reconstruct_measure_algebra(theta, MSubset::empty(r.space())).empty());
  std::vector<int> all = reconstruct_measure_algebra(theta, MSubset::full(r.space()));
  CHECK(static_cast<int>(all.size()) == e.target_n());
  FiniteRelation singletons = FiniteRelation::equality(WeightedSpace::uniform(3));
  CHECK_THROWS_AS(
      reconstruct_measure_algebra(oracle_from(ExactEmbedding(singletons)),
                                  MSubset::empty(singletons.space())),
      Inadmissible);
}

TEST_CASE("reconstruction is independent of the support witness") {
  FiniteRelation r = FiniteRelation::full(WeightedSpace::uniform(5));
  ExactEmbedding e(r);
  MSubset a(r.space(), {0, 2, 4});
  LocalIso g = support_element(r, a);
  LocalIso g2 = inverse(g);  // a different element with the same support
  CHECK(g.map() != g2.map());
  CHECK(g2.supp_set() == a);
  CHECK(parts(e.image(g)).supp == parts(e.image(g2)).supp);
  CHECK(parts(e.image(g)).supp == reconstruct_measure_algebra(oracle_from(e), a));
}

TEST_CASE("reconstruction preserves disjointness, intersections, covariance, measure") {
  Rng rng(181);
  FiniteRelation r = make_relation(WeightedSpace::uniform(9), {{0, 1, 2, 3, 4, 5}, {6, 7, 8}});
  ExactEmbedding e(r);
  ImageOracle theta = oracle_from(e);
  MSubset a(r.space(), {0, 1, 6, 7, 8});
  MSubset b(r.space(), {0, 1, 2, 3});
  // A-and-B, A-minus-B, B-minus-A all meet each class in 0 or >= 2 atoms
  std::vector<int> phi_a = reconstruct_measure_algebra(theta, a);
  std::vector<int> phi_b = reconstruct_measure_algebra(theta, b);
  std::vector<int> phi_ab = reconstruct_measure_algebra(theta, set_intersection(a, b));
  std::vector<int> meet;
  std::set_intersection(phi_a.begin(), phi_a.end(), phi_b.begin(), phi_b.end(),
                        std::back_inserter(meet));
  CHECK(meet == phi_ab);
  CHECK(Rational(static_cast<std::int64_t>(phi_a.size()), e.target_n()) == measure(a));

  MSubset c(r.space(), {2, 3});
  std::vector<int> phi_c = reconstruct_measure_algebra(theta, c);
  std::vector<int> disj;
  std::set_intersection(phi_a.begin(), phi_a.end(), phi_c.begin(), phi_c.end(),
                        std::back_inserter(disj));
  CHECK(disj.empty());

  for (int i = 0; i < 20; ++i) {
    LocalIso g = random_local_iso(rng, r, /*full_domain=*/true);
    MSubset ga = perm_action(g.map(), a);
    CHECK(reconstruct_measure_algebra(theta, ga) == perm_action(e.image(g), phi_a));
  }
}

TEST_CASE("supp/Fix lemma under exact embeddings") {
  Rng rng(191);
  for (int run = 0; run < 30; ++run) {
    FiniteRelation r = random_relation(rng, {4, 10, 5, 2});
    ExactEmbedding e(r);
    MSubset a = random_admissible_subset(rng, r);
    MSubset comp = a.complement();
    bool comp_ok = true;
    for (const auto& cls : r.classes()) {
      int hit = 0;
      for (int x : cls) hit += comp.contains(x);
      comp_ok = comp_ok && hit != 1;
    }
    if (!comp_ok) continue;
    LocalIso g = support_element(r, a);
    LocalIso h = support_element(r, comp);  // Fix h = A = supp g
    CHECK(parts(e.image(g)).supp == parts(e.image(h)).fix);
  }
}

TEST_CASE("disjoint supports transfer exactly both ways") {
  Rng rng(193);
  for (int run = 0; run < 60; ++run) {
    FiniteRelation r = random_relation(rng, {4, 10, 5, 2});
    ExactEmbedding e(r);
    LocalIso f = random_local_iso(rng, r, true);
    LocalIso g = random_local_iso(rng, r, true);
    LocalIso one = LocalIso::identity(r);
    bool src_disjoint = metric_mu(f, g) == metric_mu(one, f) + metric_mu(one, g);
    PartialBijection tf = e.image(f), tg = e.image(g);
    PartialBijection tid = PartialBijection::identity(e.target_n());
    bool dst_disjoint = hamming_distance(tf, tg) ==
                        hamming_distance(tid, tf) + hamming_distance(tid, tg);
    CHECK(src_disjoint == dst_disjoint);
  }
}

TEST_CASE("trim_periodic with empty periodic part is the identity") {
  FiniteRelation r = FiniteRelation::full(WeightedSpace::uniform(3));
  ExactEmbedding e(r);
  std::vector<LocalIso> k{support_element(r, MSubset::full(r.space()))};
  AlmostMorphism trimmed = trim_periodic(oracle_from(e), MSubset::empty(r.space()), k);
  CHECK(trimmed.target_n() == e.target_n());
  CHECK(trimmed.image_of(k[0]) == e.image(k[0]));
}

TEST_CASE("trim_periodic removes one periodic class exactly") {
  FiniteRelation r = quarter_relation();  // classes {a,b} and {c}, weights 1/4,1/4,1/2
  ExactEmbedding e(r);
  MSubset p(r.space(), {0, 1});
  MSubset aper = p.complement();
  FiniteRelation r_aper = restrict_relation(r, aper);
  std::vector<LocalIso> k{LocalIso::identity(r_aper)};
  AlmostMorphism eta = trim_periodic(oracle_from(e), p, k);
  CHECK(eta.target_n() == 2);
  CHECK(eta.image_of(k[0]) == PartialBijection::identity(2));
  // quotient trace relation on the identity: (1 - mu(P)) / mu(Aper) = 1
  Rational mu_p = measure(p);
  CHECK((Rational(1) - mu_p) / (Rational(1) - mu_p) == Rational(1));
}

TEST_CASE("trim_periodic quotient trace formula on random instances") {
  Rng rng(197);
  int done = 0;
  while (done < 30) {
    FiniteRelation r = random_relation(rng, {4, 9, 5, 1});
    // P = union of the classes of size >= 2, skipping trivial cases
    MSubset p = periodic_part_ge2(r);
    if (p.members().empty() || p.complement().members().empty()) continue;
    ++done;
    ExactEmbedding e(r);
    MSubset aper = p.complement();
    FiniteRelation r_aper = restrict_relation(r, aper);
    std::vector<LocalIso> k = sample_carrier(rng, r_aper, 4, /*full_domain=*/true);
    AlmostMorphism eta = trim_periodic(oracle_from(e), p, k);
    DefectReport rep = defect(eta);
    CHECK(rep.eps_mult == Rational(0));
    CHECK(rep.eps_trace == Rational(0));
    LocalIso alpha = support_element(r, p);
    Rational ak_frac(static_cast<std::int64_t>(parts(e.image(alpha)).supp.size()),
                     e.target_n());
    for (const auto& f : k) {
      // source side: tr_{Aper}(f) = (tr f~ - mu(P)) / mu(Aper)
      std::vector<int> m(static_cast<std::size_t>(r.atom_count()));
      for (int x = 0; x < r.atom_count(); ++x) m[static_cast<std::size_t>(x)] = x;
      for (int i = 0; i < f.map().n(); ++i)
        m[static_cast<std::size_t>(aper.members()[static_cast<std::size_t>(i)])] =
            aper.members()[static_cast<std::size_t>(f.map()[i])];
      LocalIso f_tilde(r, PartialBijection(r.atom_count(), std::move(m)));
      CHECK(trace_mu(f) == (trace_mu(f_tilde) - measure(p)) / measure(aper));
      // target side with #A_k/n_k in place of mu(P)
      CHECK(trace(eta.image_of(f)) ==
            (trace(e.image(f_tilde)) - ak_frac) / (Rational(1) - ak_frac));
    }
  }
}

TEST_CASE("trim_periodic error paths") {
  WeightedSpace u = WeightedSpace::uniform(3);
  FiniteRelation r = make_relation(u, {{0, 1}, {2}});
  ExactEmbedding e(r);
  CHECK_THROWS_AS(trim_periodic(oracle_from(e), MSubset(u, {2}), {}), NoSupportWitness);
  CHECK_THROWS_AS(trim_periodic(oracle_from(e), MSubset(u, {0}), {}), NoSupportWitness);
}
