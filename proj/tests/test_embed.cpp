#include <doctest.h>

#include "sofickit/combinators.hpp"
#include "sofickit/embed.hpp"
#include "sofickit/oracle.hpp"
#include "sofickit/sampling.hpp"

using namespace sofickit;

namespace {

FiniteRelation quarter_relation() {
  WeightedSpace s({"a", "b", "c"}, {Rational(1, 4), Rational(1, 4), Rational(1, 2)});
  return make_relation(s, {{0, 1}, {2}});
}

}  // namespace

TEST_CASE("exact embedding on uniform weights is the identity replication") {
  FiniteRelation r = FiniteRelation::full(WeightedSpace::uniform(4));
  ExactEmbedding e(r);
  CHECK(e.target_n() == 4);
  Rng rng(61);
  for (int i = 0; i < 50; ++i) {
    LocalIso g = random_local_iso(rng, r);
    CHECK(e.image(g) == g.map());
  }
}

TEST_CASE("exact embedding replication example") {
  FiniteRelation r = quarter_relation();
  ExactEmbedding e(r);
  CHECK(e.target_n() == 4);
  CHECK(e.block(0) == std::vector<int>{0});
  CHECK(e.block(2) == std::vector<int>{2, 3});
  LocalIso swap(r, PartialBijection::from_pairs(3, {{0, 1}, {1, 0}}));
  CHECK(e.image(swap) == PartialBijection::from_pairs(4, {{0, 1}, {1, 0}}));
  CHECK(trace(e.image(swap)) == Rational(0));
  CHECK(trace_mu(swap) == Rational(0));
}

TEST_CASE("exact embedding is multiplicative and isometric") {
  Rng rng(67);
  for (int i = 0; i < 60; ++i) {
    FiniteRelation r = random_relation(rng);
    ExactEmbedding e(r);
    LocalIso f = random_local_iso(rng, r);
    LocalIso g = random_local_iso(rng, r);
    CHECK(e.image(compose(f, g)) == compose(e.image(f), e.image(g)));
    CHECK(trace(e.image(f)) == trace_mu(f));
    CHECK(hamming_distance(e.image(f), e.image(g)) == metric_mu(f, g));
  }
}

TEST_CASE("exact embedding is a morphism on an entire small full semigroup") {
  FiniteRelation r = quarter_relation();
  ExactEmbedding e(r);
  std::vector<LocalIso> all;
  for_each_full_semigroup(r, [&](const LocalIso& g) { all.push_back(g); });
  REQUIRE(all.size() == 7 * 2);  // one 2-class, one singleton
  for (const auto& f : all) {
    CHECK(trace(e.image(f)) == trace_mu(f));
    for (const auto& g : all) {
      CHECK(e.image(compose(f, g)) == compose(e.image(f), e.image(g)));
      CHECK(hamming_distance(e.image(f), e.image(g)) == metric_mu(f, g));
    }
  }
}

TEST_CASE("defect of an exact embedding is zero") {
  Rng rng(71);
  FiniteRelation r = random_relation(rng);
  AlmostMorphism m = exact_embedding(r, sample_carrier(rng, r, 12));
  DefectReport rep = defect(m);
  CHECK(rep.eps_mult == Rational(0));
  CHECK(rep.eps_trace == Rational(0));
}

TEST_CASE("defect requires product entries") {
  FiniteRelation r = quarter_relation();
  ExactEmbedding e(r);
  LocalIso swap(r, PartialBijection::from_pairs(3, {{0, 1}, {1, 0}}));
  // swap*swap = 1_{a,b} has no table entry here
  AlmostMorphism m(r, e.target_n(), {{swap, e.image(swap)}});
  CHECK_THROWS_AS(defect(m), MissingImage);
}

TEST_CASE("perturb determinism and trivial delta") {
  Rng rng(73);
  FiniteRelation r = random_relation(rng);
  AlmostMorphism base = exact_embedding(r, sample_carrier(rng, r, 6));
  // make sure floor(delta * N) >= 2 so the perturbation actually acts
  AlmostMorphism m = inflate(base, (40 + base.target_n() - 1) / base.target_n());
  AlmostMorphism same = perturb(m, Rational(0), 99);
  for (std::size_t i = 0; i < m.entries().size(); ++i)
    CHECK(same.entry(i).image == m.entry(i).image);
  AlmostMorphism p1 = perturb(m, Rational(1, 10), 5);
  AlmostMorphism p2 = perturb(m, Rational(1, 10), 5);
  AlmostMorphism p3 = perturb(m, Rational(1, 10), 6);
  bool all_equal = true, any_diff_seed = false;
  for (std::size_t i = 0; i < m.entries().size(); ++i) {
    all_equal = all_equal && p1.entry(i).image == p2.entry(i).image;
    any_diff_seed = any_diff_seed || p1.entry(i).image != p3.entry(i).image;
  }
  CHECK(all_equal);
  CHECK(any_diff_seed);
}

TEST_CASE("perturb keeps condition (i) and the defect budget") {
  Rng rng(79);
  for (int run = 0; run < 20; ++run) {
    FiniteRelation r = random_relation(rng);
    AlmostMorphism m = exact_embedding(r, sample_carrier(rng, r, 8));
    Rational delta(1, static_cast<std::int64_t>(rng.range(4, 30)));
    AlmostMorphism p = perturb(m, delta, rng.next());
    CHECK(p.entry(0).image == PartialBijection::identity(p.target_n()));
    CHECK(p.entry(1).image == PartialBijection::empty(p.target_n()));
    DefectReport rep = defect(p);
    CHECK(rep.eps_mult <= Rational(3) * delta);
    CHECK(rep.eps_trace <= delta);
  }
}

TEST_CASE("isometry gap: zero when exact, within budget when perturbed") {
  Rng rng(83);
  FiniteRelation r = random_relation(rng);
  std::vector<LocalIso> k = sample_carrier(rng, r, 6);
  // close under inverses and products so the four-trace expressions have images
  std::vector<LocalIso> closed = semigroup_closure(r, inverse_closure(k), 3000);
  AlmostMorphism m = exact_embedding(r, closed);
  CHECK(isometry_gap(m) == Rational(0));

  AlmostMorphism only_one = exact_embedding(r, {});
  CHECK(isometry_gap(only_one) == Rational(0));

  AlmostMorphism p = perturb(m, Rational(1, 100), 17);
  DefectReport rep = defect(p);
  CHECK(isometry_gap(p) <= Rational(4) * rep.eps_trace + Rational(3) * rep.eps_mult);
}

TEST_CASE("alt embedding matches the metric and trace profile exactly") {
  Rng rng(89);
  for (int run = 0; run < 25; ++run) {
    FiniteRelation r = random_relation(rng);
    ExactEmbedding e(r);
    AltEmbedding alt(r);
    std::vector<LocalIso> k = sample_carrier(rng, r, 10);
    for (const auto& f : k) CHECK(trace(alt.image(f)) == trace(e.image(f)));
    for (std::size_t i = 0; i < k.size(); ++i)
      for (std::size_t j = i + 1; j < k.size(); ++j)
        CHECK(hamming_distance(alt.image(k[i]), alt.image(k[j])) ==
              hamming_distance(e.image(k[i]), e.image(k[j])));
  }
}

TEST_CASE("alt embedding differs as raw maps") {
  FiniteRelation r = quarter_relation();
  ExactEmbedding e(r);
  AltEmbedding alt(r);
  LocalIso move2(r, PartialBijection::from_pairs(3, {{2, 2}}));
  LocalIso swap(r, PartialBijection::from_pairs(3, {{0, 1}, {1, 0}}));
  CHECK((alt.image(move2) != e.image(move2) || alt.image(swap) != e.image(swap)));
}

TEST_CASE("covariant lemma holds with equality for exact pairs") {
  Rng rng(97);
  for (int run = 0; run < 30; ++run) {
    FiniteRelation r = random_relation(rng);
    ExactEmbedding e(r);
    LocalIso g = random_local_iso(rng, r, /*full_domain=*/true);
    PartialBijection sigma = e.image(g);
    MSubset a = random_subset(rng, r.space());
    PartialBijection one_phi_a =
        PartialBijection::partial_identity(e.target_n(), e.block_of_set(a));
    LocalIso one_a = LocalIso::indicator(r, a);
    CHECK(trace(compose(sigma, one_phi_a)) == trace_mu(compose(g, one_a)));
  }
}

TEST_CASE("free actions force trace preservation on any covariant pair") {
  Rng rng(101);
  for (int run = 0; run < 25; ++run) {
    int cycle = static_cast<int>(rng.range(2, 4));
    int orbits = static_cast<int>(rng.range(1, 3));
    FiniteRelation r = free_cyclic_relation(orbits, cycle);
    LocalIso gen = free_cyclic_generator(r, cycle);
    ExactEmbedding e(r);
    std::vector<LocalIso> group;
    std::vector<PartialBijection> theta;
    LocalIso power = LocalIso::identity(r);
    for (int t = 0; t < cycle; ++t) {
      group.push_back(power);
      // scramble each image inside the phi-blocks; covariance is untouched
      PartialBijection im = e.image(power);
      if (t > 0) {
        std::vector<int> rho(static_cast<std::size_t>(e.target_n()));
        for (int q = 0; q < e.target_n(); ++q) rho[static_cast<std::size_t>(q)] = q;
        for (int x = 0; x < r.atom_count(); ++x) {
          std::vector<int> blk = e.block(x);
          std::vector<int> perm = blk;
          rng.shuffle(perm);
          for (std::size_t i = 0; i < blk.size(); ++i)
            rho[static_cast<std::size_t>(blk[i])] = perm[i];
        }
        im = compose(im, PartialBijection(e.target_n(), std::move(rho)));
      }
      theta.push_back(im);
      power = compose(gen, power);
    }
    std::vector<std::vector<int>> phi_atom;
    for (int x = 0; x < r.atom_count(); ++x) phi_atom.push_back(e.block(x));
    CovariantPair cp(r, e.target_n(), group, theta, phi_atom);
    for (std::size_t t = 0; t < cp.group_size(); ++t)
      CHECK(trace(cp.theta(t)) == trace_mu(cp.group_element(t)));
  }
}

TEST_CASE("non-free actions admit a strict covariant witness") {
  // g = 1_X with a nontrivial block-preserving sigma: covariance holds for
  // every A while tr sigma < tr g.
  FiniteRelation r = quarter_relation();
  ExactEmbedding e(r);
  // swap the two copies of the heavy atom
  PartialBijection sigma = PartialBijection::from_pairs(4, {{0, 0}, {1, 1}, {2, 3}, {3, 2}});
  for (int mask = 0; mask < 8; ++mask) {
    std::vector<int> members;
    for (int x = 0; x < 3; ++x)
      if (mask & (1 << x)) members.push_back(x);
    MSubset a(r.space(), members);
    std::vector<int> phi_a = e.block_of_set(a);
    CHECK(perm_action(sigma, phi_a) == phi_a);  // covariance for g = 1_X
    PartialBijection one_phi_a = PartialBijection::partial_identity(4, phi_a);
    LocalIso one_a = LocalIso::indicator(r, a);
    CHECK(trace(compose(sigma, one_phi_a)) <=
          trace_mu(compose(LocalIso::identity(r), one_a)));
  }
  CHECK(trace(sigma) < trace_mu(LocalIso::identity(r)));
  CHECK(trace(sigma) == Rational(1, 2));
}
