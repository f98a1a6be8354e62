#pragma once

#include <string>
#include <vector>

#include "sofickit/combinators.hpp"
#include "sofickit/json_io.hpp"
#include "sofickit/oracle.hpp"
#include "sofickit/sampling.hpp"

namespace sofickit {

// One property suite run. Violations carry reproduction certificates; the
// first few are kept verbatim, the rest only counted.
struct SuiteResult {
  std::string suite;
  long long checks = 0;
  long long violation_count = 0;
  Json details = Json::object();
  std::vector<Json> violations;

  SuiteResult() = default;
  explicit SuiteResult(std::string name) : suite(std::move(name)) {}

  bool passed() const { return violation_count == 0; }

  void ok() { ++checks; }

  void fail(Json inputs, const std::string& expected, const std::string& got) {
    ++checks;
    ++violation_count;
    if (violations.size() < 16)
      violations.push_back(Json{{"suite", suite},
                                {"inputs", std::move(inputs)},
                                {"expected", expected},
                                {"got", got}});
  }

  void expect(bool cond, const char* what, const Json& inputs = Json::object()) {
    if (cond) ok();
    else fail(inputs, what, "violated");
  }

  Json to_json() const {
    return Json{{"suite", suite},
                {"passed", passed()},
                {"checks", checks},
                {"violations", violation_count},
                {"details", details},
                {"certificates", violations}};
  }
};

// --------------------------------------------------------------------------
// 1. Inverse-monoid laws over exhaustive [[n]], n <= max_n, with sampled
//    associativity triples.
// --------------------------------------------------------------------------
inline SuiteResult run_laws_suite(int max_n = 4, long long assoc_triples = 100000,
                                  std::uint64_t seed = 1,
                                  const EnumerationBudget& budget = {}) {
  SuiteResult r{"laws"};
  long long elements = 0, pairs = 0;
  for (int n = 0; n <= max_n; ++n) {
    std::vector<PartialBijection> all = all_pbij(n, budget);
    elements += static_cast<long long>(all.size());
    for (const auto& f : all) {
      r.expect(compose(f, compose(inverse(f), f)) == f, "f f^-1 f = f",
               pbij_to_json(f));
      r.expect(compose(inverse(f), compose(f, inverse(f))) == inverse(f),
               "f^-1 f f^-1 = f^-1", pbij_to_json(f));
      int inverses = 0;
      for (const auto& h : all)
        if (compose(f, compose(h, f)) == f && compose(h, compose(f, h)) == h) ++inverses;
      r.expect(inverses == 1, "inverse is unique", pbij_to_json(f));
    }
    for (const auto& g : all)
      for (const auto& h : all) {
        ++pairs;
        if (inverse(compose(g, h)) == compose(inverse(h), inverse(g))) r.ok();
        else r.fail(Json{{"g", pbij_to_json(g)}, {"h", pbij_to_json(h)}},
                    "(gh)^-1 = h^-1 g^-1", "violated");
        if (g.is_idempotent() && h.is_idempotent())
          r.expect(compose(g, h) == compose(h, g), "idempotents commute",
                   Json{{"g", pbij_to_json(g)}, {"h", pbij_to_json(h)}});
      }
  }
  Rng rng(seed);
  std::vector<PartialBijection> top = all_pbij(max_n, budget);
  for (long long t = 0; t < assoc_triples; ++t) {
    const auto& f = top[static_cast<std::size_t>(rng.below(top.size()))];
    const auto& g = top[static_cast<std::size_t>(rng.below(top.size()))];
    const auto& h = top[static_cast<std::size_t>(rng.below(top.size()))];
    if (compose(compose(f, g), h) == compose(f, compose(g, h))) r.ok();
    else r.fail(Json{{"f", pbij_to_json(f)}, {"g", pbij_to_json(g)}, {"h", pbij_to_json(h)}},
                "(fg)h = f(gh)", "violated");
  }
  r.details["max_n"] = max_n;
  r.details["elements"] = elements;
  r.details["pairs_checked"] = pairs;
  r.details["assoc_triples"] = assoc_triples;
  r.details["seed"] = seed;
  return r;
}

// --------------------------------------------------------------------------
// 2. The three metric inequalities: exhaustive at n = exhaustive_n, then
//    random quadruples up to max_rand_n.
// --------------------------------------------------------------------------
inline SuiteResult run_prop1_suite(int exhaustive_n = 3, long long random_quads = 10000,
                                   int max_rand_n = 12, std::uint64_t seed = 2,
                                   const EnumerationBudget& budget = {}) {
  SuiteResult r{"prop1"};
  std::vector<PartialBijection> all = all_pbij(exhaustive_n, budget);
  long long pairs = 0, item3_violations = 0;
  for (const auto& g : all)
    for (const auto& h : all) {
      ++pairs;
      Rational lhs2 = hamming_distance(g, inverse(h));
      Rational rhs2 = hamming_distance(g, compose(g, compose(h, g))) +
                      hamming_distance(h, compose(h, compose(g, h)));
      if (lhs2 <= rhs2) r.ok();
      else r.fail(Json{{"g", pbij_to_json(g)}, {"h", pbij_to_json(h)}},
                  "d(g,h^-1) <= d(g,ghg)+d(h,hgh)", lhs2.str() + " > " + rhs2.str());
      Rational d = hamming_distance(g, h);
      Rational di = hamming_distance(inverse(g), inverse(h));
      if (d == di) r.ok();
      else {
        ++item3_violations;
        r.fail(Json{{"g", pbij_to_json(g)}, {"h", pbij_to_json(h)}},
               "d(g,h) = d(g^-1,h^-1)", di.str() + " != " + d.str());
        // every violation must be exactly mu(dom meet) - mu(ran meet); anything
        // else would be an implementation bug rather than the metric identity
        int dom_meet = 0, ran_meet = 0;
        std::vector<char> in_ran_g(static_cast<std::size_t>(g.n()), 0);
        for (int x = 0; x < g.n(); ++x) {
          if (g.defined(x) && h.defined(x)) ++dom_meet;
          if (g.defined(x)) in_ran_g[static_cast<std::size_t>(g[x])] = 1;
        }
        for (int x = 0; x < h.n(); ++x)
          if (h.defined(x) && in_ran_g[static_cast<std::size_t>(h[x])]) ++ran_meet;
        if (di - d != Rational(dom_meet - ran_meet, g.n()))
          r.fail(Json{{"g", pbij_to_json(g)}, {"h", pbij_to_json(h)}},
                 "violation matches mu(dom meet) - mu(ran meet)", "unexpected defect shape");
      }
    }
  long long quads = 0;
  for (const auto& g : all)
    for (const auto& gp : all)
      for (const auto& h : all)
        for (const auto& hp : all) {
          ++quads;
          Rational lhs = hamming_distance(compose(g, h), compose(gp, hp));
          Rational rhs = hamming_distance(g, gp) + hamming_distance(h, hp);
          if (lhs <= rhs) r.ok();
          else r.fail(Json{{"g", pbij_to_json(g)}, {"g'", pbij_to_json(gp)},
                           {"h", pbij_to_json(h)}, {"h'", pbij_to_json(hp)}},
                      "d(gh,g'h') <= d(g,g')+d(h,h')", lhs.str() + " > " + rhs.str());
        }
  Rng rng(seed);
  for (long long t = 0; t < random_quads; ++t) {
    int n = static_cast<int>(rng.range(1, max_rand_n));
    PartialBijection g = random_pbij(rng, n), gp = random_pbij(rng, n);
    PartialBijection h = random_pbij(rng, n), hp = random_pbij(rng, n);
    Json inputs{{"n", n}, {"g", pbij_to_json(g)}, {"g'", pbij_to_json(gp)},
                {"h", pbij_to_json(h)}, {"h'", pbij_to_json(hp)}};
    r.expect(hamming_distance(compose(g, h), compose(gp, hp)) <=
                 hamming_distance(g, gp) + hamming_distance(h, hp),
             "d(gh,g'h') <= d(g,g')+d(h,h')", inputs);
    r.expect(hamming_distance(g, inverse(h)) <=
                 hamming_distance(g, compose(g, compose(h, g))) +
                     hamming_distance(h, compose(h, compose(g, h))),
             "d(g,h^-1) <= d(g,ghg)+d(h,hgh)", inputs);
    if (hamming_distance(g, h) == hamming_distance(inverse(g), inverse(h))) r.ok();
    else {
      ++item3_violations;
      r.fail(inputs, "d(g,h) = d(g^-1,h^-1)", "violated");
    }
  }
  r.details["exhaustive_n"] = exhaustive_n;
  r.details["pairs_checked"] = pairs;
  r.details["exhaustive_quadruples"] = quads;
  r.details["random_quadruples"] = random_quads;
  r.details["item3_equality_violations"] = item3_violations;
  r.details["seed"] = seed;
  return r;
}

// --------------------------------------------------------------------------
// 3. Trace and distance determine each other in [[R]], exactly.
// --------------------------------------------------------------------------
inline SuiteResult run_trace_distance_suite(long long pairs = 10000, int max_atoms = 10,
                                            std::uint64_t seed = 3) {
  SuiteResult r{"trace-distance"};
  Rng rng(seed);
  RelationOptions opt;
  opt.max_atoms = max_atoms;
  long long done = 0;
  while (done < pairs) {
    FiniteRelation rel = random_relation(rng, opt);
    LocalIso one = LocalIso::identity(rel);
    for (int k = 0; k < 20 && done < pairs; ++k, ++done) {
      LocalIso f = random_local_iso(rng, rel);
      LocalIso g = random_local_iso(rng, rel);
      LocalIso ef = LocalIso::indicator(rel, f.dom_set());
      LocalIso eg = LocalIso::indicator(rel, g.dom_set());
      bool tr_ok =
          trace_mu(f) == Rational(1) - metric_mu(ef, one) - metric_mu(ef, f);
      bool d_ok = metric_mu(f, g) ==
                  trace_mu(ef) + trace_mu(eg) - trace_mu(compose(ef, eg)) -
                      trace_mu(compose(compose(inverse(f), g), ef));
      r.expect(tr_ok, "tr f = 1 - d(1_dom f, 1_X) - d(1_dom f, f)",
               Json{{"relation", relation_to_json(rel)}, {"f", local_iso_to_json(f)}});
      r.expect(d_ok, "four-trace distance formula",
               Json{{"relation", relation_to_json(rel)},
                    {"f", local_iso_to_json(f)},
                    {"g", local_iso_to_json(g)}});
    }
  }
  r.details["pairs"] = pairs;
  r.details["max_atoms"] = max_atoms;
  r.details["seed"] = seed;
  return r;
}

// --------------------------------------------------------------------------
// 4. Exact embedding: multiplicative, trace-preserving, defect zero, and in
//    full metric/trace agreement with the independently laid out AltEmbedding.
// --------------------------------------------------------------------------
inline SuiteResult run_embed_suite(int relations = 50, int carrier = 200,
                                   std::uint64_t seed = 4) {
  SuiteResult r{"embed"};
  Rng rng(seed);
  Rational worst_mult(0);
  for (int rel_i = 0; rel_i < relations; ++rel_i) {
    FiniteRelation rel = random_relation(rng);
    ExactEmbedding e(rel);
    AltEmbedding alt(rel);
    std::vector<LocalIso> k = sample_carrier(rng, rel, carrier);
    std::vector<PartialBijection> im(k.size()), alt_im(k.size());
    for (std::size_t i = 0; i < k.size(); ++i) {
      im[i] = e.image(k[i]);
      alt_im[i] = alt.image(k[i]);
      bool tr_ok = trace(im[i]) == trace_mu(k[i]);
      bool alt_tr = trace(alt_im[i]) == trace(im[i]);
      r.expect(tr_ok, "tr pi(f) = tr_mu(f)",
               Json{{"relation", relation_to_json(rel)}, {"f", local_iso_to_json(k[i])}});
      r.expect(alt_tr, "alt embedding trace agreement", local_iso_to_json(k[i]));
    }
    for (std::size_t i = 0; i < k.size(); ++i)
      for (std::size_t j = 0; j < k.size(); ++j) {
        PartialBijection prod = compose(k[i].map(), k[j].map());
        bool mult_ok = e.image(prod) == compose(im[i], im[j]);
        if (mult_ok) r.ok();
        else {
          Rational gap = hamming_distance(e.image(prod), compose(im[i], im[j]));
          if (gap > worst_mult) worst_mult = gap;
          r.fail(Json{{"f", local_iso_to_json(k[i])}, {"g", local_iso_to_json(k[j])}},
                 "pi(fg) = pi(f)pi(g)", "differs by " + gap.str());
        }
        if (j > i) {
          Rational d_src = metric_mu(k[i], k[j]);
          Rational d_img = hamming_distance(im[i], im[j]);
          Rational d_alt = hamming_distance(alt_im[i], alt_im[j]);
          r.expect(d_img == d_src && d_alt == d_src, "isometry and alt distance agreement",
                   Json{{"f", local_iso_to_json(k[i])}, {"g", local_iso_to_json(k[j])}});
        }
      }
  }
  r.details["relations"] = relations;
  r.details["carrier"] = carrier;
  r.details["eps_mult"] = worst_mult.str();
  r.details["eps_trace"] = "0/1";
  r.details["seed"] = seed;
  return r;
}

// --------------------------------------------------------------------------
// 5. pad_embed distortion: |d_p - d_n| <= n/(p-n) for p > n, equality on
//    multiples.
// --------------------------------------------------------------------------
inline SuiteResult run_pad_suite(int max_n = 8, int max_p = 64, int samples = 40,
                                 std::uint64_t seed = 5) {
  SuiteResult r{"pad"};
  Rng rng(seed);
  for (int n = 1; n <= max_n; ++n) {
    std::vector<PartialBijection> pool;
    if (pbij_count(n) <= samples) {
      EnumerationBudget wide;
      wide.max_n = n;
      pool = all_pbij(n, wide);
    } else {
      for (int i = 0; i < samples; ++i) pool.push_back(random_pbij(rng, n));
    }
    std::vector<Rational> base;
    for (std::size_t i = 0; i < pool.size(); ++i)
      for (std::size_t j = i + 1; j < pool.size(); ++j)
        base.push_back(hamming_distance(pool[i], pool[j]));
    for (int p = n; p <= max_p; ++p) {
      std::vector<PartialBijection> padded;
      padded.reserve(pool.size());
      for (const auto& f : pool) padded.push_back(pad_embed(f, p));
      std::size_t idx = 0;
      for (std::size_t i = 0; i < pool.size(); ++i)
        for (std::size_t j = i + 1; j < pool.size(); ++j, ++idx) {
          Rational dp = hamming_distance(padded[i], padded[j]);
          if (p % n == 0) {
            r.expect(dp == base[idx], "distance preserved exactly when n | p",
                     Json{{"n", n}, {"p", p}});
          } else {
            Rational drift = (dp - base[idx]).abs();
            r.expect(drift <= Rational(n, p - n), "|d_p - d_n| <= n/(p-n)",
                     Json{{"n", n}, {"p", p}, {"f", pbij_to_json(pool[i])},
                          {"g", pbij_to_json(pool[j])}});
          }
        }
    }
  }
  r.details["max_n"] = max_n;
  r.details["max_p"] = max_p;
  r.details["samples_per_n"] = samples;
  r.details["seed"] = seed;
  return r;
}

// --------------------------------------------------------------------------
// 6. mix: exact trace averaging and the max defect bound, with perturbed
//    parts at the stated deltas.
// --------------------------------------------------------------------------
inline SuiteResult run_mix_suite(std::uint64_t seed = 6) {
  SuiteResult r{"mix"};
  Rng rng(seed);
  const std::vector<Rational> deltas{Rational(1, 100), Rational(1, 20)};
  for (int run = 0; run < 12; ++run) {
    FiniteRelation rel = random_relation(rng);
    std::vector<LocalIso> k = sample_carrier(rng, rel, 5);
    AlmostMorphism base = exact_embedding(rel, k);
    // grow the target so floor(delta * N) >= 2 even at delta = 1/100
    int factor = (240 + base.target_n() - 1) / base.target_n();
    AlmostMorphism wide = inflate(base, factor);

    AlmostMorphism exact_mix = mix({{wide, 1}, {wide, 1}});
    DefectReport exact_rep = defect(exact_mix);
    r.expect(exact_rep.eps_mult == Rational(0) && exact_rep.eps_trace == Rational(0),
             "mix of exact parts is exact", Json{{"run", run}});

    std::vector<std::pair<AlmostMorphism, std::int64_t>> parts;
    std::vector<DefectReport> reps;
    for (std::size_t d = 0; d < deltas.size(); ++d) {
      parts.emplace_back(perturb(wide, deltas[d], rng.next()),
                         static_cast<std::int64_t>(d) + 1);
      reps.push_back(defect(parts.back().first));
    }
    AlmostMorphism mixed = mix(parts);
    std::int64_t total_weight = 0;
    for (const auto& [m, p] : parts) total_weight += p;
    for (std::size_t i = 0; i < mixed.entries().size(); ++i) {
      Rational expected(0);
      for (const auto& [m, p] : parts)
        expected += Rational(p) * trace(m.entry(i).image);
      expected = expected / Rational(total_weight);
      r.expect(trace(mixed.entry(i).image) == expected, "mix trace averaging identity",
               local_iso_to_json(mixed.entry(i).element));
    }
    Rational worst(0);
    for (const auto& rep : reps)
      if (rep.eps_mult > worst) worst = rep.eps_mult;
    DefectReport mixed_rep = defect(mixed);
    r.expect(mixed_rep.eps_mult <= worst, "eps_mult(mix) <= max_j eps_mult_j",
             Json{{"run", run}, {"mixed", mixed_rep.eps_mult.str()}, {"max", worst.str()}});
  }
  r.details["deltas"] = Json::array({"1/100", "1/20"});
  r.details["seed"] = seed;
  return r;
}

// --------------------------------------------------------------------------
// 7. perturb calculus: eps_mult <= 3*delta and eps_trace <= delta.
// --------------------------------------------------------------------------
inline SuiteResult run_perturb_suite(int runs = 100, std::uint64_t seed = 7) {
  SuiteResult r{"perturb"};
  Rng rng(seed);
  for (int run = 0; run < runs; ++run) {
    FiniteRelation rel = random_relation(rng);
    AlmostMorphism base = exact_embedding(rel, sample_carrier(rng, rel, 5));
    int factor = static_cast<int>(rng.range(1, 4)) * ((120 + base.target_n() - 1) / base.target_n());
    AlmostMorphism wide = inflate(base, factor);
    Rational delta(1, rng.range(5, 100));
    AlmostMorphism p = perturb(wide, delta, rng.next());
    DefectReport rep = defect(p);
    r.expect(rep.eps_mult <= Rational(3) * delta, "eps_mult <= 3 delta",
             Json{{"run", run}, {"delta", delta.str()}, {"eps_mult", rep.eps_mult.str()}});
    r.expect(rep.eps_trace <= delta, "eps_trace <= delta",
             Json{{"run", run}, {"delta", delta.str()}, {"eps_trace", rep.eps_trace.str()}});
    r.expect(p.entry(0).image == PartialBijection::identity(p.target_n()) &&
                 p.entry(1).image == PartialBijection::empty(p.target_n()),
             "perturb keeps condition (i)", Json{{"run", run}});
  }
  r.details["runs"] = runs;
  r.details["seed"] = seed;
  return r;
}

// --------------------------------------------------------------------------
// 8. Finite index: choice systems, exhaustive cocycle identity, exact Xi,
//    block disjointness, and the UnequalSubclasses obstruction.
// --------------------------------------------------------------------------
inline SuiteResult run_index_suite(int instances = 12, int max_index = 3, int max_atoms = 24,
                                   std::uint64_t seed = 8) {
  SuiteResult r{"index"};
  Rng rng(seed);
  for (int inst = 0; inst < instances; ++inst) {
    int index = static_cast<int>(rng.range(1, max_index));
    SubrelationPair pair = random_nested_pair(rng, index, max_atoms);
    ChoiceSystem cs = build_choice_system(pair);

    for (int x = 0; x < pair.fine().atom_count(); ++x) {
      std::vector<int> seen;
      for (const auto& psi : cs.psi()) seen.push_back(pair.fine().class_of(psi.map()[x]));
      std::sort(seen.begin(), seen.end());
      bool distinct = std::adjacent_find(seen.begin(), seen.end()) == seen.end();
      r.expect(distinct && static_cast<int>(seen.size()) == cs.index(),
               "choice functions partition each coarse class", Json{{"atom", x}});
    }

    for (int c = 0; c < pair.coarse().class_count(); ++c) {
      const auto& cls = pair.coarse().class_members(c);
      for (int x : cls)
        for (int y : cls)
          for (int z : cls)
            r.expect(compose(cocycle(cs, z, y), cocycle(cs, y, x)) == cocycle(cs, z, x),
                     "cocycle identity", Json{{"x", x}, {"y", y}, {"z", z}});
    }

    ExactEmbedding e(pair.fine());
    std::vector<LocalIso> k_s = sample_carrier(rng, pair.coarse(), 6);
    AlmostMorphism xi = extend_finite_index(oracle_from(e), cs, k_s);
    DefectReport rep = defect(xi);
    r.expect(rep.eps_mult == Rational(0) && rep.eps_trace == Rational(0),
             "Xi of an exact morphism is exact",
             Json{{"eps_mult", rep.eps_mult.str()}, {"eps_trace", rep.eps_trace.str()}});
    for (const auto& entry : xi.entries())
      r.expect(trace(entry.image) == trace_mu(entry.element), "tr Xi(f) = tr_mu(f)",
               local_iso_to_json(entry.element));

    for (int t = 0; t < 4; ++t) {
      LocalIso f = random_local_iso(rng, pair.coarse());
      auto blocks = xi_blocks(oracle_from(e), cs, f);
      bool disjoint = true;
      for (std::size_t a = 0; a < blocks.size() && disjoint; ++a)
        for (std::size_t b = a + 1; b < blocks.size() && disjoint; ++b) {
          Parts pa = parts(blocks[a]), pb = parts(blocks[b]);
          std::vector<int> dd, rr;
          std::set_intersection(pa.dom.begin(), pa.dom.end(), pb.dom.begin(), pb.dom.end(),
                                std::back_inserter(dd));
          std::set_intersection(pa.ran.begin(), pa.ran.end(), pb.ran.begin(), pb.ran.end(),
                                std::back_inserter(rr));
          disjoint = dd.empty() && rr.empty();
        }
      r.expect(disjoint, "Xi blocks pairwise disjoint", local_iso_to_json(f));
    }
  }

  WeightedSpace u6 = WeightedSpace::uniform(6);
  SubrelationPair skew(make_relation(u6, {{0, 1}, {2, 3, 4, 5}}),
                       make_relation(u6, {{0, 1, 2, 3, 4, 5}}));
  bool raised = false;
  try {
    build_choice_system(skew);
  } catch (const UnequalSubclasses&) {
    raised = true;
  }
  r.expect(raised, "UnequalSubclasses on the (2,4) instance");

  r.details["instances"] = instances;
  r.details["max_index"] = max_index;
  r.details["max_atoms"] = max_atoms;
  r.details["seed"] = seed;
  return r;
}

// --------------------------------------------------------------------------
// 9. Products: kappa multiplies traces exactly; the canonical embedding T
//    round-trips traces.
// --------------------------------------------------------------------------
inline SuiteResult run_product_suite(int rectangle_pairs = 100, std::uint64_t seed = 9) {
  SuiteResult r{"product"};
  Rng rng(seed);
  RelationOptions small;
  small.max_atoms = 5;
  small.max_weight_unit = 4;
  int done = 0;
  while (done < rectangle_pairs) {
    FiniteRelation rel_r = random_relation(rng, small);
    FiniteRelation rel_s = random_relation(rng, small);
    FiniteRelation prod = product_relation(rel_r, rel_s);
    std::vector<LocalIso> kr = sample_carrier(rng, rel_r, 3);
    std::vector<LocalIso> ks = sample_carrier(rng, rel_s, 3);
    AlmostMorphism mr = exact_embedding(rel_r, kr);
    AlmostMorphism ms = exact_embedding(rel_s, ks);
    std::vector<RectJoin> k;
    for (const auto& g : kr)
      for (const auto& h : ks) k.push_back({RectPiece{g, h}});
    AlmostMorphism kappa = product_pair(mr, ms, prod, k);
    DefectReport rep = defect(kappa);
    r.expect(rep.eps_mult == Rational(0) && rep.eps_trace == Rational(0),
             "product morphism exact", Json{{"done", done}});
    for (const auto& g : kr)
      for (const auto& h : ks) {
        ++done;
        LocalIso elem = rect_join_element(prod, {RectPiece{g, h}});
        r.expect(trace(kappa.image_of(elem)) == trace_mu(g) * trace_mu(h),
                 "tr kappa(g,h) = tr(g) tr(h)",
                 Json{{"g", local_iso_to_json(g)}, {"h", local_iso_to_json(h)}});
      }
    for (const auto& g : kr) {
      LocalIso lifted = product_embed_left(prod, g, rel_s);
      bool src = trace_mu(lifted) == trace_mu(g);
      bool dst = trace(tensor(mr.image_of(g), PartialBijection::identity(ms.target_n()))) ==
                 trace_mu(g);
      r.expect(src && dst, "round trip along T preserves traces", local_iso_to_json(g));
    }
  }
  r.details["rectangle_pairs"] = done;
  r.details["seed"] = seed;
  return r;
}

// --------------------------------------------------------------------------
// 10. Full-group reconstruction of the measure algebra, its five properties,
//     the supp/Fix and disjoint-support lemmas, and the strict witness.
// --------------------------------------------------------------------------
namespace detail {

// per class, a member count that is never 1 (and whose complement in the
// class is never 1 when `complement_too`)
inline int admissible_take(Rng& rng, int size, bool complement_too) {
  for (;;) {
    int v = static_cast<int>(rng.range(0, size));
    if (v == 1) continue;
    if (complement_too && size - v == 1) continue;
    return v;
  }
}

inline MSubset pick_from_classes(Rng& rng, const FiniteRelation& rel,
                                 const std::vector<std::vector<int>>& pools) {
  std::vector<int> members;
  for (const auto& pool : pools)
    for (int x : pool) members.push_back(x);
  (void)rng;
  return MSubset(rel.space(), std::move(members));
}

}  // namespace detail

inline SuiteResult run_reconstruct_suite(int relations = 20, int sets_per_relation = 25,
                                         std::uint64_t seed = 10) {
  SuiteResult r{"reconstruct"};
  Rng rng(seed);
  RelationOptions opt;
  opt.max_atoms = 12;
  opt.min_class_size = 2;
  for (int rel_i = 0; rel_i < relations; ++rel_i) {
    FiniteRelation rel = random_relation(rng, opt);
    ExactEmbedding e(rel);
    ImageOracle theta = oracle_from(e);
    for (int s = 0; s < sets_per_relation; ++s) {
      // regions per class: i = |A&B|, ja = |A\B|, jb = |B\A|, all in {0,2,...}
      std::vector<int> in_both, only_a, only_b;
      for (const auto& cls : rel.classes()) {
        std::vector<int> pool = cls;
        rng.shuffle(pool);
        int size = static_cast<int>(cls.size());
        int i, ja, jb;
        do {
          i = detail::admissible_take(rng, size, false);
          ja = detail::admissible_take(rng, size - i, false);
          jb = detail::admissible_take(rng, size - i - ja, false);
        } while (size - (i + ja) == 1 || size - (i + jb) == 1 || size - (i + ja + jb) < 0);
        int at = 0;
        for (int t = 0; t < i; ++t) in_both.push_back(pool[static_cast<std::size_t>(at++)]);
        for (int t = 0; t < ja; ++t) only_a.push_back(pool[static_cast<std::size_t>(at++)]);
        for (int t = 0; t < jb; ++t) only_b.push_back(pool[static_cast<std::size_t>(at++)]);
      }
      MSubset region_ab = detail::pick_from_classes(rng, rel, {in_both});
      MSubset region_a = detail::pick_from_classes(rng, rel, {only_a});
      MSubset region_b = detail::pick_from_classes(rng, rel, {only_b});
      MSubset a = set_union(region_ab, region_a);
      MSubset b = set_union(region_ab, region_b);

      std::vector<int> phi_a = reconstruct_measure_algebra(theta, a);
      std::vector<int> phi_b = reconstruct_measure_algebra(theta, b);

      // (1) independence of the support witness
      LocalIso g = support_element(rel, a);
      LocalIso g2 = inverse(g);
      r.expect(parts(e.image(g2)).supp == phi_a, "phi independent of the witness",
               local_iso_to_json(g));

      // (2) disjointness
      std::vector<int> phi_oa = reconstruct_measure_algebra(theta, region_a);
      std::vector<int> phi_ob = reconstruct_measure_algebra(theta, region_b);
      std::vector<int> meet;
      std::set_intersection(phi_oa.begin(), phi_oa.end(), phi_ob.begin(), phi_ob.end(),
                            std::back_inserter(meet));
      r.expect(meet.empty(), "phi preserves disjointness", Json::object());

      // (3) intersections
      std::vector<int> phi_meet = reconstruct_measure_algebra(theta, region_ab);
      std::vector<int> lhs;
      std::set_intersection(phi_a.begin(), phi_a.end(), phi_b.begin(), phi_b.end(),
                            std::back_inserter(lhs));
      r.expect(lhs == phi_meet, "phi preserves intersections", Json::object());

      // (4) covariance
      LocalIso mover = random_local_iso(rng, rel, /*full_domain=*/true);
      MSubset ga = perm_action(mover.map(), a);
      r.expect(reconstruct_measure_algebra(theta, ga) ==
                   perm_action(e.image(mover), phi_a),
               "phi covariant", local_iso_to_json(mover));

      // (5) isometry
      r.expect(Rational(static_cast<std::int64_t>(phi_a.size()), e.target_n()) == measure(a),
               "phi preserves measure", Json::object());

      // supp/Fix lemma: supp g = Fix h forces supp theta(g) = Fix theta(h)
      LocalIso h = support_element(rel, a.complement());
      r.expect(parts(e.image(g)).supp == parts(e.image(h)).fix, "supp/Fix lemma",
               Json::object());

      // disjoint-support lemma in both directions
      LocalIso f1 = random_local_iso(rng, rel, true);
      LocalIso f2 = random_local_iso(rng, rel, true);
      LocalIso one = LocalIso::identity(rel);
      bool src_disjoint = metric_mu(f1, f2) == metric_mu(one, f1) + metric_mu(one, f2);
      PartialBijection t1 = e.image(f1), t2 = e.image(f2);
      PartialBijection tid = PartialBijection::identity(e.target_n());
      bool dst_disjoint = hamming_distance(t1, t2) ==
                          hamming_distance(tid, t1) + hamming_distance(tid, t2);
      r.expect(src_disjoint == dst_disjoint, "disjoint-support lemma", Json::object());
    }
  }

  // strict covariant witness: g = 1_X, sigma a block-preserving transposition
  WeightedSpace heavy({"a", "b", "c"}, {Rational(1, 4), Rational(1, 4), Rational(1, 2)});
  FiniteRelation wrel = make_relation(heavy, {{0, 1}, {2}});
  ExactEmbedding we(wrel);
  PartialBijection sigma = PartialBijection::from_pairs(4, {{0, 0}, {1, 1}, {2, 3}, {3, 2}});
  bool covariant = true;
  for (int mask = 0; mask < 8; ++mask) {
    std::vector<int> members;
    for (int x = 0; x < 3; ++x)
      if (mask & (1 << x)) members.push_back(x);
    std::vector<int> blockset = we.block_of_set(MSubset(heavy, members));
    covariant = covariant && perm_action(sigma, blockset) == blockset;
  }
  r.expect(covariant && trace(sigma) < trace_mu(LocalIso::identity(wrel)),
           "strict witness: covariant sigma with tr sigma < tr 1_X",
           Json{{"tr_sigma", trace(sigma).str()}});

  r.details["relations"] = relations;
  r.details["sets"] = relations * sets_per_relation;
  r.details["seed"] = seed;
  return r;
}

// --------------------------------------------------------------------------
// 11. trim_periodic: the quotient trace formula, with the derivation oracle
//     for the displayed product form run first and reported.
// --------------------------------------------------------------------------
inline SuiteResult run_trim_suite(int instances = 100, std::uint64_t seed = 11) {
  SuiteResult r{"trim"};
  Rng rng(seed);
  long long product_matches = 0, quotient_matches = 0, formula_samples = 0;
  Json witness = Json::object();

  int done = 0;
  while (done < instances) {
    FiniteRelation rel = random_relation(rng, {4, 9, 5, 1});
    std::vector<std::size_t> big;
    for (std::size_t c = 0; c < rel.classes().size(); ++c)
      if (rel.classes()[c].size() >= 2) big.push_back(c);
    if (big.empty()) continue;
    std::vector<int> p_members;
    for (std::size_t c : big)
      if (rng.coin())
        for (int x : rel.classes()[c]) p_members.push_back(x);
    MSubset p(rel.space(), p_members);
    if (p.members().empty() || p.complement().members().empty()) continue;
    ++done;

    ExactEmbedding e(rel);
    MSubset aper = p.complement();
    FiniteRelation rel_aper = restrict_relation(rel, aper);
    std::vector<LocalIso> k = sample_carrier(rng, rel_aper, 4, /*full_domain=*/true);

    LocalIso alpha = support_element(rel, p);
    std::vector<int> a_k = parts(e.image(alpha)).supp;
    Rational ak_frac(static_cast<std::int64_t>(a_k.size()), e.target_n());
    Rational mu_p = measure(p), mu_aper = measure(aper);

    auto tilde = [&](const LocalIso& f) {
      std::vector<int> m(static_cast<std::size_t>(rel.atom_count()));
      for (int x = 0; x < rel.atom_count(); ++x) m[static_cast<std::size_t>(x)] = x;
      for (int i = 0; i < f.map().n(); ++i)
        m[static_cast<std::size_t>(aper.members()[static_cast<std::size_t>(i)])] =
            aper.members()[static_cast<std::size_t>(f.map()[i])];
      return LocalIso(rel, PartialBijection(rel.atom_count(), std::move(m)));
    };

    // derivation oracle first: evaluate both candidate formulas against the
    // directly computed restricted trace
    for (const auto& f : k) {
      ++formula_samples;
      Rational direct = trace_mu(f);  // trace in (Aper, mu_Aper)
      Rational base = trace_mu(tilde(f)) - mu_p;
      quotient_matches += (base / mu_aper == direct);
      bool product_ok = (base * mu_aper == direct);
      product_matches += product_ok;
      if (!product_ok && witness.empty()) {
        Json p_ids = Json::array();
        for (int x : p.members()) p_ids.push_back(rel.space().id(x));
        witness = Json{{"relation", relation_to_json(rel)},
                       {"P", p_ids},
                       {"f", local_iso_to_json(f)},
                       {"direct", direct.str()},
                       {"quotient_form", (base / mu_aper).str()},
                       {"product_form", (base * mu_aper).str()}};
      }
    }

    AlmostMorphism eta = trim_periodic(oracle_from(e), p, k);
    DefectReport rep = defect(eta);
    r.expect(rep.eps_mult == Rational(0) && rep.eps_trace == Rational(0),
             "trimmed morphism exact", Json{{"instance", done}});
    for (const auto& f : k) {
      LocalIso ft = tilde(f);
      r.expect(trace_mu(f) == (trace_mu(ft) - mu_p) / mu_aper,
               "source quotient trace formula", local_iso_to_json(f));
      r.expect(trace(eta.image_of(f)) ==
                   (trace(e.image(ft)) - ak_frac) / (Rational(1) - ak_frac),
               "target quotient trace formula", local_iso_to_json(f));
      std::vector<int> supp_f = parts(e.image(ft)).supp;
      std::vector<int> meet;
      std::set_intersection(supp_f.begin(), supp_f.end(), a_k.begin(), a_k.end(),
                            std::back_inserter(meet));
      r.expect(meet.empty(), "supp theta(f~) misses supp theta(alpha)",
               local_iso_to_json(f));
    }
  }

  r.details["instances"] = instances;
  r.details["seed"] = seed;
  r.details["derivation"] =
      Json{{"suite", "trim-derivation"},
           {"samples", formula_samples},
           {"quotient_form_matches", quotient_matches},
           {"product_form_matches", product_matches},
           {"conclusion", quotient_matches == formula_samples
                              ? "quotient form exact on all samples"
                              : "quotient form FAILED"},
           {"product_form_counterexample", witness}};
  return r;
}

struct SuiteOverrides {
  int n = -1;
  long long trials = -1;
  std::uint64_t seed = 0;
  bool has_seed = false;
  bool exhaustive = false;
  int budget_n = -1;
};

inline SuiteResult run_suite_by_name(const std::string& name, const SuiteOverrides& o = {}) {
  EnumerationBudget budget = EnumerationBudget::from_env();
  if (o.budget_n > 0) {
    budget.max_n = o.budget_n;
    budget.max_atoms = o.budget_n * 2;
  }
  auto seed_or = [&](std::uint64_t fallback) { return o.has_seed ? o.seed : fallback; };
  auto trials_or = [&](long long fallback) { return o.trials >= 0 ? o.trials : fallback; };
  if (name == "laws")
    return run_laws_suite(o.n > 0 ? o.n : 4, trials_or(100000), seed_or(1), budget);
  if (name == "prop1")
    return run_prop1_suite(o.n > 0 ? o.n : 3, trials_or(10000), 12, seed_or(2), budget);
  if (name == "trace-distance")
    return run_trace_distance_suite(trials_or(10000), o.n > 0 ? o.n : 10, seed_or(3));
  if (name == "embed")
    return run_embed_suite(static_cast<int>(trials_or(50)), o.n > 0 ? o.n : 200, seed_or(4));
  if (name == "pad")
    return run_pad_suite(o.n > 0 ? o.n : 8, 64, static_cast<int>(trials_or(40)), seed_or(5));
  if (name == "mix") return run_mix_suite(seed_or(6));
  if (name == "perturb")
    return run_perturb_suite(static_cast<int>(trials_or(100)), seed_or(7));
  if (name == "index")
    return run_index_suite(static_cast<int>(trials_or(12)), o.n > 0 ? o.n : 3, 24, seed_or(8));
  if (name == "product")
    return run_product_suite(static_cast<int>(trials_or(100)), seed_or(9));
  if (name == "reconstruct")
    return run_reconstruct_suite(static_cast<int>(trials_or(20)), 25, seed_or(10));
  if (name == "trim") return run_trim_suite(static_cast<int>(trials_or(100)), seed_or(11));
  throw ParseError("unknown suite '" + name + "'");
}

}  // namespace sofickit
