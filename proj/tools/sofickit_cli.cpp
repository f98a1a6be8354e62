#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sofickit/sofickit.hpp"
#include "sofickit/suites.hpp"

using namespace sofickit;

namespace {

std::vector<int> parse_id_set(const WeightedSpace& space, const std::string& csv) {
  std::vector<int> out;
  std::string token;
  for (char c : csv) {
    if (c == ',') {
      if (!token.empty()) out.push_back(space.index_of(token));
      token.clear();
    } else if (!std::isspace(static_cast<unsigned char>(c))) {
      token.push_back(c);
    }
  }
  if (!token.empty()) out.push_back(space.index_of(token));
  return out;
}

std::vector<std::int64_t> parse_weights(const std::string& csv) {
  std::vector<std::int64_t> out;
  std::string token;
  auto flush = [&] {
    if (!token.empty()) out.push_back(std::stoll(token));
    token.clear();
  };
  for (char c : csv) {
    if (c == ',') flush();
    else if (!std::isspace(static_cast<unsigned char>(c))) token.push_back(c);
  }
  flush();
  return out;
}

// Use the on-demand exact generator only when the table provably matches it.
ImageOracle smart_oracle(const AlmostMorphism& m, const ExactEmbedding& e) {
  if (m.target_n() != e.target_n()) return oracle_from(m);
  for (const auto& entry : m.entries())
    if (entry.image != e.image(entry.element)) return oracle_from(m);
  return hybrid_oracle(m, e);
}

// Non-pinned carrier elements of a loaded morphism.
std::vector<LocalIso> carrier_of(const AlmostMorphism& m) {
  std::vector<LocalIso> out;
  for (std::size_t i = 2; i < m.carrier_count(); ++i) out.push_back(m.entry(i).element);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sofickit: exact sofic-approximation calculus on finite relations"};
  app.require_subcommand(1);

  // ---- gen-relation ----
  auto* gen = app.add_subcommand("gen-relation", "generate a random finite relation");
  int gen_atoms = 8, gen_max_weight = 6, gen_min_class = 1;
  std::uint64_t gen_seed = 1;
  std::string gen_out;
  gen->add_option("--atoms", gen_atoms, "number of atoms");
  gen->add_option("--max-weight", gen_max_weight, "max per-atom weight unit");
  gen->add_option("--min-class-size", gen_min_class, "smallest class size");
  gen->add_option("--seed", gen_seed, "rng seed");
  gen->add_option("--out", gen_out, "output relation file")->required();

  // ---- embed ----
  auto* embed = app.add_subcommand("embed", "build an exact replication morphism");
  std::string embed_rel, embed_out;
  int embed_carrier = 6, embed_inflate = 1;
  std::uint64_t embed_seed = 1;
  bool embed_full = false, embed_alt = false;
  embed->add_option("--relation", embed_rel, "relation file")->required();
  embed->add_option("--carrier-size", embed_carrier, "sampled carrier elements");
  embed->add_option("--seed", embed_seed, "rng seed");
  embed->add_option("--inflate", embed_inflate, "tensor target with 1_[k]");
  embed->add_flag("--full-group", embed_full, "sample full-group elements only");
  embed->add_flag("--alt", embed_alt, "use the reversed-layout oracle construction");
  embed->add_option("--out", embed_out, "output morphism file")->required();

  // ---- perturb ----
  auto* pert = app.add_subcommand("perturb", "randomly perturb a morphism");
  std::string pert_rel, pert_morph, pert_out, pert_delta = "1/20";
  std::uint64_t pert_seed = 1;
  pert->add_option("--relation", pert_rel, "relation file")->required();
  pert->add_option("--morphism", pert_morph, "morphism file")->required();
  pert->add_option("--delta", pert_delta, "support budget as p/q");
  pert->add_option("--seed", pert_seed, "rng seed");
  pert->add_option("--out", pert_out, "output morphism file")->required();

  // ---- check ----
  auto* check = app.add_subcommand("check", "compute the defect of a morphism");
  std::string check_rel, check_morph, check_out;
  check->add_option("--relation", check_rel, "relation file")->required();
  check->add_option("--morphism", check_morph, "morphism file")->required();
  check->add_option("--out", check_out, "output report file")->required();

  // ---- combine ----
  auto* combine = app.add_subcommand("combine", "apply a permanence construction");
  combine->require_subcommand(1);

  auto* cmix = combine->add_subcommand("mix", "weighted disintegration mix");
  std::string cmix_rel, cmix_out, cmix_weights;
  std::vector<std::string> cmix_morphs;
  cmix->add_option("--relation", cmix_rel)->required();
  cmix->add_option("--morphism", cmix_morphs, "part morphism file (repeat)")->required();
  cmix->add_option("--weights", cmix_weights, "comma-separated positive integers");
  cmix->add_option("--out", cmix_out)->required();

  auto* crestrict = combine->add_subcommand("restrict", "restrict to a subset");
  std::string cres_rel, cres_morph, cres_set, cres_out, cres_out_rel;
  int cres_carrier = 4;
  std::uint64_t cres_seed = 1;
  crestrict->add_option("--relation", cres_rel)->required();
  crestrict->add_option("--morphism", cres_morph)->required();
  crestrict->add_option("--set", cres_set, "comma-separated atom ids")->required();
  crestrict->add_option("--carrier-size", cres_carrier);
  crestrict->add_option("--seed", cres_seed);
  crestrict->add_option("--out", cres_out)->required();
  crestrict->add_option("--out-relation", cres_out_rel, "restricted relation file");

  auto* cprod = combine->add_subcommand("product", "product of two morphisms");
  std::string cp_rel_r, cp_rel_s, cp_m_r, cp_m_s, cp_out, cp_out_rel;
  cprod->add_option("--relation", cp_rel_r, "left relation")->required();
  cprod->add_option("--relation-s", cp_rel_s, "right relation")->required();
  cprod->add_option("--morphism", cp_m_r, "left morphism")->required();
  cprod->add_option("--morphism-s", cp_m_s, "right morphism")->required();
  cprod->add_option("--out", cp_out)->required();
  cprod->add_option("--out-relation", cp_out_rel, "product relation file");

  auto* cext = combine->add_subcommand("extend", "finite-index extension");
  std::string ce_rel, ce_rel_s, ce_morph, ce_out, ce_out_choice;
  int ce_carrier = 4;
  std::uint64_t ce_seed = 1;
  cext->add_option("--relation", ce_rel, "fine relation")->required();
  cext->add_option("--relation-s", ce_rel_s, "coarse relation")->required();
  cext->add_option("--morphism", ce_morph, "morphism of the fine relation")->required();
  cext->add_option("--carrier-size", ce_carrier);
  cext->add_option("--seed", ce_seed);
  cext->add_option("--out", ce_out)->required();
  cext->add_option("--out-choice", ce_out_choice, "choice system file");

  auto* crec = combine->add_subcommand("reconstruct", "measure-algebra reconstruction");
  std::string cr_rel, cr_morph, cr_set, cr_out;
  crec->add_option("--relation", cr_rel)->required();
  crec->add_option("--morphism", cr_morph)->required();
  crec->add_option("--set", cr_set, "comma-separated atom ids")->required();
  crec->add_option("--out", cr_out)->required();

  auto* ctrim = combine->add_subcommand("trim", "trim a periodic part");
  std::string ct_rel, ct_morph, ct_set, ct_out, ct_out_rel;
  int ct_carrier = 4;
  std::uint64_t ct_seed = 1;
  ctrim->add_option("--relation", ct_rel)->required();
  ctrim->add_option("--morphism", ct_morph)->required();
  ctrim->add_option("--set", ct_set, "periodic part (default: all classes of size >= 2)");
  ctrim->add_option("--carrier-size", ct_carrier);
  ctrim->add_option("--seed", ct_seed);
  ctrim->add_option("--out", ct_out)->required();
  ctrim->add_option("--out-relation", ct_out_rel, "trimmed relation file");

  // ---- props ----
  auto* props = app.add_subcommand("props", "run a property suite");
  std::string props_suite, props_out;
  int props_n = -1, props_budget = -1;
  long long props_trials = -1;
  std::uint64_t props_seed = 0;
  bool props_exhaustive = false, props_seed_set = false;
  props->add_option("--suite", props_suite,
                    "laws|prop1|trace-distance|embed|pad|mix|perturb|index|product|"
                    "reconstruct|trim")
      ->required();
  props->add_option("--n", props_n, "size parameter");
  props->add_option("--trials", props_trials, "randomized trial count");
  props->add_option("--seed", props_seed, "rng seed")->each([&](const std::string&) {
    props_seed_set = true;
  });
  props->add_flag("--exhaustive", props_exhaustive, "exhaustive portion only");
  props->add_option("--budget-n", props_budget, "enumeration cap override");
  props->add_option("--out", props_out, "report file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (*gen) {
      Rng rng(gen_seed);
      RelationOptions opt;
      opt.min_atoms = gen_atoms;
      opt.max_atoms = gen_atoms;
      opt.max_weight_unit = gen_max_weight;
      opt.min_class_size = gen_min_class;
      FiniteRelation r = random_relation(rng, opt);
      save_json_file(gen_out, relation_to_json(r));
      std::cout << "wrote relation with " << r.atom_count() << " atoms, "
                << r.class_count() << " classes\n";
    } else if (*embed) {
      FiniteRelation r = relation_from_json(load_json_file(embed_rel));
      Rng rng(embed_seed);
      std::vector<LocalIso> k = sample_carrier(rng, r, embed_carrier, embed_full);
      AlmostMorphism m = embed_alt ? alt_embedding(r, k) : exact_embedding(r, k);
      if (embed_inflate > 1) m = inflate(m, embed_inflate);
      save_json_file(embed_out, morphism_to_json(m));
      std::cout << "wrote morphism into [[" << m.target_n() << "]] with "
                << m.entries().size() << " table entries\n";
    } else if (*pert) {
      FiniteRelation r = relation_from_json(load_json_file(pert_rel));
      AlmostMorphism m = morphism_from_json(r, load_json_file(pert_morph));
      AlmostMorphism p = perturb(m, Rational::parse(pert_delta), pert_seed);
      save_json_file(pert_out, morphism_to_json(p));
      std::cout << "wrote perturbed morphism (delta " << pert_delta << ", seed "
                << pert_seed << ")\n";
    } else if (*check) {
      FiniteRelation r = relation_from_json(load_json_file(check_rel));
      AlmostMorphism m = morphism_from_json(r, load_json_file(check_morph));
      DefectReport rep = defect(m);
      save_json_file(check_out, defect_to_json(m, rep));
      std::cout << "eps_mult " << rep.eps_mult.str() << ", eps_trace "
                << rep.eps_trace.str() << "\n";
    } else if (*cmix) {
      FiniteRelation r = relation_from_json(load_json_file(cmix_rel));
      std::vector<std::pair<AlmostMorphism, std::int64_t>> parts;
      std::vector<std::int64_t> weights =
          cmix_weights.empty() ? std::vector<std::int64_t>(cmix_morphs.size(), 1)
                               : parse_weights(cmix_weights);
      if (weights.size() != cmix_morphs.size())
        throw ParseError("need one weight per morphism");
      for (std::size_t i = 0; i < cmix_morphs.size(); ++i)
        parts.emplace_back(morphism_from_json(r, load_json_file(cmix_morphs[i])), weights[i]);
      AlmostMorphism mixed = mix(parts);
      save_json_file(cmix_out, morphism_to_json(mixed));
      std::cout << "wrote mixed morphism into [[" << mixed.target_n() << "]]\n";
    } else if (*crestrict) {
      FiniteRelation r = relation_from_json(load_json_file(cres_rel));
      AlmostMorphism m = morphism_from_json(r, load_json_file(cres_morph));
      MSubset a(r.space(), parse_id_set(r.space(), cres_set));
      FiniteRelation r_a = restrict_relation(r, a);
      Rng rng(cres_seed);
      std::vector<LocalIso> k_a = sample_carrier(rng, r_a, cres_carrier);
      ExactEmbedding e(r);
      AlmostMorphism cut = restrict_morphism(smart_oracle(m, e), a, k_a);
      save_json_file(cres_out, morphism_to_json(cut));
      if (!cres_out_rel.empty()) save_json_file(cres_out_rel, relation_to_json(r_a));
      std::cout << "wrote restricted morphism into [[" << cut.target_n() << "]]\n";
    } else if (*cprod) {
      FiniteRelation rl = relation_from_json(load_json_file(cp_rel_r));
      FiniteRelation rs = relation_from_json(load_json_file(cp_rel_s));
      AlmostMorphism ml = morphism_from_json(rl, load_json_file(cp_m_r));
      AlmostMorphism ms = morphism_from_json(rs, load_json_file(cp_m_s));
      FiniteRelation prod = product_relation(rl, rs);
      std::vector<RectJoin> k;
      for (const auto& g : carrier_of(ml))
        for (const auto& h : carrier_of(ms)) k.push_back({RectPiece{g, h}});
      AlmostMorphism kappa = product_pair(ml, ms, prod, k);
      save_json_file(cp_out, morphism_to_json(kappa));
      if (!cp_out_rel.empty()) save_json_file(cp_out_rel, relation_to_json(prod));
      std::cout << "wrote product morphism into [[" << kappa.target_n() << "]]\n";
    } else if (*cext) {
      FiniteRelation fine = relation_from_json(load_json_file(ce_rel));
      FiniteRelation coarse = relation_from_json(load_json_file(ce_rel_s));
      AlmostMorphism phi = morphism_from_json(fine, load_json_file(ce_morph));
      ChoiceSystem cs = build_choice_system(SubrelationPair(fine, coarse));
      Rng rng(ce_seed);
      std::vector<LocalIso> k_s = sample_carrier(rng, coarse, ce_carrier);
      ExactEmbedding e(fine);
      AlmostMorphism xi = extend_finite_index(smart_oracle(phi, e), cs, k_s);
      save_json_file(ce_out, morphism_to_json(xi));
      if (!ce_out_choice.empty()) save_json_file(ce_out_choice, choice_system_to_json(cs));
      std::cout << "wrote index-" << cs.index() << " extension into [[" << xi.target_n()
                << "]]\n";
    } else if (*crec) {
      FiniteRelation r = relation_from_json(load_json_file(cr_rel));
      AlmostMorphism m = morphism_from_json(r, load_json_file(cr_morph));
      MSubset a(r.space(), parse_id_set(r.space(), cr_set));
      ExactEmbedding e(r);
      std::vector<int> image = reconstruct_measure_algebra(smart_oracle(m, e), a);
      Json out = Json{{"set", image}};
      save_json_file(cr_out, out);
      std::cout << "wrote reconstructed set of " << image.size() << " points\n";
    } else if (*ctrim) {
      FiniteRelation r = relation_from_json(load_json_file(ct_rel));
      AlmostMorphism m = morphism_from_json(r, load_json_file(ct_morph));
      MSubset p = ct_set.empty() ? periodic_part_ge2(r)
                                 : MSubset(r.space(), parse_id_set(r.space(), ct_set));
      MSubset aper = p.complement();
      FiniteRelation r_aper = restrict_relation(r, aper);
      Rng rng(ct_seed);
      std::vector<LocalIso> k = sample_carrier(rng, r_aper, ct_carrier, /*full_domain=*/true);
      ExactEmbedding e(r);
      AlmostMorphism eta = trim_periodic(smart_oracle(m, e), p, k);
      save_json_file(ct_out, morphism_to_json(eta));
      if (!ct_out_rel.empty()) save_json_file(ct_out_rel, relation_to_json(r_aper));
      std::cout << "wrote trimmed morphism into [[" << eta.target_n() << "]]\n";
    } else if (*props) {
      SuiteOverrides o;
      o.n = props_n;
      o.trials = props_trials;
      if (props_seed_set) {
        o.seed = props_seed;
        o.has_seed = true;
      }
      o.exhaustive = props_exhaustive;
      if (props_exhaustive && props_trials < 0) o.trials = 0;
      o.budget_n = props_budget;
      SuiteResult result = run_suite_by_name(props_suite, o);
      if (!props_out.empty()) save_json_file(props_out, result.to_json());
      std::cout << "suite " << result.suite << ": " << result.checks << " checks, "
                << result.violation_count << " violations\n";
      if (!result.passed()) {
        for (const auto& v : result.violations) std::cerr << v.dump() << "\n";
        return 1;
      }
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
