#pragma once

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sofickit/combinators.hpp"
#include "sofickit/embed.hpp"
#include "sofickit/errors.hpp"
#include "sofickit/relation.hpp"

namespace sofickit {

// All file formats. ordered_json keeps field order stable so identical inputs
// produce byte-identical files. Rationals travel as lowest-terms "p/q".
using Json = nlohmann::ordered_json;

inline Json pbij_to_json(const PartialBijection& f) {
  Json pairs = Json::array();
  for (int i = 0; i < f.n(); ++i)
    if (f.defined(i)) pairs.push_back(Json::array({i, f[i]}));
  return Json{{"n", f.n()}, {"map", pairs}};
}

inline PartialBijection pbij_from_json(const Json& j) {
  try {
    int n = j.at("n").get<int>();
    std::vector<std::pair<int, int>> pairs;
    for (const auto& p : j.at("map")) pairs.emplace_back(p.at(0).get<int>(), p.at(1).get<int>());
    return PartialBijection::from_pairs(n, pairs);
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw ParseError(std::string("bad partial bijection: ") + e.what());
  }
}

inline Json space_to_json(const WeightedSpace& s) {
  Json atoms = Json::array();
  for (int i = 0; i < s.size(); ++i)
    atoms.push_back(Json{{"id", s.id(i)}, {"weight", s.weight(i).str()}});
  return Json{{"atoms", atoms}};
}

inline WeightedSpace space_from_json(const Json& j) {
  try {
    std::vector<std::string> ids;
    std::vector<Rational> weights;
    for (const auto& a : j.at("atoms")) {
      ids.push_back(a.at("id").get<std::string>());
      weights.push_back(Rational::parse(a.at("weight").get<std::string>()));
    }
    return WeightedSpace(std::move(ids), std::move(weights));
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw ParseError(std::string("bad space: ") + e.what());
  }
}

inline Json relation_to_json(const FiniteRelation& r) {
  Json classes = Json::array();
  for (const auto& cls : r.classes()) {
    Json blk = Json::array();
    for (int x : cls) blk.push_back(r.space().id(x));
    classes.push_back(blk);
  }
  return Json{{"space", space_to_json(r.space())}, {"classes", classes}};
}

inline FiniteRelation relation_from_json(const Json& j) {
  try {
    WeightedSpace space = space_from_json(j.at("space"));
    std::vector<std::vector<int>> classes;
    for (const auto& blk : j.at("classes")) {
      std::vector<int> cls;
      for (const auto& id : blk) cls.push_back(space.index_of(id.get<std::string>()));
      classes.push_back(std::move(cls));
    }
    return FiniteRelation(space, std::move(classes));
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw ParseError(std::string("bad relation: ") + e.what());
  }
}

inline Json local_iso_to_json(const LocalIso& g) {
  Json pairs = Json::array();
  const auto& space = g.relation().space();
  for (int x = 0; x < g.map().n(); ++x)
    if (g.map().defined(x))
      pairs.push_back(Json::array({space.id(x), space.id(g.map()[x])}));
  return Json{{"map", pairs}};
}

inline LocalIso local_iso_from_json(const FiniteRelation& r, const Json& j) {
  try {
    std::vector<std::pair<int, int>> pairs;
    for (const auto& p : j.at("map"))
      pairs.emplace_back(r.space().index_of(p.at(0).get<std::string>()),
                         r.space().index_of(p.at(1).get<std::string>()));
    return LocalIso(r, PartialBijection::from_pairs(r.atom_count(), pairs));
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw ParseError(std::string("bad local isomorphism: ") + e.what());
  }
}

inline Json morphism_to_json(const AlmostMorphism& m) {
  Json entries = Json::array();
  for (const auto& e : m.entries())
    entries.push_back(Json{{"element", local_iso_to_json(e.element)},
                           {"image", pbij_to_json(e.image)}});
  return Json{{"target_n", m.target_n()},
              {"entries", entries},
              {"carrier_count", m.carrier_count()}};
}

inline AlmostMorphism morphism_from_json(const FiniteRelation& r, const Json& j) {
  try {
    int target_n = j.at("target_n").get<int>();
    std::size_t carrier_count =
        j.contains("carrier_count") ? j.at("carrier_count").get<std::size_t>()
                                    : j.at("entries").size();
    std::vector<AlmostMorphism::Entry> carrier, extra;
    std::size_t i = 0;
    for (const auto& e : j.at("entries")) {
      AlmostMorphism::Entry entry{local_iso_from_json(r, e.at("element")),
                                  pbij_from_json(e.at("image"))};
      if (i++ < carrier_count) carrier.push_back(std::move(entry));
      else extra.push_back(std::move(entry));
    }
    return AlmostMorphism(r, target_n, std::move(carrier), std::move(extra));
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw ParseError(std::string("bad morphism: ") + e.what());
  }
}

inline Json defect_to_json(const AlmostMorphism& m, const DefectReport& rep) {
  return Json{{"eps_mult", rep.eps_mult.str()},
              {"eps_trace", rep.eps_trace.str()},
              {"worst_pair",
               Json::array({local_iso_to_json(m.entry(rep.worst_pair_first).element),
                            local_iso_to_json(m.entry(rep.worst_pair_second).element)})}};
}

inline Json choice_system_to_json(const ChoiceSystem& cs) {
  Json psi = Json::array();
  for (const auto& p : cs.psi()) psi.push_back(local_iso_to_json(p));
  return Json{{"psi", psi}};
}

inline Json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const std::exception& e) {
    throw ParseError("malformed JSON in '" + path + "': " + e.what());
  }
}

inline void save_json_file(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write '" + path + "'");
  out << j.dump(2) << "\n";
}

}  // namespace sofickit
