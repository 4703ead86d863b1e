#pragma once

// Independent reference implementations used as test oracles. None of them
// calls into the engine code they check beyond building terms and graphs.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "cpes/grid.hpp"
#include "cpes/query.hpp"
#include "cpes/rdf.hpp"
#include "cpes/shacl.hpp"

#ifndef CPES_DATA_DIR
#define CPES_DATA_DIR "data"
#endif

namespace cpes::oracle {

using rdf::Graph;
using rdf::Term;
using rdf::Triple;

inline std::string data_path(const std::string& rel) { return std::string(CPES_DATA_DIR) + "/" + rel; }

inline const char* sgen_shape_text() {
  return R"(errol:StaticGenerator
  rdf:type rdfs:Class ;
  rdf:type sh:NodeShape ;
  rdfs:label "Static generator" ;
  rdfs:subClassOf errol:GenerationConsumption ;
  sh:and (
      [
        sh:path errol:p_mw ;
        sh:maxInclusive "0"^^xsd:decimal ;
      ]
    ) ;
  sh:property [
      rdf:type sh:PropertyShape ;
      sh:path errol:q_mvar ;
      sh:datatype xsd:decimal ;
      sh:description "reactive power" ;
      sh:maxCount 1 ;
      sh:minCount 1 ;
      sh:name "q mvar" ;
    ] ;
  sh:property [
      rdf:type sh:PropertyShape ;
      sh:path errol:type ;
      sh:datatype xsd:string ;
      sh:description "sgen type" ;
      sh:maxCount 1 ;
      sh:name "type" ;
    ] ;
  sh:targetClass errol:StaticGenerator ;
)";
}

// ---------------------------------------------------------------- random graphs

struct TermPools {
  std::vector<Term> iris, predicates, blanks, literals;
};

inline TermPools make_pools(std::mt19937_64& rng, bool with_blanks = true) {
  TermPools p;
  for (int i = 0; i < 6; ++i) p.iris.push_back(Term::iri("http://example.org/n" + std::to_string(i)));
  p.iris.push_back(Term::iri("http://w3id.org/errol#Bus"));
  p.iris.push_back(Term::iri("urn:x:weird-local_1"));
  for (int i = 0; i < 4; ++i) p.predicates.push_back(Term::iri("http://example.org/p" + std::to_string(i)));
  p.predicates.push_back(Term::iri("http://www.w3.org/1999/02/22-rdf-syntax-ns#type"));
  if (with_blanks)
    for (int i = 0; i < 3; ++i) p.blanks.push_back(Term::blank("g" + std::to_string(i)));
  const char* strings[] = {"", "plain", "with \"quotes\"", "line\nbreak\ttab", "back\\slash", "unicode \xc3\xa9\xe2\x82\xac"};
  const char* decimals[] = {"0.5", "-0.5", "0.0", "1.25", "-0.005", "3"};
  const char* integers[] = {"0", "-7", "42", "3"};
  std::uniform_int_distribution<int> pick(0, 1);
  for (auto s : strings)
    if (pick(rng) || p.literals.size() < 2) p.literals.push_back(Term::string(s));
  for (auto d : decimals) p.literals.push_back(Term::literal(d, rdf::Datatype::Decimal));
  for (auto i : integers) p.literals.push_back(Term::literal(i, rdf::Datatype::Integer));
  p.literals.push_back(Term::boolean(true));
  p.literals.push_back(Term::boolean(false));
  return p;
}

template <typename T>
const T& pick_one(std::mt19937_64& rng, const std::vector<T>& v) {
  return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)];
}

inline Graph random_graph(std::mt19937_64& rng, const TermPools& pools, std::size_t max_triples) {
  Graph g;
  std::size_t n = std::uniform_int_distribution<std::size_t>(0, max_triples)(rng);
  std::uniform_int_distribution<int> roll(0, 9);
  for (std::size_t i = 0; i < n; ++i) {
    Term s = (!pools.blanks.empty() && roll(rng) < 3) ? pick_one(rng, pools.blanks) : pick_one(rng, pools.iris);
    Term p = pick_one(rng, pools.predicates);
    int r = roll(rng);
    Term o = r < 4 ? pick_one(rng, pools.iris)
                   : (r < 5 && !pools.blanks.empty() ? pick_one(rng, pools.blanks) : pick_one(rng, pools.literals));
    g.insert(s, p, o);
  }
  return g;
}

// ------------------------------------------------------------ isomorphism

/// Brute-force graph isomorphism under blank-node relabeling.
inline bool isomorphic(const Graph& a, const Graph& b) {
  if (a.size() != b.size()) return false;
  auto blanks = [](const Graph& g) {
    std::set<Term> out;
    for (const auto& t : g) {
      if (t.subject.is_blank()) out.insert(t.subject);
      if (t.object.is_blank()) out.insert(t.object);
    }
    return std::vector<Term>(out.begin(), out.end());
  };
  auto ba = blanks(a), bb = blanks(b);
  if (ba.size() != bb.size()) return false;
  std::set<Triple> target(b.begin(), b.end());
  std::vector<std::size_t> perm(bb.size());
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
  do {
    std::map<Term, Term> m;
    for (std::size_t i = 0; i < ba.size(); ++i) m[ba[i]] = bb[perm[i]];
    auto map_term = [&](const Term& t) { return t.is_blank() ? m.at(t) : t; };
    bool ok = true;
    for (const auto& t : a) {
      if (!target.contains(Triple{map_term(t.subject), t.predicate, map_term(t.object)})) {
        ok = false;
        break;
      }
    }
    if (ok) return true;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return false;
}

// ------------------------------------------------------------ query oracle

/// Exact numeric value of an integer/decimal lexical form, scaled by 10^6.
inline std::optional<long long> scaled(const Term& t) {
  if (!t.is_literal() || (t.datatype() != rdf::Datatype::Integer && t.datatype() != rdf::Datatype::Decimal))
    return std::nullopt;
  std::string s = t.value();
  bool neg = false;
  std::size_t i = 0;
  if (i < s.size() && (s[i] == '+' || s[i] == '-')) neg = s[i++] == '-';
  long long whole = 0, frac = 0;
  int digits = 0;
  for (; i < s.size() && s[i] != '.'; ++i) whole = whole * 10 + (s[i] - '0');
  if (i < s.size()) ++i;
  for (; i < s.size() && digits < 6; ++i, ++digits) frac = frac * 10 + (s[i] - '0');
  for (; digits < 6; ++digits) frac *= 10;
  long long v = whole * 1000000 + frac;
  return neg ? -v : v;
}

/// Reference FILTER semantics: numbers compare numerically, same-datatype
/// literals by value, IRIs and blanks only for (in)equality; anything else
/// is a type error (nullopt).
inline std::optional<bool> oracle_compare(const Term& a, query::CompareOp op, const Term& b) {
  auto apply = [op](auto x, auto y) {
    switch (op) {
    case query::CompareOp::Eq: return x == y;
    case query::CompareOp::Ne: return x != y;
    case query::CompareOp::Lt: return x < y;
    case query::CompareOp::Le: return x <= y;
    case query::CompareOp::Gt: return x > y;
    case query::CompareOp::Ge: return x >= y;
    }
    return false;
  };
  auto na = scaled(a), nb = scaled(b);
  if (na && nb) return apply(*na, *nb);
  if (a.kind() != b.kind()) return std::nullopt;
  if (a.is_literal()) {
    if (a.datatype() != b.datatype()) return std::nullopt;
    if (a.datatype() == rdf::Datatype::Boolean) return apply(a.value() == "true" || a.value() == "1", b.value() == "true" || b.value() == "1");
    return apply(a.value(), b.value());
  }
  if (op != query::CompareOp::Eq && op != query::CompareOp::Ne) return std::nullopt;
  return apply(a.value(), b.value());
}

/// Every assignment of the query's variables to terms of the graph, checked
/// against all patterns and filters; projected and deduplicated.
inline std::set<std::vector<Term>> brute_force(const Graph& g, const query::SelectQuery& q) {
  std::set<Term> domain_set;
  for (const auto& t : g) {
    domain_set.insert(t.subject);
    domain_set.insert(t.predicate);
    domain_set.insert(t.object);
  }
  std::vector<Term> domain(domain_set.begin(), domain_set.end());
  std::vector<std::string> vars;
  auto note = [&](const query::PatternTerm& pt) {
    if (auto v = std::get_if<query::Variable>(&pt))
      if (std::find(vars.begin(), vars.end(), v->name) == vars.end()) vars.push_back(v->name);
  };
  for (const auto& p : q.patterns) {
    note(p.subject);
    note(p.predicate);
    note(p.object);
  }
  std::set<std::vector<Term>> out;
  std::map<std::string, Term> assignment;
  auto value = [&](const query::PatternTerm& pt) -> std::optional<Term> {
    if (auto v = std::get_if<query::Variable>(&pt)) {
      auto it = assignment.find(v->name);
      if (it == assignment.end()) return std::nullopt;
      return it->second;
    }
    return std::get<Term>(pt);
  };
  // Prune only on patterns that are already fully assigned; the search is
  // otherwise a plain enumeration of the assignment space.
  auto consistent = [&]() {
    for (const auto& p : q.patterns) {
      auto s = value(p.subject), pr = value(p.predicate), o = value(p.object);
      if (s && pr && o && !g.contains(Triple{*s, *pr, *o})) return false;
    }
    return true;
  };
  std::function<void(std::size_t)> rec = [&](std::size_t k) {
    if (!consistent()) return;
    if (k == vars.size()) {
      for (const auto& f : q.filters) {
        Term left = assignment.at(f.left.name);
        Term right = *value(f.right);
        auto r = oracle_compare(left, f.op, right);
        if (!r || !*r) return;
      }
      std::vector<Term> row;
      for (const auto& v : q.projected) row.push_back(assignment.at(v.name));
      out.insert(row);
      return;
    }
    for (const auto& t : domain) {
      assignment[vars[k]] = t;
      rec(k + 1);
    }
    assignment.erase(vars[k]);
  };
  rec(0);
  return out;
}

inline std::set<std::vector<Term>> rows_of(const std::vector<query::BindingSet>& rows, const query::SelectQuery& q) {
  std::set<std::vector<Term>> out;
  for (const auto& b : rows) {
    std::vector<Term> row;
    for (const auto& v : q.projected) row.push_back(b.at(v.name));
    out.insert(row);
  }
  return out;
}

/// Random SELECT text over the pools: up to 4 patterns, up to 2 filters.
inline std::string random_query(std::mt19937_64& rng, const TermPools& pools) {
  std::uniform_int_distribution<int> roll(0, 9);
  int n_patterns = std::uniform_int_distribution<int>(1, 4)(rng);
  std::vector<std::string> vars = {"a", "b", "c", "d"};
  std::vector<std::string> used;
  auto var = [&] {
    const auto& v = pick_one(rng, vars);
    if (std::find(used.begin(), used.end(), v) == used.end()) used.push_back(v);
    return "?" + v;
  };
  std::string body;
  for (int i = 0; i < n_patterns; ++i) {
    std::string s = roll(rng) < 7 ? var() : pick_one(rng, pools.iris).to_string();
    std::string p = roll(rng) < 2 ? var() : pick_one(rng, pools.predicates).to_string();
    int r = roll(rng);
    std::string o = r < 6 ? var() : (r < 8 ? pick_one(rng, pools.iris).to_string() : pick_one(rng, pools.literals).to_string());
    body += "  " + s + " " + p + " " + o + " .\n";
  }
  if (used.empty()) body += "  ?a " + pick_one(rng, pools.predicates).to_string() + " ?b .\n", used = {"a", "b"};
  const char* ops[] = {"=", "!=", "<", "<=", ">", ">="};
  int n_filters = std::uniform_int_distribution<int>(0, 2)(rng);
  for (int i = 0; i < n_filters; ++i) {
    std::string left = "?" + pick_one(rng, used);
    int r = roll(rng);
    std::string right = r < 3 ? "?" + pick_one(rng, used)
                              : (r < 5 ? pick_one(rng, pools.iris).to_string() : pick_one(rng, pools.literals).to_string());
    body += "  FILTER(" + left + " " + pick_one(rng, std::vector<std::string>(std::begin(ops), std::end(ops))) + " " +
            right + ")\n";
  }
  std::string projection;
  if (roll(rng) == 0) {
    projection = "*";
  } else {
    for (const auto& v : used)
      if (roll(rng) < 6 || projection.empty()) projection += (projection.empty() ? "?" : " ?") + v;
  }
  std::string distinct = roll(rng) < 3 ? "DISTINCT " : "";
  return "SELECT " + distinct + projection + " WHERE {\n" + body + "}";
}

// ------------------------------------------------------------ SHACL oracle

/// Violation count by a direct per-node, per-constraint scan of the triples.
inline std::size_t naive_violation_count(const Graph& data, const std::vector<shacl::NodeShape>& shapes,
                                         const Graph& hierarchy) {
  const Term type = Term::iri("http://www.w3.org/1999/02/22-rdf-syntax-ns#type");
  const Term sub = Term::iri("http://www.w3.org/2000/01/rdf-schema#subClassOf");
  std::size_t count = 0;
  for (const auto& shape : shapes) {
    std::set<Term> classes = {shape.target_class};
    for (bool grew = true; grew;) {
      grew = false;
      for (const auto& t : hierarchy)
        if (t.predicate == sub && classes.contains(t.object) && classes.insert(t.subject).second) grew = true;
    }
    std::set<Term> focus;
    for (const auto& t : data)
      if (t.predicate == type && classes.contains(t.object)) focus.insert(t.subject);
    auto check = [&](const Term& node, const shacl::PropertyShape& ps) {
      std::vector<Term> values;
      for (const auto& t : data)
        if (t.subject == node && t.predicate == ps.path) values.push_back(t.object);
      if (ps.min_count && static_cast<long long>(values.size()) < *ps.min_count) ++count;
      if (ps.max_count && static_cast<long long>(values.size()) > *ps.max_count) ++count;
      for (const auto& v : values) {
        if (ps.datatype && !(v.is_literal() && v.datatype() == *ps.datatype)) ++count;
        auto n = scaled(v);
        if (ps.min_inclusive && !(n && *n >= *scaled(Term::decimal(*ps.min_inclusive)))) ++count;
        if (ps.max_inclusive && !(n && *n <= *scaled(Term::decimal(*ps.max_inclusive)))) ++count;
      }
    };
    for (const auto& node : focus) {
      for (const auto& ps : shape.properties) check(node, ps);
      for (const auto& ps : shape.and_constraints) check(node, ps);
    }
  }
  return count;
}

// ------------------------------------------------------------ grid tables

inline double rnd(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

/// Valid random tables: connected radial network, all invariants satisfied.
inline grid::GridTables random_tables(std::mt19937_64& rng, int max_buses = 12) {
  grid::GridTables t;
  int n = std::uniform_int_distribution<int>(2, max_buses)(rng);
  std::uniform_int_distribution<int> coin(0, 1);
  std::vector<grid::ElementId> ids;
  for (int i = 0; i < n; ++i) ids.push_back(i * 3 + std::uniform_int_distribution<int>(0, 2)(rng));
  t.bus.push_back({ids[0], "slack", 20.0});
  t.ext_grid.push_back({0, ids[0], rnd(rng, 0.95, 1.05), rnd(rng, -5, 5)});
  grid::ElementId line_id = 0, trafo_id = 0;
  for (int i = 1; i < n; ++i) {
    std::size_t parent = std::uniform_int_distribution<std::size_t>(0, static_cast<std::size_t>(i) - 1)(rng);
    double vn_parent = t.bus[parent].vn_kv;
    bool trafo = vn_parent > 1.0 && coin(rng);
    double vn = trafo ? 0.4 : vn_parent;
    t.bus.push_back({ids[i], "bus " + std::to_string(i), vn});
    if (trafo) {
      double vk = rnd(rng, 3.0, 6.0);
      t.trafo.push_back({trafo_id++, ids[parent], ids[i], rnd(rng, 0.25, 1.0), vn_parent, vn, vk, rnd(rng, 0.5, vk)});
    } else {
      t.line.push_back({line_id++, ids[parent], ids[i], rnd(rng, 0.05, 0.6), rnd(rng, 0.05, 0.4), rnd(rng, 0.01, 1.5),
                        rnd(rng, 0.1, 0.5)});
    }
  }
  auto any_bus = [&] { return pick_one(rng, ids); };
  static const std::vector<std::string> types = {"household", "commercial", "heatpump", "ev"};
  int loads = std::uniform_int_distribution<int>(0, 6)(rng);
  for (int i = 0; i < loads; ++i) {
    double p = rnd(rng, 0.0, 0.02);
    bool ctrl = coin(rng);
    t.load.push_back({i * 2, any_bus(), p, rnd(rng, -0.005, 0.005), pick_one(rng, types), ctrl,
                      p + rnd(rng, 0.0, 0.01), rnd(rng, 0.0, p)});
  }
  int sgens = std::uniform_int_distribution<int>(0, 4)(rng);
  for (int i = 0; i < sgens; ++i) {
    double p = -rnd(rng, 0.0, 0.01);
    t.sgen.push_back({i, any_bus(), p, rnd(rng, -0.002, 0.002), coin(rng) ? "PV" : "wind", coin(rng) == 1,
                      rnd(rng, p, 0.0), p - rnd(rng, 0.0, 0.005)});
  }
  int storages = std::uniform_int_distribution<int>(0, 3)(rng);
  for (int i = 0; i < storages; ++i) {
    double mx = rnd(rng, 0.001, 0.01);
    t.storage.push_back({i + 100, any_bus(), rnd(rng, -mx, mx), 0.0, coin(rng) == 1, mx, -mx, rnd(rng, 0, 100)});
  }
  return t;
}

// ------------------------------------------------------------ reachability

/// Control values reachable from the actor by Warshall transitive closure
/// over the block graph; returns (unit, control value) pairs.
inline std::set<std::pair<Term, Term>> closure_reach(const Graph& g, const Term& actor) {
  auto e = [](const char* l) { return Term::iri(std::string("http://w3id.org/errol#") + l); };
  std::vector<Term> blocks;
  std::map<Term, std::size_t> index;
  auto block_index = [&](const Term& b) {
    auto [it, fresh] = index.emplace(b, blocks.size());
    if (fresh) blocks.push_back(b);
    return it->second;
  };
  struct Flow {
    std::size_t from, to;
    Term iri;
  };
  std::vector<Flow> flows;
  for (const auto& t : g)
    if (t.predicate == e("from"))
      for (const auto& u : g)
        if (u.subject == t.subject && u.predicate == e("to"))
          flows.push_back({block_index(t.object), block_index(u.object), t.subject});
  for (const auto& t : g)
    if (t.subject == actor && t.predicate == e("hasFunctionBlock")) block_index(t.object);
  const std::size_t n = blocks.size();
  std::vector<std::vector<bool>> r(n, std::vector<bool>(n, false));
  for (std::size_t i = 0; i < n; ++i) r[i][i] = true;
  for (const auto& f : flows) r[f.from][f.to] = true;
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (r[i][k] && r[k][j]) r[i][j] = true;
  std::set<std::size_t> start;
  for (const auto& t : g)
    if (t.subject == actor && t.predicate == e("hasFunctionBlock")) start.insert(index.at(t.object));
  std::set<std::pair<Term, Term>> out;
  for (const auto& f : flows) {
    bool reachable = false;
    for (auto s : start) reachable = reachable || r[s][f.from];
    if (!reachable) continue;
    for (const auto& t : g)
      if (t.subject == f.iri && t.predicate == e("transmits"))
        for (const auto& u : g)
          if (u.subject == t.object && u.predicate == e("referencesUnit")) out.insert({u.object, t.object});
  }
  return out;
}

} // namespace cpes::oracle
