#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "cpes/rdf.hpp"

// SELECT queries over basic graph patterns with comparison FILTERs.
namespace cpes::query {

struct Variable {
  std::string name; // without the leading '?'

  friend auto operator<=>(const Variable&, const Variable&) = default;
};

using PatternTerm = std::variant<rdf::Term, Variable>;

struct TriplePattern {
  PatternTerm subject;
  PatternTerm predicate;
  PatternTerm object;
};

enum class CompareOp { Eq, Ne, Lt, Le, Gt, Ge };

struct Filter {
  Variable left;
  CompareOp op = CompareOp::Eq;
  PatternTerm right;
};

struct SelectQuery {
  std::vector<Variable> projected;
  std::vector<TriplePattern> patterns;
  std::vector<Filter> filters;

  bool projects(std::string_view name) const;
};

/// One solution: projected variable name -> bound term.
using BindingSet = std::map<std::string, rdf::Term>;

/// Parses `PREFIX* SELECT vars WHERE { patterns FILTER(...)* }`.
/// `prefixes` seeds the prefix table (the standard ones are always bound).
/// Throws rdf::ParseError naming the offending keyword for anything outside
/// the subset.
SelectQuery parse_select(std::string_view text, const std::map<std::string, std::string>& prefixes = {});

/// All distinct solutions, ordered lexicographically over the projected
/// variables. Filters that raise a type error drop the candidate.
std::vector<BindingSet> evaluate(const rdf::Graph& graph, const SelectQuery& query);

/// FILTER comparison; nullopt signals a type error.
std::optional<bool> compare(const rdf::Term& a, CompareOp op, const rdf::Term& b);

} // namespace cpes::query
