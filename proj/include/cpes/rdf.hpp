#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cpes/decimal.hpp"
#include "cpes/error.hpp"

namespace cpes::rdf {

enum class TermKind : std::uint8_t { Iri, Blank, Literal };

// Literal datatypes supported by the store. Anything else is rejected at parse.
enum class Datatype : std::uint8_t { String, Integer, Decimal, Boolean };

std::string_view datatype_iri(Datatype dt);
std::optional<Datatype> datatype_from_iri(std::string_view iri);

/// An RDF term: IRI, document-scoped blank node or typed literal.
///
/// Literals are validated on construction, so an integer/decimal/boolean
/// literal always carries a lexical form that parses under its datatype.
class Term {
public:
  Term() = default;

  static Term iri(std::string value);
  static Term blank(std::string label);
  static Term literal(std::string lexical, Datatype dt);

  static Term string(std::string value) { return literal(std::move(value), Datatype::String); }
  static Term integer(long long value);
  static Term decimal(double value);
  static Term decimal(const Decimal& value);
  static Term boolean(bool value);

  TermKind kind() const { return kind_; }
  const std::string& value() const { return value_; }
  Datatype datatype() const { return datatype_; }

  bool is_iri() const { return kind_ == TermKind::Iri; }
  bool is_blank() const { return kind_ == TermKind::Blank; }
  bool is_literal() const { return kind_ == TermKind::Literal; }
  bool is_resource() const { return kind_ != TermKind::Literal; }
  bool is_numeric() const {
    return is_literal() && (datatype_ == Datatype::Integer || datatype_ == Datatype::Decimal);
  }

  // Numeric view of integer/decimal literals.
  std::optional<Decimal> as_decimal() const;
  std::optional<double> as_double() const;
  std::optional<long long> as_integer() const;
  std::optional<bool> as_boolean() const;

  /// N-Triples style rendering, used in logs and error messages.
  std::string to_string() const;

  friend auto operator<=>(const Term&, const Term&) = default;
  friend bool operator==(const Term&, const Term&) = default;

private:
  TermKind kind_ = TermKind::Iri;
  std::string value_;
  Datatype datatype_ = Datatype::String;
};

struct Triple {
  Term subject;
  Term predicate;
  Term object;

  friend auto operator<=>(const Triple&, const Triple&) = default;
  friend bool operator==(const Triple&, const Triple&) = default;
};

/// Wildcard-able position for match/remove.
using Pattern = std::optional<Term>;

/// Set of triples with subject, predicate and object indexes.
///
/// Copies are independent values; mutation is single-writer.
class Graph {
public:
  Graph();

  bool insert(const Triple& t);
  bool insert(Term s, Term p, Term o) { return insert(Triple{std::move(s), std::move(p), std::move(o)}); }
  bool erase(const Triple& t);
  std::size_t remove(const Pattern& s, const Pattern& p, const Pattern& o);

  bool contains(const Triple& t) const { return spo_.contains(t); }
  // True if `node` occurs in subject or object position.
  bool contains_node(const Term& node) const;

  /// Triples agreeing with every bound position, in (s, p, o) order.
  std::vector<Triple> match(const Pattern& s, const Pattern& p, const Pattern& o) const;
  std::size_t count(const Pattern& s, const Pattern& p, const Pattern& o) const;

  std::vector<Term> objects(const Term& s, const Term& p) const;
  std::vector<Term> subjects(const Term& p, const Term& o) const;
  std::optional<Term> object(const Term& s, const Term& p) const;

  std::size_t size() const { return spo_.size(); }
  bool empty() const { return spo_.empty(); }
  auto begin() const { return spo_.begin(); }
  auto end() const { return spo_.end(); }

  const std::map<std::string, std::string>& prefixes() const { return prefixes_; }
  void set_prefix(std::string prefix, std::string ns) { prefixes_[std::move(prefix)] = std::move(ns); }

  /// Blank node whose label does not occur in this graph.
  Term fresh_blank();

  /// Adds all triples of `other`, renaming its blank nodes apart from ours.
  void merge(const Graph& other);

  friend bool operator==(const Graph& a, const Graph& b) { return a.spo_ == b.spo_; }

private:
  struct PosLess {
    bool operator()(const Triple& a, const Triple& b) const;
  };
  struct OspLess {
    bool operator()(const Triple& a, const Triple& b) const;
  };

  std::set<Triple> spo_;
  std::set<Triple, PosLess> pos_;
  std::set<Triple, OspLess> osp_;
  std::map<std::string, std::string> prefixes_;
  std::uint64_t next_blank_ = 0;
};

// Value-returning forms of the mutation operations.
Graph insert(Graph g, const Triple& t);
std::pair<Graph, std::size_t> remove(Graph g, const Pattern& s, const Pattern& p, const Pattern& o);
std::vector<Triple> match(const Graph& g, const Pattern& s, const Pattern& p, const Pattern& o);

class ParseError : public Error {
public:
  ParseError(std::size_t line, std::size_t column, std::string message);
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }
  const std::string& message() const { return message_; }

private:
  std::size_t line_;
  std::size_t column_;
  std::string message_;
};

/// Parses the supported Turtle subset. Standard prefixes (rdf, rdfs, xsd, sh,
/// errol) are pre-bound. Throws ParseError on anything outside the subset.
Graph parse_turtle(std::string_view text);

/// Deterministic Turtle: prefix lines, then triples in (s, p, o) order.
std::string serialize_turtle(const Graph& g);

Graph read_turtle_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view content);
std::string read_text_file(const std::string& path);

/// Expands an RDF collection starting at `head` (rdf:first/rdf:rest/rdf:nil).
std::vector<Term> read_list(const Graph& g, const Term& head);

} // namespace cpes::rdf
