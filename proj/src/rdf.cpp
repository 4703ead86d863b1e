#include "cpes/rdf.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <tuple>

#include "cpes/vocab.hpp"

namespace cpes::rdf {

namespace {

bool valid_lexical(std::string_view lex, Datatype dt) {
  switch (dt) {
  case Datatype::String:
    return true;
  case Datatype::Integer: {
    if (lex.empty()) return false;
    std::size_t i = (lex[0] == '+' || lex[0] == '-') ? 1 : 0;
    if (i == lex.size()) return false;
    for (; i < lex.size(); ++i)
      if (lex[i] < '0' || lex[i] > '9') return false;
    return true;
  }
  case Datatype::Decimal:
    return Decimal::parse(lex).has_value();
  case Datatype::Boolean:
    return lex == "true" || lex == "false" || lex == "1" || lex == "0";
  }
  return false;
}

void escape_into(std::string& out, std::string_view s) {
  for (char c : s) {
    switch (c) {
    case '"': out += "\\\""; break;
    case '\\': out += "\\\\"; break;
    case '\n': out += "\\n"; break;
    case '\r': out += "\\r"; break;
    case '\t': out += "\\t"; break;
    default: out += c;
    }
  }
}

// Smallest possible term; used as lower bound for index range scans.
const Term& min_term() {
  static const Term t;
  return t;
}

} // namespace

std::string_view datatype_iri(Datatype dt) {
  switch (dt) {
  case Datatype::String: return "http://www.w3.org/2001/XMLSchema#string";
  case Datatype::Integer: return "http://www.w3.org/2001/XMLSchema#integer";
  case Datatype::Decimal: return "http://www.w3.org/2001/XMLSchema#decimal";
  case Datatype::Boolean: return "http://www.w3.org/2001/XMLSchema#boolean";
  }
  return {};
}

std::optional<Datatype> datatype_from_iri(std::string_view iri) {
  for (auto dt : {Datatype::String, Datatype::Integer, Datatype::Decimal, Datatype::Boolean})
    if (datatype_iri(dt) == iri) return dt;
  return std::nullopt;
}

Term Term::iri(std::string value) {
  if (value.empty()) throw Error("IRI must not be empty");
  for (char c : value)
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r')
      throw Error("IRI contains whitespace: " + value);
  Term t;
  t.kind_ = TermKind::Iri;
  t.value_ = std::move(value);
  return t;
}

Term Term::blank(std::string label) {
  if (label.empty()) throw Error("blank node label must not be empty");
  Term t;
  t.kind_ = TermKind::Blank;
  t.value_ = std::move(label);
  return t;
}

Term Term::literal(std::string lexical, Datatype dt) {
  if (!valid_lexical(lexical, dt))
    throw Error("\"" + lexical + "\" is not a valid " + std::string(datatype_iri(dt)));
  Term t;
  t.kind_ = TermKind::Literal;
  t.value_ = std::move(lexical);
  t.datatype_ = dt;
  return t;
}

Term Term::integer(long long value) { return literal(std::to_string(value), Datatype::Integer); }
Term Term::decimal(double value) { return literal(Decimal::format(value), Datatype::Decimal); }
Term Term::decimal(const Decimal& value) { return literal(value.canonical(), Datatype::Decimal); }
Term Term::boolean(bool value) { return literal(value ? "true" : "false", Datatype::Boolean); }

std::optional<Decimal> Term::as_decimal() const {
  if (!is_numeric()) return std::nullopt;
  return Decimal::parse(value_);
}

std::optional<double> Term::as_double() const {
  auto d = as_decimal();
  if (!d) return std::nullopt;
  return d->to_double();
}

std::optional<long long> Term::as_integer() const {
  if (!is_literal() || datatype_ != Datatype::Integer) return std::nullopt;
  return std::stoll(value_);
}

std::optional<bool> Term::as_boolean() const {
  if (!is_literal() || datatype_ != Datatype::Boolean) return std::nullopt;
  return value_ == "true" || value_ == "1";
}

std::string Term::to_string() const {
  std::string out;
  switch (kind_) {
  case TermKind::Iri:
    out = "<" + value_ + ">";
    break;
  case TermKind::Blank:
    out = "_:" + value_;
    break;
  case TermKind::Literal:
    out = "\"";
    escape_into(out, value_);
    out += "\"";
    if (datatype_ != Datatype::String) {
      out += "^^<";
      out += datatype_iri(datatype_);
      out += ">";
    }
    break;
  }
  return out;
}

bool Graph::PosLess::operator()(const Triple& a, const Triple& b) const {
  return std::tie(a.predicate, a.object, a.subject) < std::tie(b.predicate, b.object, b.subject);
}

bool Graph::OspLess::operator()(const Triple& a, const Triple& b) const {
  return std::tie(a.object, a.subject, a.predicate) < std::tie(b.object, b.subject, b.predicate);
}

Graph::Graph() {
  prefixes_["rdf"] = std::string(vocab::rdf_ns);
  prefixes_["rdfs"] = std::string(vocab::rdfs_ns);
  prefixes_["xsd"] = std::string(vocab::xsd_ns);
  prefixes_["sh"] = std::string(vocab::sh_ns);
  prefixes_["errol"] = std::string(vocab::errol_ns);
}

bool Graph::insert(const Triple& t) {
  if (t.subject.is_literal()) throw Error("literal in subject position: " + t.subject.to_string());
  if (!t.predicate.is_iri()) throw Error("predicate must be an IRI: " + t.predicate.to_string());
  if (!spo_.insert(t).second) return false;
  pos_.insert(t);
  osp_.insert(t);
  return true;
}

bool Graph::erase(const Triple& t) {
  if (spo_.erase(t) == 0) return false;
  pos_.erase(t);
  osp_.erase(t);
  return true;
}

std::size_t Graph::remove(const Pattern& s, const Pattern& p, const Pattern& o) {
  auto doomed = match(s, p, o);
  for (const auto& t : doomed) erase(t);
  return doomed.size();
}

bool Graph::contains_node(const Term& node) const {
  auto it = spo_.lower_bound(Triple{node, min_term(), min_term()});
  if (it != spo_.end() && it->subject == node) return true;
  auto jt = osp_.lower_bound(Triple{min_term(), min_term(), node});
  return jt != osp_.end() && jt->object == node;
}

std::vector<Triple> Graph::match(const Pattern& s, const Pattern& p, const Pattern& o) const {
  std::vector<Triple> out;
  auto agrees = [&](const Triple& t) {
    return (!s || t.subject == *s) && (!p || t.predicate == *p) && (!o || t.object == *o);
  };
  if (s) {
    Triple lo{*s, p ? *p : min_term(), (p && o) ? *o : min_term()};
    for (auto it = spo_.lower_bound(lo); it != spo_.end() && it->subject == *s; ++it) {
      if (p && it->predicate != *p) break;
      if (agrees(*it)) out.push_back(*it);
    }
    return out;
  }
  if (p) {
    Triple lo{min_term(), *p, o ? *o : min_term()};
    for (auto it = pos_.lower_bound(lo); it != pos_.end() && it->predicate == *p; ++it) {
      if (o && it->object != *o) break;
      out.push_back(*it);
    }
    std::sort(out.begin(), out.end());
    return out;
  }
  if (o) {
    Triple lo{min_term(), min_term(), *o};
    for (auto it = osp_.lower_bound(lo); it != osp_.end() && it->object == *o; ++it) out.push_back(*it);
    std::sort(out.begin(), out.end());
    return out;
  }
  out.assign(spo_.begin(), spo_.end());
  return out;
}

std::size_t Graph::count(const Pattern& s, const Pattern& p, const Pattern& o) const {
  return match(s, p, o).size();
}

std::vector<Term> Graph::objects(const Term& s, const Term& p) const {
  std::vector<Term> out;
  for (auto& t : match(s, p, std::nullopt)) out.push_back(t.object);
  return out;
}

std::vector<Term> Graph::subjects(const Term& p, const Term& o) const {
  std::vector<Term> out;
  for (auto& t : match(std::nullopt, p, o)) out.push_back(t.subject);
  return out;
}

std::optional<Term> Graph::object(const Term& s, const Term& p) const {
  auto it = spo_.lower_bound(Triple{s, p, min_term()});
  if (it != spo_.end() && it->subject == s && it->predicate == p) return it->object;
  return std::nullopt;
}

Term Graph::fresh_blank() {
  for (;;) {
    Term b = Term::blank("b" + std::to_string(++next_blank_));
    if (!contains_node(b)) return b;
  }
}

void Graph::merge(const Graph& other) {
  std::map<Term, Term> renamed;
  auto rename = [&](const Term& t) -> Term {
    if (!t.is_blank()) return t;
    auto it = renamed.find(t);
    if (it != renamed.end()) return it->second;
    Term fresh = fresh_blank();
    // Reserve the label before the next fresh_blank call.
    renamed.emplace(t, fresh);
    return fresh;
  };
  // Collect first so that fresh labels never collide with the incoming ones.
  std::vector<Triple> incoming;
  for (const auto& t : other) incoming.push_back(Triple{rename(t.subject), t.predicate, rename(t.object)});
  for (auto& t : incoming) insert(t);
  for (const auto& [p, ns] : other.prefixes()) prefixes_.try_emplace(p, ns);
}

Graph insert(Graph g, const Triple& t) {
  g.insert(t);
  return g;
}

std::pair<Graph, std::size_t> remove(Graph g, const Pattern& s, const Pattern& p, const Pattern& o) {
  std::size_t n = g.remove(s, p, o);
  return {std::move(g), n};
}

std::vector<Triple> match(const Graph& g, const Pattern& s, const Pattern& p, const Pattern& o) {
  return g.match(s, p, o);
}

ParseError::ParseError(std::size_t line, std::size_t column, std::string message)
    : Error(std::to_string(line) + ":" + std::to_string(column) + ": " + message),
      line_(line), column_(column), message_(std::move(message)) {}

Graph read_turtle_file(const std::string& path) { return parse_turtle(read_text_file(path)); }

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path);
  out << content;
  if (!out) throw Error("write failed: " + path);
}

std::vector<Term> read_list(const Graph& g, const Term& head) {
  std::vector<Term> items;
  const Term nil = vocab::rdf("nil");
  Term cur = head;
  std::set<Term> seen;
  while (cur != nil) {
    if (!seen.insert(cur).second) throw Error("cyclic RDF list at " + cur.to_string());
    auto first = g.object(cur, vocab::rdf("first"));
    auto rest = g.object(cur, vocab::rdf("rest"));
    if (!first || !rest) throw Error("malformed RDF list at " + cur.to_string());
    items.push_back(*first);
    cur = *rest;
  }
  return items;
}

} // namespace cpes::rdf
