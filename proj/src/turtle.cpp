#include <cctype>
#include <algorithm>
#include <map>

#include "cpes/rdf.hpp"
#include "cpes/vocab.hpp"
#include "lexer.hpp"

namespace cpes::rdf {

namespace {

using detail::Lexer;
using detail::Tok;
using detail::Token;

class TurtleParser {
public:
  explicit TurtleParser(std::string_view text) : lex_(text) {}

  Graph run() {
    for (;;) {
      Token t = lex_.peek();
      if (t.kind == Tok::End) break;
      if (t.kind == Tok::AtKeyword || (t.kind == Tok::Word && (upper(t.text) == "PREFIX" || upper(t.text) == "BASE"))) {
        directive();
        continue;
      }
      triples();
      Token end = lex_.next();
      // The final statement may omit its terminating '.'.
      if (end.kind == Tok::End) break;
      if (!end.punct(".")) lex_.fail(end, "expected '.' after triples, found " + describe(end));
    }
    return std::move(graph_);
  }

private:
  static std::string upper(std::string s) {
    for (auto& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return s;
  }

  static std::string describe(const Token& t) {
    switch (t.kind) {
    case Tok::End: return "end of input";
    case Tok::IriRef: return "<" + t.text + ">";
    case Tok::PName: return t.text + ":" + t.aux;
    case Tok::Var: return "?" + t.text;
    case Tok::String: return "string literal";
    default: return "'" + t.text + "'";
    }
  }

  void directive() {
    Token kw = lex_.next();
    bool sparql_style = kw.kind == Tok::Word;
    std::string name = sparql_style ? upper(kw.text) : kw.text;
    if (name == "prefix" || name == "PREFIX") {
      Token p = lex_.next();
      if (p.kind != Tok::PName || !p.aux.empty()) lex_.fail(p, "expected prefix name ending in ':'");
      Token iri = lex_.next();
      if (iri.kind != Tok::IriRef) lex_.fail(iri, "expected IRI in prefix declaration");
      graph_.set_prefix(p.text, resolve(iri.text));
    } else if (name == "base" || name == "BASE") {
      Token iri = lex_.next();
      if (iri.kind != Tok::IriRef) lex_.fail(iri, "expected IRI in base declaration");
      base_ = resolve(iri.text);
    } else {
      lex_.fail(kw, "unsupported directive or language tag @" + kw.text);
    }
    if (!sparql_style) {
      Token dot = lex_.next();
      if (!dot.punct(".")) lex_.fail(dot, "expected '.' after directive");
    }
  }

  std::string resolve(const std::string& iri) const {
    if (base_.empty() || iri.find(':') != std::string::npos) return iri;
    return base_ + iri;
  }

  Term make_iri(const Token& t) {
    try {
      return Term::iri(resolve(t.text));
    } catch (const Error& e) {
      lex_.fail(t, e.what());
    }
  }

  Term expand(const Token& t) {
    const auto& prefixes = graph_.prefixes();
    auto it = prefixes.find(t.text);
    if (it == prefixes.end()) lex_.fail(t, "unknown prefix '" + t.text + ":'");
    return Term::iri(it->second + t.aux);
  }

  Term blank_for(const std::string& label) {
    auto it = labels_.find(label);
    if (it != labels_.end()) return it->second;
    Term b = graph_.fresh_blank();
    labels_.emplace(label, b);
    return b;
  }

  void triples() {
    Token t = lex_.peek();
    if (t.punct("[")) {
      lex_.next();
      Term subject = graph_.fresh_blank();
      if (!lex_.peek().punct("]")) predicate_object_list(subject);
      expect("]");
      // "[ ... ] ." is a complete statement on its own.
      Token after = lex_.peek();
      if (after.punct(".") || after.kind == Tok::End) return;
      predicate_object_list(subject);
      return;
    }
    Term subject = subject_term();
    predicate_object_list(subject);
  }

  Term subject_term() {
    Token t = lex_.next();
    switch (t.kind) {
    case Tok::IriRef: return make_iri(t);
    case Tok::PName: return expand(t);
    case Tok::BlankLabel: return blank_for(t.text);
    case Tok::Punct:
      if (t.text == "(") return collection();
      break;
    default:
      break;
    }
    lex_.fail(t, "expected subject, found " + describe(t));
  }

  void predicate_object_list(const Term& subject) {
    for (;;) {
      Term predicate = verb();
      object_list(subject, predicate);
      Token t = lex_.peek();
      if (!t.punct(";")) return;
      while (lex_.peek().punct(";")) lex_.next();
      Token after = lex_.peek();
      if (after.punct(".") || after.punct("]") || after.kind == Tok::End) return;
    }
  }

  Term verb() {
    Token t = lex_.next();
    if (t.kind == Tok::Word && t.text == "a") return vocab::type();
    if (t.kind == Tok::IriRef) return make_iri(t);
    if (t.kind == Tok::PName) return expand(t);
    lex_.fail(t, "expected predicate, found " + describe(t));
  }

  void object_list(const Term& subject, const Term& predicate) {
    for (;;) {
      Term o = object_term();
      graph_.insert(Triple{subject, predicate, std::move(o)});
      if (!lex_.peek().punct(",")) return;
      lex_.next();
    }
  }

  void expect(std::string_view punct) {
    Token t = lex_.next();
    if (!t.punct(punct)) lex_.fail(t, "expected '" + std::string(punct) + "', found " + describe(t));
  }

  Term collection() {
    std::vector<Term> items;
    while (!lex_.peek().punct(")")) {
      if (lex_.peek().kind == Tok::End) lex_.fail(lex_.peek(), "unterminated collection");
      items.push_back(object_term());
    }
    lex_.next();
    Term head = vocab::rdf("nil");
    for (auto it = items.rbegin(); it != items.rend(); ++it) {
      Term cell = graph_.fresh_blank();
      graph_.insert(Triple{cell, vocab::rdf("first"), *it});
      graph_.insert(Triple{cell, vocab::rdf("rest"), head});
      head = cell;
    }
    return head;
  }

  Term literal_with(const Token& at, std::string lexical, Datatype dt) {
    try {
      return Term::literal(std::move(lexical), dt);
    } catch (const Error& e) {
      lex_.fail(at, e.what());
    }
  }

  Term object_term() {
    Token t = lex_.next();
    switch (t.kind) {
    case Tok::IriRef: return make_iri(t);
    case Tok::PName: return expand(t);
    case Tok::BlankLabel: return blank_for(t.text);
    case Tok::Integer: return literal_with(t, t.text, Datatype::Integer);
    case Tok::Decimal: return literal_with(t, t.text, Datatype::Decimal);
    case Tok::Double: lex_.fail(t, "xsd:double literals are unsupported");
    case Tok::Word:
      if (t.text == "true" || t.text == "false") return Term::boolean(t.text == "true");
      break;
    case Tok::String: return string_literal(t);
    case Tok::Punct:
      if (t.text == "(") return collection();
      if (t.text == "[") {
        Term b = graph_.fresh_blank();
        if (!lex_.peek().punct("]")) predicate_object_list(b);
        expect("]");
        return b;
      }
      break;
    default:
      break;
    }
    lex_.fail(t, "expected object, found " + describe(t));
  }

  Term string_literal(const Token& t) {
    Token n = lex_.peek();
    if (n.kind == Tok::AtKeyword) lex_.fail(n, "language tags are unsupported");
    if (!n.punct("^^")) return Term::string(t.text);
    lex_.next();
    Token dt = lex_.next();
    Term dt_iri;
    if (dt.kind == Tok::IriRef) dt_iri = make_iri(dt);
    else if (dt.kind == Tok::PName) dt_iri = expand(dt);
    else lex_.fail(dt, "expected datatype IRI");
    auto datatype = datatype_from_iri(dt_iri.value());
    if (!datatype) lex_.fail(dt, "unsupported datatype " + dt_iri.value());
    return literal_with(t, t.text, *datatype);
  }

  Lexer lex_;
  Graph graph_;
  std::string base_;
  std::map<std::string, Term> labels_;
};

bool safe_local(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!(detail::is_name_char(c) || c == '.')) return false;
  return s.back() != '.' && s.front() != '.' && s.front() != '-';
}

class TurtleWriter {
public:
  explicit TurtleWriter(const Graph& g) : g_(g) {}

  std::string run() {
    std::string out;
    for (const auto& [prefix, ns] : g_.prefixes()) out += "@prefix " + prefix + ": <" + ns + "> .\n";
    const Term* current = nullptr;
    const Term* current_pred = nullptr;
    for (const auto& t : g_) {
      if (!current || *current != t.subject) {
        if (current) out += " .\n";
        out += "\n" + term(t.subject) + "\n    " + predicate(t.predicate) + " " + term(t.object);
        current = &t.subject;
        current_pred = &t.predicate;
      } else if (*current_pred != t.predicate) {
        out += " ;\n    " + predicate(t.predicate) + " " + term(t.object);
        current_pred = &t.predicate;
      } else {
        out += " ,\n        " + term(t.object);
      }
    }
    if (current) out += " .\n";
    return out;
  }

private:
  std::string iri(const std::string& value) const {
    const std::string* best_prefix = nullptr;
    std::size_t best_len = 0;
    for (const auto& [prefix, ns] : g_.prefixes()) {
      if (ns.size() > best_len && value.size() > ns.size() && value.compare(0, ns.size(), ns) == 0 &&
          safe_local(std::string_view(value).substr(ns.size()))) {
        best_prefix = &prefix;
        best_len = ns.size();
      }
    }
    if (best_prefix) return *best_prefix + ":" + value.substr(best_len);
    return "<" + value + ">";
  }

  std::string predicate(const Term& p) const {
    if (p == vocab::type()) return "a";
    return iri(p.value());
  }

  std::string term(const Term& t) const {
    switch (t.kind()) {
    case TermKind::Iri: return iri(t.value());
    case TermKind::Blank: return "_:" + t.value();
    case TermKind::Literal: {
      std::string s = Term::string(t.value()).to_string();
      if (t.datatype() != Datatype::String) s += "^^" + iri(std::string(datatype_iri(t.datatype())));
      return s;
    }
    }
    return {};
  }

  const Graph& g_;
};

} // namespace

Graph parse_turtle(std::string_view text) { return TurtleParser(text).run(); }

std::string serialize_turtle(const Graph& g) { return TurtleWriter(g).run(); }

} // namespace cpes::rdf
