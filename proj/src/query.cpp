#include "cpes/query.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "cpes/vocab.hpp"
#include "lexer.hpp"

namespace cpes::query {

using rdf::ParseError;
using rdf::Term;
using rdf::detail::Lexer;
using rdf::detail::Tok;
using rdf::detail::Token;

bool SelectQuery::projects(std::string_view name) const {
  return std::any_of(projected.begin(), projected.end(), [&](const Variable& v) { return v.name == name; });
}

namespace {

std::string upper(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

const std::set<std::string>& unsupported_keywords() {
  static const std::set<std::string> kw = {
      "OPTIONAL", "UNION", "MINUS", "GRAPH", "SERVICE", "BIND", "VALUES", "ORDER", "GROUP", "HAVING",
      "LIMIT", "OFFSET", "CONSTRUCT", "ASK", "DESCRIBE", "INSERT", "DELETE", "LOAD", "CLEAR", "EXISTS",
      "NOT", "FROM", "NAMED", "COUNT", "SUM", "MIN", "MAX", "AVG", "REGEX", "BOUND", "STR"};
  return kw;
}

class SelectParser {
public:
  SelectParser(std::string_view text, const std::map<std::string, std::string>& prefixes) : lex_(text) {
    rdf::Graph defaults;
    prefixes_ = defaults.prefixes();
    for (const auto& [p, ns] : prefixes) prefixes_[p] = ns;
  }

  SelectQuery run() {
    SelectQuery q;
    for (;;) {
      Token t = lex_.peek();
      if (t.kind == Tok::Word && upper(t.text) == "PREFIX") {
        lex_.next();
        Token p = lex_.next();
        if (p.kind != Tok::PName || !p.aux.empty()) lex_.fail(p, "expected prefix name ending in ':'");
        Token iri = lex_.next();
        if (iri.kind != Tok::IriRef) lex_.fail(iri, "expected IRI in PREFIX");
        prefixes_[p.text] = iri.text;
        continue;
      }
      break;
    }

    Token select = lex_.next();
    reject_unsupported(select);
    if (select.kind != Tok::Word || upper(select.text) != "SELECT") lex_.fail(select, "expected SELECT");

    bool star = false;
    if (Token t = lex_.peek(); t.kind == Tok::Word && (upper(t.text) == "DISTINCT" || upper(t.text) == "REDUCED"))
      lex_.next();
    if (lex_.peek().punct("*")) {
      lex_.next();
      star = true;
    } else {
      while (lex_.peek().kind == Tok::Var) q.projected.push_back(Variable{lex_.next().text});
      if (q.projected.empty()) lex_.fail(lex_.peek(), "expected projected variables");
    }

    Token t = lex_.next();
    reject_unsupported(t);
    if (t.kind == Tok::Word && upper(t.text) == "WHERE") t = lex_.next();
    if (!t.punct("{")) lex_.fail(t, "expected '{'");

    group(q);

    Token tail = lex_.next();
    reject_unsupported(tail);
    if (tail.kind != Tok::End) lex_.fail(tail, "unexpected trailing input");

    std::set<std::string> in_patterns;
    std::vector<Variable> order;
    auto note = [&](const PatternTerm& pt) {
      if (auto v = std::get_if<Variable>(&pt); v && in_patterns.insert(v->name).second) order.push_back(*v);
    };
    for (const auto& p : q.patterns) {
      note(p.subject);
      note(p.predicate);
      note(p.object);
    }
    if (star) q.projected = order;
    for (const auto& v : q.projected)
      if (!in_patterns.contains(v.name))
        throw ParseError(select.line, select.column, "projected variable ?" + v.name + " does not occur in any pattern");
    for (const auto& f : q.filters) {
      if (!in_patterns.contains(f.left.name))
        throw ParseError(select.line, select.column, "filter variable ?" + f.left.name + " does not occur in any pattern");
      if (auto v = std::get_if<Variable>(&f.right); v && !in_patterns.contains(v->name))
        throw ParseError(select.line, select.column, "filter variable ?" + v->name + " does not occur in any pattern");
    }
    return q;
  }

private:
  void reject_unsupported(const Token& t) {
    if (t.kind != Tok::Word) return;
    std::string kw = upper(t.text);
    if (unsupported_keywords().contains(kw)) lex_.fail(t, kw + " unsupported");
  }

  void group(SelectQuery& q) {
    for (;;) {
      Token t = lex_.peek();
      if (t.punct("}")) {
        lex_.next();
        return;
      }
      if (t.kind == Tok::End) lex_.fail(t, "unterminated group pattern");
      if (t.punct("{")) lex_.fail(t, "nested group patterns unsupported");
      if (t.punct(".")) {
        lex_.next();
        continue;
      }
      if (t.kind == Tok::Word) {
        reject_unsupported(t);
        if (upper(t.text) == "FILTER") {
          lex_.next();
          q.filters.push_back(filter());
          continue;
        }
      }
      triples_block(q);
    }
  }

  PatternTerm node(const Token& t, bool predicate_position) {
    switch (t.kind) {
    case Tok::Var: return Variable{t.text};
    case Tok::IriRef: return Term::iri(t.text);
    case Tok::PName: return expand(t);
    case Tok::Word:
      if (predicate_position && t.text == "a") return vocab::type();
      if (!predicate_position && (t.text == "true" || t.text == "false")) return Term::boolean(t.text == "true");
      reject_unsupported(t);
      break;
    case Tok::BlankLabel: lex_.fail(t, "blank nodes unsupported in queries");
    case Tok::Punct:
      if (t.text == "[" || t.text == "(") lex_.fail(t, "blank nodes and collections unsupported in queries");
      break;
    default:
      if (!predicate_position) return literal(t);
    }
    lex_.fail(t, predicate_position ? "expected predicate" : "expected term");
  }

  Term literal(const Token& t) {
    try {
      switch (t.kind) {
      case Tok::Integer: return Term::literal(t.text, rdf::Datatype::Integer);
      case Tok::Decimal: return Term::literal(t.text, rdf::Datatype::Decimal);
      case Tok::String: {
        if (lex_.peek().kind == Tok::AtKeyword) lex_.fail(lex_.peek(), "language tags unsupported");
        if (!lex_.peek().punct("^^")) return Term::string(t.text);
        lex_.next();
        Token dt = lex_.next();
        std::string iri;
        if (dt.kind == Tok::IriRef) iri = dt.text;
        else if (dt.kind == Tok::PName) iri = expand(dt).value();
        else lex_.fail(dt, "expected datatype IRI");
        auto datatype = rdf::datatype_from_iri(iri);
        if (!datatype) lex_.fail(dt, "unsupported datatype " + iri);
        return Term::literal(t.text, *datatype);
      }
      default:
        break;
      }
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      lex_.fail(t, e.what());
    }
    if (t.kind == Tok::Double) lex_.fail(t, "xsd:double literals unsupported");
    lex_.fail(t, "expected term");
  }

  Term expand(const Token& t) {
    auto it = prefixes_.find(t.text);
    if (it == prefixes_.end()) lex_.fail(t, "unknown prefix '" + t.text + ":'");
    return Term::iri(it->second + t.aux);
  }

  void triples_block(SelectQuery& q) {
    Token st = lex_.next();
    PatternTerm subject = node(st, false);
    if (auto term = std::get_if<Term>(&subject); term && term->is_literal()) lex_.fail(st, "literal subject");
    for (;;) {
      PatternTerm predicate = node(lex_.next(), true);
      for (;;) {
        PatternTerm object = node(lex_.next(), false);
        q.patterns.push_back(TriplePattern{subject, predicate, object});
        if (!lex_.peek().punct(",")) break;
        lex_.next();
      }
      if (!lex_.peek().punct(";")) break;
      while (lex_.peek().punct(";")) lex_.next();
      Token after = lex_.peek();
      if (after.punct(".") || after.punct("}")) break;
    }
    Token t = lex_.peek();
    if (t.punct(".")) {
      lex_.next();
    } else if (!t.punct("}") && !(t.kind == Tok::Word && upper(t.text) == "FILTER")) {
      reject_unsupported(t);
      lex_.fail(t, "expected '.' or '}' after triple pattern");
    }
  }

  CompareOp op_of(const Token& t) {
    if (t.kind == Tok::Op) {
      if (t.text == "=") return CompareOp::Eq;
      if (t.text == "!=") return CompareOp::Ne;
      if (t.text == "<") return CompareOp::Lt;
      if (t.text == "<=") return CompareOp::Le;
      if (t.text == ">") return CompareOp::Gt;
      if (t.text == ">=") return CompareOp::Ge;
      lex_.fail(t, "operator " + t.text + " unsupported in FILTER");
    }
    lex_.fail(t, "expected comparison operator");
  }

  static CompareOp flip(CompareOp op) {
    switch (op) {
    case CompareOp::Lt: return CompareOp::Gt;
    case CompareOp::Le: return CompareOp::Ge;
    case CompareOp::Gt: return CompareOp::Lt;
    case CompareOp::Ge: return CompareOp::Le;
    default: return op;
    }
  }

  Filter filter() {
    Token open = lex_.next();
    if (!open.punct("(")) {
      reject_unsupported(open);
      lex_.fail(open, "expected '(' after FILTER");
    }
    Token lt = lex_.next();
    if (lt.kind == Tok::Word && lex_.peek().punct("(")) lex_.fail(lt, upper(lt.text) + " unsupported");
    if (lt.is(Tok::Op, "!")) lex_.fail(lt, "negation unsupported in FILTER");
    PatternTerm left = node(lt, false);
    CompareOp op = op_of(lex_.next());
    Token rt = lex_.next();
    PatternTerm right = node(rt, false);
    Token close = lex_.next();
    if (close.kind == Tok::Op) lex_.fail(close, "operator " + close.text + " unsupported in FILTER");
    if (!close.punct(")")) lex_.fail(close, "expected ')' closing FILTER");

    if (std::holds_alternative<Variable>(left)) return Filter{std::get<Variable>(left), op, right};
    if (std::holds_alternative<Variable>(right)) return Filter{std::get<Variable>(right), flip(op), left};
    lex_.fail(lt, "FILTER needs at least one variable");
  }

  Lexer lex_;
  std::map<std::string, std::string> prefixes_;
};

// Compiled query: variables replaced by slot indexes.
struct Slot {
  bool is_var = false;
  std::size_t var = 0;
  Term term;
};

struct CompiledPattern {
  Slot s, p, o;
};

struct CompiledFilter {
  std::size_t left = 0;
  CompareOp op = CompareOp::Eq;
  Slot right;
  std::size_t ready_after = 0; // pattern index after which all operands are bound
};

class Evaluator {
public:
  Evaluator(const rdf::Graph& g, const SelectQuery& q) : g_(g) {
    auto slot = [&](const PatternTerm& pt) {
      Slot s;
      if (auto v = std::get_if<Variable>(&pt)) {
        s.is_var = true;
        s.var = index_of(v->name);
      } else {
        s.term = std::get<Term>(pt);
      }
      return s;
    };
    for (const auto& p : q.patterns) patterns_.push_back({slot(p.subject), slot(p.predicate), slot(p.object)});
    std::vector<std::size_t> first_bound(names_.size(), 0);
    for (std::size_t i = patterns_.size(); i-- > 0;) {
      for (const Slot* s : {&patterns_[i].s, &patterns_[i].p, &patterns_[i].o})
        if (s->is_var) first_bound[s->var] = i;
    }
    for (const auto& f : q.filters) {
      CompiledFilter cf;
      cf.left = index_of(f.left.name);
      cf.op = f.op;
      cf.right = slot(f.right);
      cf.ready_after = first_bound[cf.left];
      if (cf.right.is_var) cf.ready_after = std::max(cf.ready_after, first_bound[cf.right.var]);
      filters_.push_back(cf);
    }
    for (const auto& v : q.projected) projection_.push_back(index_of(v.name));
    binding_.resize(names_.size());
    // ?x = <iri> can only hold for that exact node, so the scan can use it.
    pinned_.resize(names_.size());
    for (const auto& f : filters_)
      if (f.op == CompareOp::Eq && !f.right.is_var && !f.right.term.is_literal()) pinned_[f.left] = f.right.term;
  }

  std::vector<BindingSet> run(const SelectQuery& q) {
    if (!patterns_.empty()) step(0);
    std::vector<BindingSet> out;
    out.reserve(rows_.size());
    for (const auto& row : rows_) {
      BindingSet b;
      for (std::size_t i = 0; i < row.size(); ++i) b.emplace(q.projected[i].name, row[i]);
      out.push_back(std::move(b));
    }
    return out;
  }

private:
  std::size_t index_of(const std::string& name) {
    for (std::size_t i = 0; i < names_.size(); ++i)
      if (names_[i] == name) return i;
    names_.push_back(name);
    return names_.size() - 1;
  }

  std::optional<Term> resolve(const Slot& s) const {
    if (!s.is_var) return s.term;
    if (binding_[s.var]) return binding_[s.var];
    return pinned_[s.var];
  }

  bool bind(const Slot& s, const Term& value, std::vector<std::size_t>& newly) {
    if (!s.is_var) return true;
    auto& b = binding_[s.var];
    if (b) return *b == value;
    b = value;
    newly.push_back(s.var);
    return true;
  }

  bool filters_hold(std::size_t pattern_index) const {
    for (const auto& f : filters_) {
      if (f.ready_after != pattern_index) continue;
      auto r = compare(*binding_[f.left], f.op, *resolve(f.right));
      if (!r || !*r) return false;
    }
    return true;
  }

  void step(std::size_t i) {
    if (i == patterns_.size()) {
      std::vector<Term> row;
      row.reserve(projection_.size());
      for (auto v : projection_) row.push_back(*binding_[v]);
      rows_.insert(std::move(row));
      return;
    }
    const auto& pat = patterns_[i];
    auto s = resolve(pat.s);
    auto p = resolve(pat.p);
    auto o = resolve(pat.o);
    if (s && s->is_literal()) return;
    if (p && !p->is_iri()) return;
    for (const auto& t : g_.match(s, p, o)) {
      std::vector<std::size_t> newly;
      if (bind(pat.s, t.subject, newly) && bind(pat.p, t.predicate, newly) && bind(pat.o, t.object, newly) &&
          filters_hold(i))
        step(i + 1);
      for (auto v : newly) binding_[v].reset();
    }
  }

  const rdf::Graph& g_;
  std::vector<std::string> names_;
  std::vector<CompiledPattern> patterns_;
  std::vector<CompiledFilter> filters_;
  std::vector<std::size_t> projection_;
  std::vector<std::optional<Term>> binding_;
  std::vector<std::optional<Term>> pinned_;
  std::set<std::vector<Term>> rows_;
};

template <typename T>
bool apply_op(const T& a, CompareOp op, const T& b) {
  switch (op) {
  case CompareOp::Eq: return a == b;
  case CompareOp::Ne: return a != b;
  case CompareOp::Lt: return a < b;
  case CompareOp::Le: return a <= b;
  case CompareOp::Gt: return a > b;
  case CompareOp::Ge: return a >= b;
  }
  return false;
}

} // namespace

std::optional<bool> compare(const Term& a, CompareOp op, const Term& b) {
  if (a.is_numeric() && b.is_numeric()) return apply_op(*a.as_decimal(), op, *b.as_decimal());
  if (a.kind() != b.kind()) return std::nullopt;
  bool equality = op == CompareOp::Eq || op == CompareOp::Ne;
  if (a.is_literal()) {
    if (a.datatype() != b.datatype()) return std::nullopt;
    if (a.datatype() == rdf::Datatype::Boolean) return apply_op(*a.as_boolean(), op, *b.as_boolean());
    return apply_op(a.value(), op, b.value());
  }
  if (!equality) return std::nullopt;
  return apply_op(a.value(), op, b.value());
}

SelectQuery parse_select(std::string_view text, const std::map<std::string, std::string>& prefixes) {
  return SelectParser(text, prefixes).run();
}

std::vector<BindingSet> evaluate(const rdf::Graph& graph, const SelectQuery& query) {
  return Evaluator(graph, query).run(query);
}

} // namespace cpes::query
