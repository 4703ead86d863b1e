#include "cpes/augment.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <set>

#include <json.hpp>

#include "cpes/vocab.hpp"

namespace cpes::augment {

using rdf::Term;
using rdf::Triple;
using vocab::rule;

PostValidationError::PostValidationError(shacl::ValidationReport report)
    : Error("augmented graph does not conform (" + std::to_string(report.violations.size()) + " violations)"),
      report_(std::move(report)) {}

std::vector<double> AugmentationRule::template_probabilities() const {
  double total = 0.0;
  for (const auto& t : templates) total += t.weight;
  std::vector<double> out;
  for (const auto& t : templates) out.push_back(t.weight / total);
  return out;
}

namespace {

bool in_ns(const Term& t, std::string_view ns) { return t.is_iri() && t.value().starts_with(ns); }
std::string after_ns(const Term& t, std::string_view ns) { return t.value().substr(ns.size()); }

std::string rule_name(const Term& t) { return t.to_string(); }

const Term& one(const rdf::Graph& g, const Term& s, const Term& p, std::vector<Term>& storage) {
  storage = g.objects(s, p);
  if (storage.size() != 1) throw RuleError(rule_name(s) + " needs exactly one " + p.to_string());
  return storage.front();
}

std::string string_of(const rdf::Graph& g, const Term& s, const Term& p) {
  std::vector<Term> tmp;
  const Term& v = one(g, s, p, tmp);
  if (!v.is_literal() || v.datatype() != rdf::Datatype::String)
    throw RuleError(rule_name(s) + ": " + p.to_string() + " must be a string");
  return v.value();
}

Decimal number_of(const rdf::Graph& g, const Term& s, const Term& p) {
  std::vector<Term> tmp;
  const Term& v = one(g, s, p, tmp);
  auto d = v.as_decimal();
  if (!d) throw RuleError(rule_name(s) + ": " + p.to_string() + " must be numeric");
  return *d;
}

std::vector<Statement> statements_of(const rdf::Graph& g, const Term& owner, const Term& pred) {
  std::vector<Statement> out;
  for (const auto& head : g.objects(owner, pred)) {
    std::vector<Term> items;
    try {
      items = rdf::read_list(g, head);
    } catch (const Error& e) {
      throw RuleError(rule_name(owner) + ": " + e.what());
    }
    if (items.size() != 3) throw RuleError(rule_name(owner) + ": statements must be lists of three terms");
    out.push_back({items[0], items[1], items[2]});
  }
  std::sort(out.begin(), out.end());
  return out;
}

void check_anchor(const AugmentationRule& r) {
  if (!r.selector.projects(r.anchor))
    throw RuleError(rule_name(r.iri) + ": anchor ?" + r.anchor + " is not projected by the selector");
}

query::SelectQuery compile_selector(const Term& iri, const std::string& text,
                                    const std::map<std::string, std::string>& prefixes) {
  try {
    return query::parse_select(text, prefixes);
  } catch (const rdf::ParseError& e) {
    throw RuleError(rule_name(iri) + ": selector does not parse: " + e.what());
  }
}

// Uniform double in [0, 1) from the top 53 bits; identical on every platform.
double uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

class Applier {
public:
  Applier(rdf::Graph& g, const AugmentationRule& r, std::uint64_t seed, InstanceCounters& counters)
      : g_(g), rule_(r), rng_(seed), counters_(counters) {}

  AppliedLog run() {
    AppliedLog log{rule_.iri, {}};
    auto solutions = query::evaluate(g_, rule_.selector);
    std::stable_sort(solutions.begin(), solutions.end(), [&](const auto& a, const auto& b) {
      return a.at(rule_.anchor) < b.at(rule_.anchor);
    });
    auto probabilities = rule_.template_probabilities();
    for (const auto& binding : solutions) {
      double u1 = uniform(rng_);
      if (!(u1 < rule_.p_apply)) continue;
      LogEntry entry;
      entry.anchor = binding.at(rule_.anchor);
      switch (rule_.kind) {
      case RuleKind::Add: {
        double u2 = uniform(rng_);
        std::size_t pick = probabilities.size() - 1;
        double cumulative = 0.0;
        for (std::size_t i = 0; i < probabilities.size(); ++i) {
          cumulative += probabilities[i];
          if (u2 < cumulative) {
            pick = i;
            break;
          }
        }
        entry.template_index = pick;
        instantiate(rule_.templates[pick], binding, entry);
        break;
      }
      case RuleKind::Change:
        change(binding, entry);
        break;
      case RuleKind::Delete:
        erase(binding, entry);
        break;
      }
      log.entries.push_back(std::move(entry));
    }
    return log;
  }

private:
  Term bound(const query::BindingSet& binding, const std::string& var) const {
    auto it = binding.find(var);
    if (it == binding.end())
      throw BindError(rule_name(rule_.iri) + ": template references unbound variable ?" + var);
    return it->second;
  }

  Term mint(const std::string& template_name) {
    auto& n = counters_[template_name];
    for (;;) {
      Term candidate = vocab::errol("inst/" + template_name + "/" + std::to_string(++n));
      if (!g_.contains_node(candidate)) return candidate;
    }
  }

  void instantiate(const Template& tpl, const query::BindingSet& binding, LogEntry& entry) {
    std::map<std::string, Term> fresh;
    for (const auto& st : tpl.statements)
      for (const auto& t : st)
        if (in_ns(t, vocab::fresh_ns)) fresh.emplace(after_ns(t, vocab::fresh_ns), Term{});
    for (auto& [slot, iri] : fresh) iri = mint(tpl.name);

    auto resolve = [&](const Term& t) -> Term {
      if (in_ns(t, vocab::var_ns)) return bound(binding, after_ns(t, vocab::var_ns));
      if (in_ns(t, vocab::fresh_ns)) return fresh.at(after_ns(t, vocab::fresh_ns));
      if (in_ns(t, vocab::singleton_ns)) return vocab::errol(after_ns(t, vocab::singleton_ns));
      return t;
    };
    std::vector<Triple> triples;
    for (const auto& st : tpl.statements) {
      Triple t{resolve(st[0]), resolve(st[1]), resolve(st[2])};
      if (t.subject.is_literal() || !t.predicate.is_iri())
        throw BindError(rule_name(rule_.iri) + ": template " + tpl.name + " produced an invalid triple");
      triples.push_back(std::move(t));
    }
    for (auto& t : triples)
      if (g_.insert(t)) entry.added.push_back(std::move(t));
  }

  void change(const query::BindingSet& binding, LogEntry& entry) {
    const Term& subject = entry.anchor;
    if (subject.is_literal()) throw BindError(rule_name(rule_.iri) + ": anchor bound to a literal");
    Term value;
    const auto& src = rule_.value;
    if (src.constant) {
      value = *src.constant;
    } else {
      value = bound(binding, src.variable);
      if (src.clamp_min || src.clamp_max) {
        auto num = value.as_decimal();
        if (!num) throw BindError(rule_name(rule_.iri) + ": ?" + src.variable + " is not numeric");
        if (src.clamp_min && *num < *src.clamp_min) value = Term::decimal(*src.clamp_min);
        else if (src.clamp_max && *num > *src.clamp_max) value = Term::decimal(*src.clamp_max);
      }
    }
    entry.removed = g_.match(subject, rule_.target_path, std::nullopt);
    for (const auto& t : entry.removed) g_.erase(t);
    Triple t{subject, rule_.target_path, value};
    g_.insert(t);
    entry.added.push_back(std::move(t));
  }

  void erase(const query::BindingSet& binding, LogEntry& entry) {
    auto resolve = [&](const Term& t) -> rdf::Pattern {
      if (t == rule("any")) return std::nullopt;
      if (in_ns(t, vocab::var_ns)) return bound(binding, after_ns(t, vocab::var_ns));
      if (in_ns(t, vocab::singleton_ns)) return vocab::errol(after_ns(t, vocab::singleton_ns));
      return t;
    };
    for (const auto& st : rule_.deletions) {
      for (auto& t : g_.match(resolve(st[0]), resolve(st[1]), resolve(st[2]))) {
        g_.erase(t);
        entry.removed.push_back(std::move(t));
      }
    }
  }

  rdf::Graph& g_;
  const AugmentationRule& rule_;
  std::mt19937_64 rng_;
  InstanceCounters& counters_;
};

} // namespace

std::vector<AugmentationRule> parse_rules(const rdf::Graph& g) {
  std::vector<AugmentationRule> rules;
  for (const auto& iri : g.subjects(vocab::type(), rule("Rule"))) {
    AugmentationRule r;
    r.iri = iri;
    std::vector<Term> tmp;
    const Term& kind = one(g, iri, rule("ruleKind"), tmp);
    if (kind == rule("Add")) r.kind = RuleKind::Add;
    else if (kind == rule("Change")) r.kind = RuleKind::Change;
    else if (kind == rule("Delete")) r.kind = RuleKind::Delete;
    else throw RuleError(rule_name(iri) + ": unknown rule:ruleKind " + kind.to_string());

    r.selector_text = string_of(g, iri, rule("selector"));
    r.selector = compile_selector(iri, r.selector_text, g.prefixes());
    r.anchor = string_of(g, iri, rule("anchor"));
    check_anchor(r);

    Decimal p = g.object(iri, rule("pApply")) ? number_of(g, iri, rule("pApply")) : *Decimal::parse("1");
    if (p < *Decimal::parse("0") || p > *Decimal::parse("1"))
      throw RuleError(rule_name(iri) + ": rule:pApply " + p.canonical() + " is outside [0, 1]");
    r.p_apply = p.to_double();

    switch (r.kind) {
    case RuleKind::Add: {
      std::vector<Term> heads;
      const Term& list = one(g, iri, rule("templates"), heads);
      std::vector<Term> members;
      try {
        members = rdf::read_list(g, list);
      } catch (const Error& e) {
        throw RuleError(rule_name(iri) + ": " + e.what());
      }
      if (members.empty()) throw RuleError(rule_name(iri) + ": an Add rule needs at least one template");
      for (const auto& m : members) {
        Template t;
        t.iri = m;
        t.name = string_of(g, m, rule("templateName"));
        if (t.name.empty() || t.name.find_first_of(" /#<>\"") != std::string::npos)
          throw RuleError(rule_name(m) + ": template name must be a simple identifier");
        Decimal w = g.object(m, rule("templateWeight")) ? number_of(g, m, rule("templateWeight")) : *Decimal::parse("1");
        if (w <= *Decimal::parse("0")) throw RuleError(rule_name(m) + ": rule:templateWeight must be > 0");
        t.weight = w.to_double();
        t.statements = statements_of(g, m, rule("statement"));
        if (t.statements.empty()) throw RuleError(rule_name(m) + ": template has no statements");
        r.templates.push_back(std::move(t));
      }
      break;
    }
    case RuleKind::Change: {
      std::vector<Term> tmp2;
      r.target_path = one(g, iri, rule("targetPath"), tmp2);
      if (!r.target_path.is_iri()) throw RuleError(rule_name(iri) + ": rule:targetPath must be an IRI");
      bool has_const = g.object(iri, rule("value")).has_value();
      bool has_var = g.object(iri, rule("valueVariable")).has_value();
      if (has_const == has_var) throw RuleError(rule_name(iri) + ": needs exactly one of rule:value, rule:valueVariable");
      if (has_const) {
        r.value.constant = one(g, iri, rule("value"), tmp2);
      } else {
        r.value.variable = string_of(g, iri, rule("valueVariable"));
        if (!r.selector.projects(r.value.variable))
          throw RuleError(rule_name(iri) + ": value variable ?" + r.value.variable + " is not projected");
        if (g.object(iri, rule("clampMin"))) r.value.clamp_min = number_of(g, iri, rule("clampMin"));
        if (g.object(iri, rule("clampMax"))) r.value.clamp_max = number_of(g, iri, rule("clampMax"));
      }
      break;
    }
    case RuleKind::Delete:
      r.deletions = statements_of(g, iri, rule("deleteStatement"));
      if (r.deletions.empty()) throw RuleError(rule_name(iri) + ": a Delete rule needs rule:deleteStatement");
      break;
    }
    rules.push_back(std::move(r));
  }
  std::sort(rules.begin(), rules.end(), [](const auto& a, const auto& b) { return a.iri < b.iri; });
  return rules;
}

AugmentationRule make_change_rule(Term iri, const std::string& selector, std::string anchor, Term target_path,
                                  ValueSource value, double p_apply) {
  AugmentationRule r;
  r.iri = std::move(iri);
  r.kind = RuleKind::Change;
  r.selector_text = selector;
  r.selector = compile_selector(r.iri, selector, {});
  r.anchor = std::move(anchor);
  check_anchor(r);
  if (!(p_apply >= 0.0 && p_apply <= 1.0)) throw RuleError(rule_name(r.iri) + ": p_apply outside [0, 1]");
  r.p_apply = p_apply;
  r.target_path = std::move(target_path);
  r.value = std::move(value);
  return r;
}

AppliedLog apply_rule_in_place(rdf::Graph& graph, const AugmentationRule& rule, std::uint64_t rng_seed,
                               InstanceCounters& counters) {
  return Applier(graph, rule, rng_seed, counters).run();
}

std::pair<rdf::Graph, AppliedLog> apply_rule(const rdf::Graph& graph, const AugmentationRule& rule,
                                             std::uint64_t rng_seed) {
  rdf::Graph out = graph;
  InstanceCounters counters;
  AppliedLog log = apply_rule_in_place(out, rule, rng_seed, counters);
  return {std::move(out), std::move(log)};
}

std::uint64_t rule_seed(std::uint64_t master_seed, const Term& rule_iri) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&](unsigned char byte) {
    h ^= byte;
    h *= 0x100000001b3ULL;
  };
  for (int i = 0; i < 8; ++i) feed(static_cast<unsigned char>(master_seed >> (8 * i)));
  for (char c : rule_iri.value()) feed(static_cast<unsigned char>(c));
  return splitmix64(h);
}

std::pair<rdf::Graph, std::vector<AppliedLog>> apply_all(const rdf::Graph& graph, std::vector<AugmentationRule> rules,
                                                         std::uint64_t master_seed,
                                                         const shacl::ShapeSet* post_shapes) {
  std::stable_sort(rules.begin(), rules.end(), [](const auto& a, const auto& b) { return a.iri < b.iri; });
  rdf::Graph out = graph;
  InstanceCounters counters;
  std::vector<AppliedLog> logs;
  for (const auto& r : rules) logs.push_back(apply_rule_in_place(out, r, rule_seed(master_seed, r.iri), counters));
  if (post_shapes) {
    auto report = shacl::validate(out, *post_shapes);
    if (!report.conforms) throw PostValidationError(std::move(report));
  }
  return {std::move(out), std::move(logs)};
}

rdf::Graph replay(const rdf::Graph& pre, const std::vector<AppliedLog>& logs) {
  rdf::Graph g = pre;
  for (const auto& log : logs)
    for (const auto& e : log.entries) {
      for (const auto& t : e.removed) g.erase(t);
      for (const auto& t : e.added) g.insert(t);
    }
  return g;
}

std::string logs_json(const std::vector<AppliedLog>& logs, const std::vector<AugmentationRule>& rules) {
  using json = nlohmann::ordered_json;
  auto triple_text = [](const Triple& t) {
    return t.subject.to_string() + " " + t.predicate.to_string() + " " + t.object.to_string() + " .";
  };
  json out = json::array();
  for (const auto& log : logs) {
    const AugmentationRule* r = nullptr;
    for (const auto& candidate : rules)
      if (candidate.iri == log.rule) r = &candidate;
    json jl;
    jl["rule"] = log.rule.value();
    jl["fired"] = log.entries.size();
    json entries = json::array();
    for (const auto& e : log.entries) {
      json je;
      je["anchor"] = e.anchor.to_string();
      if (e.template_index) {
        je["template"] = *e.template_index;
        if (r && *e.template_index < r->templates.size()) je["template_name"] = r->templates[*e.template_index].name;
      } else {
        je["template"] = nullptr;
      }
      json removed = json::array(), added = json::array();
      for (const auto& t : e.removed) removed.push_back(triple_text(t));
      for (const auto& t : e.added) added.push_back(triple_text(t));
      je["removed"] = std::move(removed);
      je["added"] = std::move(added);
      entries.push_back(std::move(je));
    }
    jl["entries"] = std::move(entries);
    out.push_back(std::move(jl));
  }
  return out.dump(2) + "\n";
}

} // namespace cpes::augment
