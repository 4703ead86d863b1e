#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cpes/query.hpp"
#include "cpes/rdf.hpp"
#include "cpes/shacl.hpp"

// Probabilistic add/change/delete graph rewriting.
//
// Rules live in an RDF graph (namespace http://w3id.org/errol/rule#, prefix
// `rule:`). Template and delete statements are RDF lists of three terms in
// which
//   var:<name>     refers to the selector binding of ?name,
//   fresh:<slot>   mints a new errol:inst/<template-name>/<n> per instantiation,
//   single:<name>  denotes the create-if-absent node errol:<name>,
//   rule:any       is a wildcard (delete statements only).
// See data/rules/case_study.ttl for a complete example.
namespace cpes::augment {

enum class RuleKind { Add, Change, Delete };

using Statement = std::array<rdf::Term, 3>;

struct Template {
  rdf::Term iri;
  std::string name;
  double weight = 1.0;
  std::vector<Statement> statements;
};

// New value of a Change rule: a constant, or a selector variable optionally
// clamped to [clamp_min, clamp_max].
struct ValueSource {
  std::optional<rdf::Term> constant;
  std::string variable;
  std::optional<Decimal> clamp_min;
  std::optional<Decimal> clamp_max;
};

struct AugmentationRule {
  rdf::Term iri;
  RuleKind kind = RuleKind::Add;
  std::string selector_text;
  query::SelectQuery selector;
  std::string anchor;
  double p_apply = 1.0;

  std::vector<Template> templates; // Add
  rdf::Term target_path;           // Change
  ValueSource value;               // Change
  std::vector<Statement> deletions; // Delete

  /// Template weights normalized to sum to one.
  std::vector<double> template_probabilities() const;
};

struct LogEntry {
  rdf::Term anchor;
  std::optional<std::size_t> template_index;
  std::vector<rdf::Triple> removed;
  std::vector<rdf::Triple> added;
};

struct AppliedLog {
  rdf::Term rule;
  std::vector<LogEntry> entries;
};

class RuleError : public Error {
public:
  using Error::Error;
};

class BindError : public Error {
public:
  using Error::Error;
};

class PostValidationError : public Error {
public:
  explicit PostValidationError(shacl::ValidationReport report);
  const shacl::ValidationReport& report() const { return report_; }

private:
  shacl::ValidationReport report_;
};

/// Every rule:Rule in the graph, ordered by rule IRI.
std::vector<AugmentationRule> parse_rules(const rdf::Graph& rules_graph);

/// Compiles a rule from its parts (used for programmatic rules such as attacks).
AugmentationRule make_change_rule(rdf::Term iri, const std::string& selector, std::string anchor,
                                  rdf::Term target_path, ValueSource value, double p_apply = 1.0);

/// Per-template counters for minted instance IRIs.
using InstanceCounters = std::map<std::string, std::uint64_t>;

/// Evaluates the selector and walks its matches in anchor order. Each match
/// draws u1 and fires when u1 < p_apply; an Add rule then draws u2 to pick a
/// template by weight.
std::pair<rdf::Graph, AppliedLog> apply_rule(const rdf::Graph& graph, const AugmentationRule& rule,
                                             std::uint64_t rng_seed);
AppliedLog apply_rule_in_place(rdf::Graph& graph, const AugmentationRule& rule, std::uint64_t rng_seed,
                               InstanceCounters& counters);

/// Sub-seed for one rule, derived from the master seed and the rule IRI.
std::uint64_t rule_seed(std::uint64_t master_seed, const rdf::Term& rule_iri);

/// Applies rules in IRI order. When `post_shapes` is given the result must
/// conform, otherwise PostValidationError is thrown.
std::pair<rdf::Graph, std::vector<AppliedLog>> apply_all(const rdf::Graph& graph,
                                                         std::vector<AugmentationRule> rules,
                                                         std::uint64_t master_seed,
                                                         const shacl::ShapeSet* post_shapes = nullptr);

/// Re-executes logged removals and additions on `pre`.
rdf::Graph replay(const rdf::Graph& pre, const std::vector<AppliedLog>& logs);

std::string logs_json(const std::vector<AppliedLog>& logs, const std::vector<AugmentationRule>& rules);

} // namespace cpes::augment
