#pragma once

#include <string>
#include <string_view>

#include "cpes/rdf.hpp"

// Namespaces and frequently used terms.
namespace cpes::vocab {

inline constexpr std::string_view rdf_ns = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
inline constexpr std::string_view rdfs_ns = "http://www.w3.org/2000/01/rdf-schema#";
inline constexpr std::string_view xsd_ns = "http://www.w3.org/2001/XMLSchema#";
inline constexpr std::string_view sh_ns = "http://www.w3.org/ns/shacl#";
inline constexpr std::string_view errol_ns = "http://w3id.org/errol#";
inline constexpr std::string_view rule_ns = "http://w3id.org/errol/rule#";

// Placeholder namespaces used inside augmentation templates.
inline constexpr std::string_view var_ns = "http://w3id.org/errol/rule/var#";
inline constexpr std::string_view fresh_ns = "http://w3id.org/errol/rule/fresh#";
inline constexpr std::string_view singleton_ns = "http://w3id.org/errol/rule/singleton#";

inline rdf::Term in_ns(std::string_view ns, std::string_view local) {
  std::string s(ns);
  s += local;
  return rdf::Term::iri(std::move(s));
}

inline rdf::Term rdf(std::string_view local) { return in_ns(rdf_ns, local); }
inline rdf::Term rdfs(std::string_view local) { return in_ns(rdfs_ns, local); }
inline rdf::Term sh(std::string_view local) { return in_ns(sh_ns, local); }
inline rdf::Term errol(std::string_view local) { return in_ns(errol_ns, local); }
inline rdf::Term rule(std::string_view local) { return in_ns(rule_ns, local); }

inline rdf::Term type() { return rdf("type"); }
inline rdf::Term sub_class_of() { return rdfs("subClassOf"); }

} // namespace cpes::vocab
