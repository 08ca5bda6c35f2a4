#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "ntl/features.hpp"

namespace ntl {

enum class Comparator { Less, LessEqual, Greater, GreaterEqual, Equal, NotEqual };

std::string_view to_string(Comparator op);
bool compare(double lhs, Comparator op, double rhs);

/// attribute <op> value
struct Term {
  std::string attribute;
  Comparator op = Comparator::Less;
  double value = 0.0;

  friend bool operator==(const Term&, const Term&) = default;
};

/// Conjunction of terms.
struct Rule {
  std::string name;
  std::vector<Term> terms;

  friend bool operator==(const Rule&, const Rule&) = default;
};

struct RuleSet {
  std::vector<Rule> rules;

  friend bool operator==(const RuleSet&, const RuleSet&) = default;
};

/// Parses the rule DSL, one rule per line:
///
///     rule <name>: <attr> <op> <number> (AND <attr> <op> <number>)*
///
/// '#' starts a comment. Operators: < <= > >= = != (and the Unicode forms
/// ≤ ≥ ≠). Throws ParseError with line/column, or MissingAttributeError when
/// an attribute is not in `catalog`.
RuleSet parse_rules(std::string_view text, const AttributeCatalog& catalog);

/// Canonical text form; parse_rules(print_rules(rs)) == rs.
std::string print_rules(const RuleSet& ruleset);

/// Rules shipped with the project, written against AttributeCatalog::shipped().
std::string_view shipped_rules_text();
RuleSet shipped_rules();

bool evaluate_rule(const Rule& rule, const AttributeVector& attrs);

struct BooleanDecision {
  int label = 0;
  std::vector<std::string> fired;  // in rule-set order
};

/// Label 1 iff at least one rule holds.
BooleanDecision classify_boolean(const RuleSet& ruleset, const AttributeVector& attrs);

}  // namespace ntl
