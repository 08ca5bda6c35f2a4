#include "ntl/rules.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <set>

#include "ntl/data.hpp"
#include "ntl/error.hpp"

namespace ntl {

std::string_view to_string(Comparator op) {
  switch (op) {
    case Comparator::Less: return "<";
    case Comparator::LessEqual: return "<=";
    case Comparator::Greater: return ">";
    case Comparator::GreaterEqual: return ">=";
    case Comparator::Equal: return "=";
    case Comparator::NotEqual: return "!=";
  }
  return "?";
}

bool compare(double lhs, Comparator op, double rhs) {
  switch (op) {
    case Comparator::Less: return lhs < rhs;
    case Comparator::LessEqual: return lhs <= rhs;
    case Comparator::Greater: return lhs > rhs;
    case Comparator::GreaterEqual: return lhs >= rhs;
    case Comparator::Equal: return lhs == rhs;
    case Comparator::NotEqual: return lhs != rhs;
  }
  return false;
}

namespace {

class LineParser {
 public:
  LineParser(std::string_view line, std::size_t lineno) : s_(line), lineno_(lineno) {}

  void skip_space() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
  }
  bool at_end() {
    skip_space();
    return pos_ >= s_.size();
  }
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, lineno_, pos_ + 1); }

  std::string_view word() {
    skip_space();
    const std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_' || s_[pos_] == '-'))
      ++pos_;
    if (pos_ == start) fail("expected an identifier");
    return s_.substr(start, pos_ - start);
  }

  void expect(char c) {
    skip_space();
    if (pos_ >= s_.size() || s_[pos_] != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  Comparator comparator() {
    skip_space();
    struct Spelling {
      std::string_view text;
      Comparator op;
    };
    static constexpr Spelling kSpellings[] = {
        {"<=", Comparator::LessEqual}, {">=", Comparator::GreaterEqual}, {"!=", Comparator::NotEqual},
        {"==", Comparator::Equal},     {"≤", Comparator::LessEqual}, {"≥", Comparator::GreaterEqual},
        {"≠", Comparator::NotEqual}, {"<", Comparator::Less},          {">", Comparator::Greater},
        {"=", Comparator::Equal},
    };
    for (const auto& sp : kSpellings) {
      if (s_.substr(pos_).starts_with(sp.text)) {
        pos_ += sp.text.size();
        return sp.op;
      }
    }
    fail("expected a comparison operator (< <= > >= = !=)");
  }

  double number() {
    skip_space();
    const char* first = s_.data() + pos_;
    const char* last = s_.data() + s_.size();
    if (first != last && *first == '+') ++first;
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || !std::isfinite(v)) fail("expected a finite number");
    pos_ = static_cast<std::size_t>(ptr - s_.data());
    return v;
  }

  std::size_t column() const { return pos_ + 1; }

 private:
  std::string_view s_;
  std::size_t lineno_;
  std::size_t pos_ = 0;
};

constexpr std::string_view kShippedRules = R"(# Example expert rules over the shipped attribute catalog.
# Each line is one conjunction; a customer is flagged when any rule holds.

# consumption in the last quarter fell sharply against the preceding nine months
rule sharp_drop: change_3m < -0.4
# steadily falling consumption from a household that used to consume
rule falling_slope: slope_12m < -0.3 AND mean_12m > 2
# several months billed at exactly zero
rule many_zero_months: zero_month_count >= 3
# at least one month far below the usual level on an erratic profile
rule erratic_low: min_over_mean < 0.2 AND std_12m > 3
# moderate drop from a heavy consumer
rule moderate_drop_high_use: change_3m < -0.2 AND mean_12m > 15
# implausibly low consumption for an active connection
rule near_zero_use: mean_12m < 2
)";

}  // namespace

RuleSet parse_rules(std::string_view text, const AttributeCatalog& catalog) {
  RuleSet rs;
  std::set<std::string, std::less<>> names;
  std::size_t lineno = 0;
  while (!text.empty()) {
    ++lineno;
    const std::size_t nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (const std::size_t hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);

    LineParser p(line, lineno);
    if (p.at_end()) continue;
    if (p.word() != "rule") throw ParseError("expected 'rule'", lineno, 1);
    Rule rule;
    const std::size_t name_col = p.column();
    rule.name = std::string(p.word());
    if (names.contains(rule.name)) throw ParseError("duplicate rule name '" + rule.name + "'", lineno, name_col);
    p.expect(':');
    for (;;) {
      Term t;
      t.attribute = std::string(p.word());
      if (!catalog.contains(t.attribute)) throw MissingAttributeError(t.attribute);
      t.op = p.comparator();
      t.value = p.number();
      rule.terms.push_back(std::move(t));
      if (p.at_end()) break;
      if (p.word() != "AND") p.fail("expected 'AND' or end of line");
    }
    names.insert(rule.name);
    rs.rules.push_back(std::move(rule));
  }
  if (rs.rules.empty()) throw ParseError("rule set contains no rules", 0);
  return rs;
}

std::string print_rules(const RuleSet& ruleset) {
  std::string out;
  for (const auto& rule : ruleset.rules) {
    out += "rule " + rule.name + ":";
    for (std::size_t i = 0; i < rule.terms.size(); ++i) {
      const Term& t = rule.terms[i];
      if (i > 0) out += " AND";
      out += " " + t.attribute + " " + std::string(to_string(t.op)) + " " + format_double(t.value);
    }
    out += "\n";
  }
  return out;
}

std::string_view shipped_rules_text() { return kShippedRules; }

RuleSet shipped_rules() { return parse_rules(kShippedRules, AttributeCatalog::shipped()); }

bool evaluate_rule(const Rule& rule, const AttributeVector& attrs) {
  bool result = true;
  for (const auto& t : rule.terms) {
    // every term is looked up so a missing attribute is reported even after a false term
    if (!compare(attrs.at(t.attribute), t.op, t.value)) result = false;
  }
  return result;
}

BooleanDecision classify_boolean(const RuleSet& ruleset, const AttributeVector& attrs) {
  BooleanDecision d;
  for (const auto& rule : ruleset.rules) {
    if (evaluate_rule(rule, attrs)) d.fired.push_back(rule.name);
  }
  d.label = d.fired.empty() ? 0 : 1;
  return d;
}

}  // namespace ntl
