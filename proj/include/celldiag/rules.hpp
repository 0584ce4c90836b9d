#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "celldiag/kpi.hpp"

namespace celldiag {

enum class Comparator { LessEqual, Less, Greater, GreaterEqual };

std::string_view to_string(Comparator op);
std::optional<Comparator> parse_comparator(std::string_view token);

bool compare(double value, Comparator op, double threshold);

/// One threshold condition on a named attribute.
struct RuleAtom {
    std::string attribute;
    Comparator op = Comparator::LessEqual;
    double threshold = 0.0;

    bool operator==(const RuleAtom&) const = default;
};

/// A conjunctive guard with a diagnosis outcome.
struct DiagnosticRule {
    std::string id;
    std::vector<RuleAtom> guard;
    DiagnosisClass outcome = DiagnosisClass::ClassA;

    bool operator==(const DiagnosticRule&) const = default;
};

/// Ordered rule list; evaluation is first-match-wins.
struct RuleSet {
    std::vector<DiagnosticRule> rules;
    std::string version;

    bool operator==(const RuleSet&) const = default;
};

/// Structural checks: non-empty list, non-empty guards, unique ids,
/// outcomes never Unclassified. Raises ValidationError.
void validate_ruleset(const RuleSet& rs);

/// True when every atom of the rule holds for the record. Raises RuleError
/// if a referenced attribute is unknown or not finite.
bool rule_matches(const DiagnosticRule& rule, const KpiRecord& r);

/// Outcome of the first rule whose guard is fully satisfied; Unclassified
/// when none matches.
DiagnosisClass classify(const KpiRecord& r, const RuleSet& rs);

/// Same first-match evaluation over a generic feature row; atom attributes
/// are resolved against `schema` (normalized name match). Used for rule sets
/// exported from trees trained on non-KPI schemas.
DiagnosisClass classify_row(std::span<const double> row, const std::vector<std::string>& schema,
                            const RuleSet& rs);

/// The built-in 13-branch diagnostic rule list, evaluated first-match in
/// declaration order. Every guard is a fully explicit conjunction, so
/// shadowing between branches is visible to analyze_reachability instead of
/// being hidden inside IF/ELSE nesting.
RuleSet default_ruleset();

// ---------------------------------------------------------------------------
// Rule file format
// ---------------------------------------------------------------------------
//
//   # comment
//   VERSION <text>
//   RULE <id>: IF <attr> <op> <num> [AND <attr> <op> <num>]... THEN <class>
//
// Attribute tokens are the schema vocabulary (any alias, e.g. HSR or
// handover_success_rate); ops are <=, <, >, >=.

RuleSet load_ruleset(std::istream& in);
RuleSet load_ruleset_string(const std::string& text);
RuleSet load_ruleset_file(const std::string& path);

void save_ruleset(const RuleSet& rs, std::ostream& out);
std::string save_ruleset_string(const RuleSet& rs);

// ---------------------------------------------------------------------------
// Reachability analysis
// ---------------------------------------------------------------------------

/// Per-attribute closed value ranges the analyzer searches within.
struct AttributeBounds {
    std::array<std::pair<double, double>, kKpiAttributeCount> range{};
};

/// Ranges from kpi_attribute_default_range.
AttributeBounds default_attribute_bounds();

struct ReachabilityEntry {
    std::string rule_id;
    bool reachable = false;
    std::optional<KpiRecord> witness;  // first grid record reaching the rule
};

/// For each rule, decides whether any record within bounds reaches it under
/// first-match evaluation. The search grid takes, per attribute, the range
/// midpoint, the endpoints, and every threshold declared on that attribute
/// anywhere in the rule set with +/-0.01 neighbours.
std::vector<ReachabilityEntry> analyze_reachability(const RuleSet& rs,
                                                    const AttributeBounds& bounds);

/// Text table of reachability results (one line per rule).
std::string reachability_table(const std::vector<ReachabilityEntry>& entries);

} // namespace celldiag
