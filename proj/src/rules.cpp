#include "celldiag/rules.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_set>

#include "celldiag/text.hpp"

namespace celldiag {

std::string_view to_string(Comparator op) {
    switch (op) {
        case Comparator::LessEqual: return "<=";
        case Comparator::Less: return "<";
        case Comparator::Greater: return ">";
        case Comparator::GreaterEqual: return ">=";
    }
    return "?";
}

std::optional<Comparator> parse_comparator(std::string_view token) {
    if (token == "<=") return Comparator::LessEqual;
    if (token == "<") return Comparator::Less;
    if (token == ">") return Comparator::Greater;
    if (token == ">=") return Comparator::GreaterEqual;
    return std::nullopt;
}

bool compare(double value, Comparator op, double threshold) {
    switch (op) {
        case Comparator::LessEqual: return value <= threshold;
        case Comparator::Less: return value < threshold;
        case Comparator::Greater: return value > threshold;
        case Comparator::GreaterEqual: return value >= threshold;
    }
    return false;
}

void validate_ruleset(const RuleSet& rs) {
    if (rs.rules.empty()) throw ValidationError("rule set has no rules");
    std::unordered_set<std::string> ids;
    for (const auto& rule : rs.rules) {
        if (rule.id.empty()) throw ValidationError("rule with empty id");
        if (!ids.insert(rule.id).second)
            throw ValidationError("duplicate rule id '" + rule.id + "'");
        if (rule.guard.empty())
            throw ValidationError("rule '" + rule.id + "' has an empty guard");
        if (rule.outcome == DiagnosisClass::Unclassified)
            throw ValidationError("rule '" + rule.id + "' must not emit Unclassified");
    }
}

bool rule_matches(const DiagnosticRule& rule, const KpiRecord& r) {
    for (const auto& atom : rule.guard) {
        const auto attr = resolve_kpi_attribute(atom.attribute);
        if (!attr) throw RuleError(rule.id, atom.attribute);
        const double value = r.feature(*attr);
        if (!std::isfinite(value)) throw RuleError(rule.id, atom.attribute);
        if (!compare(value, atom.op, atom.threshold)) return false;
    }
    return true;
}

DiagnosisClass classify(const KpiRecord& r, const RuleSet& rs) {
    for (const auto& rule : rs.rules)
        if (rule_matches(rule, r)) return rule.outcome;
    return DiagnosisClass::Unclassified;
}

DiagnosisClass classify_row(std::span<const double> row, const std::vector<std::string>& schema,
                            const RuleSet& rs) {
    for (const auto& rule : rs.rules) {
        bool all = true;
        for (const auto& atom : rule.guard) {
            const std::string key = normalize_name(atom.attribute);
            std::size_t idx = schema.size();
            for (std::size_t i = 0; i < schema.size(); ++i) {
                if (normalize_name(schema[i]) == key) {
                    idx = i;
                    break;
                }
            }
            if (idx >= row.size()) throw RuleError(rule.id, atom.attribute);
            if (!std::isfinite(row[idx])) throw RuleError(rule.id, atom.attribute);
            if (!compare(row[idx], atom.op, atom.threshold)) {
                all = false;
                break;
            }
        }
        if (all) return rule.outcome;
    }
    return DiagnosisClass::Unclassified;
}

RuleSet default_ruleset() {
    using A = KpiAttribute;
    using C = Comparator;
    auto atom = [](A a, C op, double t) {
        return RuleAtom{std::string(kpi_attribute_token(a)), op, t};
    };
    const auto HSR = A::HandoverSuccessRate;
    const auto TCHCDR = A::TchCallDropRate;
    const auto HF = A::HandoverFailuresRate;
    const auto RAB = A::Rab;
    const auto TCHSDLC = A::TchDropSuddenLostCon;
    const auto A_ = DiagnosisClass::ClassA;
    const auto B_ = DiagnosisClass::ClassB;
    const auto C_ = DiagnosisClass::ClassC;
    const auto OPT = DiagnosisClass::Optimised;

    RuleSet rs;
    rs.version = "builtin-13";
    rs.rules = {
        {"R1",
         {atom(HSR, C::LessEqual, 71.23), atom(TCHCDR, C::LessEqual, 7.42),
          atom(HF, C::Less, 22.17)},
         A_},
        {"R2",
         {atom(HSR, C::LessEqual, 71.23), atom(TCHCDR, C::LessEqual, 7.42),
          atom(HF, C::GreaterEqual, 22.17), atom(RAB, C::Greater, 3)},
         B_},
        {"R3",
         {atom(HSR, C::LessEqual, 71.23), atom(TCHCDR, C::LessEqual, 7.42),
          atom(HF, C::GreaterEqual, 22.17), atom(RAB, C::LessEqual, 3)},
         A_},
        {"R4", {atom(HSR, C::Greater, 57.99), atom(TCHCDR, C::Greater, 1.18)}, OPT},
        {"R5", {atom(HSR, C::Greater, 57.99), atom(TCHCDR, C::LessEqual, 1.18)}, C_},
        {"R6", {atom(HSR, C::LessEqual, 57.99), atom(HF, C::Greater, 3.69)}, C_},
        {"R7",
         {atom(HSR, C::LessEqual, 57.99), atom(HF, C::LessEqual, 3.69),
          atom(HSR, C::Greater, 25.15)},
         A_},
        {"R8",
         {atom(HSR, C::LessEqual, 57.99), atom(HF, C::LessEqual, 3.69),
          atom(HSR, C::LessEqual, 25.15)},
         C_},
        {"R9", {atom(RAB, C::LessEqual, 6), atom(TCHCDR, C::LessEqual, 7.65)}, C_},
        {"R10", {atom(RAB, C::LessEqual, 6), atom(TCHCDR, C::Greater, 7.65)}, A_},
        {"R11", {atom(RAB, C::Greater, 6), atom(TCHSDLC, C::Greater, 26)}, B_},
        {"R12",
         {atom(RAB, C::Greater, 6), atom(TCHSDLC, C::LessEqual, 26),
          atom(HF, C::LessEqual, 2.87)},
         B_},
        {"R13",
         {atom(RAB, C::Greater, 6), atom(TCHSDLC, C::LessEqual, 26),
          atom(HF, C::Greater, 2.87)},
         C_},
    };
    return rs;
}

// ---------------------------------------------------------------------------
// Rule file IO
// ---------------------------------------------------------------------------

namespace {

bool get_line(std::istream& in, std::string& line) {
    if (!std::getline(in, line)) return false;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
}

} // namespace

RuleSet load_ruleset(std::istream& in) {
    RuleSet rs;
    std::string line;
    std::size_t line_no = 0;
    while (get_line(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;

        if (starts_with_ci(t, "VERSION")) {
            rs.version = trim(t.substr(7));
            continue;
        }
        if (!starts_with_ci(t, "RULE"))
            throw ParseError("expected RULE or VERSION, got '" + t + "'", line_no);

        const std::size_t colon = t.find(':');
        if (colon == std::string::npos) throw ParseError("missing ':' after rule id", line_no);
        DiagnosticRule rule;
        rule.id = trim(t.substr(4, colon - 4));
        if (rule.id.empty()) throw ParseError("empty rule id", line_no);

        std::string body = trim(t.substr(colon + 1));
        if (!starts_with_ci(body, "IF")) throw ParseError("expected IF", line_no);
        body = trim(body.substr(2));

        // split "... THEN <class>" (case-insensitive THEN)
        const std::string upper = to_lower(body);
        const std::size_t then_pos = upper.rfind(" then ");
        if (then_pos == std::string::npos) throw ParseError("missing THEN", line_no);
        const std::string guard_text = trim(body.substr(0, then_pos));
        const std::string class_text = trim(body.substr(then_pos + 6));

        const auto outcome = parse_diagnosis_class(class_text);
        if (!outcome) throw ParseError("unknown class '" + class_text + "'", line_no);
        if (*outcome == DiagnosisClass::Unclassified)
            throw ValidationError("line " + std::to_string(line_no) +
                                  ": rules must not emit Unclassified");
        rule.outcome = *outcome;

        // guard atoms separated by AND
        std::size_t pos = 0;
        const std::string guard_lower = to_lower(guard_text);
        while (pos < guard_text.size()) {
            std::size_t and_pos = guard_lower.find(" and ", pos);
            const std::string atom_text =
                trim(guard_text.substr(pos, and_pos == std::string::npos ? std::string::npos
                                                                         : and_pos - pos));
            pos = and_pos == std::string::npos ? guard_text.size() : and_pos + 5;

            std::istringstream atom_in(atom_text);
            std::string attr_token, op_token, num_token;
            if (!(atom_in >> attr_token >> op_token >> num_token))
                throw ParseError("malformed atom '" + atom_text + "'", line_no);
            std::string rest;
            if (atom_in >> rest)
                throw ParseError("trailing text in atom '" + atom_text + "'", line_no);

            RuleAtom atom;
            const auto attr = resolve_kpi_attribute(attr_token);
            if (!attr) throw ParseError("unknown attribute '" + attr_token + "'", line_no);
            atom.attribute = attr_token;
            const auto op = parse_comparator(op_token);
            if (!op) throw ParseError("unknown comparator '" + op_token + "'", line_no);
            atom.op = *op;
            if (!parse_double(num_token, atom.threshold))
                throw ParseError("bad threshold '" + num_token + "'", line_no);
            rule.guard.push_back(std::move(atom));
        }
        if (rule.guard.empty()) throw ParseError("rule has no atoms", line_no);
        rs.rules.push_back(std::move(rule));
    }
    validate_ruleset(rs);
    return rs;
}

RuleSet load_ruleset_string(const std::string& text) {
    std::istringstream in(text);
    return load_ruleset(in);
}

RuleSet load_ruleset_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open '" + path + "'");
    return load_ruleset(in);
}

void save_ruleset(const RuleSet& rs, std::ostream& out) {
    if (!rs.version.empty()) out << "VERSION " << rs.version << "\n";
    for (const auto& rule : rs.rules) {
        out << "RULE " << rule.id << ": IF ";
        for (std::size_t i = 0; i < rule.guard.size(); ++i) {
            if (i) out << " AND ";
            const auto& atom = rule.guard[i];
            out << atom.attribute << " " << to_string(atom.op) << " "
                << format_double(atom.threshold);
        }
        out << " THEN " << to_string(rule.outcome) << "\n";
    }
}

std::string save_ruleset_string(const RuleSet& rs) {
    std::ostringstream out;
    save_ruleset(rs, out);
    return out.str();
}

// ---------------------------------------------------------------------------
// Reachability
// ---------------------------------------------------------------------------

AttributeBounds default_attribute_bounds() {
    AttributeBounds b;
    for (std::size_t i = 0; i < kKpiAttributeCount; ++i)
        b.range[i] = kpi_attribute_default_range(static_cast<KpiAttribute>(i));
    return b;
}

std::vector<ReachabilityEntry> analyze_reachability(const RuleSet& rs,
                                                    const AttributeBounds& bounds) {
    validate_ruleset(rs);

    // candidate values per attribute: midpoint, endpoints, and threshold
    // neighbours for every threshold the rule set declares on it
    std::array<std::set<double>, kKpiAttributeCount> candidates;
    std::array<bool, kKpiAttributeCount> referenced{};
    for (const auto& rule : rs.rules) {
        for (const auto& atom : rule.guard) {
            const auto attr = resolve_kpi_attribute(atom.attribute);
            if (!attr) throw RuleError(rule.id, atom.attribute);
            referenced[static_cast<std::size_t>(*attr)] = true;
        }
    }
    for (std::size_t i = 0; i < kKpiAttributeCount; ++i) {
        const auto [lo, hi] = bounds.range[i];
        if (!(lo <= hi)) throw ValidationError("invalid bounds for attribute " + std::to_string(i));
        candidates[i].insert((lo + hi) / 2.0);
        if (!referenced[i]) continue;
        candidates[i].insert(lo);
        candidates[i].insert(hi);
    }
    for (const auto& rule : rs.rules) {
        for (const auto& atom : rule.guard) {
            const auto idx = static_cast<std::size_t>(*resolve_kpi_attribute(atom.attribute));
            const auto [lo, hi] = bounds.range[idx];
            for (double v : {atom.threshold - 0.01, atom.threshold, atom.threshold + 0.01}) {
                if (v >= lo && v <= hi) candidates[idx].insert(v);
            }
        }
    }

    std::array<std::vector<double>, kKpiAttributeCount> values;
    for (std::size_t i = 0; i < kKpiAttributeCount; ++i)
        values[i].assign(candidates[i].begin(), candidates[i].end());

    std::vector<ReachabilityEntry> entries;
    entries.reserve(rs.rules.size());
    for (const auto& rule : rs.rules) entries.push_back({rule.id, false, std::nullopt});

    // odometer over the grid; first-match classification per point
    std::array<std::size_t, kKpiAttributeCount> idx{};
    std::size_t found = 0;
    KpiRecord record;
    record.cell_id = "witness";
    while (found < entries.size()) {
        for (std::size_t i = 0; i < kKpiAttributeCount; ++i)
            record.features[i] = values[i][idx[i]];
        for (std::size_t r = 0; r < rs.rules.size(); ++r) {
            if (rule_matches(rs.rules[r], record)) {
                if (!entries[r].reachable) {
                    entries[r].reachable = true;
                    entries[r].witness = record;
                    ++found;
                }
                break;
            }
        }
        // advance odometer
        std::size_t d = 0;
        while (d < kKpiAttributeCount) {
            if (++idx[d] < values[d].size()) break;
            idx[d] = 0;
            ++d;
        }
        if (d == kKpiAttributeCount) break;
    }
    return entries;
}

std::string reachability_table(const std::vector<ReachabilityEntry>& entries) {
    std::ostringstream out;
    out << "rule        reachable  witness\n";
    for (const auto& e : entries) {
        out << e.rule_id;
        for (std::size_t i = e.rule_id.size(); i < 12; ++i) out << ' ';
        out << (e.reachable ? "yes        " : "no         ");
        if (e.witness) {
            bool first = true;
            for (std::size_t i = 0; i < kKpiAttributeCount; ++i) {
                if (!first) out << " ";
                first = false;
                out << kpi_attribute_token(static_cast<KpiAttribute>(i)) << "="
                    << format_double(e.witness->features[i]);
            }
        } else {
            out << "-";
        }
        out << "\n";
    }
    return out.str();
}

} // namespace celldiag
