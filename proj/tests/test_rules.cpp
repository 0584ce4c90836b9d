#include <doctest.h>

#include <sstream>

#include "celldiag/rng.hpp"
#include "celldiag/rules.hpp"

using namespace celldiag;

namespace {

// record with every attribute at a benign midpoint value
KpiRecord fill_record() {
    KpiRecord r;
    r.cell_id = "t";
    for (std::size_t a = 0; a < kKpiAttributeCount; ++a) {
        const auto [lo, hi] = kpi_attribute_default_range(static_cast<KpiAttribute>(a));
        r.features[a] = (lo + hi) / 2.0;
    }
    return r;
}

KpiRecord record_with(std::initializer_list<std::pair<KpiAttribute, double>> values) {
    KpiRecord r = fill_record();
    for (const auto& [a, v] : values) r.feature(a) = v;
    return r;
}

// value eps inside/outside one atom's acceptance region
double atom_side(const RuleAtom& atom, double eps, bool inside) {
    const bool upper = atom.op == Comparator::LessEqual || atom.op == Comparator::Less;
    return upper ? (inside ? atom.threshold - eps : atom.threshold + eps)
                 : (inside ? atom.threshold + eps : atom.threshold - eps);
}

KpiRecord tight_witness(const DiagnosticRule& rule, double eps) {
    KpiRecord r = fill_record();
    for (const auto& atom : rule.guard)
        r.feature(*resolve_kpi_attribute(atom.attribute)) = atom_side(atom, eps, true);
    return r;
}

constexpr auto HSR = KpiAttribute::HandoverSuccessRate;
constexpr auto TCHCDR = KpiAttribute::TchCallDropRate;
constexpr auto HF = KpiAttribute::HandoverFailuresRate;
constexpr auto RAB = KpiAttribute::Rab;

} // namespace

TEST_SUITE("rules") {

TEST_CASE("default ruleset is the 13-branch expansion") {
    const RuleSet rs = default_ruleset();
    REQUIRE(rs.rules.size() == 13);
    validate_ruleset(rs);

    const auto& r1 = rs.rules[0];
    REQUIRE(r1.guard.size() == 3);
    CHECK(*resolve_kpi_attribute(r1.guard[0].attribute) == HSR);
    CHECK(r1.guard[0].op == Comparator::LessEqual);
    CHECK(r1.guard[0].threshold == 71.23);
    CHECK(r1.guard[1].threshold == 7.42);
    CHECK(r1.guard[2].op == Comparator::Less);
    CHECK(r1.guard[2].threshold == 22.17);
    CHECK(r1.outcome == DiagnosisClass::ClassA);

    // branch 11: RAB > 6 and TCHSDLC > 26 -> Class B
    const auto& r11 = rs.rules[10];
    CHECK(*resolve_kpi_attribute(r11.guard[0].attribute) == RAB);
    CHECK(r11.guard[0].op == Comparator::Greater);
    CHECK(r11.guard[0].threshold == 6);
    CHECK(r11.guard[1].threshold == 26);
    CHECK(r11.outcome == DiagnosisClass::ClassB);

    // branch 10: RAB <= 6 and TCHCDR > 7.65 -> Class A
    const auto& r10 = rs.rules[9];
    CHECK(r10.guard[0].op == Comparator::LessEqual);
    CHECK(r10.guard[1].threshold == 7.65);
    CHECK(r10.outcome == DiagnosisClass::ClassA);
}

TEST_CASE("classify follows first-match order") {
    const RuleSet rs = default_ruleset();

    CHECK(classify(record_with({{HSR, 70.0}, {TCHCDR, 7.0}, {HF, 20.0}}), rs) ==
          DiagnosisClass::ClassA);
    CHECK(classify(record_with({{HSR, 70.0}, {TCHCDR, 7.0}, {HF, 25.0}, {RAB, 4.0}}), rs) ==
          DiagnosisClass::ClassB);
    CHECK(classify(record_with({{HSR, 70.0}, {TCHCDR, 7.0}, {HF, 25.0}, {RAB, 2.0}}), rs) ==
          DiagnosisClass::ClassA);
    // outside the branch 1-3 region, the optimised branch wins
    CHECK(classify(record_with({{HSR, 80.0}, {TCHCDR, 2.0}}), rs) == DiagnosisClass::Optimised);
    CHECK(classify(record_with({{HSR, 80.0}, {TCHCDR, 1.0}}), rs) == DiagnosisClass::ClassC);
    // TCHCDR above 7.42 skips branches 1-3
    CHECK(classify(record_with({{HSR, 50.0}, {HF, 3.0}, {TCHCDR, 8.0}}), rs) ==
          DiagnosisClass::ClassA);
    CHECK(classify(record_with({{HSR, 20.0}, {HF, 3.0}, {TCHCDR, 8.0}}), rs) ==
          DiagnosisClass::ClassC);
    CHECK(classify(record_with({{HSR, 50.0}, {HF, 5.0}, {TCHCDR, 8.0}}), rs) ==
          DiagnosisClass::ClassC);
}

TEST_CASE("single-rule fidelity for the optimised branch") {
    // a record matching branch 4's guard classifies Optimised when that
    // branch is evaluated alone (under the full list, branches 1-3 shadow
    // this region)
    const RuleSet rs = default_ruleset();
    const KpiRecord r = record_with({{HSR, 60.0}, {TCHCDR, 2.0}});
    const auto& branch4 = rs.rules[3];
    CHECK(rule_matches(branch4, r));
    RuleSet only4{{branch4}, "single"};
    CHECK(classify(r, only4) == DiagnosisClass::Optimised);
}

TEST_CASE("no match yields Unclassified") {
    RuleSet rs;
    rs.version = "t";
    rs.rules.push_back({"only", {{"HSR", Comparator::Greater, 1000.0}}, DiagnosisClass::ClassA});
    CHECK(classify(fill_record(), rs) == DiagnosisClass::Unclassified);
}

TEST_CASE("threshold fidelity for every canonical branch") {
    const RuleSet rs = default_ruleset();
    for (const auto& rule : rs.rules) {
        const KpiRecord inside = tight_witness(rule, 0.01);
        CHECK(rule_matches(rule, inside));
        RuleSet single{{rule}, "single"};
        CHECK(classify(inside, single) == rule.outcome);
        for (std::size_t i = 0; i < rule.guard.size(); ++i) {
            KpiRecord out = inside;
            out.feature(*resolve_kpi_attribute(rule.guard[i].attribute)) =
                atom_side(rule.guard[i], 0.01, false);
            CHECK(!rule_matches(rule, out));
        }
    }
}

TEST_CASE("non-finite attribute raises RuleError with context") {
    const RuleSet rs = default_ruleset();
    KpiRecord r = fill_record();
    r.feature(HSR) = std::numeric_limits<double>::quiet_NaN();
    try {
        classify(r, rs);
        FAIL("expected RuleError");
    } catch (const RuleError& e) {
        CHECK(e.rule_id() == "R1");
        CHECK(e.attribute() == "HSR");
    }
}

TEST_CASE("rule file round trip") {
    const RuleSet rs = default_ruleset();
    const std::string text = save_ruleset_string(rs);
    const RuleSet back = load_ruleset_string(text);
    CHECK(back == rs);
}

TEST_CASE("rule file accepts comments and aliases") {
    const RuleSet rs = load_ruleset_string(
        "# alternative nesting experiment\n"
        "VERSION test-1\n"
        "RULE a: IF handover_success_rate <= 71.23 AND TCHCDR > 1 THEN Class A\n"
        "RULE b: IF RAB > 6 THEN Optimised\n");
    CHECK(rs.version == "test-1");
    REQUIRE(rs.rules.size() == 2);
    CHECK(rs.rules[0].guard.size() == 2);
    CHECK(rs.rules[1].outcome == DiagnosisClass::Optimised);
}

TEST_CASE("rule file parse errors") {
    CHECK_THROWS_AS(load_ruleset_string("RULE a: IF HSR <= abc THEN Class A\n"), ParseError);
    CHECK_THROWS_AS(load_ruleset_string("RULE a: IF NOPE <= 1 THEN Class A\n"), ParseError);
    CHECK_THROWS_AS(load_ruleset_string("RULE a: IF HSR <= 1 THEN Class Z\n"), ParseError);
    CHECK_THROWS_AS(load_ruleset_string("RULE a: IF HSR <= 1 THEN Unclassified\n"),
                    ValidationError);
    CHECK_THROWS_AS(load_ruleset_string("RULE a: HSR <= 1 THEN Class A\n"), ParseError);
    CHECK_THROWS_AS(load_ruleset_string(""), ValidationError);
    CHECK_THROWS_AS(
        load_ruleset_string("RULE a: IF HSR <= 1 THEN Class A\n"
                            "RULE a: IF HSR > 1 THEN Class B\n"),
        ValidationError);
}

TEST_CASE("reachability: single rule and exact shadowing") {
    RuleSet rs;
    rs.rules.push_back({"r", {{"HSR", Comparator::LessEqual, 50.0}}, DiagnosisClass::ClassA});
    auto entries = analyze_reachability(rs, default_attribute_bounds());
    REQUIRE(entries.size() == 1);
    CHECK(entries[0].reachable);
    REQUIRE(entries[0].witness.has_value());
    CHECK(entries[0].witness->handover_success_rate() <= 50.0);

    rs.rules.push_back({"r2", {{"HSR", Comparator::LessEqual, 50.0}}, DiagnosisClass::ClassB});
    entries = analyze_reachability(rs, default_attribute_bounds());
    CHECK(entries[0].reachable);
    CHECK(!entries[1].reachable);
}

TEST_CASE("reachability of the default ruleset") {
    const auto entries = analyze_reachability(default_ruleset(), default_attribute_bounds());
    REQUIRE(entries.size() == 13);
    for (std::size_t i = 0; i < 8; ++i) {
        CHECK(entries[i].reachable);
        REQUIRE(entries[i].witness.has_value());
        // the witness really reaches its rule under first-match evaluation
        const RuleSet rs = default_ruleset();
        for (std::size_t j = 0; j < rs.rules.size(); ++j) {
            if (rule_matches(rs.rules[j], *entries[i].witness)) {
                CHECK(j == i);
                break;
            }
        }
    }
    // the trailing RAB branches are shadowed by the HSR partition
    for (std::size_t i = 8; i < 13; ++i) CHECK(!entries[i].reachable);
}

TEST_CASE("permuting disjoint rules never changes a classification") {
    Rng rng(99);
    for (int trial = 0; trial < 300; ++trial) {
        const auto attr = static_cast<KpiAttribute>(rng.below(kKpiAttributeCount));
        const auto [lo, hi] = kpi_attribute_default_range(attr);
        const double t1 = rng.uniform(lo, hi);
        const double t2 = rng.uniform(t1, hi);
        // {a <= t1} and {a > t2} are disjoint for t1 <= t2
        DiagnosticRule r1{"p", {{std::string(kpi_attribute_token(attr)),
                                 Comparator::LessEqual, t1}},
                          DiagnosisClass::ClassA};
        DiagnosticRule r2{"q", {{std::string(kpi_attribute_token(attr)),
                                 Comparator::Greater, t2}},
                          DiagnosisClass::ClassB};
        RuleSet ab{{r1, r2}, "ab"};
        RuleSet ba{{r2, r1}, "ba"};
        for (int i = 0; i < 5; ++i) {
            KpiRecord r = fill_record();
            r.feature(attr) = rng.uniform(lo, hi);
            CHECK(classify(r, ab) == classify(r, ba));
        }
    }
}

TEST_CASE("classify_row works over a generic schema") {
    RuleSet rs;
    rs.rules.push_back({"lo", {{"x", Comparator::LessEqual, 5.0}}, DiagnosisClass::ClassA});
    rs.rules.push_back({"hi", {{"x", Comparator::Greater, 5.0}}, DiagnosisClass::ClassB});
    const std::vector<std::string> schema = {"x"};
    const double row_lo[] = {4.0};
    const double row_hi[] = {6.0};
    CHECK(classify_row(row_lo, schema, rs) == DiagnosisClass::ClassA);
    CHECK(classify_row(row_hi, schema, rs) == DiagnosisClass::ClassB);

    const std::vector<std::string> bad_schema = {"y"};
    CHECK_THROWS_AS(classify_row(row_lo, bad_schema, rs), RuleError);
}

} // TEST_SUITE
