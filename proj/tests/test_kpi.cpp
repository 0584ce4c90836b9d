#include <doctest.h>

#include "celldiag/kpi.hpp"
#include "celldiag/rng.hpp"

using namespace celldiag;

namespace {

CounterRecord valid_counters() {
    CounterRecord c;
    c.cell_id = "cell-1";
    c.call_attempts = 100;
    c.call_successes = 90;
    c.call_failures = 9;
    c.traffic_in_erl = 2.5;
    c.traffic_out_erl = 1.5;
    c.sdcch_attempts = 200;
    c.sdcch_successes = 190;
    return c;
}

} // namespace

TEST_SUITE("kpi") {

TEST_CASE("derive_kpis computes the four KPI ratios") {
    const DerivedKpis k = derive_kpis(valid_counters());
    CHECK(k.call_success_rate == doctest::Approx(90.0));
    CHECK(k.dropped_call_rate == doctest::Approx(10.0));
    CHECK(k.traffic_rate == doctest::Approx(4.0));
    CHECK(k.sdcch_success_rate == doctest::Approx(95.0));
}

TEST_CASE("derive_kpis zero-failure case") {
    CounterRecord c = valid_counters();
    c.call_attempts = 100;
    c.call_successes = 100;
    c.call_failures = 0;
    const DerivedKpis k = derive_kpis(c);
    CHECK(k.call_success_rate == 100.0);
    CHECK(k.dropped_call_rate == 0.0);
}

TEST_CASE("derive_kpis names the zero denominator") {
    CounterRecord c = valid_counters();
    c.call_attempts = 0;
    c.call_successes = 0;
    try {
        derive_kpis(c);
        FAIL("expected DerivationError");
    } catch (const DerivationError& e) {
        CHECK(e.counter() == "CA");
    }

    c = valid_counters();
    c.call_successes = 0;
    c.call_failures = 0;
    try {
        derive_kpis(c);
        FAIL("expected DerivationError");
    } catch (const DerivationError& e) {
        CHECK(e.counter() == "CS");
    }

    c = valid_counters();
    c.sdcch_attempts = 0;
    c.sdcch_successes = 0;
    try {
        derive_kpis(c);
        FAIL("expected DerivationError");
    } catch (const DerivationError& e) {
        CHECK(e.counter() == "SDCCHSA");
    }
}

TEST_CASE("derive_kpis rejects invariant violations") {
    CounterRecord c = valid_counters();
    c.call_successes = c.call_attempts + 1;
    CHECK_THROWS_AS(derive_kpis(c), ValidationError);

    c = valid_counters();
    c.sdcch_successes = c.sdcch_attempts + 1;
    CHECK_THROWS_AS(derive_kpis(c), ValidationError);

    c = valid_counters();
    c.call_failures = -1;
    CHECK_THROWS_AS(derive_kpis(c), ValidationError);
}

TEST_CASE("derive_kpis is scale-covariant in the count fields") {
    Rng rng(20240701);
    for (int i = 0; i < 1000; ++i) {
        CounterRecord c;
        c.call_attempts = 1 + static_cast<double>(rng.below(1000000));
        c.call_successes = 1 + static_cast<double>(rng.below(
                                   static_cast<std::uint64_t>(c.call_attempts)));
        c.call_failures = static_cast<double>(rng.below(2000000));
        c.traffic_in_erl = rng.uniform(0, 50);
        c.traffic_out_erl = rng.uniform(0, 50);
        c.sdcch_attempts = 1 + static_cast<double>(rng.below(1000000));
        c.sdcch_successes = static_cast<double>(
            rng.below(static_cast<std::uint64_t>(c.sdcch_attempts) + 1));
        const double m = 2 + static_cast<double>(rng.below(999));

        const DerivedKpis base = derive_kpis(c);
        CounterRecord scaled = c;
        scaled.call_attempts *= m;
        scaled.call_successes *= m;
        scaled.call_failures *= m;
        scaled.sdcch_attempts *= m;
        scaled.sdcch_successes *= m;
        const DerivedKpis k = derive_kpis(scaled);

        // products of integer-valued doubles stay exact, so the ratios are
        // bit-identical
        CHECK(k.call_success_rate == base.call_success_rate);
        CHECK(k.dropped_call_rate == base.dropped_call_rate);
        CHECK(k.sdcch_success_rate == base.sdcch_success_rate);

        CHECK(base.call_success_rate >= 0.0);
        CHECK(base.call_success_rate <= 100.0);
        CHECK(base.sdcch_success_rate >= 0.0);
        CHECK(base.sdcch_success_rate <= 100.0);
    }
}

TEST_CASE("class_to_group is the fixed injective mapping") {
    CHECK(class_to_group(DiagnosisClass::ClassA) == CauseGroup::GCA);
    CHECK(class_to_group(DiagnosisClass::ClassB) == CauseGroup::GCB);
    CHECK(class_to_group(DiagnosisClass::ClassC) == CauseGroup::GCC);
    CHECK(class_to_group(DiagnosisClass::Optimised) == CauseGroup::GCD);
    CHECK_THROWS_AS(class_to_group(DiagnosisClass::Unclassified), MappingError);
}

TEST_CASE("diagnosis class text rendering") {
    CHECK(to_string(DiagnosisClass::ClassA) == "Class A");
    CHECK(to_string(DiagnosisClass::Optimised) == "Optimised");
    CHECK(parse_diagnosis_class("Class B") == DiagnosisClass::ClassB);
    CHECK(parse_diagnosis_class("class_c") == DiagnosisClass::ClassC);
    CHECK(parse_diagnosis_class("optimized") == DiagnosisClass::Optimised);
    CHECK(!parse_diagnosis_class("Class D").has_value());
}

TEST_CASE("attribute alias resolution") {
    CHECK(resolve_kpi_attribute("HSR") == KpiAttribute::HandoverSuccessRate);
    CHECK(resolve_kpi_attribute("handover_success_rate") == KpiAttribute::HandoverSuccessRate);
    CHECK(resolve_kpi_attribute("Handover Success Rate") == KpiAttribute::HandoverSuccessRate);
    CHECK(resolve_kpi_attribute("TCH Failures") == KpiAttribute::TchCallDropRate);
    CHECK(resolve_kpi_attribute("TCH Attempts") == KpiAttribute::HandoverAttempts);
    CHECK(resolve_kpi_attribute("TCH Congestion Rate") ==
          KpiAttribute::HandoverSuccessSeizure);
    CHECK(!resolve_kpi_attribute("no such attribute").has_value());
}

TEST_CASE("kpi record validation") {
    KpiRecord r;
    r.cell_id = "c";
    validate_kpi_record(r);  // all zeros are fine
    r.feature(KpiAttribute::Rab) = -0.5;
    CHECK_THROWS_AS(validate_kpi_record(r), ValidationError);
}

} // TEST_SUITE
