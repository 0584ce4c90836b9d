#include "celldiag/kpi.hpp"

#include <cmath>
#include <unordered_map>

#include "celldiag/text.hpp"

namespace celldiag {

std::string_view to_string(DiagnosisClass c) {
    switch (c) {
        case DiagnosisClass::ClassA: return "Class A";
        case DiagnosisClass::ClassB: return "Class B";
        case DiagnosisClass::ClassC: return "Class C";
        case DiagnosisClass::Optimised: return "Optimised";
        case DiagnosisClass::Unclassified: return "Unclassified";
    }
    return "?";
}

std::optional<DiagnosisClass> parse_diagnosis_class(std::string_view text) {
    const std::string key = normalize_name(text);
    if (key == "classa") return DiagnosisClass::ClassA;
    if (key == "classb") return DiagnosisClass::ClassB;
    if (key == "classc") return DiagnosisClass::ClassC;
    if (key == "optimised" || key == "optimized") return DiagnosisClass::Optimised;
    if (key == "unclassified") return DiagnosisClass::Unclassified;
    return std::nullopt;
}

int class_index(DiagnosisClass c) {
    switch (c) {
        case DiagnosisClass::ClassA: return 0;
        case DiagnosisClass::ClassB: return 1;
        case DiagnosisClass::ClassC: return 2;
        case DiagnosisClass::Optimised: return 3;
        case DiagnosisClass::Unclassified: return -1;
    }
    return -1;
}

std::string_view to_string(CauseGroup g) {
    switch (g) {
        case CauseGroup::GCA: return "GCA";
        case CauseGroup::GCB: return "GCB";
        case CauseGroup::GCC: return "GCC";
        case CauseGroup::GCD: return "GCD";
    }
    return "?";
}

std::string_view cause_group_description(CauseGroup g) {
    switch (g) {
        case CauseGroup::GCA: return "call setup and dropped-call faults";
        case CauseGroup::GCB: return "traffic issues";
        case CauseGroup::GCC: return "symptom-dependent causes";
        case CauseGroup::GCD: return "optimised, no fault detected";
    }
    return "?";
}

CauseGroup class_to_group(DiagnosisClass d) {
    switch (d) {
        case DiagnosisClass::ClassA: return CauseGroup::GCA;
        case DiagnosisClass::ClassB: return CauseGroup::GCB;
        case DiagnosisClass::ClassC: return CauseGroup::GCC;
        case DiagnosisClass::Optimised: return CauseGroup::GCD;
        case DiagnosisClass::Unclassified: break;
    }
    throw MappingError("Unclassified has no cause group");
}

namespace {

void require_counter(double value, const char* name) {
    if (!std::isfinite(value) || value < 0.0)
        throw ValidationError(std::string("counter '") + name + "' must be finite and non-negative");
}

} // namespace

DerivedKpis derive_kpis(const CounterRecord& c) {
    require_counter(c.call_attempts, "CA");
    require_counter(c.call_failures, "CF");
    require_counter(c.call_successes, "CS");
    require_counter(c.traffic_in_erl, "TE");
    require_counter(c.traffic_out_erl, "OE");
    require_counter(c.sdcch_attempts, "SDCCHSA");
    require_counter(c.sdcch_successes, "SSDCCH");
    if (c.call_successes > c.call_attempts)
        throw ValidationError("CS exceeds CA for cell '" + c.cell_id + "'");
    if (c.sdcch_successes > c.sdcch_attempts)
        throw ValidationError("SSDCCH exceeds SDCCHSA for cell '" + c.cell_id + "'");

    if (c.call_attempts == 0.0) throw DerivationError("CA");
    if (c.call_successes == 0.0) throw DerivationError("CS");
    if (c.sdcch_attempts == 0.0) throw DerivationError("SDCCHSA");

    DerivedKpis k;
    k.call_success_rate = 100.0 * c.call_successes / c.call_attempts;
    k.dropped_call_rate = 100.0 * c.call_failures / c.call_successes;
    k.traffic_rate = c.traffic_in_erl + c.traffic_out_erl;
    k.sdcch_success_rate = 100.0 * c.sdcch_successes / c.sdcch_attempts;
    return k;
}

namespace {

struct AttributeInfo {
    KpiAttribute attribute;
    std::string_view name;   // canonical column name
    std::string_view token;  // rule-file token
    std::pair<double, double> range;
};

constexpr std::array<AttributeInfo, kKpiAttributeCount> kAttributeInfo = {{
    {KpiAttribute::TchCallDropRate, "Traffic Channel Call drop rate", "TCHCDR", {0.0, 10.0}},
    {KpiAttribute::HandoverSuccessSeizure, "Handover Success Seizure", "HSS", {0.0, 100.0}},
    {KpiAttribute::SdcchDrops, "SDCCH Drops", "SDCCHD", {0.0, 100.0}},
    {KpiAttribute::Rab, "Radio Access Barrier", "RAB", {0.0, 130.0}},
    {KpiAttribute::HandoverAttempts, "Handover Attempts", "HA", {0.0, 8000.0}},
    {KpiAttribute::HandoverFailuresRate, "Handovers Failures Rate", "HF", {0.0, 70.0}},
    {KpiAttribute::HandoverSuccessRate, "Handover Success Rate", "HSR", {0.0, 120.0}},
    {KpiAttribute::TchDropSuddenLostCon, "TCHDropSuddenLostCon", "TCHSDLC", {0.0, 140.0}},
}};

const std::unordered_map<std::string, KpiAttribute>& alias_map() {
    static const std::unordered_map<std::string, KpiAttribute> map = [] {
        std::unordered_map<std::string, KpiAttribute> m;
        auto add = [&m](std::string_view alias, KpiAttribute a) {
            m.emplace(normalize_name(alias), a);
        };
        for (const auto& info : kAttributeInfo) {
            add(info.name, info.attribute);
            add(info.token, info.attribute);
        }
        add("tch_call_drop_rate", KpiAttribute::TchCallDropRate);
        add("TCHCallDropRate", KpiAttribute::TchCallDropRate);
        add("TCHCallDropR", KpiAttribute::TchCallDropRate);
        add("TCH Call Drop Rate", KpiAttribute::TchCallDropRate);
        add("handover_success_seizure", KpiAttribute::HandoverSuccessSeizure);
        // cluster-profile spelling; the congestion column reads this attribute
        add("TCH Congestion Rate", KpiAttribute::HandoverSuccessSeizure);
        add("sdcch_drops", KpiAttribute::SdcchDrops);
        add("rab", KpiAttribute::Rab);
        add("Radio Access Bearer", KpiAttribute::Rab);
        add("handover_attempts", KpiAttribute::HandoverAttempts);
        // cluster-profile spelling; the attempts column reads this attribute
        add("TCH Attempts", KpiAttribute::HandoverAttempts);
        add("handover_failures_rate", KpiAttribute::HandoverFailuresRate);
        add("HFR", KpiAttribute::HandoverFailuresRate);
        add("Handover Failures", KpiAttribute::HandoverFailuresRate);
        add("HandoverFailures", KpiAttribute::HandoverFailuresRate);
        add("HandFailures", KpiAttribute::HandoverFailuresRate);
        add("handover_success_rate", KpiAttribute::HandoverSuccessRate);
        add("HandoverSuccessRate", KpiAttribute::HandoverSuccessRate);
        add("tch_drop_sudden_lost_con", KpiAttribute::TchDropSuddenLostCon);
        // cluster-profile spelling
        add("TCH Dropped Suddenly Lost Connection", KpiAttribute::TchDropSuddenLostCon);
        // cluster-profile spelling of the failure column
        add("TCH Failures", KpiAttribute::TchCallDropRate);
        add("TCHFailures", KpiAttribute::TchCallDropRate);
        return m;
    }();
    return map;
}

} // namespace

std::string_view kpi_attribute_name(KpiAttribute a) {
    return kAttributeInfo[static_cast<std::size_t>(a)].name;
}

std::string_view kpi_attribute_token(KpiAttribute a) {
    return kAttributeInfo[static_cast<std::size_t>(a)].token;
}

std::optional<KpiAttribute> resolve_kpi_attribute(std::string_view name) {
    const auto& m = alias_map();
    auto it = m.find(normalize_name(name));
    if (it == m.end()) return std::nullopt;
    return it->second;
}

std::pair<double, double> kpi_attribute_default_range(KpiAttribute a) {
    return kAttributeInfo[static_cast<std::size_t>(a)].range;
}

void validate_kpi_record(const KpiRecord& r) {
    for (std::size_t i = 0; i < kKpiAttributeCount; ++i) {
        if (!std::isfinite(r.features[i]) || r.features[i] < 0.0)
            throw ValidationError("attribute '" +
                                  std::string(kpi_attribute_name(static_cast<KpiAttribute>(i))) +
                                  "' must be finite and non-negative (cell '" + r.cell_id + "')");
    }
}

} // namespace celldiag
