#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

#include "celldiag/errors.hpp"

namespace celldiag {

// ---------------------------------------------------------------------------
// Diagnosis classes and cause groups
// ---------------------------------------------------------------------------

/// Malfunction class assigned to a cell. Unclassified is the sentinel for
/// "no rule matched"; it is never a trainable class and has no cause group.
enum class DiagnosisClass { ClassA, ClassB, ClassC, Optimised, Unclassified };

/// The four concrete classes, in the fixed reporting order.
inline constexpr std::size_t kClassCount = 4;
inline constexpr std::array<DiagnosisClass, kClassCount> kClassOrder = {
    DiagnosisClass::ClassA, DiagnosisClass::ClassB,
    DiagnosisClass::ClassC, DiagnosisClass::Optimised};

std::string_view to_string(DiagnosisClass c);
std::optional<DiagnosisClass> parse_diagnosis_class(std::string_view text);

/// Index of a concrete class in kClassOrder; -1 for Unclassified.
int class_index(DiagnosisClass c);

/// Cause group a diagnosed malfunction belongs to.
enum class CauseGroup { GCA, GCB, GCC, GCD };

std::string_view to_string(CauseGroup g);
std::string_view cause_group_description(CauseGroup g);

/// ClassA -> GCA, ClassB -> GCB, ClassC -> GCC, Optimised -> GCD.
/// Unclassified has no group and raises MappingError.
CauseGroup class_to_group(DiagnosisClass d);

// ---------------------------------------------------------------------------
// Raw counters and derived KPIs
// ---------------------------------------------------------------------------

/// Raw per-cell counters for one measurement period.
struct CounterRecord {
    std::string cell_id;
    double call_attempts = 0;    // CA, seizure attempts
    double call_failures = 0;    // CF, failures among seized calls
    double call_successes = 0;   // CS, successful seizures
    double traffic_in_erl = 0;   // TE, incoming traffic (Erlang)
    double traffic_out_erl = 0;  // OE, outgoing traffic (Erlang)
    double sdcch_attempts = 0;   // SDCCHSA, SDCCH seizure attempts
    double sdcch_successes = 0;  // SSDCCH, successful SDCCH seizures
};

/// KPIs computed from a CounterRecord.
struct DerivedKpis {
    double call_success_rate = 0;   // CSR, percent in [0,100]
    double dropped_call_rate = 0;   // DCR, percent >= 0
    double traffic_rate = 0;        // TR, Erlang
    double sdcch_success_rate = 0;  // SDCCHSR, percent in [0,100]
};

/// CSR = 100*CS/CA, DCR = 100*CF/CS, TR = TE+OE, SDCCHSR = 100*SSDCCH/SDCCHSA.
/// Invariant violations (negative counters, CS > CA, SSDCCH > SDCCHSA) raise
/// ValidationError; a zero denominator raises DerivationError naming the
/// counter ("CA", "CS" or "SDCCHSA").
DerivedKpis derive_kpis(const CounterRecord& c);

// ---------------------------------------------------------------------------
// The nine-attribute cell performance record
// ---------------------------------------------------------------------------

/// The eight numeric attributes of a cell performance record, in the fixed
/// schema order used by all file IO and reports.
enum class KpiAttribute : int {
    TchCallDropRate = 0,
    HandoverSuccessSeizure,
    SdcchDrops,
    Rab,
    HandoverAttempts,
    HandoverFailuresRate,
    HandoverSuccessRate,
    TchDropSuddenLostCon,
};

inline constexpr std::size_t kKpiAttributeCount = 8;

/// Canonical column name as written to ARFF/CSV headers.
std::string_view kpi_attribute_name(KpiAttribute a);

/// Short token used in rule files (TCHCDR, RAB, HSR, ...).
std::string_view kpi_attribute_token(KpiAttribute a);

/// Alias-aware lookup: canonical names, rule tokens, snake_case forms and
/// the cluster-profile spellings all resolve (case-insensitive, spaces and
/// underscores equivalent). nullopt when unknown.
std::optional<KpiAttribute> resolve_kpi_attribute(std::string_view name);

/// Default value range per attribute, wide enough to cover every diagnostic
/// rule threshold and every built-in cluster template value. Shared by the
/// uniform generator and the reachability analyzer.
std::pair<double, double> kpi_attribute_default_range(KpiAttribute a);

/// One cell's KPI vector plus optional diagnosis label.
struct KpiRecord {
    std::string cell_id;
    std::array<double, kKpiAttributeCount> features{};
    std::optional<DiagnosisClass> diagnosis;

    double feature(KpiAttribute a) const { return features[static_cast<std::size_t>(a)]; }
    double& feature(KpiAttribute a) { return features[static_cast<std::size_t>(a)]; }

    double tch_call_drop_rate() const { return feature(KpiAttribute::TchCallDropRate); }
    double handover_success_seizure() const { return feature(KpiAttribute::HandoverSuccessSeizure); }
    double sdcch_drops() const { return feature(KpiAttribute::SdcchDrops); }
    double rab() const { return feature(KpiAttribute::Rab); }
    double handover_attempts() const { return feature(KpiAttribute::HandoverAttempts); }
    double handover_failures_rate() const { return feature(KpiAttribute::HandoverFailuresRate); }
    double handover_success_rate() const { return feature(KpiAttribute::HandoverSuccessRate); }
    double tch_drop_sudden_lost_con() const { return feature(KpiAttribute::TchDropSuddenLostCon); }
};

/// All numeric fields finite and non-negative; raises ValidationError.
void validate_kpi_record(const KpiRecord& r);

} // namespace celldiag
