#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "celldiag/cluster.hpp"
#include "celldiag/dataset.hpp"
#include "celldiag/kpi.hpp"
#include "celldiag/rules.hpp"
#include "celldiag/tree.hpp"

#include <nlohmann/json_fwd.hpp>

namespace celldiag {

struct PipelineConfig {
    enum class Labeling { Rules, TrainedTree };
    Labeling labeling = Labeling::Rules;
    std::string rule_file;  // empty -> built-in default rule set
    LearnParams learn_params;
    ClusterParams cluster_params;
    std::string output_dir;  // empty -> no files written
};

/// Per-class KPI value sets (the four reported KPI families), plus mean and
/// sample std where defined.
struct FamilyStats {
    std::vector<double> values;
    std::optional<double> mean;     // empty class -> undefined
    std::optional<double> std_dev;  // needs at least 2 values
};

inline constexpr std::size_t kKpiFamilyCount = 4;

/// Family display names and the schema attribute each family reads.
const std::array<std::string, kKpiFamilyCount>& kpi_family_names();
const std::array<KpiAttribute, kKpiFamilyCount>& kpi_family_attributes();

/// [class (kClassOrder) + Unclassified last][family]
using GroupKpiSummary = std::array<std::array<FamilyStats, kKpiFamilyCount>, kClassCount + 1>;

/// Collects, per diagnosis class, the KPI value lists of its members.
/// Records must be labeled.
GroupKpiSummary kpi_group_summary(const std::vector<KpiRecord>& labeled);

struct ClusterDiagnosisEntry {
    std::size_t cluster = 0;
    std::size_t size = 0;
    std::array<std::size_t, kClassCount> class_counts{};  // kClassOrder order
    std::size_t unclassified_count = 0;
    std::array<std::size_t, 4> group_counts{};  // GCA..GCD
    std::size_t optimised_cell_count = 0;
    std::vector<AttributeProfile> profile;      // per clustering feature
    std::vector<CauseGroup> missing_groups;     // groups with no member here
};

struct ClusterDiagnosisReport {
    std::size_t total_records = 0;
    std::string labeling;  // e.g. "rules:default" or "tree:self-trained"
    std::array<std::size_t, kClassCount> class_totals{};
    std::size_t unclassified_total = 0;
    std::array<std::size_t, 4> group_totals{};
    std::vector<ClusterDiagnosisEntry> clusters;
    GroupKpiSummary kpi_summary;
    std::vector<std::string> cluster_feature_names;
};

/// Runs label -> summarize -> group -> cluster -> report. Errors from the
/// stages are wrapped in PipelineError with the stage name. When
/// cfg.output_dir is set, writes report.json, report.txt and clusters.csv
/// there (byte-identical across reruns with the same inputs and seeds).
ClusterDiagnosisReport run_pipeline(const Dataset& data, const PipelineConfig& cfg);

std::string report_text(const ClusterDiagnosisReport& r);
std::string report_clusters_csv(const ClusterDiagnosisReport& r);
nlohmann::ordered_json report_json(const ClusterDiagnosisReport& r);

} // namespace celldiag
