#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "celldiag/cluster.hpp"
#include "celldiag/dataset.hpp"
#include "celldiag/kpi.hpp"
#include "celldiag/rules.hpp"

namespace celldiag {

/// Per-attribute (mean, std_dev) over the 7 clustering attributes plus a
/// sampling weight.
struct ClusterTemplate {
    std::string id;
    std::array<std::pair<double, double>, kClusterFeatureCount> stats{};  // (mean, std)
    double weight = 1.0;
};

/// The nine built-in cluster profiles, equal weights.
std::vector<ClusterTemplate> default_templates();

/// Per-schema-attribute uniform sampling ranges (kpi_attribute_default_range).
struct UniformRanges {
    std::array<std::pair<double, double>, kKpiAttributeCount> range{};
};

UniformRanges default_uniform_ranges();

enum class GenMode { Templates, Uniform, Boundary };

struct GenSpec {
    GenMode mode = GenMode::Uniform;
    std::size_t n = 0;        // Templates/Uniform record count
    std::uint64_t seed = 0;

    // Templates mode
    std::vector<ClusterTemplate> templates = default_templates();
    double separation_scale = 1.0;  // multiplies each template std

    // Uniform mode
    UniformRanges ranges = default_uniform_ranges();

    // Boundary mode: per rule, one record built just inside the guard plus
    // one record per atom flipped just across its boundary, and a
    // first-match witness for every reachable rule.
    RuleSet boundary_rules = default_ruleset();
    double boundary_epsilon = 0.01;

    std::optional<RuleSet> label_with;
};

std::vector<KpiRecord> generate_records(const GenSpec& spec);

/// generate_records wrapped into the canonical 9-attribute dataset.
Dataset generate(const GenSpec& spec);

// ---------------------------------------------------------------------------
// Template file: CSV of (template_id, attribute, mean, std, weight)
// ---------------------------------------------------------------------------

std::vector<ClusterTemplate> load_templates(std::istream& in);
std::vector<ClusterTemplate> load_templates_file(const std::string& path);
void save_templates(const std::vector<ClusterTemplate>& templates, std::ostream& out);

} // namespace celldiag
