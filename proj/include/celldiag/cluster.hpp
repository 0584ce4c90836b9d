#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "celldiag/kpi.hpp"

#include <nlohmann/json_fwd.hpp>

namespace celldiag {

/// The seven clustering attributes, in profile-table order, and the KPI
/// schema attribute each one reads.
inline constexpr std::size_t kClusterFeatureCount = 7;

const std::array<std::string, kClusterFeatureCount>& clustering_feature_names();
const std::array<KpiAttribute, kClusterFeatureCount>& clustering_feature_attributes();

/// Extracts the 7 clustering features from a record. Raises AssignError on
/// non-finite values.
std::array<double, kClusterFeatureCount> clustering_features(const KpiRecord& r);

struct ClusterParams {
    std::size_t k = 9;
    std::size_t max_iterations = 100;
    std::uint64_t seed = 0;
    std::size_t restarts = 10;
    bool standardize = true;
};

/// Per-attribute z-score scaler fitted on the training data. Attributes
/// with zero variance keep scale 1 so they contribute a constant 0.
struct FeatureScaler {
    std::vector<double> mean;
    std::vector<double> std_dev;

    std::vector<double> transform(std::span<const double> row) const;
};

struct AttributeProfile {
    double mean = 0.0;
    double std_dev = 0.0;  // sample std (n-1); 0 for singleton clusters
};

struct ClusterModel {
    std::vector<std::vector<double>> centroids;  // standardized space
    std::vector<std::size_t> assignments;        // record index -> cluster id
    std::vector<std::size_t> cluster_sizes;
    // [cluster][feature], original units
    std::vector<std::vector<AttributeProfile>> profiles;
    double wcss = 0.0;
    std::size_t iterations_run = 0;
    std::vector<double> wcss_trace;  // wcss after each Lloyd iteration
    std::vector<std::string> feature_names;
    FeatureScaler scaler;
};

/// Lloyd's algorithm with seeded random-record initialization, best of
/// `restarts` runs by wcss. Raises ValidationError when N < k or a feature
/// is not finite.
ClusterModel fit(const std::vector<KpiRecord>& data, const ClusterParams& params);

/// Generic variant over explicit feature rows (used for low-dimensional
/// verification datasets).
ClusterModel fit_features(const std::vector<std::vector<double>>& rows,
                          std::vector<std::string> feature_names, const ClusterParams& params);

/// Nearest centroid in standardized space; ties go to the lowest cluster id.
std::size_t assign(const ClusterModel& m, const KpiRecord& r);
std::size_t assign_features(const ClusterModel& m, std::span<const double> row);

/// Text table in the profile-report layout: one block per attribute with
/// Mean and Std.Dev rows, one column per cluster, 2-decimal rendering.
std::string profile_table(const ClusterModel& m);

/// Machine-readable forms: CSV rows (attribute, statistic, cluster, value)
/// and the equivalent JSON.
std::string profile_csv(const ClusterModel& m);
nlohmann::ordered_json profile_json(const ClusterModel& m);

} // namespace celldiag
