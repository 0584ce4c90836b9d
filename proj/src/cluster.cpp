#include "celldiag/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "celldiag/errors.hpp"
#include "celldiag/rng.hpp"
#include "celldiag/text.hpp"

namespace celldiag {

const std::array<std::string, kClusterFeatureCount>& clustering_feature_names() {
    static const std::array<std::string, kClusterFeatureCount> names = {
        "TCH Failures",
        "TCH Attempts",
        "RAB",
        "Handover Failures",
        "TCH Dropped Suddenly Lost Connection",
        "TCH Congestion Rate",
        "Handover Success Rate",
    };
    return names;
}

const std::array<KpiAttribute, kClusterFeatureCount>& clustering_feature_attributes() {
    static const std::array<KpiAttribute, kClusterFeatureCount> attrs = {
        KpiAttribute::TchCallDropRate,
        KpiAttribute::HandoverAttempts,
        KpiAttribute::Rab,
        KpiAttribute::HandoverFailuresRate,
        KpiAttribute::TchDropSuddenLostCon,
        KpiAttribute::HandoverSuccessSeizure,
        KpiAttribute::HandoverSuccessRate,
    };
    return attrs;
}

std::array<double, kClusterFeatureCount> clustering_features(const KpiRecord& r) {
    std::array<double, kClusterFeatureCount> out{};
    const auto& attrs = clustering_feature_attributes();
    for (std::size_t i = 0; i < kClusterFeatureCount; ++i) {
        out[i] = r.feature(attrs[i]);
        if (!std::isfinite(out[i]))
            throw AssignError("feature '" + clustering_feature_names()[i] +
                              "' is not finite (cell '" + r.cell_id + "')");
    }
    return out;
}

std::vector<double> FeatureScaler::transform(std::span<const double> row) const {
    std::vector<double> out(row.size());
    for (std::size_t i = 0; i < row.size(); ++i) out[i] = (row[i] - mean[i]) / std_dev[i];
    return out;
}

namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double diff = a[i] - b[i];
        d += diff * diff;
    }
    return d;
}

FeatureScaler fit_scaler(const std::vector<std::vector<double>>& rows, std::size_t dims,
                         bool standardize) {
    FeatureScaler s;
    s.mean.assign(dims, 0.0);
    s.std_dev.assign(dims, 1.0);
    if (!standardize) return s;

    const double n = static_cast<double>(rows.size());
    for (const auto& row : rows)
        for (std::size_t i = 0; i < dims; ++i) s.mean[i] += row[i];
    for (std::size_t i = 0; i < dims; ++i) s.mean[i] /= n;
    std::vector<double> var(dims, 0.0);
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < dims; ++i) {
            const double d = row[i] - s.mean[i];
            var[i] += d * d;
        }
    }
    for (std::size_t i = 0; i < dims; ++i) {
        const double sd = std::sqrt(var[i] / n);  // population std for scaling
        s.std_dev[i] = sd > 0.0 ? sd : 1.0;       // zero variance keeps scale 1
    }
    return s;
}

struct LloydResult {
    std::vector<std::vector<double>> centroids;
    std::vector<std::size_t> assignments;
    double wcss = std::numeric_limits<double>::infinity();
    std::size_t iterations = 0;
    std::vector<double> trace;
};

std::size_t nearest_centroid(std::span<const double> point,
                             const std::vector<std::vector<double>>& centroids) {
    std::size_t best = 0;
    double best_d = squared_distance(point, centroids[0]);
    for (std::size_t c = 1; c < centroids.size(); ++c) {
        const double d = squared_distance(point, centroids[c]);
        if (d < best_d) {  // strict: ties keep the lowest cluster id
            best_d = d;
            best = c;
        }
    }
    return best;
}

// Assigns every point, then repairs empty clusters by reseeding their
// centroid on the in-bounds record farthest from its own centroid (donor
// clusters must keep at least one member).
void assign_all(const std::vector<std::vector<double>>& points,
                std::vector<std::vector<double>>& centroids,
                std::vector<std::size_t>& assignments) {
    const std::size_t k = centroids.size();
    for (std::size_t i = 0; i < points.size(); ++i)
        assignments[i] = nearest_centroid(points[i], centroids);

    while (true) {
        std::vector<std::size_t> sizes(k, 0);
        for (std::size_t a : assignments) ++sizes[a];
        std::size_t empty = k;
        for (std::size_t c = 0; c < k; ++c) {
            if (sizes[c] == 0) {
                empty = c;
                break;
            }
        }
        if (empty == k) return;

        std::size_t donor = points.size();
        double worst = -1.0;
        for (std::size_t i = 0; i < points.size(); ++i) {
            if (sizes[assignments[i]] < 2) continue;
            const double d = squared_distance(points[i], centroids[assignments[i]]);
            if (d > worst) {
                worst = d;
                donor = i;
            }
        }
        if (donor == points.size()) return;  // all non-empty clusters are singletons
        centroids[empty] = points[donor];
        assignments[donor] = empty;
    }
}

LloydResult run_lloyd(const std::vector<std::vector<double>>& points, std::size_t k,
                      std::size_t max_iterations, std::uint64_t seed) {
    const std::size_t n = points.size();
    const std::size_t dims = points.front().size();
    Rng rng(seed);

    // initialization: k distinct records, chosen at random
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);

    LloydResult res;
    res.centroids.reserve(k);
    for (std::size_t c = 0; c < k; ++c) res.centroids.push_back(points[order[c]]);
    res.assignments.assign(n, 0);

    assign_all(points, res.centroids, res.assignments);
    std::vector<std::size_t> prev = res.assignments;

    while (res.iterations < max_iterations) {
        // update step: centroids = cluster means
        std::vector<std::vector<double>> means(k, std::vector<double>(dims, 0.0));
        std::vector<std::size_t> sizes(k, 0);
        for (std::size_t i = 0; i < n; ++i) {
            ++sizes[res.assignments[i]];
            for (std::size_t d = 0; d < dims; ++d) means[res.assignments[i]][d] += points[i][d];
        }
        for (std::size_t c = 0; c < k; ++c) {
            if (sizes[c] == 0) {
                means[c] = res.centroids[c];  // keep the old position
                continue;
            }
            for (std::size_t d = 0; d < dims; ++d)
                means[c][d] /= static_cast<double>(sizes[c]);
        }
        res.centroids = std::move(means);

        // assignment step against the fresh centroids
        prev = res.assignments;
        assign_all(points, res.centroids, res.assignments);
        ++res.iterations;

        double w = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            w += squared_distance(points[i], res.centroids[res.assignments[i]]);
        res.trace.push_back(w);
        res.wcss = w;

        if (res.assignments == prev) break;
    }
    return res;
}

ClusterModel fit_rows(const std::vector<std::vector<double>>& original,
                      std::vector<std::string> feature_names, const ClusterParams& params) {
    const std::size_t n = original.size();
    const std::size_t dims = feature_names.size();
    if (params.k < 1) throw ValidationError("k must be at least 1");
    if (n < params.k)
        throw ValidationError("k=" + std::to_string(params.k) + " exceeds the " +
                              std::to_string(n) + " records available");
    if (params.max_iterations < 1) throw ValidationError("max_iterations must be at least 1");
    if (params.restarts < 1) throw ValidationError("restarts must be at least 1");
    for (const auto& row : original) {
        if (row.size() != dims) throw ValidationError("inconsistent feature row width");
        for (double v : row)
            if (!std::isfinite(v)) throw ValidationError("non-finite feature value");
    }

    ClusterModel model;
    model.feature_names = std::move(feature_names);
    model.scaler = fit_scaler(original, dims, params.standardize);

    std::vector<std::vector<double>> points;
    points.reserve(n);
    for (const auto& row : original) points.push_back(model.scaler.transform(row));

    Rng seeder(params.seed);
    LloydResult best;
    for (std::size_t run = 0; run < params.restarts; ++run) {
        LloydResult res = run_lloyd(points, params.k, params.max_iterations,
                                    seeder.fork_seed(run));
        if (res.wcss < best.wcss) best = std::move(res);
    }

    model.centroids = std::move(best.centroids);
    model.assignments = std::move(best.assignments);
    model.wcss = best.wcss;
    model.iterations_run = best.iterations;
    model.wcss_trace = std::move(best.trace);

    model.cluster_sizes.assign(params.k, 0);
    for (std::size_t a : model.assignments) ++model.cluster_sizes[a];

    // profiles in original units, sample standard deviation
    model.profiles.assign(params.k, std::vector<AttributeProfile>(dims));
    std::vector<std::vector<double>> sums(params.k, std::vector<double>(dims, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t d = 0; d < dims; ++d) sums[model.assignments[i]][d] += original[i][d];
    for (std::size_t c = 0; c < params.k; ++c) {
        if (model.cluster_sizes[c] == 0) continue;
        for (std::size_t d = 0; d < dims; ++d)
            model.profiles[c][d].mean = sums[c][d] / static_cast<double>(model.cluster_sizes[c]);
    }
    std::vector<std::vector<double>> sq(params.k, std::vector<double>(dims, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t c = model.assignments[i];
        for (std::size_t d = 0; d < dims; ++d) {
            const double diff = original[i][d] - model.profiles[c][d].mean;
            sq[c][d] += diff * diff;
        }
    }
    for (std::size_t c = 0; c < params.k; ++c) {
        for (std::size_t d = 0; d < dims; ++d) {
            model.profiles[c][d].std_dev =
                model.cluster_sizes[c] > 1
                    ? std::sqrt(sq[c][d] / static_cast<double>(model.cluster_sizes[c] - 1))
                    : 0.0;
        }
    }
    return model;
}

} // namespace

ClusterModel fit(const std::vector<KpiRecord>& data, const ClusterParams& params) {
    std::vector<std::vector<double>> rows;
    rows.reserve(data.size());
    for (const auto& r : data) {
        const auto f = clustering_features(r);
        rows.emplace_back(f.begin(), f.end());
    }
    const auto& names = clustering_feature_names();
    return fit_rows(rows, std::vector<std::string>(names.begin(), names.end()), params);
}

ClusterModel fit_features(const std::vector<std::vector<double>>& rows,
                          std::vector<std::string> feature_names, const ClusterParams& params) {
    return fit_rows(rows, std::move(feature_names), params);
}

std::size_t assign_features(const ClusterModel& m, std::span<const double> row) {
    if (row.size() != m.feature_names.size())
        throw AssignError("record has " + std::to_string(row.size()) + " features, model needs " +
                          std::to_string(m.feature_names.size()));
    for (double v : row)
        if (!std::isfinite(v)) throw AssignError("non-finite feature value");
    const auto scaled = m.scaler.transform(row);
    return nearest_centroid(scaled, m.centroids);
}

std::size_t assign(const ClusterModel& m, const KpiRecord& r) {
    const auto f = clustering_features(r);
    return assign_features(m, f);
}

std::string profile_table(const ClusterModel& m) {
    const std::size_t k = m.centroids.size();
    constexpr std::size_t label_width = 38;
    constexpr std::size_t col_width = 12;

    std::ostringstream out;
    auto pad = [](std::string s, std::size_t w) {
        if (s.size() < w) s.append(w - s.size(), ' ');
        return s;
    };
    auto rpad = [](std::string s, std::size_t w) {
        if (s.size() < w) s.insert(0, w - s.size(), ' ');
        return s;
    };

    out << "k-means cluster profiles\n";
    out << pad("Attribute (KPI)", label_width);
    for (std::size_t c = 0; c < k; ++c) out << rpad("Cluster " + std::to_string(c), col_width);
    out << "\n";
    for (std::size_t d = 0; d < m.feature_names.size(); ++d) {
        out << m.feature_names[d] << "\n";
        out << pad("  Mean", label_width);
        for (std::size_t c = 0; c < k; ++c)
            out << rpad(format_fixed2(m.profiles[c][d].mean), col_width);
        out << "\n";
        out << pad("  Std.Dev", label_width);
        for (std::size_t c = 0; c < k; ++c)
            out << rpad(format_fixed2(m.profiles[c][d].std_dev), col_width);
        out << "\n";
    }
    out << "\nwcss: " << format_double(m.wcss) << "  iterations: " << m.iterations_run << "\n";
    return out.str();
}

std::string profile_csv(const ClusterModel& m) {
    std::ostringstream out;
    out << "attribute,statistic,cluster,value\n";
    for (std::size_t d = 0; d < m.feature_names.size(); ++d) {
        for (std::size_t c = 0; c < m.centroids.size(); ++c) {
            out << m.feature_names[d] << ",mean," << c << ","
                << format_double(m.profiles[c][d].mean) << "\n";
            out << m.feature_names[d] << ",std_dev," << c << ","
                << format_double(m.profiles[c][d].std_dev) << "\n";
        }
    }
    return out.str();
}

nlohmann::ordered_json profile_json(const ClusterModel& m) {
    nlohmann::ordered_json j;
    j["k"] = m.centroids.size();
    j["wcss"] = m.wcss;
    j["iterations"] = m.iterations_run;
    j["cluster_sizes"] = m.cluster_sizes;
    nlohmann::ordered_json attrs = nlohmann::ordered_json::array();
    for (std::size_t d = 0; d < m.feature_names.size(); ++d) {
        nlohmann::ordered_json entry;
        entry["attribute"] = m.feature_names[d];
        nlohmann::ordered_json means = nlohmann::ordered_json::array();
        nlohmann::ordered_json stds = nlohmann::ordered_json::array();
        for (std::size_t c = 0; c < m.centroids.size(); ++c) {
            means.push_back(m.profiles[c][d].mean);
            stds.push_back(m.profiles[c][d].std_dev);
        }
        entry["mean"] = means;
        entry["std_dev"] = stds;
        attrs.push_back(entry);
    }
    j["profiles"] = attrs;
    return j;
}

} // namespace celldiag
