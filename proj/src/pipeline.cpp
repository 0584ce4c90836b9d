#include "celldiag/pipeline.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "celldiag/text.hpp"

namespace celldiag {

const std::array<std::string, kKpiFamilyCount>& kpi_family_names() {
    static const std::array<std::string, kKpiFamilyCount> names = {
        "Traffic", "Dropped Calls", "Handover Success", "Call Successful Rate"};
    return names;
}

const std::array<KpiAttribute, kKpiFamilyCount>& kpi_family_attributes() {
    // the schema carries no direct traffic-rate or call-success-rate column;
    // the attempt volume and success-seizure count stand in for those
    // families (the source attribute is named in every report)
    static const std::array<KpiAttribute, kKpiFamilyCount> attrs = {
        KpiAttribute::HandoverAttempts,
        KpiAttribute::TchCallDropRate,
        KpiAttribute::HandoverSuccessRate,
        KpiAttribute::HandoverSuccessSeizure,
    };
    return attrs;
}

GroupKpiSummary kpi_group_summary(const std::vector<KpiRecord>& labeled) {
    GroupKpiSummary summary{};
    for (const auto& rec : labeled) {
        if (!rec.diagnosis)
            throw ValidationError("record '" + rec.cell_id + "' is unlabeled");
        const int idx = class_index(*rec.diagnosis);
        const std::size_t slot = idx >= 0 ? static_cast<std::size_t>(idx) : kClassCount;
        for (std::size_t f = 0; f < kKpiFamilyCount; ++f)
            summary[slot][f].values.push_back(rec.feature(kpi_family_attributes()[f]));
    }
    for (auto& per_class : summary) {
        for (auto& stats : per_class) {
            const std::size_t n = stats.values.size();
            if (n == 0) continue;
            double sum = 0.0;
            for (double v : stats.values) sum += v;
            stats.mean = sum / static_cast<double>(n);
            if (n >= 2) {
                double sq = 0.0;
                for (double v : stats.values) sq += (v - *stats.mean) * (v - *stats.mean);
                stats.std_dev = std::sqrt(sq / static_cast<double>(n - 1));
            }
        }
    }
    return summary;
}

namespace {

template <typename Fn>
auto stage(const char* name, Fn&& fn) {
    try {
        return fn();
    } catch (const PipelineError&) {
        throw;
    } catch (const Error& e) {
        throw PipelineError(name, e.what());
    }
}

std::string label_records(std::vector<KpiRecord>& records, const PipelineConfig& cfg) {
    if (records.empty()) throw ValidationError("dataset is empty");

    const RuleSet rules =
        cfg.rule_file.empty() ? default_ruleset() : load_ruleset_file(cfg.rule_file);
    const std::string rules_name = cfg.rule_file.empty() ? "default" : cfg.rule_file;

    if (cfg.labeling == PipelineConfig::Labeling::Rules) {
        for (auto& rec : records) rec.diagnosis = classify(rec, rules);
        return "rules:" + rules_name;
    }

    // trained tree: use existing labels when complete, otherwise bootstrap
    // them from the rule set, then relabel every record with the tree
    bool all_labeled = true;
    for (const auto& rec : records) {
        if (!rec.diagnosis || *rec.diagnosis == DiagnosisClass::Unclassified) {
            all_labeled = false;
            break;
        }
    }
    std::vector<KpiRecord> training = records;
    if (!all_labeled) {
        for (auto& rec : training) rec.diagnosis = classify(rec, rules);
    }
    const TreeModel model = train(from_kpi_records(training), cfg.learn_params);
    for (auto& rec : records) rec.diagnosis = predict(model, rec);
    return all_labeled ? "tree:labeled-input" : "tree:bootstrapped(" + rules_name + ")";
}

} // namespace

ClusterDiagnosisReport run_pipeline(const Dataset& data, const PipelineConfig& cfg) {
    ClusterDiagnosisReport report;

    // Step 1: estimate the diagnosis of every record
    std::vector<KpiRecord> records = stage("label", [&] {
        if (data.rows.empty()) throw ValidationError("dataset is empty");
        return to_kpi_records(data);
    });
    report.labeling = stage("label", [&] { return label_records(records, cfg); });
    report.total_records = records.size();

    // Step 2: per-class KPI value sets
    report.kpi_summary = stage("summarize", [&] { return kpi_group_summary(records); });

    // Step 3+4: cause groups and their populations
    stage("group", [&] {
        for (const auto& rec : records) {
            const int idx = class_index(*rec.diagnosis);
            if (idx < 0) {
                ++report.unclassified_total;
                continue;
            }
            ++report.class_totals[idx];
            ++report.group_totals[static_cast<std::size_t>(class_to_group(*rec.diagnosis))];
        }
        return 0;
    });

    // Step 5: cluster the technical areas and cross-tabulate
    const ClusterModel model = stage("cluster", [&] { return fit(records, cfg.cluster_params); });
    report.cluster_feature_names = model.feature_names;
    stage("report", [&] {
        report.clusters.resize(model.centroids.size());
        for (std::size_t c = 0; c < model.centroids.size(); ++c) {
            auto& entry = report.clusters[c];
            entry.cluster = c;
            entry.size = model.cluster_sizes[c];
            entry.profile = model.profiles[c];
        }
        for (std::size_t i = 0; i < records.size(); ++i) {
            auto& entry = report.clusters[model.assignments[i]];
            const DiagnosisClass cls = *records[i].diagnosis;
            const int idx = class_index(cls);
            if (idx < 0) {
                ++entry.unclassified_count;
                continue;
            }
            ++entry.class_counts[idx];
            ++entry.group_counts[static_cast<std::size_t>(class_to_group(cls))];
            if (cls == DiagnosisClass::Optimised) ++entry.optimised_cell_count;
        }
        for (auto& entry : report.clusters) {
            for (std::size_t g = 0; g < 4; ++g) {
                if (entry.group_counts[g] == 0)
                    entry.missing_groups.push_back(static_cast<CauseGroup>(g));
            }
        }
        return 0;
    });

    if (!cfg.output_dir.empty()) {
        stage("report", [&] {
            namespace fs = std::filesystem;
            std::error_code ec;
            fs::create_directories(cfg.output_dir, ec);
            if (ec) throw ValidationError("cannot create output dir '" + cfg.output_dir + "'");
            const fs::path dir(cfg.output_dir);
            {
                std::ofstream out(dir / "report.json");
                if (!out) throw ValidationError("cannot write report.json");
                out << report_json(report).dump(2) << "\n";
            }
            {
                std::ofstream out(dir / "report.txt");
                if (!out) throw ValidationError("cannot write report.txt");
                out << report_text(report);
            }
            {
                std::ofstream out(dir / "clusters.csv");
                if (!out) throw ValidationError("cannot write clusters.csv");
                out << report_clusters_csv(report);
            }
            return 0;
        });
    }
    return report;
}

namespace {

std::string opt_stat(const std::optional<double>& v) {
    return v ? format_fixed2(*v) : std::string("-");
}

} // namespace

std::string report_text(const ClusterDiagnosisReport& r) {
    std::ostringstream out;
    auto pad = [](std::string s, std::size_t w) {
        if (s.size() < w) s.append(w - s.size(), ' ');
        return s;
    };

    out << "Cluster diagnosis report\n";
    out << "records: " << r.total_records << "  labeling: " << r.labeling << "\n\n";

    out << "class totals:";
    for (std::size_t c = 0; c < kClassCount; ++c)
        out << "  " << to_string(kClassOrder[c]) << "=" << r.class_totals[c];
    if (r.unclassified_total) out << "  Unclassified=" << r.unclassified_total;
    out << "\ngroup totals:";
    for (std::size_t g = 0; g < 4; ++g)
        out << "  " << to_string(static_cast<CauseGroup>(g)) << "=" << r.group_totals[g];
    out << "\n\n";

    out << pad("cluster", 9) << pad("size", 7);
    for (std::size_t c = 0; c < kClassCount; ++c)
        out << pad(std::string(to_string(kClassOrder[c])), 11);
    out << pad("GCA", 6) << pad("GCB", 6) << pad("GCC", 6) << pad("GCD", 6)
        << "optimised cells\n";
    for (const auto& entry : r.clusters) {
        out << pad(std::to_string(entry.cluster), 9) << pad(std::to_string(entry.size), 7);
        for (std::size_t c = 0; c < kClassCount; ++c)
            out << pad(std::to_string(entry.class_counts[c]), 11);
        for (std::size_t g = 0; g < 4; ++g)
            out << pad(std::to_string(entry.group_counts[g]), 6);
        out << entry.optimised_cell_count << "\n";
        if (!entry.missing_groups.empty()) {
            out << "  warning: no members for";
            for (CauseGroup g : entry.missing_groups) out << " " << to_string(g);
            out << "\n";
        }
    }

    out << "\nper-class KPI values (mean / std.dev)\n";
    out << pad("class", 14);
    for (std::size_t f = 0; f < kKpiFamilyCount; ++f) {
        const auto src = kpi_family_attributes()[f];
        out << pad(kpi_family_names()[f] + " [" +
                       std::string(kpi_attribute_token(src)) + "]",
                   30);
    }
    out << "\n";
    for (std::size_t slot = 0; slot <= kClassCount; ++slot) {
        const std::string name = slot < kClassCount
                                     ? std::string(to_string(kClassOrder[slot]))
                                     : std::string(to_string(DiagnosisClass::Unclassified));
        bool any = false;
        for (std::size_t f = 0; f < kKpiFamilyCount; ++f)
            if (!r.kpi_summary[slot][f].values.empty()) any = true;
        if (slot == kClassCount && !any) continue;
        out << pad(name, 14);
        for (std::size_t f = 0; f < kKpiFamilyCount; ++f) {
            const auto& stats = r.kpi_summary[slot][f];
            out << pad(opt_stat(stats.mean) + " / " + opt_stat(stats.std_dev), 30);
        }
        out << "\n";
    }
    return out.str();
}

std::string report_clusters_csv(const ClusterDiagnosisReport& r) {
    std::ostringstream out;
    out << "cluster,size";
    for (std::size_t c = 0; c < kClassCount; ++c) {
        std::string name = normalize_name(to_string(kClassOrder[c]));
        out << "," << name;
    }
    out << ",unclassified,gca,gcb,gcc,gcd,optimised_cells";
    for (const auto& name : r.cluster_feature_names)
        out << "," << normalize_name(name) << "_mean," << normalize_name(name) << "_std";
    out << "\n";
    for (const auto& entry : r.clusters) {
        out << entry.cluster << "," << entry.size;
        for (std::size_t c = 0; c < kClassCount; ++c) out << "," << entry.class_counts[c];
        out << "," << entry.unclassified_count;
        for (std::size_t g = 0; g < 4; ++g) out << "," << entry.group_counts[g];
        out << "," << entry.optimised_cell_count;
        for (const auto& profile : entry.profile)
            out << "," << format_double(profile.mean) << "," << format_double(profile.std_dev);
        out << "\n";
    }
    return out.str();
}

nlohmann::ordered_json report_json(const ClusterDiagnosisReport& r) {
    nlohmann::ordered_json j;
    j["total_records"] = r.total_records;
    j["labeling"] = r.labeling;

    nlohmann::ordered_json class_totals;
    for (std::size_t c = 0; c < kClassCount; ++c)
        class_totals[std::string(to_string(kClassOrder[c]))] = r.class_totals[c];
    class_totals["Unclassified"] = r.unclassified_total;
    j["class_totals"] = class_totals;

    nlohmann::ordered_json group_totals;
    for (std::size_t g = 0; g < 4; ++g)
        group_totals[std::string(to_string(static_cast<CauseGroup>(g)))] = r.group_totals[g];
    j["group_totals"] = group_totals;

    nlohmann::ordered_json clusters = nlohmann::ordered_json::array();
    for (const auto& entry : r.clusters) {
        nlohmann::ordered_json c;
        c["cluster"] = entry.cluster;
        c["size"] = entry.size;
        nlohmann::ordered_json counts;
        for (std::size_t i = 0; i < kClassCount; ++i)
            counts[std::string(to_string(kClassOrder[i]))] = entry.class_counts[i];
        counts["Unclassified"] = entry.unclassified_count;
        c["class_counts"] = counts;
        nlohmann::ordered_json groups;
        for (std::size_t g = 0; g < 4; ++g)
            groups[std::string(to_string(static_cast<CauseGroup>(g)))] = entry.group_counts[g];
        c["group_counts"] = groups;
        c["optimised_cell_count"] = entry.optimised_cell_count;
        nlohmann::ordered_json missing = nlohmann::ordered_json::array();
        for (CauseGroup g : entry.missing_groups) missing.push_back(std::string(to_string(g)));
        c["missing_groups"] = missing;
        nlohmann::ordered_json profile;
        for (std::size_t d = 0; d < entry.profile.size(); ++d) {
            profile[r.cluster_feature_names[d]] = {{"mean", entry.profile[d].mean},
                                                   {"std_dev", entry.profile[d].std_dev}};
        }
        c["profile"] = profile;
        clusters.push_back(c);
    }
    j["clusters"] = clusters;

    nlohmann::ordered_json summary;
    for (std::size_t slot = 0; slot <= kClassCount; ++slot) {
        const std::string name = slot < kClassCount
                                     ? std::string(to_string(kClassOrder[slot]))
                                     : std::string(to_string(DiagnosisClass::Unclassified));
        nlohmann::ordered_json families;
        for (std::size_t f = 0; f < kKpiFamilyCount; ++f) {
            const auto& stats = r.kpi_summary[slot][f];
            nlohmann::ordered_json fam;
            fam["source"] = std::string(kpi_attribute_name(kpi_family_attributes()[f]));
            fam["count"] = stats.values.size();
            if (stats.mean) fam["mean"] = *stats.mean;
            else fam["mean"] = nullptr;
            if (stats.std_dev) fam["std_dev"] = *stats.std_dev;
            else fam["std_dev"] = nullptr;
            families[kpi_family_names()[f]] = fam;
        }
        summary[name] = families;
    }
    j["kpi_summary"] = summary;
    return j;
}

} // namespace celldiag
