#include "celldiag/datagen.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "celldiag/rng.hpp"
#include "celldiag/text.hpp"

namespace celldiag {

std::vector<ClusterTemplate> default_templates() {
    // (mean, std) per clustering attribute for the nine default profiles.
    using S = std::array<std::pair<double, double>, kClusterFeatureCount>;
    std::vector<ClusterTemplate> t = {
        {"cluster-0", S{{{2.32, 0.15}, {14.58, 0.27}, {0, 54.26}, {2.82, 0.26},
                         {0, 53.43}, {2.82, 0.267}, {61.11, 0.196}}}, 1.0},
        {"cluster-1", S{{{13.51, 9.22}, {36.20, 27.03}, {0.032, 0.251}, {11.30, 8.34},
                         {0, 53.43}, {11.30, 8.34}, {48.73, 21.03}}}, 1.0},
        {"cluster-2", S{{{22.83, 0.38}, {79.23, 0.38}, {123.71, 42.93}, {31.12, 0.42},
                         {130.45, 29.69}, {31.12, 0.42}, {73.23, 0.38}}}, 1.0},
        {"cluster-3", S{{{7.55, 0.04}, {18.93, 0.03}, {101.30, 7.32}, {10.56, 0.07},
                         {97.13, 6.89}, {10.56, 0.07}, {51.34, 0.02}}}, 1.0},
        {"cluster-4", S{{{3.58, 0.44}, {57.71, 0.66}, {43.257, 25.42}, {5.20, 0.31},
                         {96.22, 16.96}, {5.20, 0.31}, {116.7, 4.22}}}, 1.0},
        {"cluster-5", S{{{20.93, 7.80}, {72.94, 45.56}, {17.88, 9.62}, {26.85, 8.92},
                         {35.79, 22.33}, {26.85, 8.92}, {65.91, 13.72}}}, 1.0},
        {"cluster-6", S{{{56.97, 16.99}, {7639, 6169}, {0.6, 2.24}, {65.33, 14.12},
                         {5.13, 19.20}, {65.33, 14.12}, {53.0, 15.77}}}, 1.0},
        {"cluster-7", S{{{2.61, 0.43}, {75.95, 9.30}, {76.05, 36.98}, {2.73, 0.48},
                         {31.66, 18.99}, {2.73, 0.48}, {96.74, 1.76}}}, 1.0},
        {"cluster-8", S{{{7.21, 0.09}, {18.60, 0.09}, {36.73, 18.26}, {9.90, 0.18},
                         {37.64, 16.83}, {9.90, 0.18}, {51.09, 0.07}}}, 1.0},
    };
    for (auto& tpl : t) tpl.weight = 1.0 / static_cast<double>(t.size());
    return t;
}

UniformRanges default_uniform_ranges() {
    UniformRanges r;
    for (std::size_t i = 0; i < kKpiAttributeCount; ++i)
        r.range[i] = kpi_attribute_default_range(static_cast<KpiAttribute>(i));
    return r;
}

namespace {

// Gaussian truncated at zero: resample up to 100 times, then clamp.
double sample_non_negative(Rng& rng, double mean, double std_dev) {
    double v = rng.gaussian(mean, std_dev);
    for (int attempt = 0; attempt < 100 && v < 0.0; ++attempt)
        v = rng.gaussian(mean, std_dev);
    return v < 0.0 ? 0.0 : v;
}

std::vector<KpiRecord> generate_templates(const GenSpec& spec) {
    if (spec.n < 1) throw ValidationError("record count must be at least 1");
    if (spec.templates.empty()) throw ValidationError("templates mode needs templates");
    double weight_sum = 0.0;
    for (const auto& t : spec.templates) {
        if (t.weight < 0.0) throw ValidationError("template weight must be non-negative");
        for (const auto& [mean, sd] : t.stats) {
            (void)mean;
            if (sd < 0.0) throw ValidationError("template std_dev must be non-negative");
        }
        weight_sum += t.weight;
    }
    if (weight_sum <= 0.0) throw ValidationError("template weights must not all be zero");
    if (!(spec.separation_scale >= 0.0))
        throw ValidationError("separation_scale must be non-negative");

    // weights are exact sampling proportions: largest-remainder quota
    // allocation, remainder ties to the lower template index
    const std::size_t t_count = spec.templates.size();
    std::vector<std::size_t> quota(t_count, 0);
    std::vector<std::pair<double, std::size_t>> remainders;
    std::size_t allocated = 0;
    for (std::size_t t = 0; t < t_count; ++t) {
        const double exact =
            spec.templates[t].weight / weight_sum * static_cast<double>(spec.n);
        quota[t] = static_cast<std::size_t>(std::floor(exact));
        allocated += quota[t];
        remainders.push_back({exact - std::floor(exact), t});
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t i = 0; allocated < spec.n; ++i, ++allocated)
        ++quota[remainders[i % t_count].second];

    Rng rng(spec.seed);
    const auto& attrs = clustering_feature_attributes();
    std::vector<KpiRecord> records;
    records.reserve(spec.n);
    for (std::size_t t = 0; t < t_count; ++t) {
        for (std::size_t i = 0; i < quota[t]; ++i) {
            KpiRecord rec;
            rec.cell_id = "cell-" + std::to_string(records.size() + 1);
            for (std::size_t f = 0; f < kClusterFeatureCount; ++f) {
                const auto [mean, sd] = spec.templates[t].stats[f];
                rec.feature(attrs[f]) =
                    sample_non_negative(rng, mean, sd * spec.separation_scale);
            }
            records.push_back(std::move(rec));
        }
    }
    return records;
}

std::vector<KpiRecord> generate_uniform(const GenSpec& spec) {
    if (spec.n < 1) throw ValidationError("record count must be at least 1");
    for (const auto& [lo, hi] : spec.ranges.range)
        if (!(lo < hi)) throw ValidationError("uniform ranges must be non-degenerate");

    Rng rng(spec.seed);
    std::vector<KpiRecord> records;
    records.reserve(spec.n);
    for (std::size_t i = 0; i < spec.n; ++i) {
        KpiRecord rec;
        rec.cell_id = "cell-" + std::to_string(i + 1);
        for (std::size_t a = 0; a < kKpiAttributeCount; ++a) {
            const auto [lo, hi] = spec.ranges.range[a];
            rec.features[a] = rng.uniform(lo, hi);
        }
        records.push_back(std::move(rec));
    }
    return records;
}

// Value epsilon inside / outside an atom's acceptance region.
double atom_value(const RuleAtom& atom, double eps, bool inside) {
    switch (atom.op) {
        case Comparator::LessEqual:
        case Comparator::Less:
            return inside ? atom.threshold - eps : atom.threshold + eps;
        case Comparator::Greater:
        case Comparator::GreaterEqual:
            return inside ? atom.threshold + eps : atom.threshold - eps;
    }
    return atom.threshold;
}

std::vector<KpiRecord> generate_boundary(const GenSpec& spec) {
    validate_ruleset(spec.boundary_rules);
    if (!(spec.boundary_epsilon > 0.0))
        throw ValidationError("boundary epsilon must be positive");
    const double eps = spec.boundary_epsilon;

    // unreferenced attributes sit at the midpoint of their default range
    KpiRecord fill;
    for (std::size_t a = 0; a < kKpiAttributeCount; ++a) {
        const auto [lo, hi] = kpi_attribute_default_range(static_cast<KpiAttribute>(a));
        fill.features[a] = (lo + hi) / 2.0;
    }

    std::vector<KpiRecord> records;
    auto add = [&records](KpiRecord rec) {
        rec.cell_id = "cell-" + std::to_string(records.size() + 1);
        for (double& v : rec.features)
            if (v < 0.0) v = 0.0;
        records.push_back(std::move(rec));
    };

    for (const auto& rule : spec.boundary_rules.rules) {
        KpiRecord inside = fill;
        for (const auto& atom : rule.guard)
            inside.feature(*resolve_kpi_attribute(atom.attribute)) =
                atom_value(atom, eps, true);
        add(inside);
        for (std::size_t i = 0; i < rule.guard.size(); ++i) {
            KpiRecord out = inside;
            const auto& atom = rule.guard[i];
            out.feature(*resolve_kpi_attribute(atom.attribute)) =
                atom_value(atom, eps, false);
            add(out);
        }
    }

    // first-match witnesses give every reachable rule a labeled
    // representative even when an earlier rule shadows its tight record
    const auto reach = analyze_reachability(spec.boundary_rules, default_attribute_bounds());
    for (const auto& entry : reach) {
        if (entry.reachable) add(*entry.witness);
    }
    return records;
}

} // namespace

std::vector<KpiRecord> generate_records(const GenSpec& spec) {
    std::vector<KpiRecord> records;
    switch (spec.mode) {
        case GenMode::Templates: records = generate_templates(spec); break;
        case GenMode::Uniform: records = generate_uniform(spec); break;
        case GenMode::Boundary: records = generate_boundary(spec); break;
    }
    if (spec.label_with) {
        for (auto& rec : records) rec.diagnosis = classify(rec, *spec.label_with);
    }
    return records;
}

Dataset generate(const GenSpec& spec) {
    Dataset d = from_kpi_records(generate_records(spec));
    d.provenance = "generated";
    return d;
}

// ---------------------------------------------------------------------------
// Template file IO
// ---------------------------------------------------------------------------

std::vector<ClusterTemplate> load_templates(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    std::vector<ClusterTemplate> templates;
    std::vector<std::array<bool, kClusterFeatureCount>> seen;

    auto feature_index = [](const std::string& name) -> std::size_t {
        const auto& names = clustering_feature_names();
        const std::string key = normalize_name(name);
        for (std::size_t i = 0; i < names.size(); ++i)
            if (normalize_name(names[i]) == key) return i;
        return names.size();
    };

    bool header_checked = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        if (!header_checked) {
            header_checked = true;
            if (normalize_name(t) == normalize_name("template_id,attribute,mean,std,weight"))
                continue;  // optional header row
        }
        const auto fields = split_on(t, ',');
        if (fields.size() != 5)
            throw ParseError("expected template_id,attribute,mean,std,weight", line_no);
        const std::string id = trim(fields[0]);
        const std::size_t f = feature_index(trim(fields[1]));
        if (f >= kClusterFeatureCount)
            throw ParseError("unknown clustering attribute '" + trim(fields[1]) + "'", line_no);
        double mean = 0, sd = 0, weight = 0;
        if (!parse_double(trim(fields[2]), mean) || !parse_double(trim(fields[3]), sd) ||
            !parse_double(trim(fields[4]), weight))
            throw ParseError("bad numeric field", line_no);

        std::size_t idx = templates.size();
        for (std::size_t i = 0; i < templates.size(); ++i) {
            if (templates[i].id == id) {
                idx = i;
                break;
            }
        }
        if (idx == templates.size()) {
            templates.push_back({id, {}, weight});
            seen.push_back({});
        }
        templates[idx].stats[f] = {mean, sd};
        templates[idx].weight = weight;
        seen[idx][f] = true;
    }
    if (templates.empty()) throw ValidationError("template file has no rows");
    for (std::size_t i = 0; i < templates.size(); ++i) {
        for (std::size_t f = 0; f < kClusterFeatureCount; ++f) {
            if (!seen[i][f])
                throw ValidationError("template '" + templates[i].id + "' lacks attribute '" +
                                      clustering_feature_names()[f] + "'");
        }
    }
    return templates;
}

std::vector<ClusterTemplate> load_templates_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open '" + path + "'");
    return load_templates(in);
}

void save_templates(const std::vector<ClusterTemplate>& templates, std::ostream& out) {
    out << "template_id,attribute,mean,std,weight\n";
    for (const auto& t : templates) {
        for (std::size_t f = 0; f < kClusterFeatureCount; ++f) {
            out << t.id << "," << clustering_feature_names()[f] << ","
                << format_double(t.stats[f].first) << "," << format_double(t.stats[f].second)
                << "," << format_double(t.weight) << "\n";
        }
    }
}

} // namespace celldiag
