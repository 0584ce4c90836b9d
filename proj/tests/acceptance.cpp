// Acceptance suite: one check per shipping criterion, one PASS/FAIL line
// each. Exit code 0 only when every criterion holds.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <vector>

#include "celldiag/cluster.hpp"
#include "celldiag/datagen.hpp"
#include "celldiag/dataset.hpp"
#include "celldiag/pipeline.hpp"
#include "celldiag/rng.hpp"
#include "celldiag/rules.hpp"
#include "celldiag/text.hpp"
#include "celldiag/tree.hpp"

using namespace celldiag;

namespace {

struct CheckFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void require(bool condition, const std::string& message) {
    if (!condition) throw CheckFailure(message);
}

// ---------------------------------------------------------------------------
// shared helpers
// ---------------------------------------------------------------------------

KpiRecord fill_record() {
    KpiRecord r;
    r.cell_id = "w";
    for (std::size_t a = 0; a < kKpiAttributeCount; ++a) {
        const auto [lo, hi] = kpi_attribute_default_range(static_cast<KpiAttribute>(a));
        r.features[a] = (lo + hi) / 2.0;
    }
    return r;
}

double atom_side(const RuleAtom& atom, double eps, bool inside) {
    const bool upper = atom.op == Comparator::LessEqual || atom.op == Comparator::Less;
    return upper ? (inside ? atom.threshold - eps : atom.threshold + eps)
                 : (inside ? atom.threshold + eps : atom.threshold - eps);
}

Dataset labeled_uniform(std::size_t n, std::uint64_t seed) {
    GenSpec spec;
    spec.mode = GenMode::Uniform;
    spec.n = n;
    spec.seed = seed;
    spec.label_with = default_ruleset();
    return generate(spec);
}

// ---------------------------------------------------------------------------
// 1. rule threshold fidelity
// ---------------------------------------------------------------------------

std::string criterion_rule_fidelity() {
    const RuleSet rs = default_ruleset();
    require(rs.rules.size() == 13, "expected 13 canonical branches");
    std::size_t cases = 0;
    for (const auto& rule : rs.rules) {
        KpiRecord inside = fill_record();
        for (const auto& atom : rule.guard)
            inside.feature(*resolve_kpi_attribute(atom.attribute)) = atom_side(atom, 0.01, true);
        require(rule_matches(rule, inside), rule.id + ": 0.01-inside witness must match");
        RuleSet single{{rule}, "single"};
        require(classify(inside, single) == rule.outcome,
                rule.id + ": witness must classify to the branch outcome");
        ++cases;
        for (const auto& atom : rule.guard) {
            KpiRecord out = inside;
            // 0.02 across the boundary: from threshold-0.01 to threshold+0.01
            out.feature(*resolve_kpi_attribute(atom.attribute)) = atom_side(atom, 0.01, false);
            require(!rule_matches(rule, out),
                    rule.id + ": crossing one atom boundary must drop the match");
            ++cases;
        }
    }
    require(cases >= 26, "fewer than 26 fidelity cases");
    return std::to_string(cases) + " cases";
}

// ---------------------------------------------------------------------------
// 2. the learned tree recovers the rule concept
// ---------------------------------------------------------------------------

std::string criterion_tree_recovers_rules() {
    const Dataset train_data = labeled_uniform(10000, 20250801);
    const Dataset test_data = labeled_uniform(2000, 20250802);

    LearnParams params;  // J48-style defaults: pessimistic 0.25, min_leaf 2
    params.seed = 1;
    const TreeModel model = train(train_data, params);
    const EvaluationReport rep = evaluate(model, test_data);
    require(rep.accuracy >= 0.98,
            "held-out accuracy " + format_double(rep.accuracy) + " below 0.98");

    require(!model.root->is_leaf(), "trained tree degenerated to a leaf");
    const double root_threshold = model.root->threshold;
    static const double declared[] = {71.23, 7.42, 22.17, 3,    57.99, 1.18, 3.69,
                                      25.15, 6,    7.65,  26,   2.87,  3.18};
    bool near = false;
    for (double t : declared)
        if (std::abs(root_threshold - t) <= 1.0) near = true;
    require(near, "root threshold " + format_double(root_threshold) +
                      " not within 1.0 of any declared threshold");
    return "accuracy " + format_double(rep.accuracy) + ", root at " +
           format_double(root_threshold);
}

// ---------------------------------------------------------------------------
// 3. evaluation metrics equal a brute-force recomputation
// ---------------------------------------------------------------------------

struct BruteMetrics {
    double accuracy = 0, mae = 0, weighted = 0;
    std::array<double, kClassCount> precision{}, recall{};
};

BruteMetrics brute_force_metrics(const std::vector<DiagnosisClass>& actual,
                                 const std::vector<DiagnosisClass>& predicted,
                                 const std::vector<std::array<double, kClassCount>>& dists) {
    BruteMetrics b;
    const double n = static_cast<double>(actual.size());
    for (std::size_t i = 0; i < actual.size(); ++i)
        if (actual[i] == predicted[i]) b.accuracy += 1.0;
    b.accuracy /= n;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        double inst = 0;
        for (std::size_t c = 0; c < kClassCount; ++c)
            inst += std::abs(dists[i][c] - (kClassOrder[c] == actual[i] ? 1.0 : 0.0));
        b.mae += inst / static_cast<double>(kClassCount);
    }
    b.mae /= n;
    for (std::size_t c = 0; c < kClassCount; ++c) {
        double tp = 0, pred_c = 0, act_c = 0;
        for (std::size_t i = 0; i < actual.size(); ++i) {
            if (predicted[i] == kClassOrder[c]) {
                pred_c += 1;
                if (actual[i] == kClassOrder[c]) tp += 1;
            }
            if (actual[i] == kClassOrder[c]) act_c += 1;
        }
        b.precision[c] = pred_c > 0 ? tp / pred_c : 0.0;
        b.recall[c] = act_c > 0 ? tp / act_c : 0.0;
        b.weighted += (act_c / n) * b.precision[c];
    }
    return b;
}

std::string criterion_metric_oracle() {
    Rng rng(333);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 2 + rng.below(120);
        std::vector<DiagnosisClass> actual, predicted;
        std::vector<std::array<double, kClassCount>> dists;
        for (std::size_t i = 0; i < n; ++i) {
            actual.push_back(kClassOrder[rng.below(kClassCount)]);
            std::array<double, kClassCount> d{};
            double sum = 0;
            for (auto& v : d) {
                v = rng.uniform(0, 1);
                sum += v;
            }
            for (auto& v : d) v /= sum;
            std::size_t arg = 0;
            for (std::size_t c = 1; c < kClassCount; ++c)
                if (d[c] > d[arg]) arg = c;
            predicted.push_back(kClassOrder[arg]);
            dists.push_back(d);
        }
        const EvaluationReport rep = compute_evaluation(actual, predicted, dists);
        const BruteMetrics b = brute_force_metrics(actual, predicted, dists);
        require(std::abs(rep.accuracy - b.accuracy) <= 1e-9, "accuracy mismatch");
        require(std::abs(rep.mean_absolute_error - b.mae) <= 1e-9, "MAE mismatch");
        require(std::abs(rep.weighted_precision - b.weighted) <= 1e-9,
                "weighted precision mismatch");
        for (std::size_t c = 0; c < kClassCount; ++c) {
            require(std::abs(rep.precision[c] - b.precision[c]) <= 1e-9, "precision mismatch");
            require(std::abs(rep.recall[c] - b.recall[c]) <= 1e-9, "recall mismatch");
        }
    }

    // hand-checked case
    using DC = DiagnosisClass;
    const std::vector<DC> actual = {DC::ClassA, DC::ClassA, DC::ClassB, DC::ClassB};
    const std::vector<DC> predicted = {DC::ClassA, DC::ClassB, DC::ClassB, DC::ClassB};
    std::vector<std::array<double, kClassCount>> hard;
    for (auto p : predicted) {
        std::array<double, kClassCount> d{};
        d[class_index(p)] = 1.0;
        hard.push_back(d);
    }
    const EvaluationReport hand = compute_evaluation(actual, predicted, hard);
    require(hand.accuracy == 0.75, "hand case accuracy must be exactly 0.75");
    require(std::abs(hand.weighted_precision - 5.0 / 6.0) <= 1e-12,
            "hand case weighted precision must be 5/6");

    // class-B recall on counts (216, 220)
    std::vector<DC> b_actual(220, DC::ClassB);
    std::vector<DC> b_predicted(220, DC::ClassB);
    for (std::size_t i : {5u, 50u, 100u, 219u}) b_predicted[i] = DC::ClassC;
    std::vector<std::array<double, kClassCount>> b_hard;
    for (auto p : b_predicted) {
        std::array<double, kClassCount> d{};
        d[class_index(p)] = 1.0;
        b_hard.push_back(d);
    }
    const EvaluationReport b_rep = compute_evaluation(b_actual, b_predicted, b_hard);
    require(std::abs(b_rep.recall[1] - 216.0 / 220.0) <= 1e-12,
            "class-B recall must be 216/220");
    return "100 random sets + hand cases";
}

// ---------------------------------------------------------------------------
// 4. k-means correctness
// ---------------------------------------------------------------------------

std::string criterion_kmeans() {
    // (a) wcss never increases across Lloyd iterations
    Rng rng(444);
    std::size_t iterations_seen = 0;
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 20 + rng.below(80);
        const std::size_t dims = 1 + rng.below(4);
        std::vector<std::vector<double>> rows;
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<double> row;
            for (std::size_t d = 0; d < dims; ++d) row.push_back(rng.uniform(0, 100));
            rows.push_back(std::move(row));
        }
        ClusterParams p;
        p.k = 2 + rng.below(5);
        p.seed = trial;
        p.restarts = 2;
        const ClusterModel m =
            fit_features(rows, std::vector<std::string>(dims, "f"), p);
        for (std::size_t i = 1; i < m.wcss_trace.size(); ++i) {
            require(m.wcss_trace[i] <= m.wcss_trace[i - 1] + 1e-9,
                    "wcss increased between iterations");
            ++iterations_seen;
        }
    }
    require(iterations_seen > 0, "no Lloyd iterations observed");

    // (b) blob recovery at the built-in template means
    GenSpec spec;
    spec.mode = GenMode::Templates;
    spec.n = 900;  // quota allocation: records 0..99 from template 0, etc.
    spec.seed = 777;
    spec.separation_scale = 0.1;
    const auto records = generate_records(spec);
    ClusterParams p;
    p.k = 9;
    p.seed = 777;
    p.restarts = 10;
    const ClusterModel m = fit(records, p);

    std::array<std::array<double, 9>, 9> overlap{};
    for (std::size_t i = 0; i < records.size(); ++i)
        overlap[i / 100][m.assignments[i]] += 1.0;

    // best template->cluster matching via bitmask assignment DP
    constexpr std::size_t K = 9;
    std::vector<double> dp(1u << K, -1.0);
    std::vector<int> choice(1u << K, -1);
    dp[0] = 0.0;
    for (std::size_t mask = 1; mask < (1u << K); ++mask) {
        const std::size_t t = static_cast<std::size_t>(__builtin_popcount(mask)) - 1;
        for (std::size_t c = 0; c < K; ++c) {
            if (!(mask & (1u << c))) continue;
            const double prev = dp[mask ^ (1u << c)];
            if (prev < 0) continue;
            const double cand = prev + overlap[t][c];
            if (cand > dp[mask]) {
                dp[mask] = cand;
                choice[mask] = static_cast<int>(c);
            }
        }
    }
    const double agreement = dp[(1u << K) - 1] / static_cast<double>(records.size());
    require(agreement >= 0.95,
            "blob agreement " + format_double(agreement) + " below 0.95");

    std::array<int, K> matched{};
    {
        std::size_t mask = (1u << K) - 1;
        for (int t = K - 1; t >= 0; --t) {
            matched[t] = choice[mask];
            mask ^= (1u << matched[t]);
        }
    }
    const auto templates = default_templates();
    for (std::size_t t = 0; t < K; ++t) {
        std::vector<double> true_mean;
        for (std::size_t f = 0; f < kClusterFeatureCount; ++f)
            true_mean.push_back(templates[t].stats[f].first);
        const auto scaled = m.scaler.transform(true_mean);
        double dist = 0;
        for (std::size_t f = 0; f < kClusterFeatureCount; ++f) {
            const double d = scaled[f] - m.centroids[matched[t]][f];
            dist += d * d;
        }
        require(std::sqrt(dist) < 0.5,
                "centroid " + std::to_string(t) + " error " +
                    format_double(std::sqrt(dist)) + " not below 0.5");
    }

    // (c) exhaustive-partition optimality for k=2 on tiny 1-D datasets
    Rng crng(555);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t n = 2 + crng.below(11);  // up to 12 points
        std::vector<std::vector<double>> rows;
        for (std::size_t i = 0; i < n; ++i) rows.push_back({crng.uniform(0, 100)});
        ClusterParams cp;
        cp.k = 2;
        cp.seed = trial;
        cp.restarts = 50;
        const ClusterModel cm = fit_features(rows, {"x"}, cp);

        std::vector<std::vector<double>> scaled;
        for (const auto& r : rows) scaled.push_back(cm.scaler.transform(r));
        // exhaustive optimum over all 2^n assignments with both clusters used
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t mask = 1; mask + 1 < (1u << n); ++mask) {
            double sum0 = 0, sum1 = 0;
            double n0 = 0, n1 = 0;
            for (std::size_t i = 0; i < n; ++i) {
                if (mask & (1u << i)) {
                    sum1 += scaled[i][0];
                    n1 += 1;
                } else {
                    sum0 += scaled[i][0];
                    n0 += 1;
                }
            }
            const double m0 = sum0 / n0;
            const double m1 = sum1 / n1;
            double w = 0;
            for (std::size_t i = 0; i < n; ++i) {
                const double c = (mask & (1u << i)) ? m1 : m0;
                w += (scaled[i][0] - c) * (scaled[i][0] - c);
            }
            best = std::min(best, w);
        }
        require(std::abs(cm.wcss - best) <= 1e-9 * std::max(1.0, best),
                "k=2 wcss " + format_double(cm.wcss) + " above the exhaustive optimum " +
                    format_double(best));
    }
    return "monotone + blob agreement " + format_double(agreement) + " + exhaustive k=2";
}

// ---------------------------------------------------------------------------
// 5. reachability report against an independent grid oracle
// ---------------------------------------------------------------------------

std::string criterion_reachability() {
    const RuleSet rs = default_ruleset();
    const AttributeBounds bounds = default_attribute_bounds();
    const auto entries = analyze_reachability(rs, bounds);

    // independent oracle: denser threshold neighbourhood, inline comparator
    // arithmetic; attributes no rule references cannot affect matching and
    // contribute a single midpoint value
    std::array<std::set<double>, kKpiAttributeCount> grid;
    std::array<bool, kKpiAttributeCount> referenced{};
    for (const auto& rule : rs.rules)
        for (const auto& atom : rule.guard)
            referenced[static_cast<std::size_t>(*resolve_kpi_attribute(atom.attribute))] = true;
    for (std::size_t a = 0; a < kKpiAttributeCount; ++a) {
        const auto [lo, hi] = bounds.range[a];
        grid[a].insert((lo + hi) / 2.0);
        if (referenced[a]) {
            grid[a].insert(lo);
            grid[a].insert(hi);
        }
    }
    for (const auto& rule : rs.rules) {
        for (const auto& atom : rule.guard) {
            const auto idx = static_cast<std::size_t>(*resolve_kpi_attribute(atom.attribute));
            for (double d : {-0.02, -0.01, -0.005, 0.0, 0.005, 0.01, 0.02}) {
                const double v = atom.threshold + d;
                if (v >= bounds.range[idx].first && v <= bounds.range[idx].second)
                    grid[idx].insert(v);
            }
        }
    }
    std::array<std::vector<double>, kKpiAttributeCount> values;
    std::array<std::size_t, kKpiAttributeCount> idx{};
    for (std::size_t a = 0; a < kKpiAttributeCount; ++a)
        values[a].assign(grid[a].begin(), grid[a].end());

    std::vector<bool> oracle_reachable(rs.rules.size(), false);
    std::array<double, kKpiAttributeCount> point{};
    while (true) {
        for (std::size_t a = 0; a < kKpiAttributeCount; ++a) point[a] = values[a][idx[a]];
        for (std::size_t r = 0; r < rs.rules.size(); ++r) {
            bool all = true;
            for (const auto& atom : rs.rules[r].guard) {
                const double v =
                    point[static_cast<std::size_t>(*resolve_kpi_attribute(atom.attribute))];
                bool ok = false;
                switch (atom.op) {
                    case Comparator::LessEqual: ok = v <= atom.threshold; break;
                    case Comparator::Less: ok = v < atom.threshold; break;
                    case Comparator::Greater: ok = v > atom.threshold; break;
                    case Comparator::GreaterEqual: ok = v >= atom.threshold; break;
                }
                if (!ok) {
                    all = false;
                    break;
                }
            }
            if (all) {
                oracle_reachable[r] = true;
                break;  // first match wins
            }
        }
        std::size_t d = 0;
        while (d < kKpiAttributeCount) {
            if (++idx[d] < values[d].size()) break;
            idx[d] = 0;
            ++d;
        }
        if (d == kKpiAttributeCount) break;
    }

    std::size_t unreachable = 0;
    for (std::size_t r = 0; r < entries.size(); ++r) {
        require(entries[r].reachable == oracle_reachable[r],
                entries[r].rule_id + ": report disagrees with the grid oracle");
        if (!entries[r].reachable) ++unreachable;
        if (entries[r].reachable) {
            require(entries[r].witness.has_value(),
                    entries[r].rule_id + ": reachable rule lacks a witness");
            // the witness reaches exactly this rule under first-match order
            for (std::size_t j = 0; j < rs.rules.size(); ++j) {
                if (rule_matches(rs.rules[j], *entries[r].witness)) {
                    require(j == r, entries[r].rule_id + ": witness reaches another rule");
                    break;
                }
            }
        }
    }
    // the RAB branches (canonical 9-13) are the unreachable ones
    for (std::size_t r = 0; r < 8; ++r)
        require(entries[r].reachable, entries[r].rule_id + " must be reachable");
    require(!entries[8].reachable && !entries[9].reachable,
            "canonical branches 9 and 10 must be unreachable");
    for (std::size_t r = 8; r < 13; ++r)
        require(!entries[r].reachable,
                entries[r].rule_id + " must be shadowed by the HSR partition");
    return std::to_string(unreachable) + " unreachable RAB branches, witnesses verified";
}

// ---------------------------------------------------------------------------
// 6. IO round-trips and the 440/110 split
// ---------------------------------------------------------------------------

std::string criterion_io() {
    Rng rng(666);
    for (int trial = 0; trial < 100; ++trial) {
        GenSpec spec;
        spec.mode = GenMode::Uniform;
        spec.n = 1 + rng.below(60);
        spec.seed = 1000 + trial;
        if (trial % 2 == 0) spec.label_with = default_ruleset();
        const Dataset d = generate(spec);

        std::istringstream arff_in(write_arff_string(d));
        const Dataset from_arff = read_arff(arff_in);
        require(from_arff.same_content(d), "ARFF round-trip changed the dataset");
        require(write_arff_string(from_arff) == write_arff_string(d),
                "second ARFF trip not byte-identical");

        std::ostringstream csv;
        write_csv(d, csv);
        std::istringstream csv_in(csv.str());
        const Dataset from_csv = read_csv(csv_in, true);
        require(from_csv.rows == from_arff.rows, "CSV and ARFF values differ");
    }

    GenSpec spec;
    spec.mode = GenMode::Uniform;
    spec.n = 550;
    spec.seed = 999;
    const Dataset d = generate(spec);
    const auto parts = split(d, {0.8, 7});
    require(parts.train.size() == 440, "train size is not 440");
    require(parts.test.size() == 110, "test size is not 110");
    return "100 round-trips + 440/110 split";
}

// ---------------------------------------------------------------------------
// 7. pipeline conservation and reproducibility
// ---------------------------------------------------------------------------

std::string criterion_pipeline() {
    GenSpec spec;
    spec.mode = GenMode::Uniform;
    spec.n = 1000;
    spec.seed = 20250803;
    const Dataset data = generate(spec);

    PipelineConfig cfg;
    cfg.labeling = PipelineConfig::Labeling::TrainedTree;  // label -> train -> cluster
    cfg.learn_params.seed = 42;
    cfg.cluster_params.k = 9;
    cfg.cluster_params.seed = 42;
    const ClusterDiagnosisReport rep = run_pipeline(data, cfg);

    require(rep.total_records == 1000, "record count mismatch");
    std::size_t size_sum = 0;
    for (const auto& entry : rep.clusters) {
        size_sum += entry.size;
        std::size_t class_sum = entry.unclassified_count;
        for (std::size_t c = 0; c < kClassCount; ++c) class_sum += entry.class_counts[c];
        require(class_sum == entry.size, "cluster class counts do not sum to its size");
    }
    require(size_sum == 1000, "cluster sizes do not sum to 1000");

    // optimised counts equal a raw recount: replay the pipeline stages
    auto records = to_kpi_records(data);
    std::vector<KpiRecord> bootstrap = records;
    for (auto& r : bootstrap) r.diagnosis = classify(r, default_ruleset());
    const TreeModel tree = train(from_kpi_records(bootstrap), cfg.learn_params);
    for (auto& r : records) r.diagnosis = predict(tree, r);
    const ClusterModel km = fit(records, cfg.cluster_params);
    std::vector<std::size_t> optimised(cfg.cluster_params.k, 0);
    for (std::size_t i = 0; i < records.size(); ++i)
        if (*records[i].diagnosis == DiagnosisClass::Optimised) ++optimised[km.assignments[i]];
    for (std::size_t c = 0; c < cfg.cluster_params.k; ++c)
        require(rep.clusters[c].optimised_cell_count == optimised[c],
                "optimised cell count differs from the raw recount");

    // byte-identical rerun
    namespace fs = std::filesystem;
    const fs::path dir_a = fs::temp_directory_path() / "celldiag_acc_a";
    const fs::path dir_b = fs::temp_directory_path() / "celldiag_acc_b";
    fs::remove_all(dir_a);
    fs::remove_all(dir_b);
    cfg.output_dir = dir_a.string();
    run_pipeline(data, cfg);
    cfg.output_dir = dir_b.string();
    run_pipeline(data, cfg);
    for (const char* name : {"report.json", "report.txt", "clusters.csv"}) {
        std::ifstream fa(dir_a / name), fb(dir_b / name);
        std::stringstream sa, sb;
        sa << fa.rdbuf();
        sb << fb.rdbuf();
        require(!sa.str().empty(), std::string(name) + " is empty");
        require(sa.str() == sb.str(), std::string(name) + " differs between reruns");
    }
    fs::remove_all(dir_a);
    fs::remove_all(dir_b);
    return "conservation + byte-identical rerun";
}

// ---------------------------------------------------------------------------
// 8. KPI derivation properties
// ---------------------------------------------------------------------------

std::string criterion_kpi() {
    Rng rng(888);
    for (int i = 0; i < 1000; ++i) {
        CounterRecord c;
        c.call_attempts = 1 + static_cast<double>(rng.below(1000000));
        c.call_successes =
            1 + static_cast<double>(rng.below(static_cast<std::uint64_t>(c.call_attempts)));
        c.call_failures = static_cast<double>(rng.below(2000000));
        c.traffic_in_erl = rng.uniform(0, 80);
        c.traffic_out_erl = rng.uniform(0, 80);
        c.sdcch_attempts = 1 + static_cast<double>(rng.below(1000000));
        c.sdcch_successes =
            static_cast<double>(rng.below(static_cast<std::uint64_t>(c.sdcch_attempts) + 1));
        const double m = 2 + static_cast<double>(rng.below(999));

        const DerivedKpis base = derive_kpis(c);
        require(base.call_success_rate >= 0 && base.call_success_rate <= 100,
                "CSR out of [0,100]");
        require(base.sdcch_success_rate >= 0 && base.sdcch_success_rate <= 100,
                "SDCCHSR out of [0,100]");

        CounterRecord scaled = c;
        scaled.call_attempts *= m;
        scaled.call_successes *= m;
        scaled.call_failures *= m;
        scaled.sdcch_attempts *= m;
        scaled.sdcch_successes *= m;
        const DerivedKpis k = derive_kpis(scaled);
        require(k.call_success_rate == base.call_success_rate, "CSR not scale-covariant");
        require(k.dropped_call_rate == base.dropped_call_rate, "DCR not scale-covariant");
        require(k.sdcch_success_rate == base.sdcch_success_rate, "SDCCHSR not scale-covariant");
    }

    CounterRecord zero;
    zero.cell_id = "z";
    bool named_ca = false;
    try {
        derive_kpis(zero);
    } catch (const DerivationError& e) {
        named_ca = e.counter() == "CA";
    }
    require(named_ca, "CA=0 must raise DerivationError(\"CA\")");

    CounterRecord bad;
    bad.call_attempts = 10;
    bad.call_successes = 11;
    bool validation = false;
    try {
        derive_kpis(bad);
    } catch (const ValidationError&) {
        validation = true;
    }
    require(validation, "CS>CA must raise ValidationError");
    return "1000 covariance cases + boundary errors";
}

} // namespace

int main() {
    struct Criterion {
        const char* name;
        std::function<std::string()> fn;
    };
    const std::vector<Criterion> criteria = {
        {"1. rule threshold fidelity", criterion_rule_fidelity},
        {"2. tree recovers the rule concept", criterion_tree_recovers_rules},
        {"3. metric oracle equivalence", criterion_metric_oracle},
        {"4. k-means correctness", criterion_kmeans},
        {"5. reachability report", criterion_reachability},
        {"6. IO round-trips and split", criterion_io},
        {"7. pipeline conservation", criterion_pipeline},
        {"8. KPI derivation properties", criterion_kpi},
    };

    int failures = 0;
    for (const auto& criterion : criteria) {
        const auto start = std::chrono::steady_clock::now();
        std::string detail;
        bool ok = true;
        try {
            detail = criterion.fn();
        } catch (const std::exception& e) {
            ok = false;
            detail = e.what();
        }
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("%s  %-38s (%.2fs)  %s\n", ok ? "PASS" : "FAIL", criterion.name, seconds,
                    detail.c_str());
        std::fflush(stdout);
        if (!ok) ++failures;
    }
    if (failures == 0) {
        std::printf("all %zu acceptance criteria hold\n", criteria.size());
        return 0;
    }
    std::printf("%d criterion(s) failed\n", failures);
    return 1;
}
