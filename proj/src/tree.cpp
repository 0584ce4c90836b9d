#include "celldiag/tree.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "celldiag/rng.hpp"
#include "celldiag/text.hpp"

namespace celldiag {

std::string_view to_string(PruningKind p) {
    switch (p) {
        case PruningKind::None: return "none";
        case PruningKind::Pessimistic: return "pessimistic";
        case PruningKind::ReducedError: return "reduced_error";
    }
    return "?";
}

DiagnosisClass TreeNode::majority_class() const {
    std::size_t best = 0;
    for (std::size_t c = 1; c < kClassCount; ++c)
        if (class_counts[c] > class_counts[best]) best = c;
    return kClassOrder[best];
}

std::array<double, kClassCount> TreeNode::distribution() const {
    std::array<double, kClassCount> dist{};
    const double total = std::accumulate(class_counts.begin(), class_counts.end(), 0.0);
    if (total <= 0.0) throw PredictError("leaf has no training instances");
    for (std::size_t c = 0; c < kClassCount; ++c) dist[c] = class_counts[c] / total;
    return dist;
}

namespace {

std::size_t count_nodes(const TreeNode* n) {
    if (!n) return 0;
    return 1 + count_nodes(n->left.get()) + count_nodes(n->right.get());
}

std::size_t count_leaves(const TreeNode* n) {
    if (!n) return 0;
    if (n->is_leaf()) return 1;
    return count_leaves(n->left.get()) + count_leaves(n->right.get());
}

std::size_t tree_depth(const TreeNode* n) {
    if (!n || n->is_leaf()) return 0;
    return 1 + std::max(tree_depth(n->left.get()), tree_depth(n->right.get()));
}

} // namespace

std::size_t TreeModel::node_count() const { return count_nodes(root.get()); }
std::size_t TreeModel::leaf_count() const { return count_leaves(root.get()); }
std::size_t TreeModel::depth() const { return tree_depth(root.get()); }

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

namespace {

struct TrainingData {
    std::vector<std::string> feature_names;
    std::vector<std::vector<double>> rows;  // [record][feature]
    std::vector<int> labels;                // class indices
};

TrainingData extract_labeled(const Dataset& d) {
    // class column: the attribute named Diagnosis, else the unique
    // non-numeric attribute
    std::size_t class_col = d.attributes.size();
    for (std::size_t i = 0; i < d.attributes.size(); ++i) {
        if (normalize_name(d.attributes[i].name) == "diagnosis") {
            class_col = i;
            break;
        }
    }
    if (class_col == d.attributes.size()) {
        for (std::size_t i = 0; i < d.attributes.size(); ++i) {
            if (d.attributes[i].kind != AttributeKind::Numeric) {
                if (class_col != d.attributes.size())
                    throw ValidationError("multiple non-numeric attributes; cannot pick a class");
                class_col = i;
            }
        }
    }
    if (class_col == d.attributes.size())
        throw ValidationError("dataset has no diagnosis attribute");
    if (d.attributes[class_col].kind == AttributeKind::Numeric)
        throw ValidationError("diagnosis attribute must not be numeric");
    for (std::size_t i = 0; i < d.attributes.size(); ++i) {
        if (i != class_col && d.attributes[i].kind != AttributeKind::Numeric)
            throw ValidationError("feature '" + d.attributes[i].name + "' is not numeric");
    }

    TrainingData t;
    for (std::size_t i = 0; i < d.attributes.size(); ++i)
        if (i != class_col) t.feature_names.push_back(d.attributes[i].name);

    t.rows.reserve(d.rows.size());
    t.labels.reserve(d.rows.size());
    for (std::size_t r = 0; r < d.rows.size(); ++r) {
        std::vector<double> row;
        row.reserve(t.feature_names.size());
        int label = -1;
        for (std::size_t i = 0; i < d.rows[r].size(); ++i) {
            if (i == class_col) {
                const auto& text = std::get<std::string>(d.rows[r][i]);
                const auto cls = parse_diagnosis_class(text);
                if (!cls || *cls == DiagnosisClass::Unclassified)
                    throw ValidationError("row " + std::to_string(r + 1) +
                                          " is unlabeled ('" + text + "')");
                label = class_index(*cls);
            } else {
                const double v = std::get<double>(d.rows[r][i]);
                if (!std::isfinite(v))
                    throw ValidationError("row " + std::to_string(r + 1) +
                                          " has a non-finite feature");
                row.push_back(v);
            }
        }
        t.rows.push_back(std::move(row));
        t.labels.push_back(label);
    }
    return t;
}

double entropy(const std::array<double, kClassCount>& counts, double total) {
    if (total <= 0.0) return 0.0;
    double h = 0.0;
    for (double c : counts) {
        if (c <= 0.0) continue;
        const double p = c / total;
        h -= p * std::log2(p);
    }
    return h;
}

struct SplitCandidate {
    int attribute = -1;
    double threshold = 0.0;
    double gain = 0.0;
    double gain_ratio = 0.0;
};

constexpr double kGainEpsilon = 1e-12;

struct Builder {
    const TrainingData& data;
    std::size_t min_leaf;

    std::unique_ptr<TreeNode> build(std::vector<std::size_t>& indices) {
        auto node = std::make_unique<TreeNode>();
        for (std::size_t i : indices) node->class_counts[data.labels[i]] += 1.0;

        const double total = static_cast<double>(indices.size());
        const double node_entropy = entropy(node->class_counts, total);
        const bool pure = std::count_if(node->class_counts.begin(), node->class_counts.end(),
                                        [](double c) { return c > 0.0; }) <= 1;
        if (pure || indices.size() < 2 * min_leaf) return node;

        const auto best = choose_split(indices, node->class_counts, node_entropy);
        if (best.attribute < 0) return node;

        std::vector<std::size_t> left_idx, right_idx;
        for (std::size_t i : indices) {
            if (data.rows[i][best.attribute] <= best.threshold)
                left_idx.push_back(i);
            else
                right_idx.push_back(i);
        }
        assert(!left_idx.empty() && !right_idx.empty());

        node->attribute = best.attribute;
        node->threshold = best.threshold;
        node->left = build(left_idx);
        node->right = build(right_idx);
        return node;
    }

    SplitCandidate choose_split(const std::vector<std::size_t>& indices,
                                const std::array<double, kClassCount>& total_counts,
                                double node_entropy) const {
        const double total = static_cast<double>(indices.size());
        std::vector<SplitCandidate> candidates;

        std::vector<std::size_t> sorted = indices;
        for (std::size_t a = 0; a < data.feature_names.size(); ++a) {
            std::sort(sorted.begin(), sorted.end(), [&](std::size_t x, std::size_t y) {
                return data.rows[x][a] < data.rows[y][a];
            });

            // group by distinct value, tallying class counts per group
            std::array<double, kClassCount> left{};
            std::array<double, kClassCount> group{};
            double left_n = 0.0;
            std::size_t pos = 0;
            double prev_value = 0.0;
            bool have_prev = false;
            int prev_single = -2;  // -2 none yet, -1 mixed, else the class
            while (pos < sorted.size()) {
                const double value = data.rows[sorted[pos]][a];
                group.fill(0.0);
                int single = -2;
                while (pos < sorted.size() && data.rows[sorted[pos]][a] == value) {
                    const int label = data.labels[sorted[pos]];
                    group[label] += 1.0;
                    if (single == -2) single = label;
                    else if (single != label) single = -1;
                    ++pos;
                }
                if (have_prev) {
                    // boundary unless both adjacent groups are pure in the
                    // same class (such cuts are never optimal)
                    const bool boundary = !(prev_single >= 0 && prev_single == single);
                    if (boundary) try_cut(candidates, a, prev_value, value, left, left_n,
                                          total_counts, total, node_entropy);
                }
                for (std::size_t c = 0; c < kClassCount; ++c) left[c] += group[c];
                left_n += std::accumulate(group.begin(), group.end(), 0.0);
                prev_value = value;
                prev_single = single;
                have_prev = true;
            }
        }

        SplitCandidate best;
        if (candidates.empty()) return best;
        double gain_sum = 0.0;
        for (const auto& c : candidates) gain_sum += c.gain;
        const double mean_gain = gain_sum / static_cast<double>(candidates.size());
        for (const auto& c : candidates) {
            if (c.gain + kGainEpsilon < mean_gain) continue;  // C4.5 average-gain filter
            if (best.attribute < 0 || c.gain_ratio > best.gain_ratio) best = c;
        }
        return best;
    }

    void try_cut(std::vector<SplitCandidate>& candidates, std::size_t attribute, double low,
                 double high, const std::array<double, kClassCount>& left_counts, double left_n,
                 const std::array<double, kClassCount>& total_counts, double total,
                 double node_entropy) const {
        const double right_n = total - left_n;
        if (left_n < static_cast<double>(min_leaf) || right_n < static_cast<double>(min_leaf))
            return;

        double threshold = (low + high) / 2.0;
        // keep the split strict when the midpoint rounds up to the higher value
        if (!(threshold < high)) threshold = low;

        std::array<double, kClassCount> right_counts{};
        for (std::size_t c = 0; c < kClassCount; ++c)
            right_counts[c] = total_counts[c] - left_counts[c];

        const double gain = node_entropy - (left_n / total) * entropy(left_counts, left_n) -
                            (right_n / total) * entropy(right_counts, right_n);
        if (gain <= kGainEpsilon) return;

        const double pl = left_n / total;
        const double pr = right_n / total;
        const double split_info = -pl * std::log2(pl) - pr * std::log2(pr);
        if (split_info <= 0.0) return;

        candidates.push_back({static_cast<int>(attribute), threshold, gain, gain / split_info});
    }
};

// ---------------------------------------------------------------------------
// Pessimistic (error-based) pruning, C4.5 style
// ---------------------------------------------------------------------------

// Inverse standard normal CDF (Acklam's rational approximation, |e| < 1.2e-9).
double normal_quantile(double p) {
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double plow = 0.02425;

    if (!(p > 0.0 && p < 1.0)) throw ValidationError("quantile argument out of (0,1)");
    if (p < plow) {
        const double q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p > 1.0 - plow) {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double q = p - 0.5;
    const double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

// Upper confidence bound on the error count (the C4.5 pessimistic estimate).
double added_errors(double n, double e, double cf) {
    if (cf > 0.5) return 0.0;
    if (e < 1.0) {
        const double base = n * (1.0 - std::pow(cf, 1.0 / n));
        if (e == 0.0) return base;
        return base + e * (added_errors(n, 1.0, cf) - base);
    }
    if (e + 0.5 >= n) return std::max(n - e, 0.0);
    const double z = normal_quantile(1.0 - cf);
    const double f = (e + 0.5) / n;
    const double r =
        (f + z * z / (2.0 * n) + z * std::sqrt(f / n - f * f / n + z * z / (4.0 * n * n))) /
        (1.0 + z * z / n);
    return r * n - e;
}

void make_leaf(TreeNode& node) {
    node.attribute = -1;
    node.threshold = 0.0;
    node.left.reset();
    node.right.reset();
}

double pessimistic_prune(TreeNode& node, double cf) {
    const double n = std::accumulate(node.class_counts.begin(), node.class_counts.end(), 0.0);
    const double max_count = *std::max_element(node.class_counts.begin(), node.class_counts.end());
    const double e = n - max_count;
    const double leaf_estimate = e + added_errors(n, e, cf);
    if (node.is_leaf()) return leaf_estimate;

    const double subtree_estimate =
        pessimistic_prune(*node.left, cf) + pessimistic_prune(*node.right, cf);
    if (leaf_estimate <= subtree_estimate + 0.1) {
        make_leaf(node);
        return leaf_estimate;
    }
    return subtree_estimate;
}

// ---------------------------------------------------------------------------
// Reduced-error pruning
// ---------------------------------------------------------------------------

// Returns the number of prune-set errors of the (possibly pruned) subtree.
std::size_t reduced_error_prune(TreeNode& node, const TrainingData& data,
                                const std::vector<std::size_t>& prune_indices) {
    std::size_t leaf_errors = 0;
    const DiagnosisClass majority = node.majority_class();
    for (std::size_t i : prune_indices)
        if (kClassOrder[data.labels[i]] != majority) ++leaf_errors;
    if (node.is_leaf()) return leaf_errors;

    std::vector<std::size_t> left_idx, right_idx;
    for (std::size_t i : prune_indices) {
        if (data.rows[i][node.attribute] <= node.threshold)
            left_idx.push_back(i);
        else
            right_idx.push_back(i);
    }
    const std::size_t subtree_errors = reduced_error_prune(*node.left, data, left_idx) +
                                       reduced_error_prune(*node.right, data, right_idx);
    if (leaf_errors <= subtree_errors) {
        make_leaf(node);
        return leaf_errors;
    }
    return subtree_errors;
}

} // namespace

TreeModel train(const Dataset& data, const LearnParams& params) {
    if (params.min_leaf_instances < 1)
        throw ValidationError("min_leaf_instances must be at least 1");
    if (!(params.confidence > 0.0 && params.confidence < 1.0))
        throw ValidationError("confidence must be in (0,1)");
    if (!(params.holdout_fraction > 0.0 && params.holdout_fraction < 1.0))
        throw ValidationError("holdout_fraction must be in (0,1)");

    const TrainingData t = extract_labeled(data);
    if (t.rows.size() < 2) throw ValidationError("training needs at least 2 records");
    if (t.feature_names.empty()) throw ValidationError("training needs at least 1 feature");

    TreeModel model;
    model.params = params;
    model.schema = t.feature_names;

    std::vector<std::size_t> all(t.rows.size());
    std::iota(all.begin(), all.end(), 0);

    if (params.pruning == PruningKind::ReducedError) {
        std::vector<std::size_t> order = all;
        Rng rng(params.seed);
        rng.shuffle(order);
        auto n_prune = static_cast<std::size_t>(
            std::llround(params.holdout_fraction * static_cast<double>(order.size())));
        n_prune = std::clamp<std::size_t>(n_prune, 1, order.size() - 1);
        std::vector<std::size_t> prune_idx(order.begin(), order.begin() + n_prune);
        std::vector<std::size_t> grow_idx(order.begin() + n_prune, order.end());
        std::sort(prune_idx.begin(), prune_idx.end());
        std::sort(grow_idx.begin(), grow_idx.end());

        Builder builder{t, params.min_leaf_instances};
        model.root = builder.build(grow_idx);
        reduced_error_prune(*model.root, t, prune_idx);
        return model;
    }

    Builder builder{t, params.min_leaf_instances};
    model.root = builder.build(all);
    if (params.pruning == PruningKind::Pessimistic)
        pessimistic_prune(*model.root, params.confidence);
    return model;
}

// ---------------------------------------------------------------------------
// Prediction
// ---------------------------------------------------------------------------

namespace {

const TreeNode& route(const TreeModel& m, std::span<const double> row) {
    if (!m.root) throw PredictError("model has no tree");
    if (row.size() != m.schema.size())
        throw PredictError("record has " + std::to_string(row.size()) + " features, model needs " +
                           std::to_string(m.schema.size()));
    const TreeNode* node = m.root.get();
    while (!node->is_leaf()) {
        const double v = row[node->attribute];
        if (!std::isfinite(v))
            throw PredictError("attribute '" + m.schema[node->attribute] + "' is not finite");
        node = v <= node->threshold ? node->left.get() : node->right.get();
    }
    return *node;
}

std::vector<double> kpi_row(const TreeModel& m, const KpiRecord& r) {
    std::vector<double> row;
    row.reserve(m.schema.size());
    for (const auto& name : m.schema) {
        const auto attr = resolve_kpi_attribute(name);
        if (!attr)
            throw PredictError("model attribute '" + name + "' is not a KPI attribute");
        row.push_back(r.feature(*attr));
    }
    return row;
}

} // namespace

DiagnosisClass predict_row(const TreeModel& m, std::span<const double> row) {
    return route(m, row).majority_class();
}

DiagnosisClass predict(const TreeModel& m, const KpiRecord& r) {
    return predict_row(m, kpi_row(m, r));
}

std::array<double, kClassCount> predict_distribution_row(const TreeModel& m,
                                                         std::span<const double> row) {
    return route(m, row).distribution();
}

std::array<double, kClassCount> predict_distribution(const TreeModel& m, const KpiRecord& r) {
    return predict_distribution_row(m, kpi_row(m, r));
}

// ---------------------------------------------------------------------------
// Rule export
// ---------------------------------------------------------------------------

namespace {

void export_leaves(const TreeModel& m, const TreeNode* node, std::vector<RuleAtom>& path,
                   RuleSet& rs) {
    if (node->is_leaf()) {
        DiagnosticRule rule;
        rule.id = "L" + std::to_string(rs.rules.size() + 1);
        rule.guard = path;
        if (rule.guard.empty())  // single-leaf tree: tautology on the non-negative domain
            rule.guard.push_back({m.schema.front(), Comparator::GreaterEqual, 0.0});
        rule.outcome = node->majority_class();
        rs.rules.push_back(std::move(rule));
        return;
    }
    path.push_back({m.schema[node->attribute], Comparator::LessEqual, node->threshold});
    export_leaves(m, node->left.get(), path, rs);
    path.back().op = Comparator::Greater;
    export_leaves(m, node->right.get(), path, rs);
    path.pop_back();
}

} // namespace

RuleSet export_rules(const TreeModel& m) {
    if (!m.root) throw ValidationError("model has no tree");
    RuleSet rs;
    rs.version = "tree-export";
    std::vector<RuleAtom> path;
    export_leaves(m, m.root.get(), path, rs);
    return rs;
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

EvaluationReport compute_evaluation(std::span<const DiagnosisClass> actual,
                                    std::span<const DiagnosisClass> predicted,
                                    std::span<const std::array<double, kClassCount>> distributions) {
    if (actual.empty()) throw ValidationError("evaluation needs at least one record");
    if (actual.size() != predicted.size() || actual.size() != distributions.size())
        throw ValidationError("evaluation inputs must have equal lengths");

    EvaluationReport rep;
    rep.total = actual.size();
    double abs_error = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        const int ai = class_index(actual[i]);
        const int pi = class_index(predicted[i]);
        if (ai < 0 || pi < 0) throw ValidationError("Unclassified records cannot be evaluated");
        rep.confusion[ai][pi] += 1;
        double inst = 0.0;
        for (std::size_t c = 0; c < kClassCount; ++c) {
            const double y = (static_cast<int>(c) == ai) ? 1.0 : 0.0;
            inst += std::abs(distributions[i][c] - y);
        }
        abs_error += inst / static_cast<double>(kClassCount);
    }

    const double n = static_cast<double>(rep.total);
    for (std::size_t c = 0; c < kClassCount; ++c) rep.n_correct += rep.confusion[c][c];
    rep.n_incorrect = rep.total - rep.n_correct;
    rep.accuracy = static_cast<double>(rep.n_correct) / n;
    rep.mean_absolute_error = abs_error / n;

    for (std::size_t c = 0; c < kClassCount; ++c) {
        std::size_t col_sum = 0, row_sum = 0;
        for (std::size_t r = 0; r < kClassCount; ++r) {
            col_sum += rep.confusion[r][c];
            row_sum += rep.confusion[c][r];
        }
        rep.precision[c] = col_sum ? static_cast<double>(rep.confusion[c][c]) / col_sum : 0.0;
        rep.recall[c] = row_sum ? static_cast<double>(rep.confusion[c][c]) / row_sum : 0.0;
        rep.weighted_precision += (static_cast<double>(row_sum) / n) * rep.precision[c];
    }
    return rep;
}

EvaluationReport evaluate(const TreeModel& m, const Dataset& test) {
    if (test.rows.empty()) throw ValidationError("test set is empty");
    const TrainingData t = extract_labeled(test);

    // align test feature columns with the model schema
    std::vector<std::size_t> order;
    order.reserve(m.schema.size());
    for (const auto& name : m.schema) {
        const std::string key = normalize_name(name);
        bool found = false;
        for (std::size_t i = 0; i < t.feature_names.size(); ++i) {
            if (normalize_name(t.feature_names[i]) == key) {
                order.push_back(i);
                found = true;
                break;
            }
        }
        if (!found) throw ValidationError("test set lacks attribute '" + name + "'");
    }

    std::vector<DiagnosisClass> actual, predicted;
    std::vector<std::array<double, kClassCount>> dists;
    std::vector<double> row(m.schema.size());
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        for (std::size_t j = 0; j < order.size(); ++j) row[j] = t.rows[i][order[j]];
        actual.push_back(kClassOrder[t.labels[i]]);
        const TreeNode& leaf = route(m, row);
        predicted.push_back(leaf.majority_class());
        dists.push_back(leaf.distribution());
    }
    return compute_evaluation(actual, predicted, dists);
}

std::string report_text(const EvaluationReport& r) {
    std::ostringstream out;
    out << "instances: " << r.total << "  correct: " << r.n_correct
        << "  incorrect: " << r.n_incorrect << "\n";
    out << "accuracy:            " << format_double(r.accuracy) << "\n";
    out << "mean absolute error: " << format_double(r.mean_absolute_error) << "\n";
    out << "weighted precision:  " << format_double(r.weighted_precision) << "\n\n";

    auto pad = [](std::string s, std::size_t w) {
        if (s.size() < w) s.append(w - s.size(), ' ');
        return s;
    };
    out << pad("class", 12) << pad("precision", 12) << "recall\n";
    for (std::size_t c = 0; c < kClassCount; ++c)
        out << pad(std::string(to_string(kClassOrder[c])), 12)
            << pad(format_fixed2(r.precision[c]), 12) << format_fixed2(r.recall[c]) << "\n";

    out << "\nconfusion matrix (rows = actual, cols = predicted)\n";
    out << pad("", 12);
    for (std::size_t c = 0; c < kClassCount; ++c)
        out << pad(std::string(to_string(kClassOrder[c])), 12);
    out << "\n";
    for (std::size_t a = 0; a < kClassCount; ++a) {
        out << pad(std::string(to_string(kClassOrder[a])), 12);
        for (std::size_t p = 0; p < kClassCount; ++p)
            out << pad(std::to_string(r.confusion[a][p]), 12);
        out << "\n";
    }
    return out.str();
}

std::string report_csv(const EvaluationReport& r) {
    std::ostringstream out;
    out << "metric,value\n";
    out << "accuracy," << format_double(r.accuracy) << "\n";
    out << "mae," << format_double(r.mean_absolute_error) << "\n";
    out << "weighted_precision," << format_double(r.weighted_precision) << "\n";
    out << "n_correct," << r.n_correct << "\n";
    out << "n_incorrect," << r.n_incorrect << "\n";
    for (std::size_t c = 0; c < kClassCount; ++c) {
        out << "precision " << to_string(kClassOrder[c]) << ","
            << format_double(r.precision[c]) << "\n";
        out << "recall " << to_string(kClassOrder[c]) << "," << format_double(r.recall[c])
            << "\n";
    }
    for (std::size_t a = 0; a < kClassCount; ++a) {
        out << "confusion " << to_string(kClassOrder[a]);
        for (std::size_t p = 0; p < kClassCount; ++p) out << "," << r.confusion[a][p];
        out << "\n";
    }
    return out.str();
}

nlohmann::ordered_json report_json(const EvaluationReport& r) {
    nlohmann::ordered_json j;
    j["accuracy"] = r.accuracy;
    j["mae"] = r.mean_absolute_error;
    j["weighted_precision"] = r.weighted_precision;
    j["n_correct"] = r.n_correct;
    j["n_incorrect"] = r.n_incorrect;
    nlohmann::ordered_json classes = nlohmann::ordered_json::array();
    for (std::size_t c = 0; c < kClassCount; ++c) {
        classes.push_back({{"class", std::string(to_string(kClassOrder[c]))},
                           {"precision", r.precision[c]},
                           {"recall", r.recall[c]}});
    }
    j["classes"] = classes;
    nlohmann::ordered_json confusion = nlohmann::ordered_json::array();
    for (std::size_t a = 0; a < kClassCount; ++a) {
        nlohmann::ordered_json row = nlohmann::ordered_json::array();
        for (std::size_t p = 0; p < kClassCount; ++p) row.push_back(r.confusion[a][p]);
        confusion.push_back(row);
    }
    j["confusion"] = confusion;
    return j;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

namespace {

constexpr std::string_view kModelHeader = "celldiag tree v1";

void save_node(const TreeNode& node, const TreeModel& m, std::size_t depth, std::ostream& out) {
    const std::string indent(depth * 2, ' ');
    if (node.is_leaf()) {
        out << indent << "leaf " << to_string(node.majority_class()) << " counts=";
        for (std::size_t c = 0; c < kClassCount; ++c) {
            if (c) out << ",";
            out << format_double(node.class_counts[c]);
        }
        out << "\n";
        return;
    }
    out << indent << "split " << m.schema[node.attribute] << " <= "
        << format_double(node.threshold) << "\n";
    save_node(*node.left, m, depth + 1, out);
    save_node(*node.right, m, depth + 1, out);
}

} // namespace

void save_model(const TreeModel& m, std::ostream& out) {
    if (!m.root) throw ValidationError("model has no tree");
    for (const auto& name : m.schema) {
        if (name.find(',') != std::string::npos)
            throw ValidationError("attribute names with commas cannot be serialized");
    }
    out << kModelHeader << "\n";
    out << "schema: ";
    for (std::size_t i = 0; i < m.schema.size(); ++i) {
        if (i) out << ",";
        out << m.schema[i];
    }
    out << "\n";
    out << "params: min_leaf=" << m.params.min_leaf_instances
        << " pruning=" << to_string(m.params.pruning)
        << " confidence=" << format_double(m.params.confidence)
        << " holdout=" << format_double(m.params.holdout_fraction) << " seed=" << m.params.seed
        << "\n";
    save_node(*m.root, m, 0, out);
}

std::string save_model_string(const TreeModel& m) {
    std::ostringstream out;
    save_model(m, out);
    return out.str();
}

void save_model_file(const TreeModel& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write '" + path + "'");
    save_model(m, out);
}

namespace {

std::size_t line_depth(const std::string& line) {
    std::size_t spaces = 0;
    while (spaces < line.size() && line[spaces] == ' ') ++spaces;
    return spaces / 2;
}

std::unique_ptr<TreeNode> parse_node(const std::vector<std::string>& lines, std::size_t& pos,
                                     std::size_t depth, const TreeModel& m,
                                     std::size_t line_offset) {
    if (pos >= lines.size())
        throw ParseError("unexpected end of model", line_offset + pos);
    const std::string& raw = lines[pos];
    if (line_depth(raw) != depth)
        throw ParseError("bad indentation in model", line_offset + pos + 1);
    const std::string line = trim(raw);
    ++pos;

    auto node = std::make_unique<TreeNode>();
    if (line.rfind("split ", 0) == 0) {
        const std::size_t op_pos = line.rfind(" <= ");
        if (op_pos == std::string::npos || op_pos <= 6)
            throw ParseError("malformed split line", line_offset + pos);
        const std::string name = line.substr(6, op_pos - 6);
        int attr = -1;
        for (std::size_t i = 0; i < m.schema.size(); ++i) {
            if (m.schema[i] == name) {
                attr = static_cast<int>(i);
                break;
            }
        }
        if (attr < 0)
            throw ParseError("split attribute '" + name + "' not in schema", line_offset + pos);
        double threshold = 0;
        if (!parse_double(trim(line.substr(op_pos + 4)), threshold))
            throw ParseError("bad split threshold", line_offset + pos);
        node->attribute = attr;
        node->threshold = threshold;
        node->left = parse_node(lines, pos, depth + 1, m, line_offset);
        node->right = parse_node(lines, pos, depth + 1, m, line_offset);
        // internal counts are the sum of the children
        for (std::size_t c = 0; c < kClassCount; ++c)
            node->class_counts[c] = node->left->class_counts[c] + node->right->class_counts[c];
        return node;
    }
    if (line.rfind("leaf ", 0) == 0) {
        const std::size_t counts_pos = line.rfind(" counts=");
        if (counts_pos == std::string::npos)
            throw ParseError("leaf line lacks counts", line_offset + pos);
        const std::string class_text = line.substr(5, counts_pos - 5);
        const auto cls = parse_diagnosis_class(class_text);
        if (!cls || *cls == DiagnosisClass::Unclassified)
            throw ParseError("bad leaf class '" + class_text + "'", line_offset + pos);
        const auto parts = split_on(line.substr(counts_pos + 8), ',');
        if (parts.size() != kClassCount)
            throw ParseError("leaf counts must have " + std::to_string(kClassCount) + " entries",
                             line_offset + pos);
        for (std::size_t c = 0; c < kClassCount; ++c) {
            if (!parse_double(parts[c], node->class_counts[c]))
                throw ParseError("bad leaf count '" + parts[c] + "'", line_offset + pos);
        }
        if (node->majority_class() != *cls)
            throw ParseError("leaf class does not match counts", line_offset + pos);
        return node;
    }
    throw ParseError("expected 'split' or 'leaf', got '" + line + "'", line_offset + pos);
}

} // namespace

TreeModel load_model(std::istream& in) {
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
    if (lines.size() < 4) throw ParseError("model file too short", 1);
    if (trim(lines[0]) != kModelHeader)
        throw ParseError("unsupported model header '" + trim(lines[0]) + "'", 1);

    TreeModel m;
    if (lines[1].rfind("schema: ", 0) != 0) throw ParseError("missing schema line", 2);
    m.schema = split_on(lines[1].substr(8), ',');
    if (m.schema.empty()) throw ParseError("empty schema", 2);

    if (lines[2].rfind("params: ", 0) != 0) throw ParseError("missing params line", 3);
    std::istringstream params_in(lines[2].substr(8));
    std::string token;
    while (params_in >> token) {
        const std::size_t eq = token.find('=');
        if (eq == std::string::npos) throw ParseError("bad params token '" + token + "'", 3);
        const std::string key = token.substr(0, eq);
        const std::string value = token.substr(eq + 1);
        if (key == "min_leaf") {
            double v = 0;
            if (!parse_double(value, v) || v < 1) throw ParseError("bad min_leaf", 3);
            m.params.min_leaf_instances = static_cast<std::size_t>(v);
        } else if (key == "pruning") {
            if (value == "none") m.params.pruning = PruningKind::None;
            else if (value == "pessimistic") m.params.pruning = PruningKind::Pessimistic;
            else if (value == "reduced_error") m.params.pruning = PruningKind::ReducedError;
            else throw ParseError("unknown pruning '" + value + "'", 3);
        } else if (key == "confidence") {
            if (!parse_double(value, m.params.confidence))
                throw ParseError("bad confidence", 3);
        } else if (key == "holdout") {
            if (!parse_double(value, m.params.holdout_fraction))
                throw ParseError("bad holdout", 3);
        } else if (key == "seed") {
            try {
                m.params.seed = std::stoull(value);
            } catch (const std::exception&) {
                throw ParseError("bad seed '" + value + "'", 3);
            }
        } else {
            throw ParseError("unknown params key '" + key + "'", 3);
        }
    }

    std::vector<std::string> node_lines(lines.begin() + 3, lines.end());
    std::size_t pos = 0;
    m.root = parse_node(node_lines, pos, 0, m, 3);
    if (pos != node_lines.size())
        throw ParseError("trailing content after the tree", 3 + pos + 1);
    return m;
}

TreeModel load_model_string(const std::string& text) {
    std::istringstream in(text);
    return load_model(in);
}

TreeModel load_model_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open '" + path + "'");
    return load_model(in);
}

} // namespace celldiag
