#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "celldiag/dataset.hpp"
#include "celldiag/kpi.hpp"
#include "celldiag/rules.hpp"

#include <nlohmann/json_fwd.hpp>

namespace celldiag {

enum class PruningKind { None, Pessimistic, ReducedError };

std::string_view to_string(PruningKind p);

struct LearnParams {
    std::size_t min_leaf_instances = 2;
    PruningKind pruning = PruningKind::Pessimistic;
    double confidence = 0.25;        // pessimistic pruning confidence factor
    double holdout_fraction = 0.25;  // reduced-error pruning holdout share
    std::uint64_t seed = 0;
};

/// Binary tree over numeric attributes. Internal nodes route value <=
/// threshold to the left child; leaves carry the training class counts in
/// kClassOrder order.
struct TreeNode {
    int attribute = -1;  // feature index into the model schema; -1 for leaves
    double threshold = 0.0;
    std::unique_ptr<TreeNode> left;
    std::unique_ptr<TreeNode> right;
    std::array<double, kClassCount> class_counts{};

    bool is_leaf() const { return attribute < 0; }

    /// Majority class; ties resolve to the first class in kClassOrder.
    DiagnosisClass majority_class() const;

    /// class_counts normalized to sum 1.
    std::array<double, kClassCount> distribution() const;
};

struct TreeModel {
    std::unique_ptr<TreeNode> root;
    LearnParams params;
    std::vector<std::string> schema;  // feature attribute names, in order

    std::size_t node_count() const;
    std::size_t leaf_count() const;
    std::size_t depth() const;
};

// ---------------------------------------------------------------------------
// Training and prediction
// ---------------------------------------------------------------------------

/// Greedy top-down induction with gain-ratio splits over class-boundary
/// midpoints, then the configured pruning. The dataset must carry a
/// diagnosis column (the unique non-numeric attribute); every record must
/// be labeled with a concrete class. Deterministic given data order and
/// params.
TreeModel train(const Dataset& data, const LearnParams& params);

DiagnosisClass predict(const TreeModel& m, const KpiRecord& r);
DiagnosisClass predict_row(const TreeModel& m, std::span<const double> row);

std::array<double, kClassCount> predict_distribution(const TreeModel& m, const KpiRecord& r);
std::array<double, kClassCount> predict_distribution_row(const TreeModel& m,
                                                         std::span<const double> row);

/// One rule per leaf (guard = the root-to-leaf atoms); mutually exclusive
/// and exhaustive, so first-match classification reproduces predict. A
/// single-leaf tree exports one rule with the tautological guard
/// "<first attribute> >= 0".
RuleSet export_rules(const TreeModel& m);

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

struct EvaluationReport {
    // rows = actual class, cols = predicted class, kClassOrder order
    std::array<std::array<std::size_t, kClassCount>, kClassCount> confusion{};
    double accuracy = 0.0;
    double mean_absolute_error = 0.0;
    double weighted_precision = 0.0;
    std::array<double, kClassCount> precision{};
    std::array<double, kClassCount> recall{};
    std::size_t n_correct = 0;
    std::size_t n_incorrect = 0;
    std::size_t total = 0;
};

/// Statistics from raw (actual, predicted, distribution) triples:
/// accuracy = correct/N; MAE = (1/N) sum_i (1/C) sum_c |p_ic - y_ic|;
/// precision_c = diag_c / column_sum_c (0 when the column is empty);
/// weighted_precision = sum_c (actual_count_c / N) * precision_c.
EvaluationReport compute_evaluation(std::span<const DiagnosisClass> actual,
                                    std::span<const DiagnosisClass> predicted,
                                    std::span<const std::array<double, kClassCount>> distributions);

/// Runs the model over a labeled test set.
EvaluationReport evaluate(const TreeModel& m, const Dataset& test);

std::string report_text(const EvaluationReport& r);
std::string report_csv(const EvaluationReport& r);
nlohmann::ordered_json report_json(const EvaluationReport& r);

// ---------------------------------------------------------------------------
// Model serialization (versioned text, indent = depth)
// ---------------------------------------------------------------------------

void save_model(const TreeModel& m, std::ostream& out);
std::string save_model_string(const TreeModel& m);
void save_model_file(const TreeModel& m, const std::string& path);

TreeModel load_model(std::istream& in);
TreeModel load_model_string(const std::string& text);
TreeModel load_model_file(const std::string& path);

} // namespace celldiag
