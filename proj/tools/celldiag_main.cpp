// celldiag: derive KPIs, label cells, train/evaluate the diagnosis tree,
// cluster technical areas, and run the whole pipeline from the shell.
//
// Exit codes: 0 success, 1 validation/parse/usage error, 2 internal error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "celldiag/cluster.hpp"
#include "celldiag/datagen.hpp"
#include "celldiag/dataset.hpp"
#include "celldiag/errors.hpp"
#include "celldiag/kpi.hpp"
#include "celldiag/pipeline.hpp"
#include "celldiag/rules.hpp"
#include "celldiag/text.hpp"
#include "celldiag/tree.hpp"

namespace {

using namespace celldiag;

constexpr const char* kSeedEnvVar = "CELLDIAG_SEED";

std::uint64_t env_default_seed() {
    const char* env = std::getenv(kSeedEnvVar);
    if (!env) return 0;
    try {
        return std::stoull(env);
    } catch (const std::exception&) {
        throw ValidationError(std::string(kSeedEnvVar) + " is not a number: '" + env + "'");
    }
}

bool has_extension(const std::string& path, const char* ext) {
    return to_lower(std::filesystem::path(path).extension().string()) == ext;
}

Dataset read_dataset(const std::string& path, const std::string& format) {
    const bool csv = format == "csv" || (format.empty() && has_extension(path, ".csv"));
    return csv ? read_csv_file(path) : read_arff_file(path);
}

void write_dataset(const Dataset& d, const std::string& path, const std::string& format) {
    const bool csv = format == "csv" || (format.empty() && has_extension(path, ".csv"));
    if (csv) write_csv_file(d, path);
    else write_arff_file(d, path);
}

RuleSet resolve_rules(const std::string& spec) {
    if (spec.empty() || spec == "default") return default_ruleset();
    return load_ruleset_file(spec);
}

void print_histogram(const std::vector<KpiRecord>& records) {
    std::map<std::string, std::size_t> hist;
    for (const auto& r : records)
        ++hist[std::string(to_string(r.diagnosis.value_or(DiagnosisClass::Unclassified)))];
    for (const auto& [name, count] : hist) std::cout << name << ": " << count << "\n";
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

struct GenOptions {
    std::string spec_path;
    std::string mode = "uniform";
    std::size_t n = 0;
    std::uint64_t seed = 0;
    std::string label;
    std::string templates_path;
    double separation = 1.0;
    std::string out;
    std::string format;
};

GenSpec build_gen_spec(const GenOptions& opt) {
    GenSpec spec;
    if (!opt.spec_path.empty()) {
        std::ifstream in(opt.spec_path);
        if (!in) throw ValidationError("cannot open '" + opt.spec_path + "'");
        nlohmann::json j = nlohmann::json::parse(in);
        const std::string mode = j.value("mode", "uniform");
        if (mode == "uniform") spec.mode = GenMode::Uniform;
        else if (mode == "templates") spec.mode = GenMode::Templates;
        else if (mode == "boundary") spec.mode = GenMode::Boundary;
        else throw ValidationError("unknown mode '" + mode + "' in spec");
        spec.n = j.value("n", 0u);
        spec.seed = j.value("seed", 0u);
        spec.separation_scale = j.value("separation_scale", 1.0);
        if (j.contains("ranges")) {
            for (const auto& [key, value] : j.at("ranges").items()) {
                const auto attr = resolve_kpi_attribute(key);
                if (!attr) throw ValidationError("unknown attribute '" + key + "' in ranges");
                spec.ranges.range[static_cast<std::size_t>(*attr)] = {value.at(0), value.at(1)};
            }
        }
        if (j.contains("templates"))
            spec.templates = load_templates_file(j.at("templates").get<std::string>());
        if (j.contains("label")) {
            const auto label = j.at("label").get<std::string>();
            if (!label.empty()) spec.label_with = resolve_rules(label);
        }
        return spec;
    }

    if (opt.mode == "uniform") spec.mode = GenMode::Uniform;
    else if (opt.mode == "templates") spec.mode = GenMode::Templates;
    else if (opt.mode == "boundary") spec.mode = GenMode::Boundary;
    else throw ValidationError("unknown mode '" + opt.mode + "'");
    spec.n = opt.n;
    spec.seed = opt.seed;
    spec.separation_scale = opt.separation;
    if (!opt.templates_path.empty()) spec.templates = load_templates_file(opt.templates_path);
    if (!opt.label.empty()) spec.label_with = resolve_rules(opt.label);
    return spec;
}

int run_gen(const GenOptions& opt) {
    const Dataset d = generate(build_gen_spec(opt));
    write_dataset(d, opt.out, opt.format);
    std::cout << d.size() << " records written to " << opt.out << "\n";
    return 0;
}

int run_derive(const std::string& in_path, const std::string& out_path) {
    const auto counters = read_counters_csv_file(in_path);
    std::ostringstream out;
    out << "cell_id,CSR,DCR,TR,SDCCHSR\n";
    for (const auto& c : counters) {
        const DerivedKpis k = derive_kpis(c);
        out << c.cell_id << "," << format_double(k.call_success_rate) << ","
            << format_double(k.dropped_call_rate) << "," << format_double(k.traffic_rate) << ","
            << format_double(k.sdcch_success_rate) << "\n";
    }
    if (out_path.empty()) {
        std::cout << out.str();
    } else {
        std::ofstream f(out_path);
        if (!f) throw ValidationError("cannot write '" + out_path + "'");
        f << out.str();
        std::cout << counters.size() << " records written to " << out_path << "\n";
    }
    return 0;
}

int run_label(const std::string& in_path, const std::string& rules_spec,
              const std::string& out_path, const std::string& format) {
    const Dataset d = read_dataset(in_path, "");
    auto records = to_kpi_records(d);
    bool had_labels = false;
    for (const auto& r : records)
        if (r.diagnosis) had_labels = true;
    if (had_labels) std::cerr << "warning: existing labels are overwritten\n";

    const RuleSet rules = resolve_rules(rules_spec);
    for (auto& r : records) r.diagnosis = classify(r, rules);

    Dataset labeled = from_kpi_records(records, d.relation_name);
    write_dataset(labeled, out_path, format);
    print_histogram(records);
    return 0;
}

struct TrainOptions {
    std::string in_path;
    double split_fraction = 0.0;  // 0 -> train on the whole file
    std::uint64_t seed = 0;
    std::string model_out;
    std::string test_out;
    std::size_t min_leaf = 2;
    std::string pruning = "pessimistic";
    double confidence = 0.25;
    double holdout = 0.25;
};

LearnParams build_learn_params(const TrainOptions& opt) {
    LearnParams p;
    p.min_leaf_instances = opt.min_leaf;
    if (opt.pruning == "none") p.pruning = PruningKind::None;
    else if (opt.pruning == "pessimistic") p.pruning = PruningKind::Pessimistic;
    else if (opt.pruning == "reduced-error") p.pruning = PruningKind::ReducedError;
    else throw ValidationError("unknown pruning '" + opt.pruning + "'");
    p.confidence = opt.confidence;
    p.holdout_fraction = opt.holdout;
    p.seed = opt.seed;
    return p;
}

int run_train(const TrainOptions& opt) {
    Dataset data = read_dataset(opt.in_path, "");
    Dataset train_part = data;
    if (opt.split_fraction > 0.0) {
        auto parts = split(data, {opt.split_fraction, opt.seed});
        train_part = std::move(parts.train);
        if (!opt.test_out.empty()) write_dataset(parts.test, opt.test_out, "");
        std::cout << "split: " << train_part.size() << " train / " << parts.test.size()
                  << " test\n";
    }
    const TreeModel model = train(train_part, build_learn_params(opt));
    save_model_file(model, opt.model_out);
    std::cout << "nodes: " << model.node_count() << "  leaves: " << model.leaf_count()
              << "  depth: " << model.depth() << "\n";
    std::cout << "model written to " << opt.model_out << "\n";
    return 0;
}

int run_eval(const std::string& model_path, const std::string& in_path,
             const std::string& json_path) {
    const TreeModel model = load_model_file(model_path);
    const Dataset test = read_dataset(in_path, "");
    const EvaluationReport rep = evaluate(model, test);
    std::cout << report_text(rep);
    if (!json_path.empty()) {
        std::ofstream out(json_path);
        if (!out) throw ValidationError("cannot write '" + json_path + "'");
        out << report_json(rep).dump(2) << "\n";
    }
    return 0;
}

struct ClusterOptions {
    std::string in_path;
    std::size_t k = 9;
    std::uint64_t seed = 0;
    std::size_t restarts = 10;
    std::size_t iterations = 100;
    bool no_standardize = false;
    std::string out_prefix;
};

int run_cluster(const ClusterOptions& opt) {
    const Dataset d = read_dataset(opt.in_path, "");
    const auto records = to_kpi_records(d);
    ClusterParams params;
    params.k = opt.k;
    params.seed = opt.seed;
    params.restarts = opt.restarts;
    params.max_iterations = opt.iterations;
    params.standardize = !opt.no_standardize;
    const ClusterModel model = fit(records, params);
    std::cout << profile_table(model);
    if (!opt.out_prefix.empty()) {
        std::ofstream txt(opt.out_prefix + ".txt");
        txt << profile_table(model);
        std::ofstream csv(opt.out_prefix + ".csv");
        csv << profile_csv(model);
        std::ofstream json(opt.out_prefix + ".json");
        json << profile_json(model).dump(2) << "\n";
        std::cout << "profiles written to " << opt.out_prefix << ".{txt,csv,json}\n";
    }
    return 0;
}

struct PipelineOptions {
    std::string in_path;
    std::string rules = "default";
    bool use_tree = false;
    std::size_t k = 9;
    std::uint64_t seed = 0;
    std::size_t restarts = 10;
    std::string out_dir;
};

int run_pipeline_cmd(const PipelineOptions& opt) {
    const Dataset d = read_dataset(opt.in_path, "");
    PipelineConfig cfg;
    cfg.labeling = opt.use_tree ? PipelineConfig::Labeling::TrainedTree
                                : PipelineConfig::Labeling::Rules;
    cfg.rule_file = opt.rules == "default" ? "" : opt.rules;
    cfg.learn_params.seed = opt.seed;
    cfg.cluster_params.k = opt.k;
    cfg.cluster_params.seed = opt.seed;
    cfg.cluster_params.restarts = opt.restarts;
    cfg.output_dir = opt.out_dir;
    const ClusterDiagnosisReport rep = run_pipeline(d, cfg);
    std::cout << report_text(rep);
    if (!opt.out_dir.empty())
        std::cout << "report written to " << opt.out_dir << "/report.{json,txt} and clusters.csv\n";
    return 0;
}

int run_rules_check(const std::string& rules_spec) {
    const RuleSet rules = resolve_rules(rules_spec);
    const auto entries = analyze_reachability(rules, default_attribute_bounds());
    std::cout << reachability_table(entries);
    std::size_t unreachable = 0;
    for (const auto& e : entries)
        if (!e.reachable) ++unreachable;
    std::cout << unreachable << " unreachable rule(s) of " << entries.size() << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"cell-network fault diagnosis toolkit"};
    app.require_subcommand(1);

    std::uint64_t default_seed = 0;
    try {
        default_seed = env_default_seed();
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }

    GenOptions gen;
    gen.seed = default_seed;
    auto* gen_cmd = app.add_subcommand("gen", "generate a synthetic KPI dataset");
    gen_cmd->add_option("--spec", gen.spec_path, "JSON generation spec");
    gen_cmd->add_option("--mode", gen.mode, "uniform | templates | boundary")
        ->check(CLI::IsMember({"uniform", "templates", "boundary"}));
    gen_cmd->add_option("--n", gen.n, "record count");
    gen_cmd->add_option("--seed", gen.seed, "random seed");
    gen_cmd->add_option("--label", gen.label, "label with 'default' or a rule file");
    gen_cmd->add_option("--templates", gen.templates_path, "template CSV for templates mode");
    gen_cmd->add_option("--separation", gen.separation, "template std multiplier");
    gen_cmd->add_option("--out", gen.out, "output file (.arff or .csv)")->required();
    gen_cmd->add_option("--format", gen.format, "force arff or csv")
        ->check(CLI::IsMember({"arff", "csv", ""}));

    std::string derive_in, derive_out;
    auto* derive_cmd = app.add_subcommand("derive", "derive KPIs from raw counters");
    derive_cmd->add_option("--in", derive_in, "counter CSV")->required();
    derive_cmd->add_option("--out", derive_out, "output CSV (stdout when omitted)");

    std::string label_in, label_rules = "default", label_out, label_format;
    auto* label_cmd = app.add_subcommand("label", "classify every record with the rules");
    label_cmd->add_option("--in", label_in, "input dataset")->required();
    label_cmd->add_option("--rules", label_rules, "'default' or a rule file");
    label_cmd->add_option("--out", label_out, "output file")->required();
    label_cmd->add_option("--format", label_format, "force arff or csv");

    TrainOptions train_opt;
    train_opt.seed = default_seed;
    auto* train_cmd = app.add_subcommand("train", "train the diagnosis tree");
    train_cmd->add_option("--in", train_opt.in_path, "labeled dataset")->required();
    train_cmd->add_option("--split", train_opt.split_fraction,
                          "train fraction; the rest is held out");
    train_cmd->add_option("--seed", train_opt.seed, "random seed");
    train_cmd->add_option("--out", train_opt.model_out, "model output path")->required();
    train_cmd->add_option("--test-out", train_opt.test_out, "write the held-out part here");
    train_cmd->add_option("--min-leaf", train_opt.min_leaf, "minimum instances per leaf");
    train_cmd->add_option("--pruning", train_opt.pruning,
                          "none | pessimistic | reduced-error");
    train_cmd->add_option("--confidence", train_opt.confidence, "pessimistic confidence");
    train_cmd->add_option("--holdout", train_opt.holdout, "reduced-error holdout fraction");

    std::string eval_model, eval_in, eval_json;
    auto* eval_cmd = app.add_subcommand("eval", "evaluate a model on a labeled dataset");
    eval_cmd->add_option("--model", eval_model, "model file")->required();
    eval_cmd->add_option("--in", eval_in, "labeled test dataset")->required();
    eval_cmd->add_option("--json", eval_json, "also write the report as JSON");

    ClusterOptions cluster_opt;
    cluster_opt.seed = default_seed;
    auto* cluster_cmd = app.add_subcommand("cluster", "k-means profiles of the KPI records");
    cluster_cmd->add_option("--in", cluster_opt.in_path, "input dataset")->required();
    cluster_cmd->add_option("--k", cluster_opt.k, "cluster count");
    cluster_cmd->add_option("--seed", cluster_opt.seed, "random seed");
    cluster_cmd->add_option("--restarts", cluster_opt.restarts, "restarts, best wcss wins");
    cluster_cmd->add_option("--iterations", cluster_opt.iterations, "max Lloyd iterations");
    cluster_cmd->add_flag("--no-standardize", cluster_opt.no_standardize,
                          "cluster in raw units");
    cluster_cmd->add_option("--out", cluster_opt.out_prefix, "output prefix for txt/csv/json");

    PipelineOptions pipe_opt;
    pipe_opt.seed = default_seed;
    auto* pipe_cmd = app.add_subcommand("pipeline",
                                        "label, cluster and report in one pass");
    pipe_cmd->add_option("--in", pipe_opt.in_path, "input dataset")->required();
    pipe_cmd->add_option("--rules", pipe_opt.rules, "'default' or a rule file");
    pipe_cmd->add_flag("--tree", pipe_opt.use_tree, "label via a trained tree");
    pipe_cmd->add_option("--k", pipe_opt.k, "cluster count");
    pipe_cmd->add_option("--seed", pipe_opt.seed, "random seed");
    pipe_cmd->add_option("--restarts", pipe_opt.restarts, "k-means restarts");
    pipe_cmd->add_option("--out", pipe_opt.out_dir, "report output directory");

    std::string check_rules = "default";
    auto* check_cmd = app.add_subcommand("rules-check", "reachability analysis of a rule set");
    check_cmd->add_option("--rules", check_rules, "'default' or a rule file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);  // prints help, exit 0
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (gen_cmd->parsed()) return run_gen(gen);
        if (derive_cmd->parsed()) return run_derive(derive_in, derive_out);
        if (label_cmd->parsed()) return run_label(label_in, label_rules, label_out, label_format);
        if (train_cmd->parsed()) return run_train(train_opt);
        if (eval_cmd->parsed()) return run_eval(eval_model, eval_in, eval_json);
        if (cluster_cmd->parsed()) return run_cluster(cluster_opt);
        if (pipe_cmd->parsed()) return run_pipeline_cmd(pipe_opt);
        if (check_cmd->parsed()) return run_rules_check(check_rules);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
