// dmcga command-line tool.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 internal invariant
// violation.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "dmcga/dmcga.hpp"

namespace fs = std::filesystem;
using namespace dmcga;

namespace {

enum ExitCode : int { kOk = 0, kUsage = 1, kData = 2, kInternal = 3 };

struct Options {
    PipelineConfig pipeline;
    std::string ranker = "dmc";
    std::string out;
    std::string space_path;
    std::string log_path;
    std::string json_path;
    std::string features;
    std::size_t runs = 5;
};

std::vector<std::size_t> parse_feature_list(const std::string& text, const FeatureMatrix& matrix) {
    if (text == "all") return all_features(matrix);
    std::vector<std::size_t> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        std::size_t pos = 0;
        unsigned long long v = 0;
        try {
            v = std::stoull(item, &pos);
        } catch (const std::exception&) {
            pos = 0;
        }
        if (pos != item.size()) throw ArgumentError("bad feature index: " + item);
        out.push_back(static_cast<std::size_t>(v));
    }
    if (out.empty()) throw ArgumentError("--features is empty");
    return out;
}

fs::path output_path(const Options& o, const std::string& explicit_path, const std::string& fallback) {
    if (!explicit_path.empty()) return explicit_path;
    return fs::path(o.pipeline.out_dir.empty() ? "." : o.pipeline.out_dir) / fallback;
}

Dataset load(const Options& o) {
    try {
        return load_csv(o.pipeline.dataset, o.pipeline.label_column);
    } catch (Error& e) {
        e.set_stage("load");
        throw;
    }
}

int cmd_rank(const Options& o) {
    const auto data = load(o);
    const auto scores = rank_features(data.matrix, data.labels, o.pipeline.ranker, o.pipeline.keep_fraction);
    const auto path = output_path(o, o.out, "scores.csv");
    write_text(path, scores_csv(scores, data.matrix));
    std::cout << "ranked " << data.matrix.cols() << " features, kept " << scores.size() << " -> " << path.string()
              << '\n';
    return kOk;
}

int cmd_cluster(const Options& o) {
    const auto data = load(o);
    const auto prepared = prepare_space(data, o.pipeline);
    std::vector<std::size_t> retained;
    for (const auto& s : prepared.retained) retained.push_back(s.feature_index);
    std::vector<std::string> names;
    for (std::size_t j : prepared.space.indices) names.push_back(data.matrix.feature_name(j));
    nlohmann::ordered_json j = {
        {"seed", o.pipeline.seed},
        {"ranker", std::string(to_string(o.pipeline.ranker))},
        {"keep_fraction", o.pipeline.keep_fraction},
        {"q", prepared.clustering.q},
        {"retained", retained},
        {"assignment", prepared.clustering.assignment},
        {"inertia", prepared.clustering.inertia},
        {"indices", prepared.space.indices},
        {"names", names},
    };
    const auto path = output_path(o, o.out, "space.json");
    write_text(path, j.dump(2) + '\n');
    std::cout << "feature space of " << prepared.space.size() << " features (q=" << prepared.clustering.q
              << ", inertia=" << prepared.clustering.inertia << ") -> " << path.string() << '\n';
    return kOk;
}

FeatureSpace read_space(const std::string& path, const FeatureMatrix& matrix) {
    std::ifstream in(path);
    if (!in) throw MissingFile(path);
    nlohmann::json j;
    try {
        in >> j;
        FeatureSpace space;
        space.indices = j.at("indices").get<std::vector<std::size_t>>();
        for (std::size_t idx : space.indices)
            if (idx >= matrix.cols()) throw DataError("space index " + std::to_string(idx) + " out of range");
        return space;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("malformed space file " + path + ": " + e.what());
    }
}

int cmd_optimize(const Options& o) {
    const auto data = load(o);
    const FeatureSpace space = o.space_path.empty() ? prepare_space(data, o.pipeline).space
                                                    : read_space(o.space_path, data.matrix);
    GaConfig ga = o.pipeline.ga;
    ga.seed = stage_seed(o.pipeline.seed, seed_offset::kGa);
    ga.n_var = std::min(ga.n_var, space.size());
    auto fitness = accuracy_fitness(data, o.pipeline);
    const auto result = run_gawar(space, ga, fitness);
    auto genes = result.best.genes;
    std::sort(genes.begin(), genes.end());

    const auto log_path = output_path(o, o.log_path, "convergence.csv");
    write_text(log_path, convergence_csv(result.log));
    std::vector<std::string> names;
    for (std::size_t j : genes) names.push_back(data.matrix.feature_name(j));
    nlohmann::ordered_json j = {{"seed", o.pipeline.seed},
                                {"selected", genes},
                                {"names", names},
                                {"fitness", *result.best.fitness},
                                {"nfe", result.log.nfe},
                                {"iterations", result.log.records.size()},
                                {"stop_reason", to_string(result.log.stop_reason)}};
    const auto out_path = output_path(o, o.out, "best.json");
    write_text(out_path, j.dump(2) + '\n');
    std::cout << "best fitness " << *result.best.fitness << " after " << result.log.records.size()
              << " iterations, NFE " << result.log.nfe << " -> " << out_path.string() << '\n';
    return kOk;
}

int cmd_evaluate(const Options& o) {
    const auto data = load(o);
    const auto subset = parse_feature_list(o.features, data.matrix);
    const auto eval = evaluate_subset(data.matrix, data.labels, evaluation_spec(o.pipeline, subset));
    nlohmann::ordered_json j;
    j["seed"] = o.pipeline.seed;
    j["features"] = subset;
    j["n_splits"] = o.pipeline.n_splits;
    j["test_fraction"] = o.pipeline.test_fraction;
    j["mean"] = to_json(eval.mean);
    j["per_split"] = nlohmann::ordered_json::array();
    for (const auto& r : eval.per_split) j["per_split"].push_back(to_json(r));
    if (!o.json_path.empty()) write_text(o.json_path, j.dump(2) + '\n');
    std::cout << j["mean"].dump(2) << '\n';
    return kOk;
}

int cmd_pipeline(const Options& o) {
    const auto data = load(o);
    const auto report = run_pipeline(data, o.pipeline);
    const fs::path dir = o.pipeline.out_dir.empty() ? fs::path(".") : fs::path(o.pipeline.out_dir);
    write_run_outputs(dir, report, o.pipeline);
    std::cout << "before accuracy " << report.before.overall_accuracy << ", after " << report.after.overall_accuracy
              << " with " << report.selected.size() << " features, NFE " << report.log.nfe << " -> "
              << (dir / "report.json").string() << '\n';
    return kOk;
}

int cmd_experiment(const Options& o) {
    const auto data = load(o);
    const auto table = experiment(data, o.pipeline, o.runs);
    const fs::path dir = o.pipeline.out_dir.empty() ? fs::path(".") : fs::path(o.pipeline.out_dir);
    for (std::size_t r = 0; r < table.runs.size(); ++r) {
        PipelineConfig cfg = o.pipeline;
        cfg.seed = o.pipeline.seed + r;
        write_run_outputs(dir / ("run_" + std::to_string(r)), table.runs[r], cfg);
    }
    write_text(dir / "experiment.csv", experiment_csv(table));
    write_text(dir / "experiment.json", experiment_json(table, o.pipeline).dump(2) + '\n');
    std::cout << "mean accuracy before " << table.before_mean.overall_accuracy << ", after "
              << table.after_mean.overall_accuracy << " (sd " << table.after_std.overall_accuracy << "), mean NFE "
              << table.nfe_mean << " -> " << (dir / "experiment.csv").string() << '\n';
    return kOk;
}

int cmd_baseline(const Options& o) {
    const auto data = load(o);
    const auto base = random_baseline(data, o.pipeline, o.runs);
    nlohmann::ordered_json j;
    j["seed"] = o.pipeline.seed;
    j["runs"] = o.runs;
    j["mean"] = to_json(base.mean);
    j["subsets"] = base.subsets;
    j["per_run"] = nlohmann::ordered_json::array();
    for (const auto& r : base.per_run) j["per_run"].push_back(to_json(r));
    const auto path = output_path(o, o.out, "baseline.json");
    write_text(path, j.dump(2) + '\n');
    std::cout << "random-selection mean accuracy " << base.mean.overall_accuracy << " -> " << path.string() << '\n';
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"DMC ranking, KMeans feature space and adaptive-rate GA feature selection"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config", "", "key = value configuration file; command-line flags override it");

    Options o;
    auto& p = o.pipeline;
    app.add_option("--seed", p.seed, "Master seed")->capture_default_str();
    app.add_option("--out-dir", p.out_dir, "Output directory");
    app.add_option("--data", p.dataset, "Dataset CSV (header row, binary label column)");
    app.add_option("--label-column", p.label_column, "Label column name (default: last column)");
    app.add_option("--ranker", o.ranker, "Filter ranker")->check(CLI::IsMember({"dmc", "mc"}))->capture_default_str();
    app.add_option("--keep", p.keep_fraction, "Fraction of ranked features retained")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    app.add_option("--q", p.q, "KMeans cluster count")->check(CLI::PositiveNumber)->capture_default_str();
    app.add_option("--kmeans-restarts", p.kmeans.restarts, "KMeans restarts")->check(CLI::PositiveNumber)->capture_default_str();
    app.add_option("--kmeans-max-iters", p.kmeans.max_iters, "Lloyd iteration cap")->check(CLI::PositiveNumber)->capture_default_str();
    app.add_option("--kmeans-tol", p.kmeans.tol, "Centroid movement tolerance")->capture_default_str();
    app.add_option("--npop", p.ga.n_pop, "GA population size")->check(CLI::Range(2, 1 << 20))->capture_default_str();
    app.add_option("--max-iters", p.ga.max_iters, "GA iteration cap")->capture_default_str();
    app.add_option("--stagnation", p.ga.stagnation_limit, "Stop after this many iterations without improvement")->capture_default_str();
    app.add_option("--adapt-period", p.ga.adapt_period, "Stagnant iterations per rate adaptation")->check(CLI::PositiveNumber)->capture_default_str();
    app.add_option("--nvar", p.ga.n_var, "Selected subset length")->check(CLI::PositiveNumber)->capture_default_str();
    app.add_option("--splits", p.n_splits, "Stratified holdout repetitions")->check(CLI::PositiveNumber)->capture_default_str();
    app.add_option("--test-fraction", p.test_fraction, "Holdout test fraction")->check(CLI::Range(0.0, 1.0))->capture_default_str();
    app.add_option("--jobs", p.jobs, "Concurrent runs for experiment")->check(CLI::PositiveNumber)->capture_default_str();

    auto* rank = app.add_subcommand("rank", "Score and rank features, write the retained ones as CSV");
    rank->add_option("--out", o.out, "Scores CSV (default <out-dir>/scores.csv)");

    auto* cluster = app.add_subcommand("cluster", "Cluster retained features and draw the GA feature space");
    cluster->add_option("--out", o.out, "Space JSON (default <out-dir>/space.json)");

    auto* optimize = app.add_subcommand("optimize", "Run the adaptive-rate GA over a feature space");
    optimize->add_option("--space", o.space_path, "Space JSON from `cluster` (default: build it)");
    optimize->add_option("--log", o.log_path, "Convergence CSV (default <out-dir>/convergence.csv)");
    optimize->add_option("--out", o.out, "Best-subset JSON (default <out-dir>/best.json)");

    auto* evaluate = app.add_subcommand("evaluate", "Evaluate a feature subset by repeated stratified holdout");
    evaluate->add_option("--features", o.features, "Comma-separated feature indices, or 'all'")->required();
    evaluate->add_option("--json", o.json_path, "Report JSON");

    auto* pipeline = app.add_subcommand("pipeline", "Full rank -> cluster -> optimize -> evaluate run");
    auto* exper = app.add_subcommand("experiment", "Repeat the pipeline over consecutive seeds and aggregate");
    exper->add_option("--runs", o.runs, "Number of runs")->check(CLI::PositiveNumber)->capture_default_str();
    auto* baseline = app.add_subcommand("baseline", "Random-selection baseline over the feature space");
    baseline->add_option("--runs", o.runs, "Number of random subsets")->check(CLI::PositiveNumber)->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        p.ranker = parse_ranker(o.ranker);
        if (p.dataset.empty()) throw ArgumentError("--data is required");
        if (*rank) return cmd_rank(o);
        if (*cluster) return cmd_cluster(o);
        if (*optimize) return cmd_optimize(o);
        if (*evaluate) return cmd_evaluate(o);
        if (*pipeline) return cmd_pipeline(o);
        if (*exper) return cmd_experiment(o);
        if (*baseline) return cmd_baseline(o);
    } catch (const ArgumentError& e) {
        std::cerr << "usage error" << (e.stage().empty() ? "" : " [" + e.stage() + "]") << ": " << e.what() << '\n';
        return kUsage;
    } catch (const DataError& e) {
        std::cerr << "data error" << (e.stage().empty() ? "" : " [" + e.stage() + "]") << ": " << e.what() << '\n';
        return kData;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return kInternal;
    }
    return kUsage;
}
