#pragma once

// End-to-end orchestration: rank -> cluster -> feature space -> GA ->
// before/after evaluation, plus the random-subset baseline and multi-run
// experiments. Reports are JSON, logs and score tables CSV.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "dmcga/data.hpp"
#include "dmcga/errors.hpp"
#include "dmcga/feature_space.hpp"
#include "dmcga/gawar.hpp"
#include "dmcga/metrics.hpp"
#include "dmcga/random.hpp"
#include "dmcga/rankers.hpp"

namespace dmcga {

/// Stage seeds are mix_seed(master ^ offset) so each stage can be re-run on
/// its own from the master seed.
namespace seed_offset {
inline constexpr std::uint64_t kEvaluation = 0x4556'0000'0000'0001ULL;
inline constexpr std::uint64_t kKMeans = 0x4b4d'0000'0000'0002ULL;
inline constexpr std::uint64_t kSpace = 0x5350'0000'0000'0003ULL;
inline constexpr std::uint64_t kGa = 0x4741'0000'0000'0004ULL;
inline constexpr std::uint64_t kBaseline = 0x4241'0000'0000'0005ULL;
}  // namespace seed_offset

inline std::uint64_t stage_seed(std::uint64_t master, std::uint64_t offset) { return mix_seed(master ^ offset); }

struct PipelineConfig {
    std::string dataset;
    std::string label_column;
    Ranker ranker = Ranker::DMC;
    double keep_fraction = 0.05;
    std::size_t q = 100;
    KMeansOptions kmeans;
    GaConfig ga;  // ga.seed is ignored; the GA seed derives from `seed`
    std::size_t n_splits = 10;
    double test_fraction = 0.2;
    std::size_t n_runs = 5;
    std::uint64_t seed = 0;
    std::string out_dir;
    std::size_t jobs = 1;
};

struct PreparedSpace {
    std::vector<FeatureScore> retained;
    Clustering clustering;
    FeatureSpace space;
};

struct RunReport {
    std::uint64_t seed = 0;
    MetricsReport before;
    MetricsReport after;
    std::vector<std::size_t> selected;
    std::vector<std::string> selected_names;
    PreparedSpace prepared;
    ConvergenceLog log;
    std::size_t n_var = 0;
    double wall_seconds = 0.0;  // kept out of report.json so reports stay byte-identical
};

namespace detail {

template <class F>
auto in_stage(const char* stage, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (Error& e) {
        if (e.stage().empty()) e.set_stage(stage);
        throw;
    }
}

}  // namespace detail

/// Number of DMC-retained features: floor(keep * m), raised to min(m, 2 * n_var)
/// so small datasets still leave the GA something to choose from.
inline std::size_t pipeline_retained_count(std::size_t m, double keep_fraction, std::size_t n_var) {
    return std::max(retained_count(m, keep_fraction), std::min(m, 2 * n_var));
}

inline FitnessSpec evaluation_spec(const PipelineConfig& config, std::vector<std::size_t> subset) {
    return {std::move(subset), config.n_splits, config.test_fraction, stage_seed(config.seed, seed_offset::kEvaluation)};
}

inline PreparedSpace prepare_space(const Dataset& data, const PipelineConfig& config) {
    PreparedSpace out;
    out.retained = detail::in_stage("rank", [&] {
        auto scores = score_all(data.matrix, data.labels, config.ranker);
        scores.resize(pipeline_retained_count(data.matrix.cols(), config.keep_fraction, config.ga.n_var));
        return scores;
    });
    std::vector<std::size_t> retained;
    for (const auto& s : out.retained) retained.push_back(s.feature_index);
    out.clustering = detail::in_stage("cluster", [&] {
        const auto points = make_point_set(data.matrix, retained);
        return kmeans(points, effective_q(retained.size(), config.q), stage_seed(config.seed, seed_offset::kKMeans),
                      config.kmeans);
    });
    out.space = detail::in_stage("space", [&] {
        return build_feature_space(out.clustering, retained, stage_seed(config.seed, seed_offset::kSpace));
    });
    return out;
}

/// GA fitness: mean overall accuracy of the subset (evaluated in ascending
/// index order, so equal sets always score equally).
inline auto accuracy_fitness(const Dataset& data, const PipelineConfig& config) {
    return [&data, &config](std::span<const std::size_t> genes) {
        std::vector<std::size_t> subset(genes.begin(), genes.end());
        std::sort(subset.begin(), subset.end());
        return evaluate_subset(data.matrix, data.labels, evaluation_spec(config, std::move(subset))).mean.overall_accuracy;
    };
}

inline std::vector<std::size_t> all_features(const FeatureMatrix& matrix) {
    std::vector<std::size_t> idx(matrix.cols());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    return idx;
}

inline RunReport run_pipeline(const Dataset& data, const PipelineConfig& config) {
    const auto t0 = std::chrono::steady_clock::now();
    RunReport report;
    report.seed = config.seed;
    report.prepared = prepare_space(data, config);

    GaConfig ga = config.ga;
    ga.seed = stage_seed(config.seed, seed_offset::kGa);
    ga.n_var = std::min(ga.n_var, report.prepared.space.size());
    report.n_var = ga.n_var;
    auto fitness = accuracy_fitness(data, config);
    auto result = detail::in_stage("optimize", [&] { return run_gawar(report.prepared.space, ga, fitness); });

    report.selected = result.best.genes;
    std::sort(report.selected.begin(), report.selected.end());
    for (std::size_t j : report.selected) report.selected_names.push_back(data.matrix.feature_name(j));
    report.log = std::move(result.log);

    detail::in_stage("evaluate", [&] {
        report.before = evaluate_subset(data.matrix, data.labels, evaluation_spec(config, all_features(data.matrix))).mean;
        report.after = evaluate_subset(data.matrix, data.labels, evaluation_spec(config, report.selected)).mean;
        if (report.after.overall_accuracy != *result.best.fitness)
            throw InvariantError("re-evaluated best subset disagrees with its GA fitness");
    });
    report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

struct BaselineReport {
    MetricsReport mean;
    std::vector<MetricsReport> per_run;
    std::vector<std::vector<std::size_t>> subsets;
};

/// Random-selection baseline: n_runs uniform n_var-subsets of the same feature
/// space the pipeline would build, scored with the pipeline's split seeds.
inline BaselineReport random_baseline(const Dataset& data, const PipelineConfig& config, std::size_t n_runs) {
    if (n_runs == 0) throw ArgumentError("baseline needs at least one run");
    const auto prepared = prepare_space(data, config);
    const std::size_t n_var = std::min(config.ga.n_var, prepared.space.size());
    Rng rng = make_rng(stage_seed(config.seed, seed_offset::kBaseline));
    BaselineReport out;
    for (std::size_t r = 0; r < n_runs; ++r) {
        auto subset = random_subset(prepared.space.indices, n_var, rng);
        std::sort(subset.begin(), subset.end());
        out.per_run.push_back(evaluate_subset(data.matrix, data.labels, evaluation_spec(config, subset)).mean);
        out.subsets.push_back(std::move(subset));
    }
    out.mean = mean_report(out.per_run);
    return out;
}

struct ExperimentTable {
    std::vector<RunReport> runs;
    MetricsReport before_mean, before_std, after_mean, after_std;
    double nfe_mean = 0.0;
    double nfe_std = 0.0;
};

namespace detail {

inline double sample_std(std::span<const double> xs) {
    if (xs.size() < 2) return 0.0;
    const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

inline MetricsReport std_report(std::span<const MetricsReport> reports) {
    MetricsReport out;
    MetricsReport::for_each_field([&](const char*, double MetricsReport::*field) {
        std::vector<double> xs;
        for (const auto& r : reports) xs.push_back(r.*field);
        out.*field = sample_std(xs);
    });
    return out;
}

}  // namespace detail

/// Runs the pipeline with seeds master, master + 1, ... and aggregates.
/// Runs may execute on `config.jobs` threads; results are gathered in run order.
inline ExperimentTable experiment(const Dataset& data, const PipelineConfig& config, std::size_t n_runs) {
    if (n_runs == 0) throw ArgumentError("experiment needs at least one run");
    ExperimentTable table;
    table.runs.resize(n_runs);
    std::vector<std::exception_ptr> errors(n_runs);
    auto work = [&](std::size_t r) {
        try {
            PipelineConfig cfg = config;
            cfg.seed = config.seed + r;
            table.runs[r] = run_pipeline(data, cfg);
        } catch (...) {
            errors[r] = std::current_exception();
        }
    };
    const std::size_t jobs = std::clamp<std::size_t>(config.jobs, 1, n_runs);
    if (jobs == 1) {
        for (std::size_t r = 0; r < n_runs; ++r) work(r);
    } else {
        std::vector<std::thread> threads;
        for (std::size_t t = 0; t < jobs; ++t)
            threads.emplace_back([&, t] {
                for (std::size_t r = t; r < n_runs; r += jobs) work(r);
            });
        for (auto& th : threads) th.join();
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);

    std::vector<MetricsReport> before, after;
    std::vector<double> nfe;
    for (const auto& run : table.runs) {
        before.push_back(run.before);
        after.push_back(run.after);
        nfe.push_back(static_cast<double>(run.log.nfe));
    }
    table.before_mean = mean_report(before);
    table.after_mean = mean_report(after);
    table.before_std = detail::std_report(before);
    table.after_std = detail::std_report(after);
    table.nfe_mean = std::accumulate(nfe.begin(), nfe.end(), 0.0) / static_cast<double>(n_runs);
    table.nfe_std = detail::sample_std(nfe);
    return table;
}

// ---------------------------------------------------------------------------
// Serialization

inline nlohmann::ordered_json to_json(const MetricsReport& r) {
    nlohmann::ordered_json j;
    MetricsReport::for_each_field([&](const char* name, double MetricsReport::*field) { j[name] = r.*field; });
    return j;
}

inline std::string to_string(StopReason reason) {
    switch (reason) {
        case StopReason::MaxIterations: return "max_iterations";
        case StopReason::Stagnation: return "stagnation";
        case StopReason::SingleSubset: return "single_subset";
    }
    return "unknown";
}

inline nlohmann::ordered_json to_json(const PipelineConfig& c) {
    return {
        {"dataset", std::filesystem::path(c.dataset).filename().string()},
        {"label_column", c.label_column},
        {"ranker", std::string(to_string(c.ranker))},
        {"keep_fraction", c.keep_fraction},
        {"q", c.q},
        {"kmeans_max_iters", c.kmeans.max_iters},
        {"kmeans_tol", c.kmeans.tol},
        {"kmeans_restarts", c.kmeans.restarts},
        {"n_pop", c.ga.n_pop},
        {"max_iters", c.ga.max_iters},
        {"stagnation_limit", c.ga.stagnation_limit},
        {"adapt_period", c.ga.adapt_period},
        {"n_var", c.ga.n_var},
        {"n_splits", c.n_splits},
        {"test_fraction", c.test_fraction},
        {"seed", c.seed},
    };
}

/// The report.json document. Schema (all keys always present):
/// config, seed, n_var, before, after, selected {indices, names},
/// feature_space {retained, q, inertia, indices}, ga {initial_best, nfe,
/// iterations, evaluation_budget, stop_reason, best_fitness}.
inline nlohmann::ordered_json report_json(const RunReport& r, const PipelineConfig& config) {
    nlohmann::ordered_json j;
    j["config"] = to_json(config);
    j["seed"] = r.seed;
    j["n_var"] = r.n_var;
    j["before"] = to_json(r.before);
    j["after"] = to_json(r.after);
    j["selected"] = {{"indices", r.selected}, {"names", r.selected_names}};
    std::vector<std::size_t> retained;
    for (const auto& s : r.prepared.retained) retained.push_back(s.feature_index);
    j["feature_space"] = {{"retained", retained},
                          {"q", r.prepared.clustering.q},
                          {"inertia", r.prepared.clustering.inertia},
                          {"indices", r.prepared.space.indices}};
    j["ga"] = {{"initial_best", r.log.initial_best},
               {"nfe", r.log.nfe},
               {"iterations", r.log.records.size()},
               {"evaluation_budget", r.log.evaluation_budget},
               {"stop_reason", to_string(r.log.stop_reason)},
               {"best_fitness", r.log.records.empty() ? r.log.initial_best : r.log.records.back().best_fitness}};
    return j;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw MissingFile(path.string());
    out << text;
}

inline std::string convergence_csv(const ConvergenceLog& log) {
    std::string out = "iteration,best_fitness,p_c,p_m,n_c,n_m,adapted,full_mutation,nfe_cumulative\n";
    for (const auto& r : log.records) {
        const nlohmann::json row = {r.best_fitness, r.p_c, r.p_m};  // shortest round-trip doubles
        out += std::to_string(r.iteration) + ',' + row[0].dump() + ',' + row[1].dump() + ',' + row[2].dump() + ',' +
               std::to_string(r.n_c) + ',' + std::to_string(r.n_m) + ',' + (r.adapted ? "1" : "0") + ',' +
               (r.full_mutation ? "1" : "0") + ',' + std::to_string(r.nfe_cumulative) + '\n';
    }
    return out;
}

inline std::string scores_csv(std::span<const FeatureScore> scores, const FeatureMatrix& matrix) {
    std::string out = "rank,feature_index,feature_name,score\n";
    for (std::size_t k = 0; k < scores.size(); ++k) {
        const nlohmann::json score = scores[k].score;
        out += std::to_string(k + 1) + ',' + std::to_string(scores[k].feature_index) + ',' +
               matrix.feature_name(scores[k].feature_index) + ',' + score.dump() + '\n';
    }
    return out;
}

/// Writes report.json, convergence.csv and timing.json into `dir`.
inline void write_run_outputs(const std::filesystem::path& dir, const RunReport& r, const PipelineConfig& config) {
    write_text(dir / "report.json", report_json(r, config).dump(2) + '\n');
    write_text(dir / "convergence.csv", convergence_csv(r.log));
    write_text(dir / "timing.json", nlohmann::ordered_json{{"wall_seconds", r.wall_seconds}}.dump(2) + '\n');
}

inline std::string experiment_csv(const ExperimentTable& t) {
    std::string out = "row,seed,phase";
    MetricsReport::for_each_field([&](const char* name, double MetricsReport::*) { out += std::string(",") + name; });
    out += ",nfe\n";
    auto line = [&](const std::string& row, const std::string& seed, const char* phase, const MetricsReport& m,
                    const std::string& nfe) {
        out += row + ',' + seed + ',' + phase;
        MetricsReport::for_each_field(
            [&](const char*, double MetricsReport::*field) { out += ',' + nlohmann::json(m.*field).dump(); });
        out += ',' + nfe + '\n';
    };
    for (std::size_t r = 0; r < t.runs.size(); ++r) {
        const auto& run = t.runs[r];
        line(std::to_string(r), std::to_string(run.seed), "before", run.before, "");
        line(std::to_string(r), std::to_string(run.seed), "after", run.after, std::to_string(run.log.nfe));
    }
    line("mean", "", "before", t.before_mean, "");
    line("mean", "", "after", t.after_mean, nlohmann::json(t.nfe_mean).dump());
    line("std", "", "before", t.before_std, "");
    line("std", "", "after", t.after_std, nlohmann::json(t.nfe_std).dump());
    return out;
}

inline nlohmann::ordered_json experiment_json(const ExperimentTable& t, const PipelineConfig& config) {
    nlohmann::ordered_json j;
    j["config"] = to_json(config);
    j["n_runs"] = t.runs.size();
    nlohmann::ordered_json runs = nlohmann::ordered_json::array();
    for (const auto& run : t.runs)
        runs.push_back({{"seed", run.seed},
                        {"before", to_json(run.before)},
                        {"after", to_json(run.after)},
                        {"selected", run.selected},
                        {"nfe", run.log.nfe},
                        {"iterations", run.log.records.size()}});
    j["runs"] = std::move(runs);
    j["mean"] = {{"before", to_json(t.before_mean)}, {"after", to_json(t.after_mean)}, {"nfe", t.nfe_mean}};
    j["std"] = {{"before", to_json(t.before_std)}, {"after", to_json(t.after_std)}, {"nfe", t.nfe_std}};
    return j;
}

}  // namespace dmcga
