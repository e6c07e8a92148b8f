#include "causalseg/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "causalseg/causal.hpp"
#include "causalseg/csv.hpp"
#include "causalseg/dataset.hpp"
#include "causalseg/errors.hpp"
#include "causalseg/eval.hpp"
#include "causalseg/explain.hpp"
#include "causalseg/loop.hpp"
#include "causalseg/rng.hpp"
#include "causalseg/segmentation.hpp"
#include "causalseg/synth.hpp"

namespace causalseg::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// ---- config plumbing -------------------------------------------------------

json load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ConfigError("config parse error in " + path + ": " + e.what());
    }
    if (!j.is_object()) throw ConfigError("config root must be a JSON object");
    return j;
}

std::string dotted(const char* section, const char* key) {
    std::string d = section;
    if (!d.empty()) d += '.';
    d += key;
    return d;
}

template <typename T>
T require_key(const json& obj, const char* section, const char* key) {
    if (!obj.is_object() || !obj.contains(key)) {
        throw ConfigError("missing config key '" + dotted(section, key) + "'");
    }
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError("config key '" + dotted(section, key) + "' has the wrong type");
    }
}

template <typename T>
T key_or(const json& obj, const char* section, const char* key, T fallback) {
    if (!obj.is_object() || !obj.contains(key)) return fallback;
    return require_key<T>(obj, section, key);
}

std::string config_hash(const json& config) {
    const uint64_t h = fnv1a64(config.dump());
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

synth::SynthConfig parse_synth_config(const json& s) {
    synth::SynthConfig cfg;
    const char* sec = "input.synthetic";
    cfg.n_units = key_or<long>(s, sec, "n_units", cfg.n_units);
    cfg.n_features = key_or<int>(s, sec, "n_features", cfg.n_features);
    cfg.noise_sd = key_or<double>(s, sec, "noise_sd", cfg.noise_sd);
    cfg.effect_scale = key_or<double>(s, sec, "effect_scale", cfg.effect_scale);
    cfg.effect_heterogeneity =
        key_or<double>(s, sec, "effect_heterogeneity", cfg.effect_heterogeneity);
    cfg.baseline_effect_correlation =
        key_or<double>(s, sec, "baseline_effect_correlation", cfg.baseline_effect_correlation);
    if (s.contains("assignment")) {
        const json& a = s.at("assignment");
        const std::string type =
            require_key<std::string>(a, "input.synthetic.assignment", "type");
        if (type == "randomized") {
            synth::RandomizedAssignment r;
            r.p = key_or<double>(a, "input.synthetic.assignment", "p", 0.5);
            cfg.assignment = r;
        } else if (type == "confounded") {
            cfg.assignment = synth::ConfoundedAssignment{};
        } else {
            throw ConfigError(
                "config key 'input.synthetic.assignment.type' must be 'randomized' or "
                "'confounded', got '" +
                type + "'");
        }
    }
    return cfg;
}

ColumnSchema parse_schema(const json& c) {
    ColumnSchema schema;
    const char* sec = "input.csv";
    if (c.contains("id_column")) {
        schema.id_column = require_key<std::string>(c, sec, "id_column");
    }
    schema.treatment_column = key_or<std::string>(c, sec, "treatment_column",
                                                  schema.treatment_column);
    schema.outcome_column = key_or<std::string>(c, sec, "outcome_column", schema.outcome_column);
    schema.covariate_columns = key_or<std::vector<std::string>>(c, sec, "covariates", {});
    return schema;
}

LoopConfig parse_loop_config(const json& config, uint64_t seed) {
    LoopConfig cfg;
    cfg.seed = seed;
    if (!config.contains("loop")) return cfg;
    const json& l = config.at("loop");
    const char* sec = "loop";
    cfg.k_segments = key_or<int>(l, sec, "k_segments", cfg.k_segments);
    cfg.degree = key_or<int>(l, sec, "degree", cfg.degree);
    cfg.lambda = key_or<double>(l, sec, "lambda", cfg.lambda);
    cfg.n_boot = key_or<int>(l, sec, "n_boot", cfg.n_boot);
    cfg.max_iter = key_or<int>(l, sec, "max_iter", cfg.max_iter);
    cfg.include_segment_features =
        key_or<bool>(l, sec, "include_segment_features", cfg.include_segment_features);
    cfg.s_learner_interactions =
        key_or<bool>(l, sec, "s_learner_interactions", cfg.s_learner_interactions);

    const std::string learner = key_or<std::string>(l, sec, "learner", "t");
    if (learner == "t") {
        cfg.learner = LearnerKind::t_learner;
    } else if (learner == "s") {
        cfg.learner = LearnerKind::s_learner;
    } else {
        throw ConfigError("config key 'loop.learner' must be 't' or 's', got '" + learner + "'");
    }

    const std::string path =
        key_or<std::string>(l, sec, "ate_path", "mean_cate_bootstrap");
    if (path == "mean_cate_bootstrap") {
        cfg.ate_path = AteMethod::mean_cate_bootstrap;
    } else if (path == "diff_in_means") {
        cfg.ate_path = AteMethod::diff_in_means;
    } else {
        throw ConfigError(
            "config key 'loop.ate_path' must be 'mean_cate_bootstrap' or 'diff_in_means', "
            "got '" +
            path + "'");
    }

    const std::string init =
        key_or<std::string>(l, sec, "initial_segmentation", "kmeans_on_x");
    if (init == "kmeans_on_x") {
        cfg.initial_segmentation = InitialSegmentation::kmeans_on_x;
    } else if (init == "random") {
        cfg.initial_segmentation = InitialSegmentation::random;
    } else if (init == "single_segment") {
        cfg.initial_segmentation = InitialSegmentation::single_segment;
    } else {
        throw ConfigError(
            "config key 'loop.initial_segmentation' must be 'kmeans_on_x', 'random' or "
            "'single_segment', got '" +
            init + "'");
    }
    return cfg;
}

struct EvalSettings {
    EvalConfig curve;
    int n_boot = 500;
    double ci_level = 0.90;
};

EvalSettings parse_eval_settings(const json& config) {
    EvalSettings s;
    if (!config.contains("eval")) return s;
    const json& e = config.at("eval");
    const char* sec = "eval";
    s.curve.n_points = key_or<int>(e, sec, "n_points", s.curve.n_points);
    s.curve.k_for_kmeans_strategy =
        key_or<int>(e, sec, "k_for_kmeans_strategy", s.curve.k_for_kmeans_strategy);
    s.n_boot = key_or<int>(e, sec, "n_boot", s.n_boot);
    s.ci_level = key_or<double>(e, sec, "ci_level", s.ci_level);
    return s;
}

// ---- inputs ----------------------------------------------------------------

struct LoadedInputs {
    Dataset ds;
    std::optional<synth::TrueEffects> truth;
};

LoadedInputs load_inputs(const json& config, uint64_t seed) {
    if (!config.contains("input")) throw ConfigError("missing config key 'input'");
    const json& input = config.at("input");
    const bool has_synth = input.is_object() && input.contains("synthetic");
    const bool has_csv = input.is_object() && input.contains("csv");
    if (has_synth == has_csv) {
        throw ConfigError("config key 'input' must contain exactly one of 'synthetic' or 'csv'");
    }

    LoadedInputs loaded;
    if (has_synth) {
        auto [ds, truth] = synth::generate(parse_synth_config(input.at("synthetic")), seed);
        loaded.ds = std::move(ds);
        loaded.truth = std::move(truth);
    } else {
        const json& c = input.at("csv");
        const std::string path = require_key<std::string>(c, "input.csv", "path");
        ColumnSchema schema = parse_schema(c);
        if (!schema.id_column && schema.covariate_columns.empty()) {
            // Round-tripping our own dataset.csv should not turn the id column
            // into a covariate; pick it up by name when the file has one.
            std::ifstream peek(path);
            std::string header;
            if (peek && std::getline(peek, header)) {
                for (const auto& col : csv::split_line(header)) {
                    if (col == "unit_id") schema.id_column = "unit_id";
                }
            }
        }
        loaded.ds = load_csv(path, schema);
    }
    return loaded;
}

// ---- output helpers --------------------------------------------------------

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write file: " + path.string());
    out << content;
    if (!out) throw ValidationError("write failed: " + path.string());
}

void write_json(const fs::path& path, const json& j) { write_file(path, j.dump(2) + "\n"); }

json provenance(const json& config, uint64_t seed) {
    return json{{"config_hash", config_hash(config)}, {"seed", seed}, {"version", kVersion}};
}

fs::path ensure_out_dir(const std::string& dir) {
    const fs::path p(dir);
    std::error_code ec;
    fs::create_directories(p, ec);
    if (ec) throw ValidationError("cannot create output directory " + dir + ": " + ec.message());
    return p;
}

// run-level sidecar covering the CSV outputs, which carry no header comments
void write_run_meta(const fs::path& dir, const json& config, uint64_t seed,
                    const std::string& command, const std::vector<std::string>& files) {
    json j;
    j["meta"] = provenance(config, seed);
    j["command"] = command;
    j["files"] = files;
    write_json(dir / "meta.json", j);
}

// ---- shared pipeline pieces -------------------------------------------------

void print_assumption_note(const Dataset& ds, const json& config, bool* trimmed,
                           Dataset* trimmed_ds) {
    // The estimates below are causal only under the usual identification
    // conditions; surface the overlap diagnostic up front instead of burying
    // it in a doc.
    std::cout << "assumptions: ignorable assignment given covariates, overlap of both arms at "
                 "every profile, one treatment version, no interference between units\n";

    const json overlap = config.contains("overlap") ? config.at("overlap") : json::object();
    const double lo = key_or<double>(overlap, "overlap", "lo", 0.05);
    const double hi = key_or<double>(overlap, "overlap", "hi", 0.95);
    const bool trim = key_or<bool>(overlap, "overlap", "trim", false);

    Eigen::VectorXd e;
    try {
        const LinearModel prop = fit_assignment_propensity(ds, ds.covariates);
        e = predict(prop, ds.covariates);
    } catch (const ConvergenceError& err) {
        // The diagnostic model failing should not kill the run -- unless the
        // user asked for trimming, which needs the propensities.
        if (trim) throw;
        std::printf("overlap: assignment propensity model did not converge (%s); diagnostic "
                    "skipped\n",
                    err.what());
        *trimmed = false;
        return;
    }
    const OverlapReport report = overlap_report(ds, e, lo, hi);
    std::printf("overlap: assignment propensity in [%.3f, %.3f]; %lld units below %.2f, %lld "
                "above %.2f%s\n",
                report.min_propensity, report.max_propensity,
                static_cast<long long>(report.n_below_lo), lo,
                static_cast<long long>(report.n_above_hi), hi,
                report.violated ? " (violated)" : "");

    *trimmed = false;
    if (trim && report.violated) {
        *trimmed_ds = positivity_trim(ds, e, lo, hi);
        *trimmed = true;
        std::printf("trimmed to N=%lld units inside [%.2f, %.2f]\n",
                    static_cast<long long>(trimmed_ds->n()), lo, hi);
    }
}

json history_to_json(const RunResult& result, const LoopConfig& loop_cfg, Eigen::Index n_units,
                     const json& config, uint64_t seed) {
    json records = json::array();
    for (const auto& r : result.history) {
        records.push_back(json{{"iteration", r.iteration},
                               {"ate", r.ate},
                               {"se", r.se},
                               {"se_ate_ratio_pct", r.se_ate_ratio_pct},
                               {"movement_precision", r.movement_precision},
                               {"segment_movement", r.segment_movement}});
    }
    json loop_echo{
        {"k_segments", loop_cfg.k_segments},
        {"learner", loop_cfg.learner == LearnerKind::t_learner ? "t" : "s"},
        {"degree", loop_cfg.degree},
        {"lambda", loop_cfg.lambda},
        {"ate_path", loop_cfg.ate_path == AteMethod::mean_cate_bootstrap ? "mean_cate_bootstrap"
                                                                         : "diff_in_means"},
        {"n_boot", loop_cfg.n_boot},
        {"max_iter", loop_cfg.max_iter},
        {"initial_segmentation",
         loop_cfg.initial_segmentation == InitialSegmentation::kmeans_on_x ? "kmeans_on_x"
         : loop_cfg.initial_segmentation == InitialSegmentation::random   ? "random"
                                                                          : "single_segment"},
        {"include_segment_features", loop_cfg.include_segment_features},
        {"s_learner_interactions", loop_cfg.s_learner_interactions},
    };
    return json{{"meta", provenance(config, seed)},
                {"n_units", static_cast<long long>(n_units)},
                {"loop", loop_echo},
                {"converged", result.converged},
                {"stop_reason", stop_reason_name(result.stop_reason)},
                {"iterations", result.history.size()},
                {"thresholds", result.final_assignment.thresholds},
                {"records", records}};
}

void write_segments(const fs::path& dir, const Dataset& ds, const SegmentAssignment& seg,
                    const json& config, uint64_t seed) {
    std::string body = "unit_id,segment\n";
    for (Eigen::Index i = 0; i < ds.n(); ++i) {
        body += std::to_string(ds.unit_ids[static_cast<size_t>(i)]);
        body += ',';
        body += std::to_string(seg.labels[static_cast<size_t>(i)]);
        body += '\n';
    }
    write_file(dir / "segments.csv", body);

    std::vector<long long> sizes(static_cast<size_t>(seg.k), 0);
    for (int label : seg.labels) ++sizes[static_cast<size_t>(label)];
    write_json(dir / "segments.json", json{{"meta", provenance(config, seed)},
                                           {"k", seg.k},
                                           {"method", segment_method_name(seg.method)},
                                           {"thresholds", seg.thresholds},
                                           {"sizes", sizes}});
}

void write_cate_csv(const fs::path& dir, const Dataset& ds, const Eigen::VectorXd& cate) {
    std::string body = "unit_id,cate\n";
    for (Eigen::Index i = 0; i < ds.n(); ++i) {
        body += std::to_string(ds.unit_ids[static_cast<size_t>(i)]);
        body += ',';
        body += csv::format_double(cate(i));
        body += '\n';
    }
    write_file(dir / "cate.csv", body);
}

// ---- subcommands -----------------------------------------------------------

int cmd_synth(const json& config, uint64_t seed, const std::string& out_dir) {
    if (!config.contains("input") || !config.at("input").contains("synthetic")) {
        throw ConfigError("synth command requires config key 'input.synthetic'");
    }
    const synth::SynthConfig cfg = parse_synth_config(config.at("input").at("synthetic"));
    const auto [ds, truth] = synth::generate(cfg, seed);

    const fs::path dir = ensure_out_dir(out_dir);
    save_csv(ds, (dir / "dataset.csv").string());
    synth::save_truth_csv(ds, truth, (dir / "truth.csv").string());
    write_run_meta(dir, config, seed, "synth", {"dataset.csv", "truth.csv"});
    std::printf("wrote dataset.csv and truth.csv for N=%lld units, %lld covariates to %s\n",
                static_cast<long long>(ds.n()), static_cast<long long>(ds.dim()),
                dir.string().c_str());
    return 0;
}

int cmd_run(const json& config, uint64_t seed, const std::string& out_dir) {
    LoadedInputs in = load_inputs(config, seed);

    bool trimmed = false;
    Dataset trimmed_ds;
    print_assumption_note(in.ds, config, &trimmed, &trimmed_ds);
    const Dataset& ds = trimmed ? trimmed_ds : in.ds;

    const LoopConfig loop_cfg = parse_loop_config(config, seed);
    const RunResult result = run_iterative_causal_segmentation(ds, loop_cfg);

    std::cout << render_convergence_table(result.history);
    std::printf("%s after %zu iteration%s\n", stop_reason_name(result.stop_reason).c_str(),
                result.history.size(), result.history.size() == 1 ? "" : "s");

    const fs::path dir = ensure_out_dir(out_dir);
    write_json(dir / "history.json", history_to_json(result, loop_cfg, ds.n(), config, seed));
    write_segments(dir, ds, result.final_assignment, config, seed);
    write_cate_csv(dir, ds, result.final_cate);
    write_json(dir / "model.json", json{{"meta", provenance(config, seed)},
                                        {"model", cate_model_to_json(result.final_model)}});
    write_run_meta(dir, config, seed, "run",
                   {"history.json", "segments.csv", "segments.json", "cate.csv", "model.json"});
    return 0;
}

int cmd_simulate(const json& config, uint64_t seed, const std::string& out_dir) {
    LoadedInputs in = load_inputs(config, seed);
    const Dataset& ds = in.ds;

    const LoopConfig loop_cfg = parse_loop_config(config, seed);
    const RunResult run = run_iterative_causal_segmentation(ds, loop_cfg);

    StrategyInputs inputs;
    inputs.cate = run.final_cate;
    inputs.purchase_propensity = predict(fit_propensity_outcome(ds, ds.covariates), ds.covariates);

    const EvalSettings eval = parse_eval_settings(config);
    const SimulationResult sim =
        simulate_strategies(ds, in.truth, inputs, eval.curve, seed);

    // oracle curves are deterministic given the ranking, so the band columns
    // collapse to the point value; the Qini band lives under `evaluate`
    std::string body = "strategy,fraction,value,lower,upper\n";
    json strategies = json::array();
    for (const auto& s : sim.strategies) {
        for (size_t m = 0; m < s.curve.fractions.size(); ++m) {
            const std::string v = csv::format_double(s.curve.values[m]);
            body += strategy_name(s.strategy) + ',' + csv::format_double(s.curve.fractions[m]) +
                    ',' + v + ',' + v + ',' + v + '\n';
        }
        strategies.push_back(json{{"strategy", strategy_name(s.strategy)},
                                  {"area_over_random", s.area_over_random},
                                  {"total_gain", s.curve.values.back()}});
        std::printf("%-13s area over random %12.3f\n", strategy_name(s.strategy).c_str(),
                    s.area_over_random);
    }
    std::printf("corr(purchase propensity, cate) = %.4f\n", sim.propensity_cate_correlation);

    const fs::path dir = ensure_out_dir(out_dir);
    write_file(dir / "curves.csv", body);
    write_json(dir / "summary.json",
               json{{"meta", provenance(config, seed)},
                    {"mode", in.truth ? "oracle" : "empirical"},
                    {"n_points", eval.curve.n_points},
                    {"propensity_cate_correlation", sim.propensity_cate_correlation},
                    {"strategies", strategies}});
    write_run_meta(dir, config, seed, "simulate", {"curves.csv", "summary.json"});
    return 0;
}

int cmd_evaluate(const json& config, uint64_t seed, const std::string& out_dir) {
    LoadedInputs in = load_inputs(config, seed);
    const Dataset& ds = in.ds;
    const EvalSettings eval = parse_eval_settings(config);

    const json ev = config.contains("eval") ? config.at("eval") : json::object();
    const std::string score_column = key_or<std::string>(ev, "eval", "score_column", "");

    Eigen::VectorXd score;
    std::string score_source;
    if (!score_column.empty()) {
        Eigen::Index col = -1;
        for (Eigen::Index j = 0; j < ds.dim(); ++j) {
            if (ds.covariate_names[static_cast<size_t>(j)] == score_column) col = j;
        }
        if (col < 0) {
            throw ConfigError("config key 'eval.score_column' names '" + score_column +
                              "', which is not a column of the input data");
        }
        score = ds.covariates.col(col);
        score_source = score_column;
    } else {
        // no explicit score: evaluate the pipeline's own CATE estimate
        const RunResult run =
            run_iterative_causal_segmentation(ds, parse_loop_config(config, seed));
        score = run.final_cate;
        score_source = "cate";
    }

    const UpliftCurve curve = qini_curve(ds.outcome, ds.treatment, score, eval.curve.n_points);
    const auto [lower, upper] =
        bootstrap_band(ds, score, eval.ci_level, eval.n_boot, eval.curve.n_points, seed);
    const double coefficient = qini_coefficient(curve, diagonal_baseline(curve));

    std::string body = "strategy,fraction,value,lower,upper\n";
    for (size_t m = 0; m < curve.fractions.size(); ++m) {
        body += score_source + ',' + csv::format_double(curve.fractions[m]) + ',' +
                csv::format_double(curve.values[m]) + ',' + csv::format_double(lower.values[m]) +
                ',' + csv::format_double(upper.values[m]) + '\n';
    }

    const fs::path dir = ensure_out_dir(out_dir);
    write_file(dir / "curves.csv", body);
    write_json(dir / "summary.json", json{{"meta", provenance(config, seed)},
                                          {"score", score_source},
                                          {"qini_coefficient", coefficient},
                                          {"qini_at_full_population", curve.values.back()},
                                          {"ci_level", eval.ci_level},
                                          {"n_boot", eval.n_boot}});
    write_run_meta(dir, config, seed, "evaluate", {"curves.csv", "summary.json"});
    std::printf("qini coefficient %.3f for score '%s' (%.0f%% band over %d resamples)\n",
                coefficient, score_source.c_str(), eval.ci_level * 100.0, eval.n_boot);
    return 0;
}

int cmd_explain(const json& config, uint64_t seed, const std::string& out_dir) {
    LoadedInputs in = load_inputs(config, seed);
    const Dataset& ds = in.ds;

    const RunResult run = run_iterative_causal_segmentation(ds, parse_loop_config(config, seed));

    const Eigen::MatrixXd Z = cate_feature_matrix(run.final_model, ds.covariates, run.final_extra);
    std::vector<std::string> names =
        expand_feature_names(ds.covariate_names, run.final_model.feature_degree);
    for (Eigen::Index s = 0; s < run.final_model.n_extra; ++s) {
        names.push_back("segment_" + std::to_string(s));
    }

    // which units to explain: an explicit id list wins, otherwise a seeded
    // sample (attributions for every unit would swamp the output)
    const json ex = config.contains("explain") ? config.at("explain") : json::object();
    std::vector<Eigen::Index> rows;
    if (ex.contains("unit_ids")) {
        const auto ids = require_key<std::vector<long long>>(ex, "explain", "unit_ids");
        for (long long id : ids) {
            Eigen::Index row = -1;
            for (Eigen::Index i = 0; i < ds.n(); ++i) {
                if (ds.unit_ids[static_cast<size_t>(i)] == id) row = i;
            }
            if (row < 0) {
                throw ValidationError("explain: unit id " + std::to_string(id) +
                                      " not present in the data");
            }
            rows.push_back(row);
        }
    } else {
        const int sample_size = key_or<int>(ex, "explain", "sample_size", 100);
        if (sample_size < 1) throw ConfigError("config key 'explain.sample_size' must be >= 1");
        std::vector<Eigen::Index> all(static_cast<size_t>(ds.n()));
        std::iota(all.begin(), all.end(), 0);
        Rng rng = Rng::substream(seed, "explain-sample");
        rng.shuffle(all);
        const size_t take = std::min(all.size(), static_cast<size_t>(sample_size));
        rows.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(take));
        std::sort(rows.begin(), rows.end());
    }

    Eigen::MatrixXd Zsel(static_cast<Eigen::Index>(rows.size()), Z.cols());
    for (size_t i = 0; i < rows.size(); ++i) Zsel.row(static_cast<Eigen::Index>(i)) = Z.row(rows[i]);
    const Eigen::VectorXd background = Z.colwise().mean().transpose();

    const Attribution attr = shap_cate(run.final_model, Zsel, background, names);

    std::string body = "unit_id,feature,contribution\n";
    for (size_t i = 0; i < rows.size(); ++i) {
        const long long id = ds.unit_ids[static_cast<size_t>(rows[i])];
        for (Eigen::Index j = 0; j < attr.per_unit.cols(); ++j) {
            body += std::to_string(id) + ',' + attr.feature_names[static_cast<size_t>(j)] + ',' +
                    csv::format_double(attr.per_unit(static_cast<Eigen::Index>(i), j)) + '\n';
        }
    }

    json mean_abs = json::object();
    const Eigen::VectorXd col_means = attr.per_unit.cwiseAbs().colwise().mean().transpose();
    for (Eigen::Index j = 0; j < col_means.size(); ++j) {
        mean_abs[attr.feature_names[static_cast<size_t>(j)]] = col_means(j);
    }

    std::vector<long long> explained_ids;
    explained_ids.reserve(rows.size());
    for (Eigen::Index r : rows) explained_ids.push_back(ds.unit_ids[static_cast<size_t>(r)]);

    const fs::path dir = ensure_out_dir(out_dir);
    write_file(dir / "shap.csv", body);
    write_json(dir / "shap_meta.json",
               json{{"meta", provenance(config, seed)},
                    {"base_value", attr.base_value},
                    {"log_odds_space", attr.log_odds_space},
                    {"background", std::vector<double>(background.begin(), background.end())},
                    {"feature_names", attr.feature_names},
                    {"unit_ids", explained_ids},
                    {"mean_abs_contribution", mean_abs}});
    write_run_meta(dir, config, seed, "explain", {"shap.csv", "shap_meta.json"});
    std::printf("attributions for %zu units over %zu features (base value %.4f)\n", rows.size(),
                attr.feature_names.size(), attr.base_value);
    return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"iterative causal segmentation pipeline"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_override;
    std::optional<uint64_t> seed_override;
    bool verbose = false;

    for (const char* name : {"synth", "run", "simulate", "evaluate", "explain"}) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "JSON config file")->required();
        sub->add_option("--seed", seed_override, "override the config seed");
        sub->add_option("--out", out_override, "override the config output_dir");
        sub->add_flag("--verbose", verbose, "echo the effective config");
    }
    app.get_subcommand("synth")->description("generate a synthetic dataset with ground truth");
    app.get_subcommand("run")->description("run the causal segmentation loop to convergence");
    app.get_subcommand("simulate")->description("compare promotion selection strategies");
    app.get_subcommand("evaluate")->description("qini curve with a bootstrap band for a score");
    app.get_subcommand("explain")->description("per-feature attributions for the fitted effect");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        const json config = load_config(config_path);
        const uint64_t seed =
            seed_override ? *seed_override : key_or<uint64_t>(config, "", "seed", 0);
        const std::string out_dir = !out_override.empty()
                                        ? out_override
                                        : key_or<std::string>(config, "", "output_dir", "out");
        if (verbose) {
            std::printf("config %s (hash %s), seed %llu, output %s\n", config_path.c_str(),
                        config_hash(config).c_str(), static_cast<unsigned long long>(seed),
                        out_dir.c_str());
        }

        const std::string command = app.get_subcommands().front()->get_name();
        if (command == "synth") return cmd_synth(config, seed, out_dir);
        if (command == "run") return cmd_run(config, seed, out_dir);
        if (command == "simulate") return cmd_simulate(config, seed, out_dir);
        if (command == "evaluate") return cmd_evaluate(config, seed, out_dir);
        return cmd_explain(config, seed, out_dir);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 4;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}

}  // namespace causalseg::cli
