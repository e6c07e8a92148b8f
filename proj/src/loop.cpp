#include "causalseg/loop.hpp"

#include <cmath>
#include <cstdio>

#include "causalseg/errors.hpp"
#include "causalseg/rng.hpp"

namespace causalseg {

namespace {

void validate_loop_config(const LoopConfig& cfg) {
    if (cfg.k_segments < 2) {
        throw ValidationError("loop: k_segments must be >= 2, got " +
                              std::to_string(cfg.k_segments));
    }
    if (cfg.max_iter < 1) throw ValidationError("loop: max_iter must be >= 1");
    if (cfg.degree != 1 && cfg.degree != 2) {
        throw ValidationError("loop: degree must be 1 or 2, got " + std::to_string(cfg.degree));
    }
    if (!(cfg.lambda >= 0.0)) throw ValidationError("loop: lambda must be >= 0");
    if (cfg.ate_path == AteMethod::mean_cate_bootstrap && cfg.n_boot < 100) {
        throw ValidationError("loop: n_boot must be >= 100 for the bootstrap ATE path");
    }
}

SegmentAssignment initial_assignment(const Dataset& ds, const LoopConfig& cfg) {
    switch (cfg.initial_segmentation) {
        case InitialSegmentation::kmeans_on_x:
            return kmeans(ds.covariates, cfg.k_segments, derive_seed(cfg.seed, "loop-init-kmeans"))
                .assignment;
        case InitialSegmentation::random: {
            Rng rng = Rng::substream(cfg.seed, "loop-init-random");
            SegmentAssignment s;
            s.k = cfg.k_segments;
            s.method = SegmentMethod::random;
            s.labels.resize(static_cast<size_t>(ds.n()));
            for (auto& l : s.labels) {
                l = static_cast<int>(rng.below(static_cast<uint64_t>(cfg.k_segments)));
            }
            return s;
        }
        case InitialSegmentation::single_segment: {
            SegmentAssignment s;
            s.k = cfg.k_segments;
            s.method = SegmentMethod::single;
            s.labels.assign(static_cast<size_t>(ds.n()), 0);
            return s;
        }
    }
    throw ValidationError("loop: unknown initial_segmentation");
}

// Raw label disagreement, used only for the first iteration where the
// previous assignment is the (kmeans/random/single) initializer: the public
// segment_movement guards against comparing non-quantile labelings, but the
// stopping rule's first data point is exactly "how many units the first CATE
// segmentation moved away from wherever they started".
long long raw_movement(const SegmentAssignment& prev, const SegmentAssignment& curr) {
    long long moved = 0;
    for (size_t i = 0; i < prev.labels.size(); ++i) {
        if (prev.labels[i] != curr.labels[i]) ++moved;
    }
    return moved;
}

// True when the last 10 movements alternate between exactly two distinct
// values (a,b,a,b,...): the iteration is bouncing between two segmentations.
bool movement_oscillating(const std::vector<ConvergenceRecord>& history) {
    // A 2-cycle of assignments shows up as the movement sequence repeating
    // a pair of values; a symmetric cycle makes the pair equal, so equal
    // values count too. Five consecutive pairs = 10 records.
    const size_t window = 10;
    if (history.size() < window) return false;
    const size_t base = history.size() - window;
    const long long a = history[base].segment_movement;
    const long long b = history[base + 1].segment_movement;
    for (size_t i = 0; i < window; ++i) {
        const long long expected = (i % 2 == 0) ? a : b;
        if (history[base + i].segment_movement != expected) return false;
    }
    return true;
}

}  // namespace

ConvergenceRecord make_convergence_record(int iteration, const AteEstimate& est,
                                          Eigen::Index n_units, long long movement) {
    ConvergenceRecord r;
    r.iteration = iteration;
    r.ate = est.ate;
    r.se = est.se;
    r.se_ate_ratio_pct = est.ate != 0.0 ? 100.0 * est.se / std::abs(est.ate) : 0.0;
    r.movement_precision = est.se * static_cast<double>(n_units);
    r.segment_movement = movement;
    return r;
}

bool movement_converged(const ConvergenceRecord& r) {
    return static_cast<double>(r.segment_movement) <= r.movement_precision;
}

std::string stop_reason_name(StopReason r) {
    switch (r) {
        case StopReason::converged: return "converged";
        case StopReason::max_iterations: return "max_iterations";
        case StopReason::oscillation: return "oscillation";
    }
    return "unknown";
}

RunResult run_iterative_causal_segmentation(const Dataset& ds, const LoopConfig& cfg) {
    validate_dataset(ds);
    validate_loop_config(cfg);

    SegmentAssignment prev = initial_assignment(ds, cfg);

    RunResult result;
    result.history.reserve(static_cast<size_t>(cfg.max_iter));

    for (int iter = 1; iter <= cfg.max_iter; ++iter) {
        // Segment features enter as one-hot columns; a single_segment start
        // has nothing to encode in iteration 1 (the indicator would be a
        // constant column), so it is dropped there.
        const bool feed_segments =
            cfg.include_segment_features &&
            !(iter == 1 && cfg.initial_segmentation == InitialSegmentation::single_segment);
        std::optional<Eigen::MatrixXd> extra;
        if (feed_segments) extra = one_hot_labels(prev);

        CateModel model =
            cfg.learner == LearnerKind::t_learner
                ? fit_t_learner(ds, ds.covariates, cfg.lambda, cfg.degree, extra)
                : fit_s_learner(ds, ds.covariates, cfg.lambda, cfg.degree,
                                cfg.s_learner_interactions, extra);
        Eigen::VectorXd cate = predict_cate(model, ds.covariates, extra);

        const AteEstimate est =
            cfg.ate_path == AteMethod::diff_in_means
                ? compute_ate(ds)
                : ate_from_cate(cate, cfg.n_boot,
                                derive_seed(cfg.seed, "loop-iteration",
                                            static_cast<uint64_t>(iter)));

        SegmentAssignment next = segment_by_cate(cate, cfg.k_segments);
        const long long movement =
            iter == 1 ? raw_movement(prev, next) : segment_movement(prev, next);

        result.history.push_back(make_convergence_record(iter, est, ds.n(), movement));

        result.final_assignment = std::move(next);
        result.final_cate = std::move(cate);
        result.final_model = std::move(model);
        result.final_extra = std::move(extra);

        if (movement_converged(result.history.back())) {
            result.converged = true;
            result.stop_reason = StopReason::converged;
            return result;
        }
        if (movement_oscillating(result.history)) {
            result.converged = false;
            result.stop_reason = StopReason::oscillation;
            return result;
        }
        prev = result.final_assignment;
    }

    result.converged = false;
    result.stop_reason = StopReason::max_iterations;
    return result;
}

std::string render_convergence_table(const std::vector<ConvergenceRecord>& history) {
    if (history.empty()) {
        throw ValidationError("render_convergence_table: empty history");
    }
    std::string out = "ATE  SE  SE-ATE Ratio (%)  Movement Precision  Segment Movement\n";
    char row[160];
    for (const auto& r : history) {
        std::snprintf(row, sizeof(row), "%.3f  %.3f  %.3f  %.3f  %lld\n", r.ate, r.se,
                      r.se_ate_ratio_pct, r.movement_precision, r.segment_movement);
        out += row;
    }
    return out;
}

}  // namespace causalseg
