#pragma once
// The coupled causal/segmentation fixed-point iteration: fit a CATE model
// with the current segmentation as extra features, re-segment by CATE
// quantiles, and stop once the number of units changing segment falls to or
// below the movement precision (ATE standard error x population size).

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "causalseg/causal.hpp"
#include "causalseg/dataset.hpp"
#include "causalseg/segmentation.hpp"

namespace causalseg {

enum class InitialSegmentation { kmeans_on_x, random, single_segment };

struct LoopConfig {
    int k_segments = 3;
    LearnerKind learner = LearnerKind::t_learner;
    int degree = 2;
    double lambda = kDefaultRidgeLambda;
    AteMethod ate_path = AteMethod::mean_cate_bootstrap;
    int n_boot = 500;  // bootstrap replicates for the mean-CATE SE
    int max_iter = 50;
    uint64_t seed = 0;
    // kmeans_on_x mirrors starting from existing behavioral segments;
    // single_segment is the uncoupled baseline (no segment features at all
    // in iteration 1).
    InitialSegmentation initial_segmentation = InitialSegmentation::kmeans_on_x;
    // Ablation switch: with this off the CATE model never sees segment
    // labels, so iteration 2 reproduces iteration 1 exactly and the loop
    // stops there — useful to isolate what the coupling contributes.
    bool include_segment_features = true;
    bool s_learner_interactions = true;  // forwarded to fit_s_learner
};

struct ConvergenceRecord {
    int iteration = 0;  // 1-based
    double ate = 0.0;
    double se = 0.0;
    double se_ate_ratio_pct = 0.0;    // 100*se/|ate|; 0 when ate == 0
    double movement_precision = 0.0;  // se * N
    long long segment_movement = 0;
};

ConvergenceRecord make_convergence_record(int iteration, const AteEstimate& est,
                                          Eigen::Index n_units, long long movement);

// The stopping predicate, inclusive at the boundary (covers the exact
// fixed point se=0, movement=0).
bool movement_converged(const ConvergenceRecord& r);

enum class StopReason { converged, max_iterations, oscillation };

std::string stop_reason_name(StopReason r);

struct RunResult {
    SegmentAssignment final_assignment;  // cate_quantile over the last CATE
    std::vector<ConvergenceRecord> history;
    bool converged = false;
    Eigen::VectorXd final_cate;
    CateModel final_model;
    // the segment indicator block the final model was fit with (from the
    // previous iteration's assignment); attribution code needs it to rebuild
    // the model-space feature matrix
    std::optional<Eigen::MatrixXd> final_extra;
    StopReason stop_reason = StopReason::max_iterations;
};

// Deterministic given (ds, cfg). Non-convergence is a result, not an error:
// the history is the diagnostic product. A repeating 2-cycle of movements
// (5 consecutive pairs) aborts early with stop_reason == oscillation, since
// nothing guarantees the iteration contracts.
RunResult run_iterative_causal_segmentation(const Dataset& ds, const LoopConfig& cfg);

// One row per record: ATE, SE, SE-ATE Ratio (%), Movement Precision at three
// decimals, Segment Movement as a count; columns joined by two spaces.
std::string render_convergence_table(const std::vector<ConvergenceRecord>& history);

}  // namespace causalseg
