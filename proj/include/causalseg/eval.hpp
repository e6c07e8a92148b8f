#pragma once
// Promotion-strategy simulation and uplift evaluation: ranked selection
// curves (oracle gain when ground truth is available, Qini otherwise),
// areas over the random baseline, seeded bootstrap confidence bands, and
// the purchase-propensity vs CATE correlation diagnostic.

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "causalseg/dataset.hpp"
#include "causalseg/synth.hpp"

namespace causalseg {

struct UpliftCurve {
    std::vector<double> fractions;  // ascending, fractions[0]=0, back=1
    std::vector<double> values;     // cumulative gain / Qini value; values[0]=0
};

enum class Strategy { causal_effect, propensity, kmeans, random };

std::string strategy_name(Strategy s);

struct StrategyRanking {
    Strategy strategy = Strategy::random;
    std::vector<Eigen::Index> order;  // unit indices, most preferred first
    uint64_t seed = 0;
};

// causal_effect: descending estimated CATE. propensity: descending purchase
// propensity — deliberately uplift-blind, the strategy the simulation is
// designed to indict. kmeans: cluster on features, clusters ordered by
// descending mean purchase propensity, seeded shuffle within each cluster.
// random: seeded shuffle. Ties broken by unit index (stable).
StrategyRanking rank_by_strategy(const Dataset& ds, const Eigen::MatrixXd& features,
                                 const Eigen::VectorXd& cate,
                                 const Eigen::VectorXd& purchase_propensity, Strategy strategy,
                                 int k, uint64_t seed);

// Cumulative true-effect gain when treating the top floor(p*N) units of the
// ranking. Endpoints are pinned: value(0)=0 and value(1)=sum(true_cate)
// accumulated in unit-index order, so every strategy shares the bitwise
// identical endpoint.
UpliftCurve oracle_gain_curve(const StrategyRanking& ranking, const Eigen::VectorXd& true_cate,
                              int n_points);

// Qini curve over a score ranking (descending): at prefix size t,
//   Q(t) = sum_{treated in top t} Y  -  sum_{control in top t} Y * nT(t)/nC(t)
// with the control scaling term taken as 0 while the prefix holds no control
// units (the only finite convention for early prefixes).
UpliftCurve qini_curve(const Eigen::VectorXd& outcome, const std::vector<int>& treatment,
                       const Eigen::VectorXd& scores, int n_points);

// Straight line from (0,0) to (1, curve end value): the expectation of a
// uniformly random ranking, used as the baseline for areas.
UpliftCurve diagonal_baseline(const UpliftCurve& curve);

// Trapezoidal area between curve and baseline (positive above).
double qini_coefficient(const UpliftCurve& curve, const UpliftCurve& random_baseline);

// Pointwise empirical-quantile band for the Qini curve under unit resampling.
// Replicates drawing an empty arm are redrawn (bounded retries). level is the
// two-sided coverage, e.g. 0.90 -> the 5% and 95% quantiles.
std::pair<UpliftCurve, UpliftCurve> bootstrap_band(const Dataset& ds,
                                                   const Eigen::VectorXd& scores,
                                                   double level, int n_boot, int n_points,
                                                   uint64_t seed);

// Pearson r; refuses constant input (undefined correlation).
double correlation(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

struct StrategyInputs {
    Eigen::VectorXd cate;                 // estimated per-unit effect
    Eigen::VectorXd purchase_propensity;  // P(Y | X, A=0) predictions
};

struct EvalConfig {
    int n_points = 101;            // curve grid: 0%, 1%, ..., 100%
    int k_for_kmeans_strategy = 3;
};

struct StrategyEvaluation {
    Strategy strategy = Strategy::random;
    UpliftCurve curve;
    double area_over_random = 0.0;  // trapezoid area over the diagonal baseline
};

struct SimulationResult {
    std::vector<StrategyEvaluation> strategies;  // fixed order: causal, propensity, kmeans, random
    double propensity_cate_correlation = 0.0;    // Pearson r of the two inputs
};

// One curve per selection strategy on a shared grid. With truth present
// (synthetic data) curves are oracle gain over true_cate; without it they
// fall back to empirical Qini curves over the observed outcomes.
SimulationResult simulate_strategies(const Dataset& ds,
                                     const std::optional<synth::TrueEffects>& truth,
                                     const StrategyInputs& inputs, const EvalConfig& cfg,
                                     uint64_t seed);

}  // namespace causalseg
