#pragma once
// Exact per-feature attributions for the linear models. For a linear model
// under feature independence the Shapley value has a closed form,
// phi_j = w_j * (x_j - background_j), so no sampling approximation is needed
// and local accuracy (base + sum of contributions = prediction) holds to
// rounding error. Explaining the CATE model also explains the segmentation,
// since segments are a function of CATE alone.

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "causalseg/causal.hpp"
#include "causalseg/learners.hpp"

namespace causalseg {

struct Attribution {
    Eigen::MatrixXd per_unit;  // N x d feature contributions
    double base_value = 0.0;   // prediction at the background point
    std::vector<std::string> feature_names;
    // logit-link models are attributed on the linear predictor: base and
    // contributions sum to log-odds, not probability
    bool log_odds_space = false;
};

// phi_j = w_j * (x_j - background_mean_j); base_value is the model value at
// the background point. Pass feature_names to label columns (defaults to
// f0..f{d-1}).
Attribution shap_linear(const LinearModel& model, const Eigen::MatrixXd& X,
                        const Eigen::VectorXd& background_means,
                        std::vector<std::string> feature_names = {});

// Attributions for the estimated treatment effect, over the model-space
// feature matrix X (see cate_feature_matrix). t-learner: elementwise
// difference of the two arms' attributions against the shared background.
// s-learner: difference of the two counterfactual inputs — per-feature
// contribution w_interaction_j * x_j with the bare treatment coefficient as
// the base value (zero contributions when interactions were disabled).
Attribution shap_cate(const CateModel& model, const Eigen::MatrixXd& X,
                      const Eigen::VectorXd& background_means,
                      std::vector<std::string> feature_names = {});

// Mean increase in squared error when each feature column is independently
// permuted, averaged over n_repeats seeded shuffles. A cheap global
// importance to complement the per-unit attributions.
Eigen::VectorXd permutation_importance(const LinearModel& model, const Eigen::MatrixXd& X,
                                       const Eigen::VectorXd& y, int n_repeats, uint64_t seed);

}  // namespace causalseg
