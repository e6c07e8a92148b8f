#pragma once
// CATE estimation via S- and T-learners over the linear base learners, the
// two ATE paths (difference-in-means, mean-CATE with bootstrap SE), and two
// deliberately distinct propensity models:
//
//   purchase propensity    P(Y | X, A=0) — outcome level absent intervention,
//                          fit on control units only; feeds the "propensity"
//                          selection strategy and its diagnostics.
//   assignment propensity  P(A | X) — probability of receiving treatment;
//                          used only for overlap reports and trimming.
//
// Conflating the two is the classic uplift-modeling bug, hence the long names.

#include <Eigen/Dense>
#include <optional>

#include "causalseg/dataset.hpp"
#include "causalseg/learners.hpp"

namespace causalseg {

enum class LearnerKind { t_learner, s_learner };

// A fitted CATE estimator. The feature matrix seen by the base learners is
// [expand_features(features, degree) | extra], where `extra` is an optional
// block of indicator columns (e.g. one-hot segment labels) appended verbatim —
// indicators are not run through the polynomial expansion.
struct CateModel {
    LearnerKind kind = LearnerKind::t_learner;
    int feature_degree = 1;
    bool treatment_interactions = true;  // s-learner: interact A with every feature column
    bool segment_features_included = false;
    Eigen::Index n_extra = 0;  // width of the appended indicator block

    // t-learner arms (valid when kind == t_learner)
    LinearModel control_model;
    LinearModel treated_model;
    // s-learner pooled fit over [Z | A | A*Z] with Z = expanded+extra
    // (valid when kind == s_learner)
    LinearModel pooled_model;
};

enum class AteMethod { diff_in_means, mean_cate_bootstrap };

struct AteEstimate {
    double ate = 0.0;
    double se = 0.0;
    AteMethod method = AteMethod::diff_in_means;
};

// One ridge fit per arm over the expanded features. `extra` rows must align
// with ds; pass segment indicators here when the loop feeds them back.
CateModel fit_t_learner(const Dataset& ds, const Eigen::MatrixXd& features, double lambda,
                        int degree,
                        const std::optional<Eigen::MatrixXd>& extra = std::nullopt);

// Single pooled ridge fit with a treatment column and (by default) treatment
// interactions with every feature column; with interactions disabled the CATE
// collapses to the treatment coefficient, constant across units.
CateModel fit_s_learner(const Dataset& ds, const Eigen::MatrixXd& features, double lambda,
                        int degree, bool treatment_interactions = true,
                        const std::optional<Eigen::MatrixXd>& extra = std::nullopt);

// t-learner: treated prediction minus control prediction. s-learner:
// prediction at A=1 minus prediction at A=0.
Eigen::VectorXd predict_cate(const CateModel& model, const Eigen::MatrixXd& features,
                             const std::optional<Eigen::MatrixXd>& extra = std::nullopt);

// The model-space feature matrix a CateModel's base learners consume:
// [expand_features(features, degree) | extra]. Exposed for attribution code
// that needs to evaluate the fitted arms directly.
Eigen::MatrixXd cate_feature_matrix(const CateModel& model, const Eigen::MatrixXd& features,
                                    const std::optional<Eigen::MatrixXd>& extra = std::nullopt);

// Difference in arm means; se = sqrt(s1^2/n1 + s0^2/n0) with sample variances.
// Requires at least 2 units per arm (the SE is undefined below that).
AteEstimate compute_ate(const Dataset& ds);

// Mean of the per-unit CATE; se = standard deviation of the mean across
// n_boot seeded unit resamples. n_boot < 100 is refused as too unstable.
AteEstimate ate_from_cate(const Eigen::VectorXd& cate, int n_boot, uint64_t seed);

// Purchase propensity: outcome model fit on control rows only. Binary
// control outcomes get a logistic fit; anything else gets ridge.
LinearModel fit_propensity_outcome(const Dataset& ds, const Eigen::MatrixXd& features,
                                   double lambda = kDefaultLogisticLambda);

// Assignment propensity: logistic model of the treatment flag on all rows.
LinearModel fit_assignment_propensity(const Dataset& ds, const Eigen::MatrixXd& features,
                                      double lambda = kDefaultLogisticLambda);

nlohmann::json cate_model_to_json(const CateModel& model);
CateModel cate_model_from_json(const nlohmann::json& j);

}  // namespace causalseg
