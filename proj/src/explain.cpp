#include "causalseg/explain.hpp"

#include "causalseg/errors.hpp"
#include "causalseg/rng.hpp"

namespace causalseg {

namespace {

std::vector<std::string> default_names(Eigen::Index d, std::vector<std::string> names,
                                       const char* who) {
    if (names.empty()) {
        names.reserve(static_cast<size_t>(d));
        for (Eigen::Index j = 0; j < d; ++j) names.push_back("f" + std::to_string(j));
    } else if (static_cast<Eigen::Index>(names.size()) != d) {
        throw ValidationError(std::string(who) + ": " + std::to_string(names.size()) +
                              " feature names for " + std::to_string(d) + " columns");
    }
    return names;
}

}  // namespace

Attribution shap_linear(const LinearModel& model, const Eigen::MatrixXd& X,
                        const Eigen::VectorXd& background_means,
                        std::vector<std::string> feature_names) {
    const Eigen::Index d = model.dim();
    if (X.cols() != d || background_means.size() != d) {
        throw ValidationError("shap_linear: X and background must match the model's " +
                              std::to_string(d) + " features");
    }

    Attribution attr;
    attr.feature_names = default_names(d, std::move(feature_names), "shap_linear");
    attr.log_odds_space = model.link == Link::logit;
    attr.base_value = model.weights.dot(background_means) + model.intercept;
    attr.per_unit = (X.rowwise() - background_means.transpose()) *
                    model.weights.asDiagonal();
    return attr;
}

Attribution shap_cate(const CateModel& model, const Eigen::MatrixXd& X,
                      const Eigen::VectorXd& background_means,
                      std::vector<std::string> feature_names) {
    if (model.kind == LearnerKind::t_learner) {
        if (model.control_model.link != Link::identity ||
            model.treated_model.link != Link::identity) {
            throw ValidationError("shap_cate: t-learner arms must use the identity link");
        }
        Attribution treated =
            shap_linear(model.treated_model, X, background_means, feature_names);
        const Attribution control =
            shap_linear(model.control_model, X, background_means, std::move(feature_names));
        treated.per_unit -= control.per_unit;
        treated.base_value -= control.base_value;
        return treated;
    }

    // s-learner: the CATE is (pooled at A=1) - (pooled at A=0). The main
    // feature block cancels in that difference, so each feature keeps only
    // its interaction term and the treatment coefficient becomes the base.
    if (model.pooled_model.link != Link::identity) {
        throw ValidationError("shap_cate: s-learner pooled model must use the identity link");
    }
    const Eigen::Index p = X.cols();
    const Eigen::Index expect = model.treatment_interactions ? 2 * p + 1 : p + 1;
    if (model.pooled_model.dim() != expect) {
        throw ValidationError("shap_cate: pooled model has " +
                              std::to_string(model.pooled_model.dim()) +
                              " coefficients, expected " + std::to_string(expect) + " for " +
                              std::to_string(p) + " feature columns");
    }
    if (background_means.size() != p) {
        throw ValidationError("shap_cate: background must match the feature columns");
    }

    Attribution attr;
    attr.feature_names = default_names(p, std::move(feature_names), "shap_cate");
    attr.base_value = model.pooled_model.weights(p);  // treatment coefficient
    if (model.treatment_interactions) {
        attr.per_unit = X * model.pooled_model.weights.tail(p).asDiagonal();
    } else {
        attr.per_unit = Eigen::MatrixXd::Zero(X.rows(), p);
    }
    return attr;
}

Eigen::VectorXd permutation_importance(const LinearModel& model, const Eigen::MatrixXd& X,
                                       const Eigen::VectorXd& y, int n_repeats, uint64_t seed) {
    if (n_repeats < 1) throw ValidationError("permutation_importance: n_repeats must be >= 1");
    if (X.rows() != y.size()) throw ValidationError("permutation_importance: X/y length mismatch");
    const Eigen::Index d = model.dim();
    if (X.cols() != d) {
        throw ValidationError("permutation_importance: X has " + std::to_string(X.cols()) +
                              " columns, model expects " + std::to_string(d));
    }

    const double base_mse = (predict(model, X) - y).squaredNorm() / static_cast<double>(y.size());

    Eigen::VectorXd importance = Eigen::VectorXd::Zero(d);
    Eigen::MatrixXd Xp = X;
    for (Eigen::Index j = 0; j < d; ++j) {
        double total = 0.0;
        for (int r = 0; r < n_repeats; ++r) {
            Rng rng = Rng::substream(seed, "perm-importance",
                                     static_cast<uint64_t>(j) * static_cast<uint64_t>(n_repeats) +
                                         static_cast<uint64_t>(r));
            std::vector<double> col(X.col(j).begin(), X.col(j).end());
            rng.shuffle(col);
            Xp.col(j) = Eigen::Map<const Eigen::VectorXd>(col.data(),
                                                          static_cast<Eigen::Index>(col.size()));
            total += (predict(model, Xp) - y).squaredNorm() / static_cast<double>(y.size()) -
                     base_mse;
        }
        Xp.col(j) = X.col(j);
        importance(j) = total / static_cast<double>(n_repeats);
    }
    return importance;
}

}  // namespace causalseg
