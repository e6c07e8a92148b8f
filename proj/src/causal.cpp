#include "causalseg/causal.hpp"

#include <cmath>

#include "causalseg/errors.hpp"
#include "causalseg/rng.hpp"

namespace causalseg {

namespace {

// [expand_features(features, degree) | extra]; the indicator block skips the
// polynomial expansion (squares/products of one-hot columns are degenerate).
Eigen::MatrixXd build_design(const Eigen::MatrixXd& features, int degree,
                             const std::optional<Eigen::MatrixXd>& extra) {
    Eigen::MatrixXd Z = expand_features(features, degree);
    if (!extra) return Z;
    if (extra->rows() != features.rows()) {
        throw ValidationError("cate model: extra feature block has " +
                              std::to_string(extra->rows()) + " rows, expected " +
                              std::to_string(features.rows()));
    }
    Eigen::MatrixXd out(Z.rows(), Z.cols() + extra->cols());
    out << Z, *extra;
    return out;
}

void check_feature_rows(const Dataset& ds, const Eigen::MatrixXd& features) {
    if (features.rows() != ds.n()) {
        throw ValidationError("cate model: features have " + std::to_string(features.rows()) +
                              " rows but dataset has " + std::to_string(ds.n()));
    }
}

Eigen::MatrixXd select_rows(const Eigen::MatrixXd& M, const std::vector<Eigen::Index>& rows) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), M.cols());
    for (size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = M.row(rows[i]);
    return out;
}

Eigen::VectorXd select_elems(const Eigen::VectorXd& v, const std::vector<Eigen::Index>& rows) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(rows.size()));
    for (size_t i = 0; i < rows.size(); ++i) out(static_cast<Eigen::Index>(i)) = v(rows[i]);
    return out;
}

// mean and unbiased sample variance
std::pair<double, double> mean_var(const Eigen::VectorXd& v) {
    const double m = v.mean();
    const double ss = (v.array() - m).square().sum();
    return {m, ss / static_cast<double>(v.size() - 1)};
}

}  // namespace

CateModel fit_t_learner(const Dataset& ds, const Eigen::MatrixXd& features, double lambda,
                        int degree, const std::optional<Eigen::MatrixXd>& extra) {
    check_feature_rows(ds, features);
    const auto control = ds.arm_indices(0);
    const auto treated = ds.arm_indices(1);
    if (control.empty() || treated.empty()) {
        throw ValidationError("fit_t_learner: both arms must be non-empty");
    }

    const Eigen::MatrixXd Z = build_design(features, degree, extra);
    CateModel model;
    model.kind = LearnerKind::t_learner;
    model.feature_degree = degree;
    model.segment_features_included = extra.has_value();
    model.n_extra = extra ? extra->cols() : 0;
    model.control_model = fit_ridge(select_rows(Z, control), select_elems(ds.outcome, control),
                                    lambda);
    model.treated_model = fit_ridge(select_rows(Z, treated), select_elems(ds.outcome, treated),
                                    lambda);
    return model;
}

CateModel fit_s_learner(const Dataset& ds, const Eigen::MatrixXd& features, double lambda,
                        int degree, bool treatment_interactions,
                        const std::optional<Eigen::MatrixXd>& extra) {
    check_feature_rows(ds, features);
    const Eigen::MatrixXd Z = build_design(features, degree, extra);
    const Eigen::Index n = Z.rows();
    const Eigen::Index p = Z.cols();

    Eigen::VectorXd a(n);
    for (Eigen::Index i = 0; i < n; ++i) a(i) = ds.treatment[static_cast<size_t>(i)];

    Eigen::MatrixXd design(n, treatment_interactions ? 2 * p + 1 : p + 1);
    design.leftCols(p) = Z;
    design.col(p) = a;
    if (treatment_interactions) {
        design.rightCols(p) = (Z.array().colwise() * a.array()).matrix();
    }

    CateModel model;
    model.kind = LearnerKind::s_learner;
    model.feature_degree = degree;
    model.treatment_interactions = treatment_interactions;
    model.segment_features_included = extra.has_value();
    model.n_extra = extra ? extra->cols() : 0;
    model.pooled_model = fit_ridge(design, ds.outcome, lambda);
    return model;
}

Eigen::VectorXd predict_cate(const CateModel& model, const Eigen::MatrixXd& features,
                             const std::optional<Eigen::MatrixXd>& extra) {
    if ((extra ? extra->cols() : 0) != model.n_extra) {
        throw ValidationError("predict_cate: model was fit with " +
                              std::to_string(model.n_extra) + " extra columns, got " +
                              std::to_string(extra ? extra->cols() : 0));
    }
    const Eigen::MatrixXd Z = build_design(features, model.feature_degree, extra);

    if (model.kind == LearnerKind::t_learner) {
        return predict(model.treated_model, Z) - predict(model.control_model, Z);
    }

    // The counterfactual designs [Z|1|Z] and [Z|0|0] share the Z block, so the
    // prediction difference reduces to the treatment coefficient plus the
    // interaction terms. Computing that directly instead of differencing two
    // full predictions keeps the no-interaction effect exactly constant across
    // units (no per-unit roundoff left over from cancelling the Z·w part).
    const Eigen::Index n = Z.rows();
    const Eigen::Index p = Z.cols();
    const double treat_coef = model.pooled_model.weights(p);
    if (!model.treatment_interactions) {
        return Eigen::VectorXd::Constant(n, treat_coef);
    }
    return ((Z * model.pooled_model.weights.tail(p)).array() + treat_coef).matrix();
}

Eigen::MatrixXd cate_feature_matrix(const CateModel& model, const Eigen::MatrixXd& features,
                                    const std::optional<Eigen::MatrixXd>& extra) {
    if ((extra ? extra->cols() : 0) != model.n_extra) {
        throw ValidationError("cate_feature_matrix: model was fit with " +
                              std::to_string(model.n_extra) + " extra columns, got " +
                              std::to_string(extra ? extra->cols() : 0));
    }
    return build_design(features, model.feature_degree, extra);
}

AteEstimate compute_ate(const Dataset& ds) {
    const auto control = ds.arm_indices(0);
    const auto treated = ds.arm_indices(1);
    if (control.size() < 2 || treated.size() < 2) {
        throw ValidationError("compute_ate: each arm needs at least 2 units for an SE");
    }
    const auto [m1, v1] = mean_var(select_elems(ds.outcome, treated));
    const auto [m0, v0] = mean_var(select_elems(ds.outcome, control));

    AteEstimate est;
    est.method = AteMethod::diff_in_means;
    est.ate = m1 - m0;
    est.se = std::sqrt(v1 / static_cast<double>(treated.size()) +
                       v0 / static_cast<double>(control.size()));
    return est;
}

AteEstimate ate_from_cate(const Eigen::VectorXd& cate, int n_boot, uint64_t seed) {
    if (cate.size() < 2) throw ValidationError("ate_from_cate: need at least 2 units");
    if (n_boot < 100) {
        throw ValidationError("ate_from_cate: n_boot must be >= 100 for a stable SE, got " +
                              std::to_string(n_boot));
    }
    if (!cate.allFinite()) throw ValidationError("ate_from_cate: non-finite cate values");

    const Eigen::Index n = cate.size();
    Eigen::VectorXd boot_means(n_boot);
    for (int r = 0; r < n_boot; ++r) {
        // one substream per replicate: results don't depend on evaluation order
        Rng rng = Rng::substream(seed, "ate-bootstrap", static_cast<uint64_t>(r));
        double sum = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            sum += cate(static_cast<Eigen::Index>(rng.below(static_cast<uint64_t>(n))));
        }
        boot_means(r) = sum / static_cast<double>(n);
    }

    AteEstimate est;
    est.method = AteMethod::mean_cate_bootstrap;
    est.ate = cate.mean();
    // Constant cate gives bitwise-identical replicate means; report se = 0
    // exactly rather than the ~1e-16 residue the variance formula leaves.
    est.se = boot_means.maxCoeff() == boot_means.minCoeff()
                 ? 0.0
                 : std::sqrt(mean_var(boot_means).second);
    return est;
}

LinearModel fit_propensity_outcome(const Dataset& ds, const Eigen::MatrixXd& features,
                                   double lambda) {
    check_feature_rows(ds, features);
    const auto control = ds.arm_indices(0);
    if (control.empty()) throw ValidationError("fit_propensity_outcome: empty control arm");

    const Eigen::MatrixXd Xc = select_rows(features, control);
    const Eigen::VectorXd yc = select_elems(ds.outcome, control);

    bool binary = true;
    for (Eigen::Index i = 0; i < yc.size(); ++i) {
        if (yc(i) != 0.0 && yc(i) != 1.0) {
            binary = false;
            break;
        }
    }
    return binary ? fit_logistic(Xc, yc, lambda) : fit_ridge(Xc, yc, lambda);
}

LinearModel fit_assignment_propensity(const Dataset& ds, const Eigen::MatrixXd& features,
                                      double lambda) {
    check_feature_rows(ds, features);
    Eigen::VectorXd a(ds.n());
    for (Eigen::Index i = 0; i < ds.n(); ++i) a(i) = ds.treatment[static_cast<size_t>(i)];
    return fit_logistic(features, a, lambda);
}

nlohmann::json cate_model_to_json(const CateModel& model) {
    nlohmann::json j;
    j["kind"] = model.kind == LearnerKind::t_learner ? "t_learner" : "s_learner";
    j["feature_degree"] = model.feature_degree;
    j["treatment_interactions"] = model.treatment_interactions;
    j["segment_features_included"] = model.segment_features_included;
    j["n_extra"] = static_cast<long long>(model.n_extra);
    if (model.kind == LearnerKind::t_learner) {
        j["control_model"] = model_to_json(model.control_model);
        j["treated_model"] = model_to_json(model.treated_model);
    } else {
        j["pooled_model"] = model_to_json(model.pooled_model);
    }
    return j;
}

CateModel cate_model_from_json(const nlohmann::json& j) {
    for (const char* key :
         {"kind", "feature_degree", "treatment_interactions", "segment_features_included",
          "n_extra"}) {
        if (!j.contains(key)) {
            throw ParseError(std::string("cate model json missing field '") + key + "'");
        }
    }
    CateModel model;
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "t_learner") {
        model.kind = LearnerKind::t_learner;
    } else if (kind == "s_learner") {
        model.kind = LearnerKind::s_learner;
    } else {
        throw ParseError("cate model json: unknown kind '" + kind + "'");
    }
    model.feature_degree = j.at("feature_degree").get<int>();
    model.treatment_interactions = j.at("treatment_interactions").get<bool>();
    model.segment_features_included = j.at("segment_features_included").get<bool>();
    model.n_extra = j.at("n_extra").get<long long>();
    if (model.kind == LearnerKind::t_learner) {
        model.control_model = model_from_json(j.at("control_model"));
        model.treated_model = model_from_json(j.at("treated_model"));
    } else {
        model.pooled_model = model_from_json(j.at("pooled_model"));
    }
    return model;
}

}  // namespace causalseg
