#pragma once
// Linear base learners: closed-form ridge regression and an IRLS solver for
// L2-penalized logistic regression. These are the only supervised models in
// the project; the causal estimators compose them. Keeping the learners
// linear keeps attributions exact (see explain.hpp) and the whole pipeline
// dependency-light; mild nonlinearity comes from degree-2 feature expansion.

#include <Eigen/Dense>
#include <string>
#include <vector>

#include <json.hpp>

namespace causalseg {

enum class Link { identity, logit };

struct LinearModel {
    Eigen::VectorXd weights;
    double intercept = 0.0;
    double regularization = 0.0;
    Link link = Link::identity;
    // Column means of the training matrix. Retained so attribution code can
    // use the training distribution as its background without re-touching data.
    Eigen::VectorXd feature_means;

    Eigen::Index dim() const { return weights.size(); }
};

// Small default penalties: enough to keep the normal equations invertible
// (ridge) and to rule out runaway weights under perfect separation (logistic)
// without visibly biasing coefficients at the sample sizes we work with.
inline constexpr double kDefaultRidgeLambda = 1e-6;
inline constexpr double kDefaultLogisticLambda = 1e-3;

// Minimizes ||y - Xw - b||^2 + lambda*||w||^2 with the intercept unpenalized,
// via the normal equations on centered data. lambda == 0 is permitted only
// when X'X is nonsingular; otherwise a NumericalError advises lambda > 0.
LinearModel fit_ridge(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                      double lambda = kDefaultRidgeLambda);

// Maximizes the penalized Bernoulli log-likelihood
//   sum_i [ y_i z_i - log(1 + e^{z_i}) ] - lambda/2 * ||w||^2,  z = Xw + b
// by Newton/IRLS with step halving (the penalized log-likelihood is monotone
// non-decreasing across iterations). Converged when ||gradient||_inf <= tol;
// exhausting max_iter throws ConvergenceError carrying the last gradient
// norm. If ll_trace is non-null it receives the log-likelihood after every
// accepted step, starting with the value at the zero initializer.
LinearModel fit_logistic(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                         double lambda = kDefaultLogisticLambda, double tol = 1e-8,
                         int max_iter = 100, std::vector<double>* ll_trace = nullptr);

// identity link -> Xw + b; logit link -> sigmoid(Xw + b), clamped to stay
// strictly inside (0, 1) even when the linear part saturates.
Eigen::VectorXd predict(const LinearModel& model, const Eigen::MatrixXd& X);

// degree 1 -> X unchanged. degree 2 -> [X | squares | pairwise products],
// products in lexicographic index order (0,1), (0,2), ..., (d-2,d-1).
Eigen::MatrixXd expand_features(const Eigen::MatrixXd& X, int degree);
std::vector<std::string> expand_feature_names(const std::vector<std::string>& names,
                                              int degree);

// Objective pieces of fit_logistic, exposed so tests can gradient-check the
// solver against central finite differences. Gradient layout: d weight
// components followed by the intercept component.
double logistic_penalized_loglik(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                 const Eigen::VectorXd& w, double b, double lambda);
Eigen::VectorXd logistic_gradient(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                  const Eigen::VectorXd& w, double b, double lambda);

nlohmann::json model_to_json(const LinearModel& model);
LinearModel model_from_json(const nlohmann::json& j);

}  // namespace causalseg
