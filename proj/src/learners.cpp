#include "causalseg/learners.hpp"

#include <cmath>
#include <cstdio>

#include "causalseg/errors.hpp"

namespace causalseg {

namespace {

void check_xy(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double lambda,
              const char* who) {
    if (X.rows() != y.size()) {
        throw ValidationError(std::string(who) + ": X has " + std::to_string(X.rows()) +
                              " rows but y has " + std::to_string(y.size()));
    }
    if (X.rows() < 1) throw ValidationError(std::string(who) + ": empty training set");
    if (!X.allFinite() || !y.allFinite()) {
        throw ValidationError(std::string(who) + ": non-finite training values");
    }
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
        throw ValidationError(std::string(who) + ": lambda must be finite and >= 0");
    }
}

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

// log(1 + e^z) without overflow in either tail
double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

}  // namespace

LinearModel fit_ridge(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double lambda) {
    check_xy(X, y, lambda, "fit_ridge");

    const Eigen::Index d = X.cols();
    LinearModel model;
    model.regularization = lambda;
    model.link = Link::identity;
    model.feature_means = X.colwise().mean().transpose();

    if (d == 0) {
        model.weights.resize(0);
        model.intercept = y.mean();
        return model;
    }

    const Eigen::MatrixXd Xc = X.rowwise() - model.feature_means.transpose();
    const Eigen::VectorXd yc = (y.array() - y.mean()).matrix();

    Eigen::MatrixXd A = Xc.transpose() * Xc;
    A.diagonal().array() += lambda;

    Eigen::LDLT<Eigen::MatrixXd> ldlt(A);
    if (lambda == 0.0) {
        // A is PSD; a (near-)zero pivot means X'X is rank deficient and the
        // unpenalized problem has no unique solution.
        const Eigen::VectorXd pivots = ldlt.vectorD();
        const double top = pivots.maxCoeff();
        if (ldlt.info() != Eigen::Success || pivots.minCoeff() <= 1e-12 * std::max(top, 1.0)) {
            throw NumericalError(
                "fit_ridge: singular normal equations with lambda=0; pass lambda > 0");
        }
    }

    model.weights = ldlt.solve(Xc.transpose() * yc);
    model.intercept = y.mean() - model.feature_means.dot(model.weights);
    if (!model.weights.allFinite() || !std::isfinite(model.intercept)) {
        throw NumericalError("fit_ridge: solve produced non-finite coefficients");
    }
    return model;
}

double logistic_penalized_loglik(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                 const Eigen::VectorXd& w, double b, double lambda) {
    const Eigen::VectorXd z = ((X * w).array() + b).matrix();
    double ll = 0.0;
    for (Eigen::Index i = 0; i < z.size(); ++i) ll += y(i) * z(i) - softplus(z(i));
    return ll - 0.5 * lambda * w.squaredNorm();
}

Eigen::VectorXd logistic_gradient(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                  const Eigen::VectorXd& w, double b, double lambda) {
    const Eigen::Index d = X.cols();
    Eigen::VectorXd p(X.rows());
    const Eigen::VectorXd z = ((X * w).array() + b).matrix();
    for (Eigen::Index i = 0; i < z.size(); ++i) p(i) = sigmoid(z(i));

    Eigen::VectorXd g(d + 1);
    g.head(d) = X.transpose() * (y - p) - lambda * w;
    g(d) = (y - p).sum();
    return g;
}

LinearModel fit_logistic(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double lambda,
                         double tol, int max_iter, std::vector<double>* ll_trace) {
    check_xy(X, y, lambda, "fit_logistic");
    if (!(tol > 0.0)) throw ValidationError("fit_logistic: tol must be > 0");
    if (max_iter < 1) throw ValidationError("fit_logistic: max_iter must be >= 1");
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        if (y(i) != 0.0 && y(i) != 1.0) {
            throw ValidationError("fit_logistic: y must be 0/1, found " +
                                  std::to_string(y(i)) + " at row " + std::to_string(i));
        }
    }

    const Eigen::Index n = X.rows();
    const Eigen::Index d = X.cols();
    Eigen::VectorXd w = Eigen::VectorXd::Zero(d);
    double b = 0.0;

    double ll = logistic_penalized_loglik(X, y, w, b, lambda);
    if (ll_trace) {
        ll_trace->clear();
        ll_trace->push_back(ll);
    }

    double gnorm = 0.0;
    for (int iter = 0; iter < max_iter; ++iter) {
        const Eigen::VectorXd g = logistic_gradient(X, y, w, b, lambda);
        gnorm = g.lpNorm<Eigen::Infinity>();
        if (gnorm <= tol) {
            LinearModel model;
            model.weights = w;
            model.intercept = b;
            model.regularization = lambda;
            model.link = Link::logit;
            model.feature_means = X.colwise().mean().transpose();
            return model;
        }

        // Newton direction on the penalized objective. The p(1-p) floor keeps
        // the Hessian positive definite when predictions saturate, so the
        // direction stays an ascent direction and step halving terminates.
        const Eigen::VectorXd z = ((X * w).array() + b).matrix();
        Eigen::VectorXd wt(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double p = sigmoid(z(i));
            wt(i) = std::max(p * (1.0 - p), 1e-10);
        }

        Eigen::MatrixXd H(d + 1, d + 1);
        const Eigen::MatrixXd Xw = (X.array().colwise() * wt.array()).matrix();
        H.topLeftCorner(d, d) = X.transpose() * Xw;
        H.topLeftCorner(d, d).diagonal().array() += lambda;
        H.topRightCorner(d, 1) = Xw.colwise().sum().transpose();
        H.bottomLeftCorner(1, d) = Xw.colwise().sum();
        H(d, d) = wt.sum();

        const Eigen::VectorXd step = Eigen::LDLT<Eigen::MatrixXd>(H).solve(g);
        if (!step.allFinite()) {
            throw ConvergenceError("fit_logistic: non-finite Newton step", gnorm);
        }

        // Near the optimum the true improvement drops below what the
        // objective can resolve in double precision, so demanding a strict
        // increase would shrink t to nothing and freeze the iterate with the
        // gradient still above tol. Accept anything within roundoff of flat.
        const double slack = 1e-12 * (std::abs(ll) + 1.0);
        double t = 1.0;
        Eigen::VectorXd w_next;
        double b_next = b, ll_next = ll;
        while (t >= 1e-12) {
            w_next = w + t * step.head(d);
            b_next = b + t * step(d);
            ll_next = logistic_penalized_loglik(X, y, w_next, b_next, lambda);
            if (ll_next >= ll - slack) break;
            t *= 0.5;
        }
        if (ll_next < ll - slack) {
            // No uphill step along the Newton direction: numerically stalled.
            throw ConvergenceError("fit_logistic: line search stalled", gnorm);
        }
        w = w_next;
        b = b_next;
        ll = ll_next;
        if (ll_trace) ll_trace->push_back(ll);
    }

    char msg[160];
    std::snprintf(msg, sizeof(msg),
                  "fit_logistic: no convergence in %d iterations (last gradient norm %.3e); "
                  "check for separation or raise lambda",
                  max_iter, gnorm);
    throw ConvergenceError(msg, gnorm);
}

Eigen::VectorXd predict(const LinearModel& model, const Eigen::MatrixXd& X) {
    if (X.cols() != model.weights.size()) {
        throw ValidationError("predict: model expects " + std::to_string(model.weights.size()) +
                              " features, got " + std::to_string(X.cols()));
    }
    Eigen::VectorXd z = ((X * model.weights).array() + model.intercept).matrix();
    if (model.link == Link::identity) return z;
    for (Eigen::Index i = 0; i < z.size(); ++i) {
        // clamp away from the closed endpoints so downstream log/odds math is safe
        z(i) = std::min(std::max(sigmoid(z(i)), 1e-15), 1.0 - 1e-15);
    }
    return z;
}

Eigen::MatrixXd expand_features(const Eigen::MatrixXd& X, int degree) {
    if (degree != 1 && degree != 2) {
        throw ValidationError("expand_features: degree must be 1 or 2, got " +
                              std::to_string(degree));
    }
    if (!X.allFinite()) throw ValidationError("expand_features: non-finite input");
    if (degree == 1) return X;

    const Eigen::Index n = X.rows();
    const Eigen::Index d = X.cols();
    Eigen::MatrixXd out(n, 2 * d + d * (d - 1) / 2);
    out.leftCols(d) = X;
    for (Eigen::Index j = 0; j < d; ++j) {
        out.col(d + j) = X.col(j).array().square().matrix();
    }
    Eigen::Index c = 2 * d;
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = i + 1; j < d; ++j) {
            out.col(c++) = (X.col(i).array() * X.col(j).array()).matrix();
        }
    }
    return out;
}

std::vector<std::string> expand_feature_names(const std::vector<std::string>& names,
                                              int degree) {
    if (degree != 1 && degree != 2) {
        throw ValidationError("expand_feature_names: degree must be 1 or 2, got " +
                              std::to_string(degree));
    }
    if (degree == 1) return names;
    std::vector<std::string> out = names;
    for (const auto& n : names) out.push_back(n + "^2");
    for (size_t i = 0; i < names.size(); ++i) {
        for (size_t j = i + 1; j < names.size(); ++j) {
            out.push_back(names[i] + "*" + names[j]);
        }
    }
    return out;
}

nlohmann::json model_to_json(const LinearModel& model) {
    nlohmann::json j;
    j["weights"] = std::vector<double>(model.weights.begin(), model.weights.end());
    j["intercept"] = model.intercept;
    j["regularization"] = model.regularization;
    j["link"] = model.link == Link::identity ? "identity" : "logit";
    j["feature_means"] =
        std::vector<double>(model.feature_means.begin(), model.feature_means.end());
    return j;
}

LinearModel model_from_json(const nlohmann::json& j) {
    for (const char* key : {"weights", "intercept", "regularization", "link", "feature_means"}) {
        if (!j.contains(key)) {
            throw ParseError(std::string("model json missing field '") + key + "'");
        }
    }
    LinearModel model;
    const auto weights = j.at("weights").get<std::vector<double>>();
    const auto means = j.at("feature_means").get<std::vector<double>>();
    model.weights = Eigen::Map<const Eigen::VectorXd>(weights.data(),
                                                      static_cast<Eigen::Index>(weights.size()));
    model.feature_means =
        Eigen::Map<const Eigen::VectorXd>(means.data(), static_cast<Eigen::Index>(means.size()));
    model.intercept = j.at("intercept").get<double>();
    model.regularization = j.at("regularization").get<double>();
    const std::string link = j.at("link").get<std::string>();
    if (link == "identity") {
        model.link = Link::identity;
    } else if (link == "logit") {
        model.link = Link::logit;
    } else {
        throw ParseError("model json: unknown link '" + link + "'");
    }
    if (model.weights.size() != model.feature_means.size()) {
        throw ParseError("model json: weights and feature_means lengths differ");
    }
    return model;
}

}  // namespace causalseg
