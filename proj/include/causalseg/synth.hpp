#pragma once

#include <cstdint>
#include <utility>
#include <variant>

#include "causalseg/dataset.hpp"

namespace causalseg::synth {

// Seeded synthetic world with known ground truth, used as the oracle for the
// estimator and strategy-comparison suites.
//
// Covariates are i.i.d. uniform on [0,1]^d. With rho = baseline_effect_correlation
// and standardized drivers
//
//   g(x) = x0 + 0.5*x1 + 0.5*x0*x1          E[g] = 7/8,  Var[g] = 103/576
//   h(x) = x2 + 0.5*x1*x2                   E[h] = 5/8,  Var[h] =  79/576
//   gs = (g - E[g]) / sd(g),  hs = (h - E[h]) / sd(h)
//   hp = (hs - c*gs) / sqrt(1 - c^2)        c = Cov(g,h)/(sd(g) sd(h)) = (1/64)/(sd(g) sd(h))
//
// the world is
//
//   baseline   mu0(x) = 0.5 + g(x)
//   effect     tau(x) = effect_scale * (0.5 + effect_heterogeneity * mix(x))
//              mix(x) = rho * gs(x) + sqrt(1 - rho^2) * hp(x)
//   outcome    Y = mu0(x) + A * tau(x) + Normal(0, noise_sd)
//
// mix has mean 0, unit variance, and corr(mu0, tau) = rho under the covariate
// law, so the correlation knob is exact rather than approximate. E[tau] is
// 0.5 * effect_scale; effect_heterogeneity = 0 produces a constant-effect
// world. Assignment is either Bernoulli(p) or the confounded logistic
//   e(x) = sigmoid(3*(x0 - 0.5) - 2*(x1 - 0.5)),  range (0.076, 0.924).
//
// Streams: covariates, assignment and noise are drawn from independent named
// substreams of the seed, so e.g. changing noise_sd never changes X or A.

struct RandomizedAssignment {
    double p = 0.5;
};
struct ConfoundedAssignment {};

using AssignmentPolicy = std::variant<RandomizedAssignment, ConfoundedAssignment>;

struct SynthConfig {
    long n_units = 20000;
    int n_features = 5;  // >= 3
    double noise_sd = 0.5;
    double effect_scale = 1.0;
    double effect_heterogeneity = 0.3;          // sd of tau at effect_scale 1
    double baseline_effect_correlation = -0.5;  // in [-1, 1]
    AssignmentPolicy assignment = RandomizedAssignment{};
};

struct TrueEffects {
    Eigen::VectorXd true_cate;      // tau(x)
    Eigen::VectorXd true_baseline;  // mu0(x)
    Eigen::VectorXd true_assignment_propensity;
};

void validate_config(const SynthConfig& cfg);

// Deterministic given (cfg, seed).
std::pair<Dataset, TrueEffects> generate(const SynthConfig& cfg, uint64_t seed);

// Analytic population mean of tau under the covariate law.
double analytic_mean_cate(const SynthConfig& cfg);

void save_truth_csv(const Dataset& ds, const TrueEffects& truth, const std::string& path);

}  // namespace causalseg::synth
