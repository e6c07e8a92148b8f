#include "causalseg/synth.hpp"

#include <cmath>
#include <fstream>

#include "causalseg/csv.hpp"
#include "causalseg/errors.hpp"
#include "causalseg/rng.hpp"

namespace causalseg::synth {

namespace {

constexpr double kGMean = 7.0 / 8.0;
const double kGSd = std::sqrt(103.0 / 576.0);
constexpr double kHMean = 5.0 / 8.0;
const double kHSd = std::sqrt(79.0 / 576.0);
// corr(g, h) under the uniform covariate law; Cov(g, h) = 1/64.
const double kGHCorr = (1.0 / 64.0) / (kGSd * kHSd);

double baseline_driver(double x0, double x1) { return x0 + 0.5 * x1 + 0.5 * x0 * x1; }
double independent_driver(double x1, double x2) { return x2 + 0.5 * x1 * x2; }

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

void validate_config(const SynthConfig& cfg) {
    if (cfg.n_units < 10) throw ValidationError("synth: n_units must be >= 10");
    if (cfg.n_features < 3) throw ValidationError("synth: n_features must be >= 3");
    if (!(cfg.noise_sd >= 0.0) || !std::isfinite(cfg.noise_sd)) {
        throw ValidationError("synth: noise_sd must be finite and >= 0");
    }
    if (!std::isfinite(cfg.effect_scale)) throw ValidationError("synth: effect_scale must be finite");
    if (!(cfg.effect_heterogeneity >= 0.0) || !std::isfinite(cfg.effect_heterogeneity)) {
        throw ValidationError("synth: effect_heterogeneity must be finite and >= 0");
    }
    const double rho = cfg.baseline_effect_correlation;
    if (!(rho >= -1.0 && rho <= 1.0)) {
        throw ValidationError("synth: baseline_effect_correlation must be in [-1, 1]");
    }
    if (const auto* r = std::get_if<RandomizedAssignment>(&cfg.assignment)) {
        if (!(r->p > 0.0 && r->p < 1.0)) {
            throw ValidationError("synth: randomized assignment p must be in (0, 1)");
        }
    }
}

std::pair<Dataset, TrueEffects> generate(const SynthConfig& cfg, uint64_t seed) {
    validate_config(cfg);

    const Eigen::Index n = cfg.n_units;
    const Eigen::Index d = cfg.n_features;

    Dataset ds;
    ds.covariates.resize(n, d);
    ds.outcome.resize(n);
    ds.unit_ids.resize(static_cast<size_t>(n));
    ds.treatment.resize(static_cast<size_t>(n));
    ds.covariate_names.resize(static_cast<size_t>(d));
    for (Eigen::Index c = 0; c < d; ++c) {
        ds.covariate_names[static_cast<size_t>(c)] = "x" + std::to_string(c);
    }

    TrueEffects truth;
    truth.true_cate.resize(n);
    truth.true_baseline.resize(n);
    truth.true_assignment_propensity.resize(n);

    Rng cov_rng = Rng::substream(seed, "synth-covariates");
    Rng assign_rng = Rng::substream(seed, "synth-assignment");
    Rng noise_rng = Rng::substream(seed, "synth-noise");

    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index c = 0; c < d; ++c) ds.covariates(i, c) = cov_rng.uniform();
    }

    const double rho = cfg.baseline_effect_correlation;
    const double ortho = std::sqrt(1.0 - rho * rho);
    const double decorr = std::sqrt(1.0 - kGHCorr * kGHCorr);

    for (Eigen::Index i = 0; i < n; ++i) {
        ds.unit_ids[static_cast<size_t>(i)] = i;
        const double x0 = ds.covariates(i, 0);
        const double x1 = ds.covariates(i, 1);
        const double x2 = ds.covariates(i, 2);

        const double gs = (baseline_driver(x0, x1) - kGMean) / kGSd;
        const double hs = (independent_driver(x1, x2) - kHMean) / kHSd;
        const double hp = (hs - kGHCorr * gs) / decorr;
        const double mix = rho * gs + ortho * hp;

        truth.true_baseline(i) = 0.5 + baseline_driver(x0, x1);
        truth.true_cate(i) = cfg.effect_scale * (0.5 + cfg.effect_heterogeneity * mix);

        double e = 0.5;
        if (const auto* r = std::get_if<RandomizedAssignment>(&cfg.assignment)) {
            e = r->p;
        } else {
            e = sigmoid(3.0 * (x0 - 0.5) - 2.0 * (x1 - 0.5));
        }
        truth.true_assignment_propensity(i) = e;
        ds.treatment[static_cast<size_t>(i)] = assign_rng.bernoulli(e) ? 1 : 0;
    }

    for (Eigen::Index i = 0; i < n; ++i) {
        const double noise = cfg.noise_sd > 0.0 ? noise_rng.normal(0.0, cfg.noise_sd) : 0.0;
        ds.outcome(i) = truth.true_baseline(i) +
                        ds.treatment[static_cast<size_t>(i)] * truth.true_cate(i) + noise;
    }

    validate_dataset(ds);
    return {std::move(ds), std::move(truth)};
}

double analytic_mean_cate(const SynthConfig& cfg) { return 0.5 * cfg.effect_scale; }

void save_truth_csv(const Dataset& ds, const TrueEffects& truth, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write file: " + path);
    out << "unit_id,true_cate,true_baseline,true_propensity\n";
    for (Eigen::Index i = 0; i < ds.n(); ++i) {
        out << ds.unit_ids[static_cast<size_t>(i)] << ',' << csv::format_double(truth.true_cate(i))
            << ',' << csv::format_double(truth.true_baseline(i)) << ','
            << csv::format_double(truth.true_assignment_propensity(i)) << '\n';
    }
}

}  // namespace causalseg::synth
