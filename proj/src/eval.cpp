#include "causalseg/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "causalseg/errors.hpp"
#include "causalseg/rng.hpp"
#include "causalseg/segmentation.hpp"

namespace causalseg {

namespace {

// indices 0..N-1 ordered by descending key, unit index breaking ties
std::vector<Eigen::Index> descending_order(const Eigen::VectorXd& key) {
    std::vector<Eigen::Index> idx(static_cast<size_t>(key.size()));
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) {
        if (key(a) != key(b)) return key(a) > key(b);
        return a < b;
    });
    return idx;
}

// the shared fraction grid: m/(n_points-1), with the matching prefix count
// floor(m*N/(n_points-1)) computed in integer arithmetic
std::vector<double> fraction_grid(int n_points) {
    std::vector<double> f(static_cast<size_t>(n_points));
    for (int m = 0; m < n_points; ++m) {
        f[static_cast<size_t>(m)] = static_cast<double>(m) / static_cast<double>(n_points - 1);
    }
    return f;
}

Eigen::Index prefix_count(int m, Eigen::Index n, int n_points) {
    return static_cast<Eigen::Index>((static_cast<long long>(m) * static_cast<long long>(n)) /
                                     static_cast<long long>(n_points - 1));
}

void check_n_points(int n_points) {
    if (n_points < 2) {
        throw ValidationError("curve grid needs at least 2 points, got " +
                              std::to_string(n_points));
    }
}

double quantile_type7(std::vector<double>& sorted_inplace, double q) {
    std::sort(sorted_inplace.begin(), sorted_inplace.end());
    const size_t n = sorted_inplace.size();
    const double pos = q * static_cast<double>(n - 1);
    const size_t lo = static_cast<size_t>(pos);
    if (lo + 1 >= n) return sorted_inplace[n - 1];
    const double frac = pos - static_cast<double>(lo);
    return sorted_inplace[lo] + frac * (sorted_inplace[lo + 1] - sorted_inplace[lo]);
}

}  // namespace

std::string strategy_name(Strategy s) {
    switch (s) {
        case Strategy::causal_effect: return "causal_effect";
        case Strategy::propensity: return "propensity";
        case Strategy::kmeans: return "kmeans";
        case Strategy::random: return "random";
    }
    return "unknown";
}

StrategyRanking rank_by_strategy(const Dataset& ds, const Eigen::MatrixXd& features,
                                 const Eigen::VectorXd& cate,
                                 const Eigen::VectorXd& purchase_propensity, Strategy strategy,
                                 int k, uint64_t seed) {
    const Eigen::Index n = ds.n();
    if (cate.size() != n || purchase_propensity.size() != n || features.rows() != n) {
        throw ValidationError("rank_by_strategy: input lengths must all equal N=" +
                              std::to_string(n));
    }

    StrategyRanking ranking;
    ranking.strategy = strategy;
    ranking.seed = seed;

    switch (strategy) {
        case Strategy::causal_effect:
            ranking.order = descending_order(cate);
            break;
        case Strategy::propensity:
            ranking.order = descending_order(purchase_propensity);
            break;
        case Strategy::random: {
            ranking.order.resize(static_cast<size_t>(n));
            std::iota(ranking.order.begin(), ranking.order.end(), 0);
            Rng rng = Rng::substream(seed, "rank-random");
            rng.shuffle(ranking.order);
            break;
        }
        case Strategy::kmeans: {
            const KmeansResult km = kmeans(features, k, derive_seed(seed, "rank-kmeans"));
            std::vector<std::vector<Eigen::Index>> members(static_cast<size_t>(k));
            for (Eigen::Index i = 0; i < n; ++i) {
                members[static_cast<size_t>(km.assignment.labels[static_cast<size_t>(i)])]
                    .push_back(i);
            }
            // clusters ranked by their mean purchase propensity: the strategy
            // a marketer would run off an X-only clustering
            std::vector<std::pair<double, int>> cluster_rank;
            for (int c = 0; c < k; ++c) {
                const auto& m = members[static_cast<size_t>(c)];
                double mean = 0.0;
                for (Eigen::Index i : m) mean += purchase_propensity(i);
                if (!m.empty()) mean /= static_cast<double>(m.size());
                cluster_rank.emplace_back(mean, c);
            }
            std::sort(cluster_rank.begin(), cluster_rank.end(), [](const auto& a, const auto& b) {
                if (a.first != b.first) return a.first > b.first;
                return a.second < b.second;
            });
            Rng within = Rng::substream(seed, "rank-kmeans-within");
            ranking.order.reserve(static_cast<size_t>(n));
            for (const auto& [mean, c] : cluster_rank) {
                auto block = members[static_cast<size_t>(c)];
                within.shuffle(block);  // no preference within a cluster
                ranking.order.insert(ranking.order.end(), block.begin(), block.end());
            }
            break;
        }
    }
    return ranking;
}

UpliftCurve oracle_gain_curve(const StrategyRanking& ranking, const Eigen::VectorXd& true_cate,
                              int n_points) {
    check_n_points(n_points);
    const Eigen::Index n = true_cate.size();
    if (static_cast<Eigen::Index>(ranking.order.size()) != n) {
        throw ValidationError("oracle_gain_curve: ranking covers " +
                              std::to_string(ranking.order.size()) + " units, true_cate has " +
                              std::to_string(n));
    }

    std::vector<double> prefix(static_cast<size_t>(n) + 1, 0.0);
    for (Eigen::Index t = 0; t < n; ++t) {
        prefix[static_cast<size_t>(t) + 1] =
            prefix[static_cast<size_t>(t)] + true_cate(ranking.order[static_cast<size_t>(t)]);
    }

    UpliftCurve curve;
    curve.fractions = fraction_grid(n_points);
    curve.values.resize(static_cast<size_t>(n_points));
    for (int m = 0; m < n_points; ++m) {
        curve.values[static_cast<size_t>(m)] =
            prefix[static_cast<size_t>(prefix_count(m, n, n_points))];
    }
    // pin the endpoints: gain at 0% is exactly zero, and gain at 100% is the
    // unit-order total so every strategy lands on the bitwise same value
    curve.values.front() = 0.0;
    curve.values.back() = true_cate.sum();
    return curve;
}

UpliftCurve qini_curve(const Eigen::VectorXd& outcome, const std::vector<int>& treatment,
                       const Eigen::VectorXd& scores, int n_points) {
    check_n_points(n_points);
    const Eigen::Index n = outcome.size();
    if (static_cast<Eigen::Index>(treatment.size()) != n || scores.size() != n) {
        throw ValidationError("qini_curve: outcome, treatment and scores must share length");
    }
    if (!scores.allFinite() || !outcome.allFinite()) {
        throw ValidationError("qini_curve: non-finite input");
    }
    bool has_treated = false, has_control = false;
    for (int a : treatment) (a == 1 ? has_treated : has_control) = true;
    if (!has_treated || !has_control) {
        throw ValidationError("qini_curve: both arms must be present");
    }

    const std::vector<Eigen::Index> idx = descending_order(scores);
    std::vector<double> q(static_cast<size_t>(n) + 1, 0.0);
    double sum_t = 0.0, sum_c = 0.0;
    long long n_t = 0, n_c = 0;
    for (Eigen::Index t = 0; t < n; ++t) {
        const Eigen::Index u = idx[static_cast<size_t>(t)];
        if (treatment[static_cast<size_t>(u)] == 1) {
            sum_t += outcome(u);
            ++n_t;
        } else {
            sum_c += outcome(u);
            ++n_c;
        }
        // control-scaling term is 0 until the prefix contains control units
        const double scaled_c =
            n_c > 0 ? sum_c * (static_cast<double>(n_t) / static_cast<double>(n_c)) : 0.0;
        q[static_cast<size_t>(t) + 1] = sum_t - scaled_c;
    }

    UpliftCurve curve;
    curve.fractions = fraction_grid(n_points);
    curve.values.resize(static_cast<size_t>(n_points));
    for (int m = 0; m < n_points; ++m) {
        curve.values[static_cast<size_t>(m)] =
            q[static_cast<size_t>(prefix_count(m, n, n_points))];
    }
    return curve;
}

UpliftCurve diagonal_baseline(const UpliftCurve& curve) {
    if (curve.fractions.empty()) throw ValidationError("diagonal_baseline: empty curve");
    UpliftCurve base;
    base.fractions = curve.fractions;
    base.values.resize(curve.values.size());
    const double total = curve.values.back();
    for (size_t m = 0; m < base.values.size(); ++m) {
        base.values[m] = curve.fractions[m] * total;
    }
    return base;
}

double qini_coefficient(const UpliftCurve& curve, const UpliftCurve& random_baseline) {
    if (curve.fractions.size() != random_baseline.fractions.size() ||
        curve.fractions != random_baseline.fractions) {
        throw ValidationError("qini_coefficient: curve and baseline grids differ");
    }
    if (curve.fractions.size() < 2) {
        throw ValidationError("qini_coefficient: need at least 2 grid points");
    }
    double area = 0.0;
    for (size_t m = 1; m < curve.fractions.size(); ++m) {
        const double d0 = curve.values[m - 1] - random_baseline.values[m - 1];
        const double d1 = curve.values[m] - random_baseline.values[m];
        area += 0.5 * (curve.fractions[m] - curve.fractions[m - 1]) * (d0 + d1);
    }
    return area;
}

std::pair<UpliftCurve, UpliftCurve> bootstrap_band(const Dataset& ds,
                                                   const Eigen::VectorXd& scores, double level,
                                                   int n_boot, int n_points, uint64_t seed) {
    check_n_points(n_points);
    if (!(level > 0.0 && level < 1.0)) {
        throw ValidationError("bootstrap_band: level must be in (0, 1)");
    }
    if (n_boot < 200) {
        throw ValidationError("bootstrap_band: n_boot must be >= 200, got " +
                              std::to_string(n_boot));
    }
    const Eigen::Index n = ds.n();
    if (scores.size() != n) throw ValidationError("bootstrap_band: scores length mismatch");

    Eigen::MatrixXd replicate_values(n_boot, n_points);
    for (int r = 0; r < n_boot; ++r) {
        Rng rng = Rng::substream(seed, "qini-band", static_cast<uint64_t>(r));
        std::vector<Eigen::Index> draw(static_cast<size_t>(n));
        bool ok = false;
        for (int attempt = 0; attempt < 100 && !ok; ++attempt) {
            bool has_t = false, has_c = false;
            for (Eigen::Index i = 0; i < n; ++i) {
                const auto pick = static_cast<Eigen::Index>(rng.below(static_cast<uint64_t>(n)));
                draw[static_cast<size_t>(i)] = pick;
                (ds.treatment[static_cast<size_t>(pick)] == 1 ? has_t : has_c) = true;
            }
            ok = has_t && has_c;
        }
        if (!ok) {
            throw ValidationError(
                "bootstrap_band: resampling kept producing single-arm replicates; the smaller "
                "arm is too thin to bootstrap");
        }

        Eigen::VectorXd y(n), s(n);
        std::vector<int> a(static_cast<size_t>(n));
        for (Eigen::Index i = 0; i < n; ++i) {
            const Eigen::Index u = draw[static_cast<size_t>(i)];
            y(i) = ds.outcome(u);
            s(i) = scores(u);
            a[static_cast<size_t>(i)] = ds.treatment[static_cast<size_t>(u)];
        }
        const UpliftCurve c = qini_curve(y, a, s, n_points);
        for (int m = 0; m < n_points; ++m) replicate_values(r, m) = c.values[static_cast<size_t>(m)];
    }

    const double tail = (1.0 - level) / 2.0;
    UpliftCurve lower, upper;
    lower.fractions = fraction_grid(n_points);
    upper.fractions = lower.fractions;
    lower.values.resize(static_cast<size_t>(n_points));
    upper.values.resize(static_cast<size_t>(n_points));
    for (int m = 0; m < n_points; ++m) {
        std::vector<double> col(replicate_values.col(m).begin(), replicate_values.col(m).end());
        lower.values[static_cast<size_t>(m)] = quantile_type7(col, tail);
        upper.values[static_cast<size_t>(m)] = quantile_type7(col, 1.0 - tail);
    }
    return {std::move(lower), std::move(upper)};
}

double correlation(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    if (a.size() != b.size()) throw ValidationError("correlation: length mismatch");
    if (a.size() < 2) throw ValidationError("correlation: need at least 2 points");
    const Eigen::VectorXd ac = (a.array() - a.mean()).matrix();
    const Eigen::VectorXd bc = (b.array() - b.mean()).matrix();
    const double sa = ac.squaredNorm();
    const double sb = bc.squaredNorm();
    if (sa == 0.0 || sb == 0.0) {
        throw ValidationError("correlation: constant input, correlation undefined");
    }
    const double r = ac.dot(bc) / std::sqrt(sa * sb);
    return std::min(1.0, std::max(-1.0, r));
}

SimulationResult simulate_strategies(const Dataset& ds,
                                     const std::optional<synth::TrueEffects>& truth,
                                     const StrategyInputs& inputs, const EvalConfig& cfg,
                                     uint64_t seed) {
    if (inputs.cate.size() != ds.n() || inputs.purchase_propensity.size() != ds.n()) {
        throw ValidationError("simulate_strategies: input lengths must equal N");
    }

    SimulationResult result;
    result.propensity_cate_correlation = correlation(inputs.purchase_propensity, inputs.cate);

    for (Strategy strat : {Strategy::causal_effect, Strategy::propensity, Strategy::kmeans,
                           Strategy::random}) {
        // one substream per strategy so adding/reordering strategies never
        // perturbs another's draw
        const uint64_t strat_seed = derive_seed(seed, "simulate-" + strategy_name(strat));
        const StrategyRanking ranking =
            rank_by_strategy(ds, ds.covariates, inputs.cate, inputs.purchase_propensity, strat,
                             cfg.k_for_kmeans_strategy, strat_seed);

        StrategyEvaluation eval;
        eval.strategy = strat;
        if (truth) {
            eval.curve = oracle_gain_curve(ranking, truth->true_cate, cfg.n_points);
        } else {
            // no ground truth: score units by rank position and read off the
            // empirical Qini curve instead
            Eigen::VectorXd rank_scores(ds.n());
            for (size_t pos = 0; pos < ranking.order.size(); ++pos) {
                rank_scores(ranking.order[pos]) =
                    static_cast<double>(ds.n() - static_cast<Eigen::Index>(pos));
            }
            eval.curve = qini_curve(ds.outcome, ds.treatment, rank_scores, cfg.n_points);
        }
        eval.area_over_random = qini_coefficient(eval.curve, diagonal_baseline(eval.curve));
        result.strategies.push_back(std::move(eval));
    }
    return result;
}

}  // namespace causalseg
