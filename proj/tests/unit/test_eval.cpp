#include <doctest.h>

#include <algorithm>
#include <causalseg/errors.hpp>
#include <causalseg/eval.hpp>
#include <causalseg/rng.hpp>
#include <causalseg/synth.hpp>
#include <cmath>
#include <numeric>
#include <vector>

using namespace causalseg;

namespace {

// minimal but valid dataset shell for ranking/curve calls that only need
// lengths, outcomes and arms
Dataset eval_dataset(Eigen::Index n, uint64_t seed) {
    Rng rng(seed);
    Dataset ds;
    ds.covariates.resize(n, 2);
    ds.outcome.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        ds.unit_ids.push_back(i);
        ds.covariates(i, 0) = rng.normal();
        ds.covariates(i, 1) = rng.normal();
        ds.treatment.push_back(rng.bernoulli(0.5) ? 1 : 0);
        ds.outcome(i) = rng.bernoulli(0.3) ? 1.0 : 0.0;
    }
    ds.covariate_names = {"x0", "x1"};
    return ds;
}

Eigen::VectorXd to_vec(std::initializer_list<double> xs) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (double x : xs) v(i++) = x;
    return v;
}

}  // namespace

TEST_CASE("causal ranking sorts by descending estimated effect") {
    const Dataset ds = eval_dataset(4, 81);
    const Eigen::VectorXd cate = to_vec({1.0, 0.0, 2.0, -1.0});
    const Eigen::VectorXd prop = to_vec({0.1, 0.2, 0.3, 0.4});

    const StrategyRanking r =
        rank_by_strategy(ds, ds.covariates, cate, prop, Strategy::causal_effect, 2, 1);
    CHECK(r.order == std::vector<Eigen::Index>{2, 0, 1, 3});
    CHECK(r.strategy == Strategy::causal_effect);
}

TEST_CASE("propensity ranking is descending with stable tie-breaks") {
    const Dataset ds = eval_dataset(3, 82);
    const Eigen::VectorXd cate = to_vec({0.0, 0.0, 0.0});
    const Eigen::VectorXd prop = to_vec({0.5, 0.7, 0.5});

    const StrategyRanking r =
        rank_by_strategy(ds, ds.covariates, cate, prop, Strategy::propensity, 2, 1);
    // the two 0.5 ties resolve by unit index
    CHECK(r.order == std::vector<Eigen::Index>{1, 0, 2});
}

TEST_CASE("random ranking is a seeded permutation") {
    const Dataset ds = eval_dataset(50, 83);
    const Eigen::VectorXd cate = Eigen::VectorXd::LinSpaced(50, 0.0, 1.0);
    const Eigen::VectorXd prop = Eigen::VectorXd::LinSpaced(50, 1.0, 2.0);

    const auto r1 = rank_by_strategy(ds, ds.covariates, cate, prop, Strategy::random, 2, 9);
    const auto r2 = rank_by_strategy(ds, ds.covariates, cate, prop, Strategy::random, 2, 9);
    const auto r3 = rank_by_strategy(ds, ds.covariates, cate, prop, Strategy::random, 2, 10);

    CHECK(r1.order == r2.order);
    CHECK(r1.order != r3.order);

    std::vector<Eigen::Index> sorted = r1.order;
    std::sort(sorted.begin(), sorted.end());
    std::vector<Eigen::Index> iota(50);
    std::iota(iota.begin(), iota.end(), 0);
    CHECK(sorted == iota);  // every unit exactly once
}

TEST_CASE("kmeans ranking orders whole clusters by mean purchase propensity") {
    // two far-apart feature clusters; the low-feature cluster buys more
    Dataset ds;
    const Eigen::Index n = 20;
    ds.covariates.resize(n, 1);
    ds.outcome = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd cate = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd prop(n);
    Rng rng(84);
    for (Eigen::Index i = 0; i < n; ++i) {
        ds.unit_ids.push_back(i);
        ds.treatment.push_back(i % 2 == 0 ? 1 : 0);
        const bool low = i < 10;
        ds.covariates(i, 0) = (low ? 0.0 : 10.0) + rng.uniform(-0.5, 0.5);
        prop(i) = low ? 0.9 : 0.1;
    }
    ds.covariate_names = {"x"};

    const StrategyRanking r =
        rank_by_strategy(ds, ds.covariates, cate, prop, Strategy::kmeans, 2, 3);
    // all ten high-propensity units come before any low-propensity unit
    for (size_t pos = 0; pos < 10; ++pos) CHECK(r.order[pos] < 10);
    for (size_t pos = 10; pos < 20; ++pos) CHECK(r.order[pos] >= 10);
}

TEST_CASE("ranking inputs must share the dataset length") {
    const Dataset ds = eval_dataset(5, 85);
    const Eigen::VectorXd four = Eigen::VectorXd::Zero(4);
    const Eigen::VectorXd five = Eigen::VectorXd::Zero(5);
    CHECK_THROWS_AS(
        rank_by_strategy(ds, ds.covariates, four, five, Strategy::causal_effect, 2, 1),
        ValidationError);
    CHECK_THROWS_AS(
        rank_by_strategy(ds, ds.covariates, five, four, Strategy::propensity, 2, 1),
        ValidationError);
}

TEST_CASE("oracle gain curve accumulates true effect down the ranking") {
    StrategyRanking ranking;
    ranking.order = {2, 0, 1, 3};
    const Eigen::VectorXd true_cate = to_vec({1.0, 0.0, 2.0, -1.0});

    const UpliftCurve c = oracle_gain_curve(ranking, true_cate, 5);
    CHECK(c.fractions == std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0});
    CHECK(c.values == std::vector<double>{0.0, 2.0, 3.0, 3.0, 2.0});
}

TEST_CASE("gain curve endpoints are pinned across strategies") {
    const Dataset ds = eval_dataset(50, 86);
    Rng rng(87);
    Eigen::VectorXd true_cate(50), cate(50), prop(50);
    for (Eigen::Index i = 0; i < 50; ++i) {
        true_cate(i) = rng.normal(0.3, 1.0);  // messy non-dyadic values
        cate(i) = true_cate(i) + rng.normal(0.0, 0.5);
        prop(i) = rng.uniform();
    }

    std::vector<double> ends;
    for (Strategy s :
         {Strategy::causal_effect, Strategy::propensity, Strategy::kmeans, Strategy::random}) {
        const auto ranking = rank_by_strategy(ds, ds.covariates, cate, prop, s, 3, 5);
        const UpliftCurve c = oracle_gain_curve(ranking, true_cate, 21);
        CHECK(c.values.front() == 0.0);
        ends.push_back(c.values.back());
    }
    // every strategy treats everyone at 100%, so the endpoint is the same
    // total, bitwise, no matter the order the curve visited units in
    CHECK(ends[0] == ends[1]);
    CHECK(ends[0] == ends[2]);
    CHECK(ends[0] == ends[3]);
    CHECK(ends[0] == true_cate.sum());
}

TEST_CASE("the causal oracle curve is concave") {
    StrategyRanking ranking;
    Rng rng(88);
    Eigen::VectorXd true_cate(100);
    for (Eigen::Index i = 0; i < 100; ++i) true_cate(i) = rng.normal(0.2, 1.0);

    // descending true effect = the best possible ordering
    std::vector<Eigen::Index> order(100);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](Eigen::Index a, Eigen::Index b) { return true_cate(a) > true_cate(b); });
    ranking.order = order;

    const UpliftCurve c = oracle_gain_curve(ranking, true_cate, 11);  // 10 units per step
    for (size_t m = 2; m < c.values.size(); ++m) {
        const double prev_step = c.values[m - 1] - c.values[m - 2];
        const double step = c.values[m] - c.values[m - 1];
        CHECK(step <= prev_step + 1e-12);
    }
}

TEST_CASE("oracle gain curve validates its inputs") {
    StrategyRanking ranking;
    ranking.order = {0, 1};
    CHECK_THROWS_AS(oracle_gain_curve(ranking, to_vec({1.0, 2.0, 3.0}), 5), ValidationError);
    CHECK_THROWS_AS(oracle_gain_curve(ranking, to_vec({1.0, 2.0}), 1), ValidationError);
}

TEST_CASE("qini curve matches a six-unit hand computation") {
    const Eigen::VectorXd outcome = to_vec({1.0, 0.0, 1.0, 1.0, 0.0, 1.0});
    const std::vector<int> treatment = {1, 0, 1, 0, 0, 1};
    const Eigen::VectorXd scores = to_vec({0.9, 0.8, 0.7, 0.6, 0.5, 0.4});

    // independent prefix walk with the same zero-until-control convention
    std::vector<double> expected{0.0};
    double sum_t = 0.0, sum_c = 0.0;
    double n_t = 0.0, n_c = 0.0;
    for (int u = 0; u < 6; ++u) {  // scores are already descending by index
        if (treatment[static_cast<size_t>(u)] == 1) {
            sum_t += outcome(u);
            n_t += 1.0;
        } else {
            sum_c += outcome(u);
            n_c += 1.0;
        }
        expected.push_back(sum_t - (n_c > 0.0 ? sum_c * n_t / n_c : 0.0));
    }

    // n_points=7 on N=6 puts one unit per grid step
    const UpliftCurve c = qini_curve(outcome, treatment, scores, 7);
    REQUIRE(c.values.size() == 7);
    for (size_t m = 0; m < 7; ++m) {
        CHECK(c.values[m] == doctest::Approx(expected[m]).epsilon(1e-12));
    }
    // spot values from the walk itself: early all-treated prefix is unscaled
    CHECK(c.values[1] == 1.0);
    CHECK(c.values[6] == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("curve grids use integer prefix arithmetic") {
    // N=7 with a 3-point grid: the midpoint must cover floor(7/2)=3 units
    StrategyRanking ranking;
    ranking.order = {0, 1, 2, 3, 4, 5, 6};
    const Eigen::VectorXd cate = to_vec({7.0, 6.0, 5.0, 4.0, 3.0, 2.0, 1.0});
    const UpliftCurve c = oracle_gain_curve(ranking, cate, 3);
    CHECK(c.fractions == std::vector<double>{0.0, 0.5, 1.0});
    CHECK(c.values[1] == 18.0);  // 7+6+5, not an interpolation
    CHECK(c.values[2] == 28.0);
}

TEST_CASE("qini curve rejects degenerate inputs") {
    const Eigen::VectorXd y = to_vec({1.0, 0.0, 1.0});
    const Eigen::VectorXd s = to_vec({0.3, 0.2, 0.1});
    CHECK_THROWS_AS(qini_curve(y, {1, 1, 1}, s, 3), ValidationError);  // no control arm
    CHECK_THROWS_AS(qini_curve(y, {0, 0, 0}, s, 3), ValidationError);  // no treated arm
    CHECK_THROWS_AS(qini_curve(y, {1, 0}, s, 3), ValidationError);     // length mismatch
    Eigen::VectorXd bad = s;
    bad(1) = std::nan("");
    CHECK_THROWS_AS(qini_curve(y, {1, 0, 1}, bad, 3), ValidationError);
}

TEST_CASE("diagonal baseline joins the endpoints linearly") {
    UpliftCurve curve;
    curve.fractions = {0.0, 0.5, 1.0};
    curve.values = {0.0, 1.0, 4.0};
    const UpliftCurve base = diagonal_baseline(curve);
    CHECK(base.fractions == curve.fractions);
    CHECK(base.values == std::vector<double>{0.0, 2.0, 4.0});
    CHECK_THROWS_AS(diagonal_baseline(UpliftCurve{}), ValidationError);
}

TEST_CASE("qini coefficient is the trapezoid area over the baseline") {
    // unit triangle over a flat baseline: area is exactly 1/2
    UpliftCurve curve;
    curve.fractions = {0.0, 0.5, 1.0};
    curve.values = {0.0, 1.0, 0.0};
    UpliftCurve base;
    base.fractions = curve.fractions;
    base.values = {0.0, 0.0, 0.0};
    CHECK(qini_coefficient(curve, base) == 0.5);

    // curve below the baseline comes out negative
    std::swap(curve.values, base.values);
    CHECK(qini_coefficient(curve, base) == -0.5);

    UpliftCurve short_grid;
    short_grid.fractions = {0.0, 1.0};
    short_grid.values = {0.0, 0.0};
    CHECK_THROWS_AS(qini_coefficient(curve, short_grid), ValidationError);
}

TEST_CASE("bootstrap bands are deterministic and widen with coverage") {
    const Dataset ds = eval_dataset(300, 90);
    Rng rng(91);
    Eigen::VectorXd scores(300);
    for (Eigen::Index i = 0; i < 300; ++i) scores(i) = rng.normal();

    const auto [lo1, hi1] = bootstrap_band(ds, scores, 0.9, 200, 11, 7);
    const auto [lo2, hi2] = bootstrap_band(ds, scores, 0.9, 200, 11, 7);
    CHECK(lo1.values == lo2.values);
    CHECK(hi1.values == hi2.values);

    // same replicates, wider tails: the 90% band contains the 50% band
    const auto [lo50, hi50] = bootstrap_band(ds, scores, 0.5, 200, 11, 7);
    for (size_t m = 0; m < lo1.values.size(); ++m) {
        CHECK(lo1.values[m] <= lo50.values[m]);
        CHECK(hi50.values[m] <= hi1.values[m]);
    }

    CHECK_THROWS_AS(bootstrap_band(ds, scores, 0.9, 199, 11, 7), ValidationError);
    CHECK_THROWS_AS(bootstrap_band(ds, scores, 0.0, 200, 11, 7), ValidationError);
    CHECK_THROWS_AS(bootstrap_band(ds, scores, 1.0, 200, 11, 7), ValidationError);
}

TEST_CASE("correlation matches the textbook formula and its symmetries") {
    const Eigen::VectorXd a = to_vec({1.0, 2.0, 3.0});
    const Eigen::VectorXd b = to_vec({1.0, 2.0, 4.0});
    // hand computation: r^2 = 27/28 for these three points
    CHECK(correlation(a, b) == doctest::Approx(std::sqrt(27.0 / 28.0)).epsilon(1e-12));
    CHECK(correlation(b, a) == doctest::Approx(correlation(a, b)).epsilon(1e-15));

    // perfectly linear relations saturate at the clamp
    Rng rng(92);
    Eigen::VectorXd x(40);
    for (Eigen::Index i = 0; i < 40; ++i) x(i) = rng.normal();
    const Eigen::VectorXd up = (2.0 * x.array() + 3.0).matrix();
    const Eigen::VectorXd down = (-0.5 * x.array() + 1.0).matrix();
    CHECK(correlation(x, up) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(correlation(x, up) <= 1.0);
    CHECK(correlation(x, down) == doctest::Approx(-1.0).epsilon(1e-15));
    CHECK(correlation(x, down) >= -1.0);

    // affine maps of both sides leave r unchanged (up to roundoff)
    const Eigen::VectorXd a2 = (2.0 * a.array() - 5.0).matrix();
    const Eigen::VectorXd b2 = (3.0 * b.array() + 7.0).matrix();
    CHECK(correlation(a2, b2) == doctest::Approx(correlation(a, b)).epsilon(1e-12));

    CHECK_THROWS_AS(correlation(Eigen::VectorXd::Constant(5, 2.0), to_vec({1, 2, 3, 4, 5})),
                    ValidationError);
    CHECK_THROWS_AS(correlation(a, to_vec({1.0, 2.0})), ValidationError);
    CHECK_THROWS_AS(correlation(to_vec({1.0}), to_vec({1.0})), ValidationError);
}

TEST_CASE("a zero-effect world scores zero area for every strategy") {
    synth::SynthConfig cfg;
    cfg.n_units = 500;
    cfg.effect_scale = 0.0;  // tau is identically zero
    auto [ds, truth] = synth::generate(cfg, 93);

    Rng rng(94);
    StrategyInputs inputs;
    inputs.cate.resize(500);
    inputs.purchase_propensity.resize(500);
    for (Eigen::Index i = 0; i < 500; ++i) {
        inputs.cate(i) = rng.normal();
        inputs.purchase_propensity(i) = rng.uniform();
    }

    EvalConfig ec;
    ec.n_points = 21;
    const SimulationResult res = simulate_strategies(ds, truth, inputs, ec, 95);

    REQUIRE(res.strategies.size() == 4);
    CHECK(res.strategies[0].strategy == Strategy::causal_effect);
    CHECK(res.strategies[1].strategy == Strategy::propensity);
    CHECK(res.strategies[2].strategy == Strategy::kmeans);
    CHECK(res.strategies[3].strategy == Strategy::random);

    for (const auto& s : res.strategies) {
        // true effect is 0 everywhere: the gain curve is flat zero and the
        // area over its (zero) diagonal is exactly zero, not just small
        CHECK(s.area_over_random == 0.0);
        for (double v : s.curve.values) CHECK(v == 0.0);
    }
}

TEST_CASE("without ground truth the simulation falls back to qini curves") {
    const Dataset ds = eval_dataset(120, 96);
    Rng rng(97);
    StrategyInputs inputs;
    inputs.cate.resize(120);
    inputs.purchase_propensity.resize(120);
    for (Eigen::Index i = 0; i < 120; ++i) {
        inputs.cate(i) = rng.normal();
        inputs.purchase_propensity(i) = rng.uniform();
    }

    EvalConfig ec;
    ec.n_points = 11;
    const SimulationResult res = simulate_strategies(ds, std::nullopt, inputs, ec, 98);
    REQUIRE(res.strategies.size() == 4);
    for (const auto& s : res.strategies) {
        REQUIRE(s.curve.values.size() == 11);
        CHECK(s.curve.values.front() == 0.0);  // empty prefix
        CHECK(std::isfinite(s.area_over_random));
    }
    // every strategy's curve ends at the same full-population qini value
    const double end = res.strategies[0].curve.values.back();
    for (const auto& s : res.strategies) {
        CHECK(s.curve.values.back() == doctest::Approx(end).epsilon(1e-9));
    }

    StrategyInputs bad = inputs;
    bad.cate = Eigen::VectorXd::Zero(60);
    CHECK_THROWS_AS(simulate_strategies(ds, std::nullopt, bad, ec, 98), ValidationError);
}

TEST_CASE("strategy names are stable") {
    CHECK(strategy_name(Strategy::causal_effect) == "causal_effect");
    CHECK(strategy_name(Strategy::propensity) == "propensity");
    CHECK(strategy_name(Strategy::kmeans) == "kmeans");
    CHECK(strategy_name(Strategy::random) == "random");
}
