#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "tps/tune.hpp"
#include "tps/util.hpp"

using namespace tps;

namespace {

FitContext linear_context(unsigned seed, double sigma = 1.0) {
    SimConfig cfg;
    cfg.n_h = 100;
    cfg.px = cfg.pz = 6;
    cfg.interaction = true;
    cfg.sigma_noise = sigma;
    cfg.seed = seed;
    return make_context(gen_linear(cfg), cfg);
}

}  // namespace

TEST_CASE("lambda grid construction and validation") {
    const LambdaGrid g = LambdaGrid::regular(0.0, 100.0, 1.0);
    CHECK(g.values.size() == 101);
    CHECK(g.values[0] == 0.0);
    CHECK(g.values[100] == 100.0);
    const LambdaGrid g2 = LambdaGrid::regular(0.0, 50.0, 0.5);
    CHECK(g2.values.size() == 101);
    CHECK(g2.values[1] == doctest::Approx(0.5));

    LambdaGrid bad;
    bad.values.resize(2);
    bad.values << 1.0, 1.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad.values << -1.0, 2.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("sequential search: degenerate single-point grid selects it everywhere") {
    const FitContext ctx = linear_context(301);
    LambdaGrid zero;
    zero.values = Eigen::VectorXd::Zero(1);
    const TuningReport rep = sequential_search(ctx, zero, zero);
    CHECK(rep.lambda1a == 0.0);
    CHECK(rep.lambda1b == 0.0);
    CHECK(rep.lambda2.value() == 0.0);
    REQUIRE(rep.trace1a.size() == 1);
    REQUIRE(rep.trace2.size() == 1);
}

TEST_CASE("sequential search finds an interior optimum and complete traces") {
    const FitContext ctx = linear_context(302);
    const LambdaGrid g1 = LambdaGrid::regular(0.0, 20.0, 1.0);
    const LambdaGrid g2 = LambdaGrid::regular(0.0, 10.0, 1.0);
    const TuningReport rep = sequential_search(ctx, g1, g2, 4);

    CHECK(rep.trace1a.size() == 21);
    CHECK(rep.trace2.size() == 11);
    CHECK(rep.trace1b.size() == 21);
    for (const auto& p : rep.trace1a) CHECK(p.ok);

    // Selected lambda1a must be at the trace minimum; the penalty should beat
    // the unpenalized end on a noisy dataset.
    CHECK(rep.lambda1a > 0.0);
    double at_selected = 0.0, at_zero = 0.0;
    for (const auto& p : rep.trace1a) {
        if (p.lambda == rep.lambda1a) at_selected = p.value;
        if (p.lambda == 0.0) at_zero = p.value;
    }
    CHECK(at_selected < at_zero);
    for (const auto& p : rep.trace1a) CHECK(at_selected <= p.value);

    // Members of their grids.
    bool found = false;
    for (int i = 0; i < g2.values.size(); ++i)
        if (g2.values[i] == rep.lambda2.value()) found = true;
    CHECK(found);
}

TEST_CASE("sequential search requires truth") {
    FitContext ctx = linear_context(303);
    ctx.data.y_true.resize(0);
    const LambdaGrid g = LambdaGrid::regular(0.0, 5.0, 1.0);
    CHECK_THROWS_AS(sequential_search(ctx, g, g), TuningError);
}

TEST_CASE("auc: separation, hand-enumerated pairs, ties and invariance") {
    Eigen::VectorXd scores(4), labels(4);
    scores << 0.1, 0.2, 0.8, 0.9;
    labels << 0, 0, 1, 1;
    CHECK(auc(scores, labels) == doctest::Approx(1.0));

    scores << 0.1, 0.4, 0.35, 0.8;
    labels << 0, 0, 1, 1;
    // pairs: (.35>.1)=1, (.35>.4)=0, (.8>.1)=1, (.8>.4)=1 -> 3/4
    CHECK(auc(scores, labels) == doctest::Approx(0.75));

    Eigen::VectorXd tied(4);
    tied << 0.5, 0.5, 0.5, 0.5;
    CHECK(auc(tied, labels) == doctest::Approx(0.5));

    // Monotone transform invariance.
    std::mt19937_64 rng(304);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Eigen::VectorXd s(60), l(60);
    for (int i = 0; i < 60; ++i) {
        s[i] = unif(rng);
        l[i] = unif(rng) < 0.4 ? 1.0 : 0.0;
    }
    const double base = auc(s, l);
    const Eigen::VectorXd transformed = (3.0 * s.array() + 1.0).exp();
    CHECK(auc(transformed, l) == doctest::Approx(base).epsilon(1e-12));

    // Random scores on many points sit near one half.
    Eigen::VectorXd s2(4000), l2(4000);
    for (int i = 0; i < 4000; ++i) {
        s2[i] = unif(rng);
        l2[i] = unif(rng) < 0.5 ? 1.0 : 0.0;
    }
    CHECK(auc(s2, l2) == doctest::Approx(0.5).epsilon(0.06));

    Eigen::VectorXd ones = Eigen::VectorXd::Ones(4);
    CHECK_THROWS_AS(auc(scores, ones), DomainError);
}

TEST_CASE("kfold cv: single-value grid, finite traces, determinism") {
    SimConfig cfg;
    cfg.n_h = 100;
    cfg.px = cfg.pz = 5;
    cfg.interaction = false;
    cfg.binary = true;
    cfg.nrep = 2;
    cfg.seed = 305;
    const FitContext ctx = make_context(gen_binary(cfg), cfg);

    LambdaGrid one;
    one.values = Eigen::VectorXd::Constant(1, 2.5);
    const CvResult single =
        kfold_cv_lambda1(ctx.design, ctx.data.y, ctx.penalty, one, 5, CvMetric::SS, 42);
    CHECK(single.lambda1 == 2.5);

    const LambdaGrid grid = LambdaGrid::regular(0.0, 2.0, 0.5);
    for (const CvMetric metric : {CvMetric::SS, CvMetric::LogLik, CvMetric::Auc}) {
        const CvResult res =
            kfold_cv_lambda1(ctx.design, ctx.data.y, ctx.penalty, grid, 5, metric, 42, 4);
        CHECK(res.trace.size() == 5 * 5);
        for (const auto& row : res.trace) CHECK(std::isfinite(row[2]));
        // deterministic under the same seed
        const CvResult res2 =
            kfold_cv_lambda1(ctx.design, ctx.data.y, ctx.penalty, grid, 5, metric, 42, 1);
        CHECK(res.lambda1 == res2.lambda1);
        for (std::size_t i = 0; i < res.trace.size(); ++i)
            CHECK(res.trace[i][2] == res2.trace[i][2]);
    }

    CHECK_THROWS_AS(
        kfold_cv_lambda1(ctx.design, ctx.data.y, ctx.penalty, grid, 1, CvMetric::SS, 42),
        ConfigError);
}

TEST_CASE("kfold cv prefers a positive lambda when lambda 0 overfits") {
    // Few rows, rich basis: the unpenalized fold fit is demonstrably worse on
    // held-out data. Verified by direct fold evaluation below.
    SimConfig cfg;
    cfg.n_h = 64;
    cfg.px = cfg.pz = 7;
    cfg.interaction = false;
    cfg.binary = true;
    cfg.nrep = 1;
    cfg.seed = 306;
    const FitContext ctx = make_context(gen_binary(cfg), cfg);

    LambdaGrid grid;
    grid.values.resize(4);
    grid.values << 0.0, 0.5, 2.0, 8.0;
    const CvResult res =
        kfold_cv_lambda1(ctx.design, ctx.data.y, ctx.penalty, grid, 8, CvMetric::SS, 9, 4);
    CHECK(res.lambda1 > 0.0);
    CHECK(res.median_per_lambda[0] > *std::min_element(res.median_per_lambda.begin() + 1,
                                                       res.median_per_lambda.end()));
}

TEST_CASE("select_lambda2: rules A and B with a synthetic vertical target") {
    SimConfig cfg;
    cfg.n_h = 100;
    cfg.px = cfg.pz = 5;
    cfg.interaction = false;
    cfg.binary = true;
    cfg.nrep = 2;
    cfg.seed = 307;
    const FitContext ctx = make_context(gen_binary(cfg), cfg);
    // Marginal target: the true marginal evaluated by the generator.
    const Eigen::VectorXd theta_v = ctx.data.theta_true_marginal.theta;

    const LambdaGrid grid2 = LambdaGrid::regular(0.0, 30.0, 2.0);
    const Lambda2Selection a = select_lambda2(ctx.design, ctx.data.y, ctx.penalty, ctx.kernel,
                                              theta_v, 0.3, grid2, Lambda2Rule::FiftyPercent, 4);
    REQUIRE(a.lambda2.has_value());
    // Rule A: the selected value achieves the 50% reduction, and no smaller
    // grid value does.
    for (const auto& p : a.trace) {
        if (p.lambda < *a.lambda2) CHECK(p.value > 0.5 * a.fit1_marginal_ss);
        if (p.lambda == *a.lambda2) CHECK(p.value <= 0.5 * a.fit1_marginal_ss);
    }

    const Lambda2Selection b = select_lambda2(ctx.design, ctx.data.y, ctx.penalty, ctx.kernel,
                                              theta_v, 0.3, grid2, Lambda2Rule::BestFit2, 4);
    REQUIRE(b.lambda2.has_value());
    double best = std::numeric_limits<double>::infinity();
    for (const auto& p : b.trace) best = std::min(best, p.value);
    for (const auto& p : b.trace)
        if (p.lambda == *b.lambda2) CHECK(p.value == doctest::Approx(best));

    // lambda2 = 0 reproduces the Fit1 marginal SS exactly.
    CHECK(b.trace[0].value == doctest::Approx(b.fit1_marginal_ss).epsilon(1e-10));
}

TEST_CASE("select_lambda2 rule A returns NA when nothing can be halved") {
    // Target exactly equal to the Fit1 marginal: SS is already ~0, rule A has
    // nothing to halve and reports NA.
    SimConfig cfg;
    cfg.n_h = 64;
    cfg.px = cfg.pz = 5;
    cfg.interaction = false;
    cfg.binary = true;
    cfg.seed = 308;
    const FitContext ctx = make_context(gen_binary(cfg), cfg);

    NewtonConfig ncfg;
    RoughnessTerm rough{ctx.penalty, 0.3};
    const LogisticFit base = newton_raphson(ctx.design, ctx.data.y, ncfg, &rough);
    const Eigen::VectorXd theta_v = ctx.kernel.weights * base.theta_hat;

    LambdaGrid grid2;
    grid2.values.resize(3);
    grid2.values << 0.0, 1.0, 2.0;
    const Lambda2Selection sel = select_lambda2(ctx.design, ctx.data.y, ctx.penalty, ctx.kernel,
                                                theta_v, 0.3, grid2, Lambda2Rule::FiftyPercent);
    CHECK(sel.fit1_marginal_ss < 1e-12);
    CHECK(!sel.lambda2.has_value());
}
