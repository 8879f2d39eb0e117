#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "tps/simulate.hpp"
#include "tps/util.hpp"

using namespace tps;

namespace {

// Duplicate-formula oracle: the two-bump surfaces re-transcribed from scratch.
double oracle_additive(double x, double z) {
    const double sx = 0.3, sz = 0.4;
    const double c = 1.0 / (M_PI * sx * sz);
    return 0.75 * c * std::exp(-((x - 0.2) * (x - 0.2)) / (sx * sx) -
                               ((x - 0.3) * (x - 0.3)) / (sz * sz)) +
           0.45 * c * std::exp(-((z - 0.7) * (z - 0.7)) / (sx * sx) -
                               ((z - 0.8) * (z - 0.8)) / (sz * sz));
}

double oracle_interaction(double x, double z) {
    const double sx = 0.3, sz = 0.4;
    const double c = 1.0 / (M_PI * sx * sz);
    return 0.75 * c * std::exp(-((x - 0.2) * (x - 0.2)) / (sx * sx) -
                               ((z - 0.3) * (z - 0.3)) / (sz * sz)) +
           0.45 * c * std::exp(-((x - 0.7) * (x - 0.7)) / (sx * sx) -
                               ((z - 0.8) * (z - 0.8)) / (sz * sz));
}

}  // namespace

TEST_CASE("surfaces match an independent re-transcription") {
    std::mt19937_64 rng(91);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int t = 0; t < 200; ++t) {
        const double x = unif(rng), z = unif(rng);
        CHECK(surface_additive(x, z) == doctest::Approx(oracle_additive(x, z)).epsilon(1e-14));
        CHECK(surface_interaction(x, z) ==
              doctest::Approx(oracle_interaction(x, z)).epsilon(1e-14));
    }
    // Interaction at (0.2, 0.3): first exponent vanishes entirely.
    const double second_bump = 0.45 / (M_PI * 0.12) *
                               std::exp(-0.25 / 0.09 - 0.25 / 0.16);
    CHECK(surface_interaction(0.2, 0.3) ==
          doctest::Approx(0.75 / (M_PI * 0.12) + second_bump).epsilon(1e-12));
}

TEST_CASE("additive surface is separable; both surfaces finite and positive") {
    for (const double x : {0.0, 0.33, 0.7}) {
        const double delta = surface_additive(x, 0.9) - surface_additive(x, 0.1);
        CHECK(delta == doctest::Approx(surface_additive(0.5, 0.9) - surface_additive(0.5, 0.1))
                           .epsilon(1e-12));
    }
    for (int i = 0; i <= 100; ++i)
        for (int j = 0; j <= 100; ++j) {
            const double x = i / 100.0, z = j / 100.0;
            CHECK(std::isfinite(surface_additive(x, z)));
            CHECK(surface_additive(x, z) > 0.0);
            CHECK(std::isfinite(surface_interaction(x, z)));
            CHECK(surface_interaction(x, z) > 0.0);
        }
}

TEST_CASE("gen_linear: zero noise, determinism and noise moments") {
    SimConfig cfg;
    cfg.n_h = 400;
    cfg.px = cfg.pz = 8;
    cfg.seed = 1234;

    SimConfig noiseless = cfg;
    noiseless.sigma_noise = 0.0;
    const SimDataset exact = gen_linear(noiseless);
    CHECK((exact.y - exact.y_true).cwiseAbs().maxCoeff() == 0.0);

    const SimDataset a = gen_linear(cfg);
    const SimDataset b = gen_linear(cfg);
    CHECK((a.y - b.y).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.x - b.x).cwiseAbs().maxCoeff() == 0.0);

    const double var = (a.y - a.y_true).squaredNorm() / 400.0;
    CHECK(var == doctest::Approx(cfg.sigma_noise * cfg.sigma_noise).epsilon(0.15));
}

TEST_CASE("gen_linear grid covers (0,1)^2 with sqrt(n) distinct values") {
    SimConfig cfg;
    cfg.n_h = 100;
    cfg.px = cfg.pz = 8;
    const SimDataset d = gen_linear(cfg);
    std::vector<double> xs(d.x.data(), d.x.data() + d.x.size());
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    CHECK(xs.size() == 10);
    CHECK(xs.front() == 0.0);
    CHECK(xs.back() == 1.0);
}

TEST_CASE("gen_binary: neutral scale gives balanced labels; seeded determinism") {
    SimConfig cfg;
    cfg.n_h = 400;
    cfg.px = cfg.pz = 8;
    cfg.binary = true;
    cfg.nrep = 2;
    cfg.seed = 77;
    cfg.logit_scale = std::pair<double, double>{0.0, 0.0};
    const SimDataset d = gen_binary(cfg);
    CHECK((d.theta_true.array() - 0.5).abs().maxCoeff() == 0.0);
    CHECK(d.y.mean() == doctest::Approx(0.5).epsilon(3.0 / std::sqrt(800.0)));

    cfg.logit_scale.reset();
    const SimDataset d1 = gen_binary(cfg);
    const SimDataset d2 = gen_binary(cfg);
    CHECK((d1.y - d2.y).cwiseAbs().maxCoeff() == 0.0);
    CHECK(d1.theta_true.minCoeff() > 0.05);
    CHECK(d1.theta_true.maxCoeff() < 0.95);
}

TEST_CASE("gen_binary calibration: decile frequencies within binomial bounds") {
    SimConfig cfg;
    cfg.n_h = 10000;
    cfg.px = cfg.pz = 8;
    cfg.binary = true;
    cfg.seed = 99;
    const SimDataset d = gen_binary(cfg);

    // Group rows by theta deciles and compare the empirical mean of y with the
    // mean of theta; 99% binomial bound = 2.576 sd.
    std::vector<std::vector<int>> decile(10);
    const double lo = d.theta_true.minCoeff(), hi = d.theta_true.maxCoeff() + 1e-12;
    for (int i = 0; i < d.y.size(); ++i) {
        const int bucket = std::min(9, static_cast<int>((d.theta_true[i] - lo) / (hi - lo) * 10));
        decile[bucket].push_back(i);
    }
    for (const auto& rows : decile) {
        if (rows.size() < 50) continue;
        double mean_theta = 0.0, mean_y = 0.0;
        for (const int i : rows) {
            mean_theta += d.theta_true[i];
            mean_y += d.y[i];
        }
        mean_theta /= rows.size();
        mean_y /= rows.size();
        const double sd = std::sqrt(mean_theta * (1.0 - mean_theta) / rows.size());
        CHECK(std::abs(mean_y - mean_theta) < 2.576 * sd + 1e-9);
    }
}

TEST_CASE("metrics: zeros, shift arithmetic and WSS by hand") {
    Eigen::VectorXd v(4);
    v << 1, 2, 3, 4;
    CHECK(ss_fitted(v, v) == 0.0);

    Eigen::VectorXd shifted = v.array() + 0.1;
    Eigen::VectorXd big = Eigen::VectorXd::Zero(400);
    Eigen::VectorXd big_shift = big.array() + 0.1;
    CHECK(ss_fitted(big_shift, big) == doctest::Approx(4.0).epsilon(1e-12));

    Eigen::VectorXd est(3), truth(3);
    est << 0.5, 0.3, 0.9;
    truth << 0.4, 0.5, 0.8;
    const double expected = 0.01 / (0.4 * 0.6) + 0.04 / (0.5 * 0.5) + 0.01 / (0.8 * 0.2);
    CHECK(wss_fitted(est, truth) == doctest::Approx(expected).epsilon(1e-12));

    Eigen::VectorXd degenerate(3);
    degenerate << 0.4, 1.0, 0.8;
    CHECK_THROWS_AS(wss_fitted(est, degenerate), DomainError);
    Eigen::VectorXd wrong(2);
    CHECK_THROWS_AS(ss_fitted(v, wrong), ShapeError);
}

TEST_CASE("run_batch: nsim=1 equals a single evaluated replicate") {
    SimConfig cfg;
    cfg.n_h = 100;
    cfg.px = cfg.pz = 6;
    cfg.interaction = false;
    cfg.sigma_noise = 0.5;
    cfg.seed = 31;
    cfg.nsim = 1;
    const FitRecipe recipe{0.4, 0.4, 1.5};
    const BatchResult batch = run_batch(cfg, recipe);

    SimConfig rep = cfg;
    rep.seed = derive_seed(cfg.seed, 0);
    const FitContext ctx = make_context(gen_linear(rep), rep);
    const ReplicateMetrics single = evaluate_models(ctx, recipe);
    for (int model = 0; model < 3; ++model) {
        CHECK(batch.mean_fitted[model] == doctest::Approx(single.fitted[model]).epsilon(1e-14));
        CHECK(batch.mean_marginal[model] ==
              doctest::Approx(single.marginal[model]).epsilon(1e-14));
    }
}

TEST_CASE("run_batch is schedule independent and deterministic") {
    SimConfig cfg;
    cfg.n_h = 100;
    cfg.px = cfg.pz = 6;
    cfg.interaction = false;
    cfg.sigma_noise = 0.2;
    cfg.seed = 5;
    cfg.nsim = 8;
    const FitRecipe recipe{0.3, 0.3, 1.0};
    const BatchResult serial = run_batch(cfg, recipe, 1);
    const BatchResult threaded = run_batch(cfg, recipe, 8);
    CHECK((serial.per_replicate - threaded.per_replicate).cwiseAbs().maxCoeff() == 0.0);
    for (int model = 0; model < 3; ++model) {
        CHECK(serial.mean_fitted[model] == threaded.mean_fitted[model]);
        CHECK(serial.mean_marginal[model] == threaded.mean_marginal[model]);
    }
}

TEST_CASE("binary batch produces the Fit2-dominant ordering on a small run") {
    SimConfig cfg;
    cfg.n_h = 400;
    cfg.px = cfg.pz = 8;
    cfg.binary = true;
    cfg.nrep = 2;
    cfg.interaction = false;
    cfg.seed = 19;
    cfg.nsim = 5;
    const FitRecipe recipe{0.28, 0.30, 18.86};
    const BatchResult batch = run_batch(cfg, recipe, 4);
    for (int model = 0; model < 3; ++model) CHECK(batch.n_ok[model] == 5);
    CHECK(batch.mean_marginal[2] < batch.mean_marginal[1]);
    CHECK(batch.mean_marginal[2] < batch.mean_marginal[0]);
    CHECK(batch.mean_fitted[2] < batch.mean_fitted[0]);
    CHECK(batch.mean_fitted[2] < batch.mean_fitted[1]);
}

TEST_CASE("config validation rejects bad shapes") {
    SimConfig cfg;
    cfg.n_h = 300;  // not a perfect square
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.n_h = 100;
    cfg.px = cfg.pz = 18;  // 325 columns needs more than 100 rows
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = SimConfig{};
    cfg.nrep = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}
