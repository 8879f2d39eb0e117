#include "tps/simulate.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "tps/errors.hpp"
#include "tps/util.hpp"

namespace tps {

namespace {

constexpr double kSigmaX = 0.3;
constexpr double kSigmaZ = 0.4;
const double kNorm = 1.0 / (M_PI * kSigmaX * kSigmaZ);

int grid_side(int n_h) {
    const int k = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n_h))));
    if (k * k != n_h) throw ConfigError("SimConfig: n_h must be a perfect square");
    return k;
}

std::pair<double, double> resolve_logit_scale(const SimConfig& config,
                                              const Eigen::VectorXd& surface_values) {
    if (config.logit_scale) return *config.logit_scale;
    const double lo = surface_values.minCoeff();
    const double hi = surface_values.maxCoeff();
    const double b = 5.0 / (hi - lo);
    return {-2.5 - b * lo, b};
}

}  // namespace

void SimConfig::validate() const {
    grid_side(n_h);
    if (sigma_noise < 0.0) throw ConfigError("SimConfig: sigma_noise must be non-negative");
    if (px < degree + 1 || pz < degree + 1)
        throw ConfigError("SimConfig: px, pz must be at least degree + 1");
    const int m = interaction ? px * pz + 1 : px + pz + 1;
    if (m >= n_h)
        throw ConfigError("SimConfig: design needs " + std::to_string(m) +
                          " columns but n_h is only " + std::to_string(n_h));
    if (nrep < 1) throw ConfigError("SimConfig: nrep must be at least 1");
    if (nsim < 1) throw ConfigError("SimConfig: nsim must be at least 1");
    if (n_test < 2) throw ConfigError("SimConfig: n_test must be at least 2");
    if (m_z < 1) throw ConfigError("SimConfig: m_z must be at least 1");
    if (!(sigma_k > 0.0)) throw ConfigError("SimConfig: sigma_k must be positive");
}

double surface_additive(double x, double z) {
    const double ex = -std::pow(x - 0.2, 2) / (kSigmaX * kSigmaX) -
                      std::pow(x - 0.3, 2) / (kSigmaZ * kSigmaZ);
    const double ez = -std::pow(z - 0.7, 2) / (kSigmaX * kSigmaX) -
                      std::pow(z - 0.8, 2) / (kSigmaZ * kSigmaZ);
    return 0.75 * kNorm * std::exp(ex) + 0.45 * kNorm * std::exp(ez);
}

double surface_interaction(double x, double z) {
    const double e1 = -std::pow(x - 0.2, 2) / (kSigmaX * kSigmaX) -
                      std::pow(z - 0.3, 2) / (kSigmaZ * kSigmaZ);
    const double e2 = -std::pow(x - 0.7, 2) / (kSigmaX * kSigmaX) -
                      std::pow(z - 0.8, 2) / (kSigmaZ * kSigmaZ);
    return 0.75 * kNorm * std::exp(e1) + 0.45 * kNorm * std::exp(e2);
}

std::pair<double, double> default_logit_scale(bool interaction) {
    const auto surf = interaction ? surface_interaction : surface_additive;
    const Eigen::VectorXd g = linspace(0.0, 1.0, 201);
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (int i = 0; i < g.size(); ++i)
        for (int j = 0; j < g.size(); ++j) {
            const double v = surf(g[i], g[j]);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    const double b = 5.0 / (hi - lo);
    return {-2.5 - b * lo, b};
}

namespace {

// Regular grid over the unit square, z varying fastest.
void fill_grid(int n_h, Eigen::VectorXd& x, Eigen::VectorXd& z) {
    const int k = grid_side(n_h);
    const Eigen::VectorXd v = linspace(0.0, 1.0, k);
    x.resize(n_h);
    z.resize(n_h);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) {
            x[i * k + j] = v[i];
            z[i * k + j] = v[j];
        }
}

}  // namespace

SimDataset gen_linear(const SimConfig& config) {
    config.validate();
    const auto surf = config.interaction ? surface_interaction : surface_additive;

    SimDataset d;
    d.n_grid = config.n_h;
    fill_grid(config.n_h, d.x, d.z);
    d.y_true.resize(config.n_h);
    for (int i = 0; i < config.n_h; ++i) d.y_true[i] = surf(d.x[i], d.z[i]);

    std::mt19937_64 rng(config.seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    d.y.resize(config.n_h);
    for (int i = 0; i < config.n_h; ++i) d.y[i] = d.y_true[i] + config.sigma_noise * noise(rng);

    d.theta_true_marginal =
        true_marginal_oracle(surf, linspace(0.0, 1.0, config.n_test), config.m_z);
    return d;
}

SimDataset gen_binary(const SimConfig& config) {
    config.validate();
    const auto surf = config.interaction ? surface_interaction : surface_additive;

    Eigen::VectorXd gx, gz;
    fill_grid(config.n_h, gx, gz);
    Eigen::VectorXd surface_values(config.n_h);
    for (int i = 0; i < config.n_h; ++i) surface_values[i] = surf(gx[i], gz[i]);
    const auto [a, b] = resolve_logit_scale(config, surface_values);

    SimDataset d;
    d.n_grid = config.n_h;
    const int n_total = config.n_h * config.nrep;
    d.x.resize(n_total);
    d.z.resize(n_total);
    d.theta_true.resize(n_total);
    for (int r = 0; r < config.nrep; ++r)
        for (int i = 0; i < config.n_h; ++i) {
            d.x[r * config.n_h + i] = gx[i];
            d.z[r * config.n_h + i] = gz[i];
            d.theta_true[r * config.n_h + i] = expit(a + b * surface_values[i]);
        }

    std::mt19937_64 rng(config.seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    d.y.resize(n_total);
    for (int i = 0; i < n_total; ++i) d.y[i] = unif(rng) < d.theta_true[i] ? 1.0 : 0.0;

    const auto prob_surface = [&, a2 = a, b2 = b](double x, double z) {
        return expit(a2 + b2 * surf(x, z));
    };
    d.theta_true_marginal =
        true_marginal_oracle(prob_surface, linspace(0.0, 1.0, config.n_test), config.m_z);
    return d;
}

SimDataset gen_binary_cohort(int n, std::uint64_t seed, bool interaction,
                             std::pair<double, double> logit_scale, int n_test, int m_z) {
    if (n < 1) throw ConfigError("gen_binary_cohort: n must be positive");
    const auto surf = interaction ? surface_interaction : surface_additive;
    const auto [a, b] = logit_scale;

    SimDataset d;
    d.n_grid = n;
    d.x.resize(n);
    d.z.resize(n);
    d.theta_true.resize(n);
    d.y.resize(n);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int i = 0; i < n; ++i) {
        d.x[i] = unif(rng);
        d.z[i] = unif(rng);
        d.theta_true[i] = expit(a + b * surf(d.x[i], d.z[i]));
        d.y[i] = unif(rng) < d.theta_true[i] ? 1.0 : 0.0;
    }
    const auto prob_surface = [&, a2 = a, b2 = b](double x, double z) {
        return expit(a2 + b2 * surf(x, z));
    };
    d.theta_true_marginal = true_marginal_oracle(prob_surface, linspace(0.0, 1.0, n_test), m_z);
    return d;
}

double ss_fitted(const Eigen::Ref<const Eigen::VectorXd>& fitted,
                 const Eigen::Ref<const Eigen::VectorXd>& truth) {
    if (fitted.size() != truth.size()) throw ShapeError("ss_fitted: length mismatch");
    return (fitted - truth).squaredNorm();
}

double ss_marginal(const MarginalCurve& estimate, const MarginalCurve& truth) {
    return ss_fitted(estimate.theta, truth.theta);
}

double wss_fitted(const Eigen::Ref<const Eigen::VectorXd>& theta_hat,
                  const Eigen::Ref<const Eigen::VectorXd>& theta_true) {
    if (theta_hat.size() != theta_true.size()) throw ShapeError("wss_fitted: length mismatch");
    double acc = 0.0;
    for (Eigen::Index i = 0; i < theta_hat.size(); ++i) {
        const double w = theta_true[i] * (1.0 - theta_true[i]);
        if (!(w > 0.0)) throw DomainError("wss_fitted: theta_true at 0 or 1");
        acc += (theta_hat[i] - theta_true[i]) * (theta_hat[i] - theta_true[i]) / w;
    }
    return acc;
}

FitContext make_context(SimDataset data, const SimConfig& config) {
    FitContext ctx;
    const BasisSpec spec_x{config.degree, config.px, 0.0, 1.0};
    const BasisSpec spec_z{config.degree, config.pz, 0.0, 1.0};
    const BasisMatrix bx = eval_basis(spec_x, data.x);
    const BasisMatrix bz = eval_basis(spec_z, data.z);
    ctx.design = config.interaction ? build_interaction_design(bx, bz)
                                    : build_additive_design(bx, bz);
    ctx.penalty = build_roughness(ctx.design.layout);
    ctx.kernel = build_kernel(data.x, linspace(0.0, 1.0, config.n_test), config.sigma_k);
    ctx.w = marginal_projection(ctx.kernel, ctx.design);
    ctx.data = std::move(data);
    return ctx;
}

ReplicateMetrics evaluate_models(const FitContext& ctx, const FitRecipe& recipe,
                                 std::array<MarginalCurve, 3>* marginals_out) {
    ReplicateMetrics out;
    const auto& truth_marg = ctx.data.theta_true_marginal;
    const bool binary = ctx.data.theta_true.size() > 0;

    for (int model = 0; model < 3; ++model) {
        try {
            Eigen::VectorXd fitted;
            MarginalCurve marg;
            if (!binary) {
                LinearFit f;
                switch (model) {
                    case 0: f = fit0(ctx.design, ctx.data.y); break;
                    case 1: f = fit1(ctx.design, ctx.data.y, ctx.penalty, recipe.lambda1a); break;
                    default:
                        f = fit2(ctx.design, ctx.data.y, ctx.penalty, ctx.w, truth_marg,
                                 recipe.lambda1b, recipe.lambda2);
                }
                attach_marginal(f, ctx.kernel);
                fitted = std::move(f.fitted);
                marg = std::move(f.marginal);
                out.fitted[model] = ss_fitted(fitted, ctx.data.y_true);
                out.marginal[model] = ss_marginal(marg, truth_marg);
            } else {
                NewtonConfig ncfg;
                RoughnessTerm rough{ctx.penalty, model == 1 ? recipe.lambda1a : recipe.lambda1b};
                MarginalTerm mp{ctx.kernel, truth_marg.theta, recipe.lambda2};
                LogisticFit f;
                switch (model) {
                    case 0: f = newton_raphson(ctx.design, ctx.data.y, ncfg); break;
                    case 1: f = newton_raphson(ctx.design, ctx.data.y, ncfg, &rough); break;
                    default: f = newton_raphson(ctx.design, ctx.data.y, ncfg, &rough, &mp);
                }
                if (!f.converged) throw NumericalError("newton did not converge");
                marg = estimate_marginal_logistic(ctx.kernel, f.theta_hat);
                // Sums run over every (replicated) data row, matching the
                // reported simulation protocol.
                out.fitted[model] = wss_fitted(f.theta_hat, ctx.data.theta_true);
                out.marginal[model] = wss_fitted(marg.theta, truth_marg.theta);
            }
            out.ok[model] = true;
            if (marginals_out != nullptr) (*marginals_out)[model] = std::move(marg);
        } catch (const std::exception&) {
            out.ok[model] = false;
            out.fitted[model] = std::numeric_limits<double>::quiet_NaN();
            out.marginal[model] = std::numeric_limits<double>::quiet_NaN();
        }
    }
    return out;
}

BatchResult run_batch(const SimConfig& config, const FitRecipe& recipe, int threads) {
    config.validate();

    BatchResult res;
    res.per_replicate = Eigen::MatrixXd::Constant(config.nsim, 6,
                                                  std::numeric_limits<double>::quiet_NaN());
    std::vector<ReplicateMetrics> metrics(config.nsim);
    std::array<MarginalCurve, 3> first_marginals;
    MarginalCurve truth_marginal;

    parallel_for(config.nsim, threads, [&](int r) {
        try {
            SimConfig rep_config = config;
            rep_config.seed = derive_seed(config.seed, static_cast<std::uint64_t>(r));
            FitContext ctx = make_context(rep_config.binary ? gen_binary(rep_config)
                                                            : gen_linear(rep_config),
                                          rep_config);
            metrics[r] = evaluate_models(ctx, recipe, r == 0 ? &first_marginals : nullptr);
            if (r == 0) truth_marginal = ctx.data.theta_true_marginal;
        } catch (const std::exception&) {
            metrics[r] = ReplicateMetrics{};  // all models marked failed
        }
    });

    for (int r = 0; r < config.nsim; ++r) {
        for (int model = 0; model < 3; ++model) {
            if (metrics[r].ok[model]) {
                res.mean_fitted[model] += metrics[r].fitted[model];
                res.mean_marginal[model] += metrics[r].marginal[model];
                res.n_ok[model] += 1;
                res.per_replicate(r, model) = metrics[r].fitted[model];
                res.per_replicate(r, 3 + model) = metrics[r].marginal[model];
            } else {
                res.n_failed[model] += 1;
            }
        }
    }
    for (int model = 0; model < 3; ++model) {
        if (res.n_ok[model] > 0) {
            res.mean_fitted[model] /= res.n_ok[model];
            res.mean_marginal[model] /= res.n_ok[model];
        } else {
            res.mean_fitted[model] = std::numeric_limits<double>::quiet_NaN();
            res.mean_marginal[model] = std::numeric_limits<double>::quiet_NaN();
        }
    }
    res.first_marginals = std::move(first_marginals);
    res.truth_marginal = std::move(truth_marginal);
    return res;
}

}  // namespace tps
