#ifndef TPS_SIMULATE_HPP
#define TPS_SIMULATE_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <utility>

#include <Eigen/Dense>

#include "tps/design.hpp"
#include "tps/fit_linear.hpp"
#include "tps/fit_logistic.hpp"
#include "tps/marginal.hpp"

namespace tps {

struct SimConfig {
    int n_h = 400;             // grid size; must be a perfect square
    double sigma_noise = 0.2;  // linear response noise
    bool interaction = true;
    int px = 18;
    int pz = 18;
    int degree = 3;
    int nrep = 1;  // binary row replication
    int nsim = 1;
    std::uint64_t seed = 0;
    bool binary = false;
    // (a, b) in s(x,z) = a + b * surface(x,z); defaults to mapping the
    // surface's observed range onto logits [-2.5, 2.5].
    std::optional<std::pair<double, double>> logit_scale;
    int n_test = 100;   // marginal evaluation points
    int m_z = 10000;    // z-grid size of the true-marginal average
    double sigma_k = 0.05;

    void validate() const;
};

struct SimDataset {
    Eigen::VectorXd x, z;         // covariate rows (replicated for binary nrep > 1)
    Eigen::VectorXd y;            // observed response
    Eigen::VectorXd y_true;       // linear truth per row (empty when binary)
    Eigen::VectorXd theta_true;   // binary truth probabilities per row (empty when linear)
    MarginalCurve theta_true_marginal;
    int n_grid = 0;               // distinct rows before replication
};

// Eq-style two-bump test surfaces, sigma_x = 0.3 and sigma_z = 0.4.
double surface_additive(double x, double z);
double surface_interaction(double x, double z);

// Logit scaling that maps the surface range on a fine fixed grid onto
// [-2.5, 2.5]; shared scaling for paired cohorts.
std::pair<double, double> default_logit_scale(bool interaction);

SimDataset gen_linear(const SimConfig& config);
SimDataset gen_binary(const SimConfig& config);

// Application-style cohort: n uniform-random (x, z) rows, binary y from the
// scaled surface. Vertical cohorts use x and y only, with z a latent draw.
SimDataset gen_binary_cohort(int n, std::uint64_t seed, bool interaction,
                             std::pair<double, double> logit_scale, int n_test = 100,
                             int m_z = 10000);

double ss_fitted(const Eigen::Ref<const Eigen::VectorXd>& fitted,
                 const Eigen::Ref<const Eigen::VectorXd>& truth);
double ss_marginal(const MarginalCurve& estimate, const MarginalCurve& truth);
// Weighted sum of squares with binomial weights theta_true (1 - theta_true).
double wss_fitted(const Eigen::Ref<const Eigen::VectorXd>& theta_hat,
                  const Eigen::Ref<const Eigen::VectorXd>& theta_true);

// Everything derived from one simulated dataset that the three fits share.
struct FitContext {
    DesignMatrix design;
    PenaltyPair penalty;
    KernelSmoother kernel;
    Eigen::MatrixXd w;  // K * D
    SimDataset data;
};

FitContext make_context(SimDataset data, const SimConfig& config);

struct FitRecipe {
    double lambda1a = 0.5;  // Fit1 roughness
    double lambda1b = 0.5;  // Fit2 roughness
    double lambda2 = 2.0;   // Fit2 marginal
};

struct ReplicateMetrics {
    // (fitted, marginal) per model; weighted sums of squares when binary.
    std::array<double, 3> fitted{};
    std::array<double, 3> marginal{};
    std::array<bool, 3> ok{};
};

// Fits Fit0/Fit1/Fit2 on a prepared context and scores them against the
// truth. Optionally returns the three fitted marginal curves.
ReplicateMetrics evaluate_models(const FitContext& ctx, const FitRecipe& recipe,
                                 std::array<MarginalCurve, 3>* marginals_out = nullptr);

struct BatchResult {
    std::array<double, 3> mean_fitted{};
    std::array<double, 3> mean_marginal{};
    std::array<int, 3> n_ok{};
    std::array<int, 3> n_failed{};
    Eigen::MatrixXd per_replicate;  // nsim x 6: fit0/1/2 fitted then marginal, NaN on failure
    std::array<MarginalCurve, 3> first_marginals;
    MarginalCurve truth_marginal;
};

// Runs nsim independently seeded replicates and aggregates mean metrics per
// model. Deterministic for a fixed (config, recipe) regardless of thread
// count.
BatchResult run_batch(const SimConfig& config, const FitRecipe& recipe, int threads = 1);

}  // namespace tps

#endif
