#ifndef TPS_FIT_LOGISTIC_HPP
#define TPS_FIT_LOGISTIC_HPP

#include <cmath>
#include <optional>
#include <utility>

#include <Eigen/Dense>

#include "tps/design.hpp"
#include "tps/fit_linear.hpp"
#include "tps/marginal.hpp"

namespace tps {

template <typename Scalar>
Scalar expit(Scalar a) {
    if (a >= Scalar(0)) return Scalar(1) / (Scalar(1) + std::exp(-a));
    const Scalar e = std::exp(a);
    return e / (Scalar(1) + e);
}

struct NewtonConfig {
    Eigen::VectorXd beta0;      // empty means all zeros
    double tol = 1e-8;          // max-abs coefficient change of an accepted step
    int max_iter = 100;
    int step_halving_max = 20;
    double coef_guard = 1e3;    // |beta_j| beyond this flags quasi-separation
    double eta_guard = 30.0;    // |linear predictor| beyond this at convergence
                                // means probabilities saturated at 0/1

    void validate() const;
};

// Roughness penalty subtracted from the log-likelihood:
// RP = -lambda1 * beta' (P1'P1 + P2'P2) beta.
struct RoughnessTerm {
    PenaltyPair pair;
    double lambda1 = 0.0;
};

// Marginalisation penalty subtracted from the log-likelihood:
// MP = -lambda2 * |K theta - theta0|^2 with theta = expit(D beta).
struct MarginalTerm {
    KernelSmoother kernel;
    Eigen::VectorXd theta0;
    double lambda2 = 0.0;
};

struct LogisticFit {
    ModelId model_id = ModelId::Fit0;
    Eigen::VectorXd beta;
    Eigen::VectorXd theta_hat;  // expit(D beta), clamped into [1e-12, 1 - 1e-12]
    MarginalCurve marginal;
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    bool converged = false;
    int iterations = 0;
    double final_step_norm = std::numeric_limits<double>::quiet_NaN();
    bool separation_flag = false;
};

// Binomial log-likelihood sum{y log theta + (1-y) log(1-theta)} with theta
// clamped away from 0 and 1 by 1e-12.
double loglik(const Eigen::Ref<const Eigen::VectorXd>& beta, const DesignMatrix& d,
              const Eigen::Ref<const Eigen::VectorXd>& y);

// Gradient and hessian of the full objective l(beta) + RP + MP.
std::pair<Eigen::VectorXd, Eigen::MatrixXd> score_and_hessian(
    const Eigen::Ref<const Eigen::VectorXd>& beta, const DesignMatrix& d,
    const Eigen::Ref<const Eigen::VectorXd>& y, const RoughnessTerm* roughness = nullptr,
    const MarginalTerm* marginal = nullptr);

// Maximizes l + RP + MP by Newton-Raphson with step halving; each accepted
// step does not decrease the objective. A non-converged result is returned
// flagged rather than thrown; a NaN objective throws NumericalError.
LogisticFit newton_raphson(const DesignMatrix& d, const Eigen::Ref<const Eigen::VectorXd>& y,
                           const NewtonConfig& config, const RoughnessTerm* roughness = nullptr,
                           const MarginalTerm* marginal = nullptr);

// Block-repeats the rows of (D, y) nrep times: (D; D; ...; D).
std::pair<DesignMatrix, Eigen::VectorXd> replicate_data(
    const DesignMatrix& d, const Eigen::Ref<const Eigen::VectorXd>& y, int nrep);

}  // namespace tps

#endif
