#include "tps/fit_logistic.hpp"

#include <limits>
#include <string>

#include "tps/errors.hpp"
#include "tps/linalg.hpp"

namespace tps {

namespace {

constexpr double kThetaClamp = 1e-12;

Eigen::VectorXd probabilities(const DesignMatrix& d, const Eigen::VectorXd& beta) {
    return (d.values * beta).unaryExpr([](double a) { return expit(a); });
}

Eigen::VectorXd clamp_probs(Eigen::VectorXd theta) {
    return theta.unaryExpr([](double t) {
        return std::min(1.0 - kThetaClamp, std::max(kThetaClamp, t));
    });
}

void check_binary(const Eigen::Ref<const Eigen::VectorXd>& y) {
    for (Eigen::Index i = 0; i < y.size(); ++i)
        if (y[i] != 0.0 && y[i] != 1.0)
            throw DomainError("logistic fit: response must be 0/1");
}

double objective_value(const DesignMatrix& d, const Eigen::Ref<const Eigen::VectorXd>& y,
                       const Eigen::VectorXd& beta, const Eigen::MatrixXd* omega,
                       double lambda1, const MarginalTerm* marginal) {
    double value = loglik(beta, d, y);
    if (omega != nullptr && lambda1 > 0.0) value -= lambda1 * beta.dot(*omega * beta);
    if (marginal != nullptr && marginal->lambda2 > 0.0) {
        const Eigen::VectorXd theta = probabilities(d, beta);
        value -= marginal->lambda2 *
                 (marginal->kernel.weights * theta - marginal->theta0).squaredNorm();
    }
    return value;
}

}  // namespace

void NewtonConfig::validate() const {
    if (!(tol > 0.0)) throw ConfigError("NewtonConfig: tol must be positive");
    if (max_iter < 1) throw ConfigError("NewtonConfig: max_iter must be at least 1");
    if (step_halving_max < 0) throw ConfigError("NewtonConfig: step_halving_max negative");
}

double loglik(const Eigen::Ref<const Eigen::VectorXd>& beta, const DesignMatrix& d,
              const Eigen::Ref<const Eigen::VectorXd>& y) {
    if (beta.size() != d.values.cols()) throw ShapeError("loglik: beta length mismatch");
    if (y.size() != d.values.rows()) throw ShapeError("loglik: y length mismatch");
    const Eigen::VectorXd theta = clamp_probs(probabilities(d, beta));
    double value = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i)
        value += y[i] * std::log(theta[i]) + (1.0 - y[i]) * std::log(1.0 - theta[i]);
    return value;
}

std::pair<Eigen::VectorXd, Eigen::MatrixXd> score_and_hessian(
    const Eigen::Ref<const Eigen::VectorXd>& beta, const DesignMatrix& d,
    const Eigen::Ref<const Eigen::VectorXd>& y, const RoughnessTerm* roughness,
    const MarginalTerm* marginal) {
    const Eigen::MatrixXd& dv = d.values;
    if (beta.size() != dv.cols()) throw ShapeError("score_and_hessian: beta length mismatch");
    if (y.size() != dv.rows()) throw ShapeError("score_and_hessian: y length mismatch");

    const Eigen::VectorXd theta = probabilities(d, beta);
    const Eigen::ArrayXd w = theta.array() * (1.0 - theta.array());

    Eigen::VectorXd grad = dv.transpose() * (y - theta);
    Eigen::MatrixXd hess = -(dv.transpose() * w.matrix().asDiagonal() * dv);

    if (roughness != nullptr && roughness->lambda1 > 0.0) {
        if (roughness->pair.p1.cols() != dv.cols())
            throw ShapeError("score_and_hessian: penalty not conformable with design");
        const Eigen::MatrixXd omega = roughness->pair.penalty_gram();
        grad -= 2.0 * roughness->lambda1 * (omega * beta);
        hess -= 2.0 * roughness->lambda1 * omega;
    }

    if (marginal != nullptr && marginal->lambda2 > 0.0) {
        const Eigen::MatrixXd& k = marginal->kernel.weights;
        if (k.cols() != dv.rows())
            throw ShapeError("score_and_hessian: kernel not conformable with design");
        if (marginal->theta0.size() != k.rows())
            throw ShapeError("score_and_hessian: marginal target length mismatch");
        // MP = -lambda2 |K theta - theta0|^2 with d theta_i / d beta_j =
        // d_ij w_i and d^2 theta_i / d beta_j d beta_k = d_ij d_ik u_i.
        const Eigen::VectorXd resid = k * theta - marginal->theta0;
        const Eigen::VectorXd s = k.transpose() * resid;
        const Eigen::ArrayXd u = (1.0 - 2.0 * theta.array()) * w;
        grad -= 2.0 * marginal->lambda2 * (dv.transpose() * (s.array() * w).matrix());
        const Eigen::MatrixXd m = k * (w.matrix().asDiagonal() * dv);
        hess -= 2.0 * marginal->lambda2 *
                (m.transpose() * m +
                 dv.transpose() * (s.array() * u).matrix().asDiagonal() * dv);
    }
    return {std::move(grad), std::move(hess)};
}

LogisticFit newton_raphson(const DesignMatrix& d, const Eigen::Ref<const Eigen::VectorXd>& y,
                           const NewtonConfig& config, const RoughnessTerm* roughness,
                           const MarginalTerm* marginal) {
    config.validate();
    check_binary(y);
    const Eigen::Index m = d.values.cols();

    LogisticFit fit;
    fit.model_id = (marginal != nullptr) ? ModelId::Fit2
                   : (roughness != nullptr) ? ModelId::Fit1
                                            : ModelId::Fit0;
    fit.lambda1 = (roughness != nullptr) ? roughness->lambda1 : 0.0;
    fit.lambda2 = (marginal != nullptr) ? marginal->lambda2 : 0.0;

    Eigen::VectorXd beta = config.beta0.size() == 0 ? Eigen::VectorXd::Zero(m) : config.beta0;
    if (beta.size() != m) throw ShapeError("newton_raphson: beta0 length mismatch");

    std::optional<Eigen::MatrixXd> omega;
    if (roughness != nullptr) omega = roughness->pair.penalty_gram();
    const Eigen::MatrixXd* omega_ptr = omega ? &*omega : nullptr;
    const double lambda1 = fit.lambda1;

    double value = objective_value(d, y, beta, omega_ptr, lambda1, marginal);
    if (std::isnan(value)) throw NumericalError("newton_raphson: objective NaN at start");

    for (int iter = 1; iter <= config.max_iter; ++iter) {
        fit.iterations = iter;
        auto [grad, hess] = score_and_hessian(beta, d, y, roughness, marginal);

        // The structurally singular hessian turns a pure-roundoff gradient
        // into an arbitrary step, so a negligible gradient is itself a
        // convergence signal.
        const double grad_norm = grad.cwiseAbs().maxCoeff();
        if (grad_norm <= 1e-9 * (1.0 + std::abs(value))) {
            fit.converged = true;
            fit.final_step_norm = 0.0;
            break;
        }
        const Eigen::VectorXd step = solve_symmetric(hess, grad);

        // beta_{k+1} = beta_k - H^{-1} g, halved until the objective does not
        // decrease.
        double scale = 1.0;
        bool accepted = false;
        Eigen::VectorXd beta_try;
        double value_try = 0.0;
        for (int h = 0; h <= config.step_halving_max; ++h) {
            beta_try = beta - scale * step;
            value_try = objective_value(d, y, beta_try, omega_ptr, lambda1, marginal);
            if (std::isnan(value_try))
                throw NumericalError("newton_raphson: objective NaN at iteration " +
                                     std::to_string(iter));
            if (value_try >= value) {
                accepted = true;
                break;
            }
            scale *= 0.5;
        }
        if (!accepted) {
            // Objective numerically unimprovable; call it converged only when
            // the gradient is small enough to be at a stationary point.
            if (grad_norm <= 1e-6 * (1.0 + std::abs(value))) {
                fit.converged = true;
                fit.final_step_norm = 0.0;
            }
            break;
        }

        fit.final_step_norm = (scale * step).cwiseAbs().maxCoeff();
        beta = beta_try;
        value = value_try;

        if (beta.cwiseAbs().maxCoeff() > config.coef_guard) {
            fit.separation_flag = true;
            break;
        }
        if (fit.final_step_norm < config.tol) {
            fit.converged = true;
            break;
        }
    }

    fit.beta = beta;
    if ((d.values * beta).cwiseAbs().maxCoeff() > config.eta_guard) fit.separation_flag = true;
    fit.theta_hat = clamp_probs(probabilities(d, beta));
    return fit;
}

std::pair<DesignMatrix, Eigen::VectorXd> replicate_data(
    const DesignMatrix& d, const Eigen::Ref<const Eigen::VectorXd>& y, int nrep) {
    if (nrep < 1) throw ConfigError("replicate_data: nrep must be at least 1");
    if (d.values.rows() != y.size()) throw ShapeError("replicate_data: row mismatch");
    const Eigen::Index n = d.values.rows();

    DesignMatrix dr;
    dr.layout = d.layout;
    dr.values.resize(n * nrep, d.values.cols());
    Eigen::VectorXd yr(n * nrep);
    for (int r = 0; r < nrep; ++r) {
        dr.values.middleRows(r * n, n) = d.values;
        yr.segment(r * n, n) = y;
    }
    return {std::move(dr), std::move(yr)};
}

}  // namespace tps
