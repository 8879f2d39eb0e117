#include "tps/reduce.hpp"

#include <algorithm>
#include <cmath>

#include "tps/design.hpp"
#include "tps/errors.hpp"
#include "tps/fit_logistic.hpp"

namespace tps {

namespace {

// Empirical quantile with linear interpolation between order statistics.
double quantile(const Eigen::Ref<const Eigen::VectorXd>& v, double q) {
    std::vector<double> s(v.data(), v.data() + v.size());
    std::sort(s.begin(), s.end());
    const double h = q * (static_cast<double>(s.size()) - 1.0);
    const std::size_t lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, s.size() - 1);
    return s[lo] + (h - lo) * (s[hi] - s[lo]);
}

}  // namespace

Eigen::VectorXd rescale_unit(const Eigen::Ref<const Eigen::VectorXd>& v) {
    const double lo = v.minCoeff();
    const double hi = v.maxCoeff();
    if (!(hi > lo)) throw ReductionError("rescale_unit: vector is constant");
    return (v.array() - lo) / (hi - lo);
}

ReducedVector glm_linear_predictor(const CovariateBlock& block,
                                   const Eigen::Ref<const Eigen::VectorXd>& y) {
    if (block.values.cols() < 1) throw ConfigError("glm_linear_predictor: empty block");
    if (block.values.rows() != y.size())
        throw ShapeError("glm_linear_predictor: block/response row mismatch");

    DesignMatrix d;
    d.layout = Layout{LayoutKind::Univariate, static_cast<int>(block.values.cols()), 0};
    d.values.resize(block.values.rows(), block.values.cols() + 1);
    d.values.col(0).setOnes();
    d.values.rightCols(block.values.cols()) = block.values;

    NewtonConfig config;
    const LogisticFit fit = newton_raphson(d, y, config);
    if (!fit.converged || fit.separation_flag)
        throw ReductionError(
            "glm_linear_predictor: logistic fit did not converge (possible separation); "
            "consider trimming extremes or PCA reduction");

    ReducedVector out;
    out.method = ReduceMethod::LinearPredictor;
    out.values = rescale_unit(d.values * fit.beta);
    return out;
}

ReducedVector pca_first_component(const CovariateBlock& block) {
    if (block.values.cols() < 1) throw ConfigError("pca_first_component: empty block");
    if (block.values.rows() < 2) throw ConfigError("pca_first_component: needs at least 2 rows");

    ReducedVector out;
    out.method = ReduceMethod::Pca;

    // Standardize columns, dropping the zero-variance ones.
    const Eigen::Index n = block.values.rows();
    std::vector<Eigen::Index> keep;
    Eigen::MatrixXd std_block(n, block.values.cols());
    for (Eigen::Index c = 0; c < block.values.cols(); ++c) {
        const Eigen::VectorXd col = block.values.col(c);
        const double mean = col.mean();
        const double sd = std::sqrt((col.array() - mean).square().sum() /
                                    (static_cast<double>(n) - 1.0));
        if (sd > 0.0) {
            std_block.col(static_cast<Eigen::Index>(keep.size())) = (col.array() - mean) / sd;
            keep.push_back(c);
        } else {
            out.dropped_columns.push_back(c < static_cast<Eigen::Index>(block.names.size())
                                              ? block.names[c]
                                              : "column_" + std::to_string(c));
        }
    }
    if (keep.empty()) throw ReductionError("pca_first_component: all columns constant");
    std_block.conservativeResize(n, static_cast<Eigen::Index>(keep.size()));

    const Eigen::MatrixXd cov =
        std_block.transpose() * std_block / (static_cast<double>(n) - 1.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    Eigen::VectorXd leading = eig.eigenvectors().col(cov.cols() - 1);

    Eigen::Index max_idx = 0;
    leading.cwiseAbs().maxCoeff(&max_idx);
    if (leading[max_idx] < 0.0) leading = -leading;

    out.values = rescale_unit(std_block * leading);
    return out;
}

TrimResult trim_extremes(const Eigen::Ref<const Eigen::VectorXd>& x,
                         const Eigen::Ref<const Eigen::VectorXd>& z,
                         const Eigen::Ref<const Eigen::VectorXd>& y, double lower_q,
                         double upper_q) {
    if (!(lower_q >= 0.0 && lower_q < upper_q && upper_q <= 1.0))
        throw ConfigError("trim_extremes: need 0 <= lower_q < upper_q <= 1");
    if (x.size() != z.size() || x.size() != y.size())
        throw ShapeError("trim_extremes: length mismatch");

    const double x_lo = quantile(x, lower_q), x_hi = quantile(x, upper_q);
    const double z_lo = quantile(z, lower_q), z_hi = quantile(z, upper_q);

    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < x.size(); ++i)
        if (x[i] >= x_lo && x[i] <= x_hi && z[i] >= z_lo && z[i] <= z_hi) keep.push_back(i);
    if (keep.empty()) throw ConfigError("trim_extremes: trimming removed every row");

    TrimResult r;
    r.removed = static_cast<int>(x.size() - static_cast<Eigen::Index>(keep.size()));
    r.x.resize(keep.size());
    r.z.resize(keep.size());
    r.y.resize(keep.size());
    for (std::size_t i = 0; i < keep.size(); ++i) {
        r.x[static_cast<Eigen::Index>(i)] = x[keep[i]];
        r.z[static_cast<Eigen::Index>(i)] = z[keep[i]];
        r.y[static_cast<Eigen::Index>(i)] = y[keep[i]];
    }
    r.x = rescale_unit(r.x);
    r.z = rescale_unit(r.z);
    return r;
}

}  // namespace tps
