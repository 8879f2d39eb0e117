#include "tps/basis.hpp"

#include <string>

namespace tps {

KnotVector make_knot_vector(const BasisSpec& spec) {
    spec.validate();
    const int q = spec.degree;
    const int p = spec.num_basis;
    const int n_interior = p - q - 1;
    const int n_knots = p + q + 1;

    Eigen::VectorXd knots(n_knots);
    knots.head(q + 1).setConstant(spec.domain_lo);
    knots.tail(q + 1).setConstant(spec.domain_hi);
    const double step = (spec.domain_hi - spec.domain_lo) / (n_interior + 1);
    for (int i = 1; i <= n_interior; ++i) knots[q + i] = spec.domain_lo + i * step;
    return KnotVector{std::move(knots)};
}

BasisMatrix eval_basis(const BasisSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& xs) {
    const KnotVector kv = make_knot_vector(spec);
    const int q = spec.degree;
    const int p = spec.num_basis;

    BasisMatrix out;
    out.spec = spec;
    out.values = Eigen::MatrixXd::Zero(xs.size(), p);

    Eigen::VectorXd row;
    for (Eigen::Index i = 0; i < xs.size(); ++i) {
        const double x = xs[i];
        if (x < spec.domain_lo || x > spec.domain_hi)
            throw DomainError("eval_basis: x = " + std::to_string(x) + " outside [" +
                              std::to_string(spec.domain_lo) + ", " +
                              std::to_string(spec.domain_hi) + "]");
        // Knot span index: largest span with knots[span] <= x < knots[span+1];
        // x at the right endpoint falls into the last span.
        int span = q;
        while (span < p - 1 && x >= kv.knots[span + 1]) ++span;
        detail::cox_de_boor_span<double>(kv.knots, span, q, x, row);
        out.values.block(i, span - q, 1, q + 1) = row.transpose();
    }
    return out;
}

Eigen::MatrixXd second_difference_matrix(int p) {
    if (p < 3) throw ConfigError("second_difference_matrix: p must be at least 3");
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(p - 2, p);
    for (int r = 0; r < p - 2; ++r) {
        d(r, r) = 1.0;
        d(r, r + 1) = -2.0;
        d(r, r + 2) = 1.0;
    }
    return d;
}

}  // namespace tps
