#ifndef TPS_BASIS_HPP
#define TPS_BASIS_HPP

#include <Eigen/Dense>

#include "tps/errors.hpp"

namespace tps {

// Univariate B-spline basis: `num_basis` columns of degree `degree` on a
// clamped (open-uniform) knot vector over [domain_lo, domain_hi].
struct BasisSpec {
    int degree = 3;
    int num_basis = 0;
    double domain_lo = 0.0;
    double domain_hi = 1.0;

    void validate() const {
        if (degree < 0) throw ConfigError("BasisSpec: degree must be non-negative");
        if (num_basis < degree + 1)
            throw ConfigError("BasisSpec: num_basis must be at least degree + 1");
        if (!(domain_lo < domain_hi))
            throw ConfigError("BasisSpec: domain_lo must be below domain_hi");
    }
};

struct KnotVector {
    Eigen::VectorXd knots;  // length num_basis + degree + 1, non-decreasing
};

struct BasisMatrix {
    Eigen::MatrixXd values;  // [n x num_basis], rows sum to 1
    BasisSpec spec;
};

// Clamped knot vector: boundary knots repeated degree+1 times, interior knots
// equidistant on the domain.
KnotVector make_knot_vector(const BasisSpec& spec);

// Evaluates all basis functions at each x via the Cox-de Boor recursion.
// x must lie inside [domain_lo, domain_hi]; the right endpoint is assigned to
// the final knot span so its row is (0,...,0,1)-supported rather than zero.
BasisMatrix eval_basis(const BasisSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& xs);

// Second-order difference matrix: (p-2) x p with rows (1, -2, 1).
Eigen::MatrixXd second_difference_matrix(int p);

namespace detail {

// Cox-de Boor triangle for the degree+1 basis functions that are nonzero on
// the knot span [knots[span], knots[span+1]). Writes values for basis indices
// span-degree .. span into `out` (length degree+1).
template <typename Scalar, typename KnotsDerived>
void cox_de_boor_span(const Eigen::MatrixBase<KnotsDerived>& knots, int span, int degree,
                      Scalar x, Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& out) {
    out.resize(degree + 1);
    out[0] = Scalar(1);
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> left(degree + 1), right(degree + 1);
    for (int j = 1; j <= degree; ++j) {
        left[j] = x - Scalar(knots[span + 1 - j]);
        right[j] = Scalar(knots[span + j]) - x;
        Scalar saved(0);
        for (int r = 0; r < j; ++r) {
            const Scalar denom = right[r + 1] + left[j - r];
            const Scalar temp = out[r] / denom;
            out[r] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        out[j] = saved;
    }
}

}  // namespace detail

}  // namespace tps

#endif
