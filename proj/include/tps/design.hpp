#ifndef TPS_DESIGN_HPP
#define TPS_DESIGN_HPP

#include <vector>

#include <Eigen/Dense>

#include "tps/basis.hpp"
#include "tps/errors.hpp"

namespace tps {

// Univariate covers the single-covariate spline fits used when estimating a
// marginal from vertical data; it has pz = 0 and an empty second penalty.
enum class LayoutKind { Additive, Interaction, Univariate };

struct Layout {
    LayoutKind kind = LayoutKind::Additive;
    int px = 0;
    int pz = 0;
    static constexpr int intercept_col = 0;

    int num_columns() const {
        switch (kind) {
            case LayoutKind::Additive: return 1 + px + pz;
            case LayoutKind::Interaction: return 1 + px * pz;
            case LayoutKind::Univariate: return 1 + px;
        }
        return 0;
    }
};

struct DesignMatrix {
    Eigen::MatrixXd values;  // column 0 is the intercept
    Layout layout;
};

// Roughness matrices. P1 penalizes curvature along the x direction of the
// coefficient grid, P2 along z; both carry a zero column aligned with the
// intercept so the overall level is never penalized.
struct PenaltyPair {
    Eigen::MatrixXd p1;
    Eigen::MatrixXd p2;

    // Omega = P1'P1 + P2'P2, the quadratic-form matrix of the penalty.
    Eigen::MatrixXd penalty_gram() const {
        return p1.transpose() * p1 + p2.transpose() * p2;
    }
};

// D = (1 | Bx | Bz), size N x (1 + px + pz).
DesignMatrix build_additive_design(const BasisMatrix& bx, const BasisMatrix& bz);

// D = (1 | products), size N x (1 + px*pz). Non-intercept column 1 + j*pz + k
// holds Bx[:,j] .* Bz[:,k]  (j-major ordering, fixed).
DesignMatrix build_interaction_design(const BasisMatrix& bx, const BasisMatrix& bz);

// D = (1 | Bx), size N x (1 + px).
DesignMatrix build_univariate_design(const BasisMatrix& bx);

DesignMatrix subset_rows(const DesignMatrix& d, const std::vector<int>& rows);

PenaltyPair build_roughness(const Layout& layout);

}  // namespace tps

#endif
