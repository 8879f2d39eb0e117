#include "tps/design.hpp"

#include <string>
#include <vector>

namespace tps {

namespace {

void check_rows(const BasisMatrix& bx, const BasisMatrix& bz) {
    if (bx.values.rows() != bz.values.rows())
        throw ShapeError("design: Bx has " + std::to_string(bx.values.rows()) +
                         " rows but Bz has " + std::to_string(bz.values.rows()));
}

}  // namespace

DesignMatrix build_additive_design(const BasisMatrix& bx, const BasisMatrix& bz) {
    check_rows(bx, bz);
    const Eigen::Index n = bx.values.rows();
    const int px = static_cast<int>(bx.values.cols());
    const int pz = static_cast<int>(bz.values.cols());
    Layout layout{LayoutKind::Additive, px, pz};

    DesignMatrix d;
    d.layout = layout;
    d.values.resize(n, layout.num_columns());
    d.values.col(0).setOnes();
    d.values.middleCols(1, px) = bx.values;
    d.values.middleCols(1 + px, pz) = bz.values;
    return d;
}

DesignMatrix build_interaction_design(const BasisMatrix& bx, const BasisMatrix& bz) {
    check_rows(bx, bz);
    const Eigen::Index n = bx.values.rows();
    const int px = static_cast<int>(bx.values.cols());
    const int pz = static_cast<int>(bz.values.cols());
    Layout layout{LayoutKind::Interaction, px, pz};

    DesignMatrix d;
    d.layout = layout;
    d.values.resize(n, layout.num_columns());
    d.values.col(0).setOnes();
    for (int j = 0; j < px; ++j)
        for (int k = 0; k < pz; ++k)
            d.values.col(1 + j * pz + k) = bx.values.col(j).cwiseProduct(bz.values.col(k));
    return d;
}

DesignMatrix build_univariate_design(const BasisMatrix& bx) {
    const Eigen::Index n = bx.values.rows();
    const int px = static_cast<int>(bx.values.cols());
    Layout layout{LayoutKind::Univariate, px, 0};

    DesignMatrix d;
    d.layout = layout;
    d.values.resize(n, layout.num_columns());
    d.values.col(0).setOnes();
    d.values.rightCols(px) = bx.values;
    return d;
}

DesignMatrix subset_rows(const DesignMatrix& d, const std::vector<int>& rows) {
    DesignMatrix out;
    out.layout = d.layout;
    out.values.resize(static_cast<Eigen::Index>(rows.size()), d.values.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) out.values.row(static_cast<Eigen::Index>(i)) = d.values.row(rows[i]);
    return out;
}

PenaltyPair build_roughness(const Layout& layout) {
    const int px = layout.px;
    const int pz = layout.pz;
    const int m = layout.num_columns();
    PenaltyPair p;

    switch (layout.kind) {
        case LayoutKind::Additive: {
            if (px < 3 || pz < 3)
                throw ConfigError("build_roughness: additive layout needs px, pz >= 3");
            p.p1 = Eigen::MatrixXd::Zero(px - 2, m);
            p.p1.middleCols(1, px) = second_difference_matrix(px);
            p.p2 = Eigen::MatrixXd::Zero(pz - 2, m);
            p.p2.middleCols(1 + px, pz) = second_difference_matrix(pz);
            break;
        }
        case LayoutKind::Interaction: {
            if (px < 3 || pz < 3)
                throw ConfigError("build_roughness: interaction layout needs px, pz >= 3");
            // Coefficient grid is vectorized j-major (x index j, z index k at
            // column 1 + j*pz + k). Differencing along x for each fixed k:
            const Eigen::MatrixXd dx = second_difference_matrix(px);
            p.p1 = Eigen::MatrixXd::Zero((px - 2) * pz, m);
            for (int r = 0; r < px - 2; ++r)
                for (int k = 0; k < pz; ++k)
                    for (int j = 0; j < px; ++j)
                        p.p1(r * pz + k, 1 + j * pz + k) = dx(r, j);
            // Differencing along z within each j block:
            const Eigen::MatrixXd dz = second_difference_matrix(pz);
            p.p2 = Eigen::MatrixXd::Zero(px * (pz - 2), m);
            for (int j = 0; j < px; ++j)
                for (int r = 0; r < pz - 2; ++r)
                    for (int k = 0; k < pz; ++k)
                        p.p2(j * (pz - 2) + r, 1 + j * pz + k) = dz(r, k);
            break;
        }
        case LayoutKind::Univariate: {
            if (px < 3) throw ConfigError("build_roughness: univariate layout needs px >= 3");
            p.p1 = Eigen::MatrixXd::Zero(px - 2, m);
            p.p1.rightCols(px) = second_difference_matrix(px);
            p.p2 = Eigen::MatrixXd::Zero(0, m);
            break;
        }
    }
    return p;
}

}  // namespace tps
