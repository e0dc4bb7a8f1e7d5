#pragma once

#include <Eigen/Dense>

namespace oqho {

// Basis matrix of the antisymmetric 2x2 subspace; squares to -I.
inline Eigen::Matrix2d symplectic_unit() {
    Eigen::Matrix2d j;
    j << 0.0, 1.0, -1.0, 0.0;
    return j;
}

// One-point CCR matrix of a conjugate position/momentum pair.
inline Eigen::Matrix2d ccr_matrix() {
    return 0.5 * symplectic_unit();
}

inline Eigen::Matrix2d pauli1() {
    Eigen::Matrix2d s;
    s << 0.0, 1.0, 1.0, 0.0;
    return s;
}

inline Eigen::Matrix2d pauli3() {
    Eigen::Matrix2d s;
    s << 1.0, 0.0, 0.0, -1.0;
    return s;
}

// Field CCR structure matrix for m channels (m even): block Kronecker of the
// 2x2 antisymmetric unit with I_{m/2}. Orthogonal, antisymmetric, J^2 = -I_m.
inline Eigen::MatrixXd field_form(int m) {
    Eigen::MatrixXd j = Eigen::MatrixXd::Zero(m, m);
    const int h = m / 2;
    j.topRightCorner(h, h) = Eigen::MatrixXd::Identity(h, h);
    j.bottomLeftCorner(h, h) = -Eigen::MatrixXd::Identity(h, h);
    return j;
}

} // namespace oqho
