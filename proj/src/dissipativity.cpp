#include "datadiss/dissipativity.hpp"

#include <cmath>
#include <stdexcept>

namespace datadiss {

Eigen::Matrix2d SupplyRate::matrix() const {
    Eigen::Matrix2d pi;
    pi << Q, S, S, R;
    return pi;
}

double SupplyRate::scale() const {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(matrix(), Eigen::EigenvaluesOnly);
    return eig.eigenvalues().cwiseAbs().maxCoeff();
}

Matrix block_supply(const SupplyRate& sr, int horizon) {
    if (horizon < 1) {
        throw std::invalid_argument("block_supply: horizon must be at least 1");
    }
    const auto id = Matrix::Identity(horizon, horizon);
    Matrix pi(2 * horizon, 2 * horizon);
    pi << sr.Q * id, sr.S * id, sr.S * id, sr.R * id;
    return pi;
}

double orthonormal_margin(const Matrix& basis, const Matrix& supply) {
    const Matrix w = basis.transpose() * supply * basis;
    Eigen::SelfAdjointEigenSolver<Matrix> eig(w, Eigen::EigenvaluesOnly);
    return eig.eigenvalues()(0);
}

Certificate make_certificate(double margin, int matrix_dim, const SupplyRate& sr) {
    Certificate cert;
    cert.margin = margin;
    cert.matrix_dim = matrix_dim;
    cert.tolerance = kPsdRelativeTolerance * sr.scale();
    cert.dissipative = margin >= -cert.tolerance;
    return cert;
}

Certificate check_open_loop(const DataPage& page, const SupplyRate& sr) {
    if (page.kernel.cols() == 0 || page.trajectory_dim() == 0) {
        throw std::invalid_argument("check_open_loop: nu too large for data length");
    }
    const double margin = orthonormal_margin(page.trajectory_basis, block_supply(sr, page.horizon()));
    return make_certificate(margin, static_cast<int>(page.kernel.cols()), sr);
}

double estimate_feedthrough(const DataPage& page) {
    // Least-squares coefficients c with input tail = e_0; then y_nu is the feedthrough.
    const auto bu = page.basis_u();
    Vector target = Vector::Zero(page.horizon());
    target(0) = 1.0;
    const Vector c = bu.colPivHouseholderQr().solve(target);
    const double residual = (bu * c - target).norm();
    if (page.trajectory_dim() == 0 || residual > 1e-6) {
        throw std::runtime_error("estimate_feedthrough: no representable trajectory with nonzero input at step nu "
                                 "(degenerate data)");
    }
    return (page.basis_y() * c)(0);
}

double finite_horizon_l2_gain(const DataPage& page, double tol) {
    if (!(tol > 0.0)) {
        throw std::invalid_argument("finite_horizon_l2_gain: tolerance must be positive");
    }
    auto passes = [&](double gamma) { return check_open_loop(page, SupplyRate::l2_gain(gamma)).dissipative; };
    double hi = 1.0;
    while (!passes(hi)) {
        hi *= 2.0;
        if (hi > 1e12) {
            throw std::runtime_error("finite_horizon_l2_gain: gain bracket exceeded 1e12");
        }
    }
    double lo = 0.0;
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        (passes(mid) ? hi : lo) = mid;
    }
    return hi;
}

Certificate oracle_check_operator(const Matrix& op, const SupplyRate& sr) {
    const auto h = op.rows();
    Matrix stacked(2 * h, h);
    stacked << Matrix::Identity(h, h), op;
    const Matrix w = stacked.transpose() * block_supply(sr, static_cast<int>(h)) * stacked;
    const Matrix g = stacked.transpose() * stacked;
    Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> pencil(w, g, Eigen::EigenvaluesOnly);
    return make_certificate(pencil.eigenvalues()(0), static_cast<int>(h), sr);
}

Certificate oracle_check_dissipativity(const StateSpace& sys, int horizon, const SupplyRate& sr) {
    return oracle_check_operator(toeplitz(impulse_response(sys, horizon).a), sr);
}

} // namespace datadiss
