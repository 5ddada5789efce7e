#include "datadiss/closed_loop.hpp"

#include <stdexcept>
#include <string>

namespace datadiss {

namespace {

void require_horizon(const DataPage& page, const ImpulseResponse& a) {
    if (a.size() != page.horizon()) {
        throw std::invalid_argument("controller impulse response has length " + std::to_string(a.size())
                                    + " but the horizon L - nu is " + std::to_string(page.horizon()));
    }
}

Matrix apply_output_filter(Matrix trajectories, const std::optional<Vector>& output_filter) {
    if (output_filter) {
        const auto h = trajectories.rows() / 2;
        const Matrix tw = toeplitz(pad_filter(*output_filter, static_cast<int>(h)));
        trajectories.bottomRows(h) = tw * trajectories.bottomRows(h);
    }
    return trajectories;
}

} // namespace

Matrix m_matrix(const ImpulseResponse& a, Channel channel) {
    const int h = a.size();
    const Matrix t = toeplitz(a.a);
    const auto id = Matrix::Identity(h, h);
    Matrix m = Matrix::Zero(2 * h, 2 * h);
    m.topLeftCorner(h, h) = id;
    m.topRightCorner(h, h) = t;
    switch (channel) {
        case Channel::r_to_z: m.bottomRightCorner(h, h) = t; break;
        case Channel::r_to_e: m.bottomLeftCorner(h, h) = id; break;
        case Channel::r_to_u: m.bottomLeftCorner(h, h) = t; break;
    }
    return m;
}

void require_well_posed(const DataPage& page, const ImpulseResponse& a) {
    const double d = estimate_feedthrough(page);
    if (!is_well_posed(d, a.a(0))) {
        throw IllPosedLoop("closed loop is not well-posed: 1 + D*a_0 = " + std::to_string(1.0 + d * a.a(0))
                           + " with data-estimated D = " + std::to_string(d));
    }
}

ClosedLoopMap closed_loop_map(const DataPage& page, const ImpulseResponse& a, Channel channel) {
    require_horizon(page, a);
    require_well_posed(page, a);
    Matrix tails(2 * page.horizon(), page.n_u.cols());
    tails << page.n_u, page.n_y;
    return ClosedLoopMap{m_matrix(a, channel) * tails, channel, a};
}

Certificate validate_closed_loop(const DataPage& page, const ImpulseResponse& a, Channel channel,
                                 const SupplyRate& sr, const std::optional<Vector>& output_filter) {
    require_horizon(page, a);
    require_well_posed(page, a);
    // Same column space as M J H V, but from an orthonormal basis of the plant
    // tails; the pencil is then positive definite whenever the loop is well-posed.
    const Matrix phi = apply_output_filter(m_matrix(a, channel) * page.trajectory_basis, output_filter);
    const Matrix w = phi.transpose() * block_supply(sr, page.horizon()) * phi;
    const Matrix g = phi.transpose() * phi;
    Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> pencil(w, g, Eigen::EigenvaluesOnly);
    return make_certificate(pencil.eigenvalues()(0), static_cast<int>(page.kernel.cols()), sr);
}

ClosedLoopResponse closed_loop_response(const DataPage& page, const ImpulseResponse& a, Channel channel,
                                        const Vector& r_ref) {
    require_horizon(page, a);
    require_well_posed(page, a);
    const int h = page.horizon();
    if (r_ref.size() != h) {
        throw std::invalid_argument("closed_loop_response: reference has length " + std::to_string(r_ref.size())
                                    + " but the horizon is " + std::to_string(h));
    }
    const Matrix phi = m_matrix(a, channel) * page.trajectory_basis;
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(phi.topRows(h));
    const Vector c = cod.solve(r_ref);
    ClosedLoopResponse out;
    out.residual = (phi.topRows(h) * c - r_ref).norm();
    if (out.residual > 1e-6 * r_ref.norm()) {
        throw std::runtime_error("closed_loop_response: reference not representable (residual "
                                 + std::to_string(out.residual)
                                 + "); check excitation of the data and well-posedness");
    }
    out.output = phi.bottomRows(h) * c;
    return out;
}

Vector pad_filter(const Vector& filter, int horizon) {
    if (filter.size() < 1 || filter.size() > horizon) {
        throw std::invalid_argument("output filter must have between 1 and " + std::to_string(horizon) + " taps, got "
                                    + std::to_string(filter.size()));
    }
    Vector w = Vector::Zero(horizon);
    w.head(filter.size()) = filter;
    return w;
}

Matrix oracle_closed_loop_operator(const StateSpace& plant, const ImpulseResponse& a, Channel channel) {
    const StateSpace loop = feedback_interconnect(plant, fir_realization(a.a), channel);
    return toeplitz(impulse_response(loop, a.size()).a);
}

Certificate oracle_check_closed_loop(const StateSpace& plant, const ImpulseResponse& a, Channel channel,
                                     const SupplyRate& sr, const std::optional<Vector>& output_filter) {
    Matrix op = oracle_closed_loop_operator(plant, a, channel);
    if (output_filter) {
        op = toeplitz(pad_filter(*output_filter, a.size())) * op;
    }
    return oracle_check_operator(op, sr);
}

} // namespace datadiss
