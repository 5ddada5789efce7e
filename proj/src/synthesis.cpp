#include "datadiss/synthesis.hpp"

#include <stdexcept>

namespace datadiss {

namespace {

/// Gram lift with block (i, j) = block(i, j); block(j, i) must equal block(i, j)'.
template <class Block>
Matrix gram_lift(int d, Eigen::Index b, Block block) {
    Matrix lift(d * b, d * b);
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            lift.block(i * b, j * b, b, b) = block(i, j);
        }
    }
    return 0.5 * (lift + lift.transpose());
}

Matrix symmetrized(const Matrix& m) {
    return 0.5 * (m + m.transpose());
}

// Channel operator M(a) = m0 + sum_i p_i m_i for a Toeplitz coefficient t_i.
Matrix channel_constant(int h, Channel channel) {
    Matrix m = Matrix::Zero(2 * h, 2 * h);
    m.topLeftCorner(h, h).setIdentity();
    if (channel == Channel::r_to_e) {
        m.bottomLeftCorner(h, h).setIdentity();
    }
    return m;
}

Matrix channel_direction(const Matrix& t, Channel channel) {
    const auto h = t.rows();
    Matrix m = Matrix::Zero(2 * h, 2 * h);
    m.topRightCorner(h, h) = t;
    switch (channel) {
        case Channel::r_to_z: m.bottomRightCorner(h, h) = t; break;
        case Channel::r_to_e: break;
        case Channel::r_to_u: m.bottomLeftCorner(h, h) = t; break;
    }
    return m;
}

Matrix output_weight(const DissipativitySpec& spec, int h) {
    Matrix f = Matrix::Identity(2 * h, 2 * h);
    if (spec.filter) {
        f.bottomRightCorner(h, h) = toeplitz(pad_filter(*spec.filter, h));
    }
    return f;
}

void check_spec(const DataPage& page, const DissipativitySpec& spec, const ControllerBasis& basis) {
    if (basis.horizon() != page.horizon()) {
        throw std::invalid_argument("controller basis horizon " + std::to_string(basis.horizon())
                                    + " does not match L - nu = " + std::to_string(page.horizon()));
    }
    if (spec.delta > 0.0) {
        throw std::invalid_argument("noise relaxation delta must be <= 0");
    }
}

} // namespace

Matrix ControllerBasis::toeplitz_of(const Vector& p) const {
    if (p.size() != params()) {
        throw std::invalid_argument("controller parameter vector has " + std::to_string(p.size())
                                    + " entries, expected " + std::to_string(params()));
    }
    Matrix t = Matrix::Zero(horizon(), horizon());
    for (int i = 0; i < params(); ++i) {
        t += p(i) * basis[i];
    }
    return t;
}

ImpulseResponse ControllerBasis::impulse_of(const Vector& p) const {
    return ImpulseResponse(toeplitz_of(p).col(0));
}

ControllerBasis pi_basis(int horizon, double ts) {
    if (horizon < 1 || !(ts > 0.0)) {
        throw std::invalid_argument("pi_basis: requires horizon >= 1 and Ts > 0");
    }
    Matrix integral = Matrix::Zero(horizon, horizon);
    integral.triangularView<Eigen::StrictlyLower>().setConstant(ts);
    return ControllerBasis{"pi", {Matrix::Identity(horizon, horizon), integral}, {"Kp", "Ki"}, ts};
}

ControllerBasis fir_basis(int horizon, int taps) {
    if (taps < 1 || taps > horizon) {
        throw std::invalid_argument("fir_basis: requires 1 <= taps <= horizon");
    }
    ControllerBasis b{"fir", {}, {}, 0.0};
    for (int i = 0; i < taps; ++i) {
        Vector e = Vector::Zero(horizon);
        e(i) = 1.0;
        b.basis.push_back(toeplitz(e));
        b.labels.push_back("a" + std::to_string(i));
    }
    return b;
}

QmiProblem assemble_qmi(const DataPage& page, const DissipativitySpec& spec, const ControllerBasis& basis) {
    check_spec(page, spec, basis);
    const int h = page.horizon();
    const int d = basis.params();
    const Matrix pi = block_supply(spec.sr, h);
    const Matrix weight = output_weight(spec, h);
    const Matrix& tails = page.trajectory_basis;

    const Matrix phi0 = weight * channel_constant(h, spec.channel) * tails;
    std::vector<Matrix> phi;
    phi.reserve(d);
    for (int i = 0; i < d; ++i) {
        phi.push_back(weight * channel_direction(basis.basis[i], spec.channel) * tails);
    }

    const int m = static_cast<int>(tails.cols());
    QmiProblem problem;
    problem.q0 = symmetrized(-phi0.transpose() * pi * phi0) + spec.delta * Matrix::Identity(m, m);
    for (int i = 0; i < d; ++i) {
        const Matrix cross = phi0.transpose() * pi * phi[i];
        problem.linear.push_back(symmetrized(-(cross + cross.transpose())));
    }
    problem.quadratic.resize(d * (d + 1) / 2);
    for (int i = 0; i < d; ++i) {
        for (int j = i; j < d; ++j) {
            const Matrix vij = phi[i].transpose() * pi * phi[j];
            problem.quadratic[QmiProblem::pair_index(i, j, d)] =
                symmetrized(i == j ? Matrix(-vij) : Matrix(-(vij + vij.transpose())));
        }
    }
    problem.blocks = {m};
    problem.lifts = {gram_lift(d, m, [&](int i, int j) { return Matrix(-phi[i].transpose() * pi * phi[j]); })};
    problem.validate();
    return problem;
}

QmiProblem assemble_qmi_r_to_z_closed_form(const Matrix& n_u, const Matrix& n_y, const SupplyRate& sr,
                                           const ControllerBasis& basis) {
    const auto h = n_u.rows();
    const int d = basis.params();
    const auto id = Matrix::Identity(h, h);
    const Matrix q_h = sr.Q * id;
    const Matrix s_h = sr.S * id;
    const Matrix r_h = sr.R * id;
    const Matrix qs = q_h + s_h;
    const Matrix qst = q_h + s_h.transpose();
    const Matrix total = q_h + s_h + s_h.transpose() + r_h;

    QmiProblem problem;
    problem.q0 = -n_u.transpose() * q_h * n_u;
    for (int i = 0; i < d; ++i) {
        const Matrix& t = basis.basis[i];
        problem.linear.push_back(-n_u.transpose() * qs * t * n_y - n_y.transpose() * t.transpose() * qst * n_u);
    }
    auto v = [&](int i, int j) -> Matrix {
        return -n_y.transpose() * basis.basis[i].transpose() * total * basis.basis[j] * n_y;
    };
    problem.quadratic.resize(d * (d + 1) / 2);
    for (int i = 0; i < d; ++i) {
        for (int j = i; j < d; ++j) {
            problem.quadratic[QmiProblem::pair_index(i, j, d)] = i == j ? v(i, i) : Matrix(v(i, j) + v(j, i));
        }
    }
    problem.blocks = {static_cast<int>(n_u.cols())};
    problem.lifts = {gram_lift(d, n_u.cols(), v)};
    return problem;
}

Matrix direct_quadratic_form(const DataPage& page, const DissipativitySpec& spec, const ControllerBasis& basis,
                             const Vector& p) {
    check_spec(page, spec, basis);
    const int h = page.horizon();
    Matrix phi = m_matrix(basis.impulse_of(p), spec.channel) * page.trajectory_basis;
    if (spec.filter) {
        phi.bottomRows(h) = toeplitz(pad_filter(*spec.filter, h)) * phi.bottomRows(h);
    }
    const auto m = phi.cols();
    return -phi.transpose() * block_supply(spec.sr, h) * phi + spec.delta * Matrix::Identity(m, m);
}

QmiProblem augment(const std::vector<QmiProblem>& problems) {
    if (problems.empty()) {
        throw std::invalid_argument("augment: no problems given");
    }
    const int d = problems.front().params();
    int total = 0;
    for (const auto& p : problems) {
        if (p.params() != d) {
            throw std::invalid_argument("augment: problems have different parameter counts");
        }
        total += p.dim();
    }
    QmiProblem out;
    out.q0 = Matrix::Zero(total, total);
    out.linear.assign(d, Matrix::Zero(total, total));
    out.quadratic.assign(d * (d + 1) / 2, Matrix::Zero(total, total));
    int offset = 0;
    for (const auto& p : problems) {
        const int m = p.dim();
        out.q0.block(offset, offset, m, m) = p.q0;
        for (int i = 0; i < d; ++i) {
            out.linear[i].block(offset, offset, m, m) = p.linear[i];
        }
        for (std::size_t k = 0; k < p.quadratic.size(); ++k) {
            out.quadratic[k].block(offset, offset, m, m) = p.quadratic[k];
        }
        out.blocks.insert(out.blocks.end(), p.blocks.begin(), p.blocks.end());
        for (Matrix& lift : block_lifts(p)) {
            out.lifts.push_back(std::move(lift));
        }
        offset += m;
    }
    return out;
}

QmiProblem small_gain_constraint(const ControllerBasis& basis, double bound) {
    if (!(bound > 0.0)) {
        throw std::invalid_argument("small_gain_constraint: bound must be positive");
    }
    const int h = basis.horizon();
    const int d = basis.params();
    QmiProblem problem;
    problem.q0 = -bound * Matrix::Identity(h, h);
    problem.linear.assign(d, Matrix::Zero(h, h));
    problem.quadratic.resize(d * (d + 1) / 2);
    for (int i = 0; i < d; ++i) {
        for (int j = i; j < d; ++j) {
            const Matrix tij = basis.basis[i].transpose() * basis.basis[j];
            problem.quadratic[QmiProblem::pair_index(i, j, d)] =
                symmetrized(i == j ? tij : Matrix(tij + tij.transpose()));
        }
    }
    problem.blocks = {h};
    problem.lifts = {gram_lift(d, h, [&](int i, int j) { return Matrix(basis.basis[i].transpose() * basis.basis[j]); })};
    return problem;
}

bool r_to_z_is_convex(const SupplyRate& sr) {
    return sr.Q + 2.0 * sr.S + sr.R <= 0.0;
}

} // namespace datadiss
