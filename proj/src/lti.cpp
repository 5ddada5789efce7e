#include "datadiss/lti.hpp"

#include <cmath>
#include <random>
#include <string>

namespace datadiss {

namespace {

std::string dims(const Matrix& m) {
    return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

// Relative numerical rank; zero matrices have rank 0.
int relative_rank(const Matrix& m, double rank_tol) {
    if (m.size() == 0) {
        return 0;
    }
    Eigen::JacobiSVD<Matrix> svd(m);
    const auto& s = svd.singularValues();
    if (s.size() == 0 || s(0) == 0.0) {
        return 0;
    }
    int rank = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        if (s(i) > rank_tol * s(0)) {
            ++rank;
        }
    }
    return rank;
}

double smallest_relative_singular_value(const Matrix& m) {
    Eigen::JacobiSVD<Matrix> svd(m);
    const auto& s = svd.singularValues();
    return s(0) > 0.0 ? s(s.size() - 1) / s(0) : 0.0;
}

} // namespace

StateSpace::StateSpace(Matrix A_, Matrix B_, Matrix C_, double D_)
    : A(std::move(A_)), B(std::move(B_)), C(std::move(C_)), D(D_) {
    const auto n = A.rows();
    if (n < 1 || A.cols() != n) {
        throw std::invalid_argument("StateSpace: A must be square with n >= 1, got " + dims(A));
    }
    if (B.rows() != n || B.cols() != 1) {
        throw std::invalid_argument("StateSpace: B must be " + std::to_string(n) + "x1, got " + dims(B));
    }
    if (C.rows() != 1 || C.cols() != n) {
        throw std::invalid_argument("StateSpace: C must be 1x" + std::to_string(n) + ", got " + dims(C));
    }
}

Trajectory::Trajectory(Vector u_, Vector y_) : u(std::move(u_)), y(std::move(y_)) {
    if (u.size() < 1) {
        throw std::invalid_argument("Trajectory: needs at least one sample");
    }
    if (u.size() != y.size()) {
        throw std::invalid_argument("Trajectory: input has " + std::to_string(u.size()) + " samples but output has "
                                    + std::to_string(y.size()));
    }
}

ImpulseResponse::ImpulseResponse(Vector a_) : a(std::move(a_)) {
    if (a.size() < 1) {
        throw std::invalid_argument("ImpulseResponse: length must be at least 1");
    }
}

Trajectory simulate(const StateSpace& sys, const Vector& u, const Vector& x0) {
    if (u.size() < 1) {
        throw std::invalid_argument("simulate: input sequence is empty");
    }
    if (x0.size() != sys.order()) {
        throw std::invalid_argument("simulate: x0 has dimension " + std::to_string(x0.size())
                                    + " but the system has order " + std::to_string(sys.order()));
    }
    Vector y(u.size());
    Vector x = x0;
    for (Eigen::Index k = 0; k < u.size(); ++k) {
        y(k) = (sys.C * x)(0) + sys.D * u(k);
        x = sys.A * x + sys.B * u(k);
    }
    return Trajectory(u, std::move(y));
}

Trajectory simulate(const StateSpace& sys, const Vector& u) {
    return simulate(sys, u, Vector::Zero(sys.order()));
}

ImpulseResponse impulse_response(const StateSpace& sys, int length) {
    if (length < 1) {
        throw std::invalid_argument("impulse_response: length must be at least 1");
    }
    Vector a(length);
    a(0) = sys.D;
    Vector x = sys.B;
    for (int k = 1; k < length; ++k) {
        a(k) = (sys.C * x)(0);
        x = sys.A * x;
    }
    return ImpulseResponse(std::move(a));
}

bool is_well_posed(double plant_feedthrough, double controller_feedthrough) {
    return std::abs(1.0 + plant_feedthrough * controller_feedthrough) > kWellPosedTolerance;
}

StateSpace feedback_interconnect(const StateSpace& plant, const StateSpace& controller, Channel output) {
    const double d = plant.D;
    const double dc = controller.D;
    if (!is_well_posed(d, dc)) {
        throw IllPosedLoop("feedback_interconnect: 1 + D*Dc = " + std::to_string(1.0 + d * dc)
                           + " vanishes, the loop is not well-posed");
    }
    const int np = plant.order();
    const int nc = controller.order();
    const int n = np + nc;
    const double s = 1.0 / (1.0 + d * dc);

    // u = Ku_x x + Ku_r r, solved from u = Cc xc + Dc (r - C xp - D u).
    Matrix ku_x(1, n);
    ku_x << -s * dc * plant.C, s * controller.C;
    const double ku_r = s * dc;

    // Open-loop part before substituting u: xp+ = A xp + B u, xc+ = Ac xc + Bc (r - C xp - D u).
    Matrix a_open = Matrix::Zero(n, n);
    a_open.topLeftCorner(np, np) = plant.A;
    a_open.bottomLeftCorner(nc, np) = -controller.B * plant.C;
    a_open.bottomRightCorner(nc, nc) = controller.A;
    Matrix b_u(n, 1);
    b_u << plant.B, -controller.B * d;
    Matrix b_r = Matrix::Zero(n, 1);
    b_r.bottomRows(nc) = controller.B;

    Matrix a_cl = a_open + b_u * ku_x;
    Matrix b_cl = b_r + b_u * ku_r;

    Matrix cz(1, n);
    cz << plant.C, Matrix::Zero(1, nc);
    cz += d * ku_x;
    const double dz = d * ku_r;

    switch (output) {
        case Channel::r_to_z: return StateSpace(a_cl, b_cl, cz, dz);
        case Channel::r_to_e: return StateSpace(a_cl, b_cl, -cz, 1.0 - dz);
        case Channel::r_to_u: return StateSpace(a_cl, b_cl, ku_x, ku_r);
    }
    throw std::invalid_argument("feedback_interconnect: unknown channel");
}

Vector pe_input_uniform(int length, double lo, double hi, std::uint64_t seed) {
    if (length < 1) {
        throw std::invalid_argument("pe_input_uniform: length must be at least 1");
    }
    if (!(lo < hi)) {
        throw std::invalid_argument("pe_input_uniform: requires lo < hi");
    }
    // 53 high bits of mt19937_64 mapped to [0,1); std::uniform_real_distribution is
    // implementation-defined, this mapping is not.
    std::mt19937_64 gen(seed);
    Vector u(length);
    for (int k = 0; k < length; ++k) {
        const double unit = static_cast<double>(gen() >> 11) * 0x1.0p-53;
        u(k) = lo + (hi - lo) * unit;
    }
    return u;
}

StateSpace two_tank_plant() {
    Matrix A(2, 2);
    A << 0.9677, 0.0, 0.0317, 0.9677;
    Matrix B(2, 1);
    B << 0.1363, 0.0022;
    Matrix C(1, 2);
    C << 0.0, 1.0;
    return StateSpace(A, B, C, 0.0);
}

StateSpace random_stable_siso(int order, std::uint64_t seed) {
    if (order < 1 || order > 3) {
        throw std::invalid_argument("random_stable_siso: order must be in 1..3");
    }
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> radius(0.2, 0.9);
    auto draw = [&](int rows, int cols) {
        Matrix m(rows, cols);
        for (int i = 0; i < rows; ++i) {
            for (int j = 0; j < cols; ++j) {
                m(i, j) = normal(gen);
            }
        }
        return m;
    };

    // Fixtures feed numerical oracles, so besides exact minimality the
    // controllability/observability matrices must be reasonably conditioned.
    constexpr int kMaxAttempts = 1000;
    constexpr double kConditioning = 1e-3;
    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
        Matrix A = draw(order, order);
        const double rho = spectral_radius(A);
        if (rho < 1e-6) {
            continue;
        }
        A *= radius(gen) / rho;
        StateSpace sys(A, draw(order, 1), draw(1, order), normal(gen));
        if (spectral_radius(sys.A) >= 0.95 || !is_minimal(sys)) {
            continue;
        }
        if (smallest_relative_singular_value(controllability_matrix(sys)) < kConditioning
            || smallest_relative_singular_value(observability_matrix(sys)) < kConditioning) {
            continue;
        }
        return sys;
    }
    throw std::logic_error("random_stable_siso: no admissible system within the attempt budget");
}

StateSpace pure_gain(double gain) {
    return StateSpace(Matrix::Zero(1, 1), Matrix::Zero(1, 1), Matrix::Zero(1, 1), gain);
}

StateSpace unit_delay() {
    return StateSpace(Matrix::Zero(1, 1), Matrix::Ones(1, 1), Matrix::Ones(1, 1), 0.0);
}

StateSpace fir_realization(const Vector& taps) {
    if (taps.size() < 1) {
        throw std::invalid_argument("fir_realization: needs at least one tap");
    }
    // State holds the last n inputs; a one-tap filter keeps a dummy state.
    const int n = std::max<int>(1, static_cast<int>(taps.size()) - 1);
    Matrix A = Matrix::Zero(n, n);
    for (int i = 1; i < n; ++i) {
        A(i, i - 1) = 1.0;
    }
    Matrix B = Matrix::Zero(n, 1);
    B(0, 0) = 1.0;
    Matrix C = Matrix::Zero(1, n);
    for (Eigen::Index i = 1; i < taps.size(); ++i) {
        C(0, i - 1) = taps(i);
    }
    return StateSpace(A, B, C, taps(0));
}

StateSpace pi_realization(double kp, double ki, double ts) {
    return StateSpace(Matrix::Ones(1, 1), Matrix::Ones(1, 1), Matrix::Constant(1, 1, ki * ts), kp);
}

Matrix controllability_matrix(const StateSpace& sys) {
    const int n = sys.order();
    Matrix R(n, n);
    R.col(0) = sys.B;
    for (int i = 1; i < n; ++i) {
        R.col(i) = sys.A * R.col(i - 1);
    }
    return R;
}

Matrix observability_matrix(const StateSpace& sys) {
    const int n = sys.order();
    Matrix O(n, n);
    O.row(0) = sys.C;
    for (int i = 1; i < n; ++i) {
        O.row(i) = O.row(i - 1) * sys.A;
    }
    return O;
}

bool is_minimal(const StateSpace& sys, double rank_tol) {
    return relative_rank(controllability_matrix(sys), rank_tol) == sys.order()
           && relative_rank(observability_matrix(sys), rank_tol) == sys.order();
}

double spectral_radius(const Matrix& A) {
    return A.eigenvalues().cwiseAbs().maxCoeff();
}

std::complex<double> frequency_response(const StateSpace& sys, double omega) {
    using Complex = std::complex<double>;
    const int n = sys.order();
    const Complex z = std::polar(1.0, omega);
    Eigen::MatrixXcd zi_minus_a = z * Eigen::MatrixXcd::Identity(n, n) - sys.A.cast<Complex>();
    Eigen::VectorXcd x = zi_minus_a.partialPivLu().solve(sys.B.cast<Complex>());
    return (sys.C.cast<Complex>() * x)(0) + sys.D;
}

} // namespace datadiss
