#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>

#include "datadiss/types.hpp"

namespace datadiss {

/**
 * @brief SISO discrete-time state-space realization
 *
 *      x_{k+1} = A x_k + B u_k
 *      y_k     = C x_k + D u_k
 *
 * Construction validates dimensions (A n×n, B n×1, C 1×n, n ≥ 1).
 */
struct StateSpace {
    Matrix A;
    Matrix B;
    Matrix C;
    double D = 0.0;

    StateSpace(Matrix A_, Matrix B_, Matrix C_, double D_);

    [[nodiscard]] int order() const { return static_cast<int>(A.rows()); }
};

/// Paired input/output samples of equal length N ≥ 1.
struct Trajectory {
    Vector u;
    Vector y;

    Trajectory(Vector u_, Vector y_);

    [[nodiscard]] int size() const { return static_cast<int>(u.size()); }
};

/// Markov parameters a_0 = D, a_k = C A^{k-1} B.
struct ImpulseResponse {
    Vector a;

    explicit ImpulseResponse(Vector a_);

    [[nodiscard]] int size() const { return static_cast<int>(a.size()); }
};

/// Simulates from initial state x0. Throws std::invalid_argument on dimension mismatch.
[[nodiscard]] Trajectory simulate(const StateSpace& sys, const Vector& u, const Vector& x0);

/// Simulates from the zero initial state.
[[nodiscard]] Trajectory simulate(const StateSpace& sys, const Vector& u);

[[nodiscard]] ImpulseResponse impulse_response(const StateSpace& sys, int length);

/// Thrown when 1 + D_plant * D_controller vanishes (within 1e-12).
struct IllPosedLoop : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline constexpr double kWellPosedTolerance = 1e-12;

[[nodiscard]] bool is_well_posed(double plant_feedthrough, double controller_feedthrough);

/**
 * @brief Realization of the standard feedback loop with reference input r
 *
 * States are stacked [x_plant; x_controller]. The output equation selects z
 * (plant output), e = r - z, or u (controller output) depending on @p output.
 */
[[nodiscard]] StateSpace feedback_interconnect(const StateSpace& plant,
                                               const StateSpace& controller,
                                               Channel output = Channel::r_to_z);

/// i.i.d. uniform samples on [lo, hi), reproducible across platforms for a given seed.
[[nodiscard]] Vector pe_input_uniform(int length, double lo, double hi, std::uint64_t seed);

/// Linearized two-tank plant sampled at Ts = 0.5 s.
[[nodiscard]] StateSpace two_tank_plant();

inline constexpr double kTwoTankSamplingTime = 0.5;

/// Random stable minimal SISO system of order 1..3 with spectral radius below 0.95.
[[nodiscard]] StateSpace random_stable_siso(int order, std::uint64_t seed);

[[nodiscard]] StateSpace pure_gain(double gain);
[[nodiscard]] StateSpace unit_delay();

/// Shift-register realization of an FIR filter; exact for all Markov parameters.
[[nodiscard]] StateSpace fir_realization(const Vector& taps);

/// Discrete PI controller with impulse response (Kp, Ki*Ts, Ki*Ts, ...).
[[nodiscard]] StateSpace pi_realization(double kp, double ki, double ts);

[[nodiscard]] Matrix controllability_matrix(const StateSpace& sys);
[[nodiscard]] Matrix observability_matrix(const StateSpace& sys);

/// Full rank of both n-step matrices, with singular values above rank_tol * sigma_max.
[[nodiscard]] bool is_minimal(const StateSpace& sys, double rank_tol = 1e-9);

[[nodiscard]] double spectral_radius(const Matrix& A);

/// G(e^{j omega}) with omega in rad/sample.
[[nodiscard]] std::complex<double> frequency_response(const StateSpace& sys, double omega);

} // namespace datadiss
