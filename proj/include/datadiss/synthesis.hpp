#pragma once

#include <optional>
#include <string>
#include <vector>

#include "datadiss/closed_loop.hpp"
#include "datadiss/qmi_solver.hpp"

namespace datadiss {

/// Controller structure T(a(p)) = sum_i p_i basis[i] over the horizon L - nu.
struct ControllerBasis {
    std::string kind; ///< "pi" or "fir"
    std::vector<Matrix> basis;
    std::vector<std::string> labels;
    double sampling_time = 0.0; ///< PI only

    [[nodiscard]] int horizon() const { return static_cast<int>(basis.front().rows()); }
    [[nodiscard]] int params() const { return static_cast<int>(basis.size()); }

    [[nodiscard]] Matrix toeplitz_of(const Vector& p) const;

    /// First column of toeplitz_of(p).
    [[nodiscard]] ImpulseResponse impulse_of(const Vector& p) const;
};

/// T_0 = I, T_1 strictly lower triangular with every entry Ts; parameters (Kp, Ki).
[[nodiscard]] ControllerBasis pi_basis(int horizon, double ts);

/// T_i = ones on the i-th subdiagonal, i = 0..taps-1; then a(p) = p.
[[nodiscard]] ControllerBasis fir_basis(int horizon, int taps);

/// One closed-loop requirement: channel, supply rate, optional output weight, noise relaxation delta <= 0.
struct DissipativitySpec {
    Channel channel = Channel::r_to_z;
    SupplyRate sr;
    std::optional<Vector> filter;
    double delta = 0.0;
};

/**
 * Standard-form QMI for one specification, with feasibility Q(p) <= 0:
 *
 *   Q(p) = -Phi(p)' Pi Phi(p) + delta I,  Phi(p) = F M(a(p)) [N_u; N_y]
 *
 * where F = blkdiag(I, T(filter)) and [N_u; N_y] is the page's orthonormal
 * trajectory basis. Coefficients come from expanding Phi(p), which is affine
 * in p for every channel.
 */
[[nodiscard]] QmiProblem assemble_qmi(const DataPage& page, const DissipativitySpec& spec,
                                      const ControllerBasis& basis);

/// The r -> z coefficients written out term by term (Q0, Q_i, V_ij, Q_ij); no filter, delta = 0.
[[nodiscard]] QmiProblem assemble_qmi_r_to_z_closed_form(const Matrix& n_u, const Matrix& n_y, const SupplyRate& sr,
                                                         const ControllerBasis& basis);

/// -Phi(p)' Pi Phi(p) + delta I formed directly from m_matrix at a(p).
[[nodiscard]] Matrix direct_quadratic_form(const DataPage& page, const DissipativitySpec& spec,
                                           const ControllerBasis& basis, const Vector& p);

/// Block-diagonal stacking; all problems must share the parameter count.
[[nodiscard]] QmiProblem augment(const std::vector<QmiProblem>& problems);

/// T(a(p))' T(a(p)) - c I, i.e. the constraint T' T < c I in standard form.
[[nodiscard]] QmiProblem small_gain_constraint(const ControllerBasis& basis, double bound);

/// True when Q_h + S_h + S_h' + R_h <= 0, making the r -> z QMI convex in p.
[[nodiscard]] bool r_to_z_is_convex(const SupplyRate& sr);

} // namespace datadiss
