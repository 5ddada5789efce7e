#pragma once

#include <optional>

#include "datadiss/dissipativity.hpp"

namespace datadiss {

/**
 * @brief Channel operator M(a) mapping plant tails (u; y) to (r; output)
 *
 *   r_to_z: [[I, T], [0, T]]
 *   r_to_e: [[I, T], [I, 0]]
 *   r_to_u: [[I, T], [T, 0]]
 *
 * with T = toeplitz(a).
 */
[[nodiscard]] Matrix m_matrix(const ImpulseResponse& a, Channel channel);

/// Columns of phi are stacked (r; output) closed-loop trajectories with zero initial conditions.
struct ClosedLoopMap {
    Matrix phi;
    Channel channel;
    ImpulseResponse a;
};

/// Throws IllPosedLoop when 1 + D a_0 vanishes, with D estimated from data.
void require_well_posed(const DataPage& page, const ImpulseResponse& a);

/// phi = M(a) J H V. Requires len(a) == L - nu and a well-posed loop.
[[nodiscard]] ClosedLoopMap closed_loop_map(const DataPage& page, const ImpulseResponse& a, Channel channel);

/**
 * Closed-loop (L - nu)-dissipativity of the selected channel. An optional
 * output weight (impulse response, zero-padded to L - nu) filters the
 * channel output before the supply is applied.
 */
[[nodiscard]] Certificate validate_closed_loop(const DataPage& page, const ImpulseResponse& a, Channel channel,
                                               const SupplyRate& sr,
                                               const std::optional<Vector>& output_filter = std::nullopt);

struct ClosedLoopResponse {
    Vector output;
    double residual = 0.0;
};

/**
 * Output of the channel for reference r_ref (length L - nu), from the
 * minimum-norm coefficients reproducing r_ref. Throws std::runtime_error if
 * the reference is not representable (residual > 1e-6 |r_ref|).
 */
[[nodiscard]] ClosedLoopResponse closed_loop_response(const DataPage& page, const ImpulseResponse& a,
                                                      Channel channel, const Vector& r_ref);

/// Zero-padded or checked output weight of length `horizon`.
[[nodiscard]] Vector pad_filter(const Vector& filter, int horizon);

/// Model-based closed-loop operator r -> channel output over `horizon` samples, via state-space interconnection.
[[nodiscard]] Matrix oracle_closed_loop_operator(const StateSpace& plant, const ImpulseResponse& a, Channel channel);

/// Model-based counterpart of validate_closed_loop.
[[nodiscard]] Certificate oracle_check_closed_loop(const StateSpace& plant, const ImpulseResponse& a, Channel channel,
                                                   const SupplyRate& sr,
                                                   const std::optional<Vector>& output_filter = std::nullopt);

} // namespace datadiss
