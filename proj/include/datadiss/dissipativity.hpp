#pragma once

#include "datadiss/trajectory_algebra.hpp"

namespace datadiss {

/// Scalar quadratic supply s(u, y) = Q u^2 + 2 S u y + R y^2.
struct SupplyRate {
    double Q = 0.0;
    double S = 0.0;
    double R = 0.0;

    /// (gamma^2, 0, -1): finite-horizon L2-gain bound gamma.
    [[nodiscard]] static SupplyRate l2_gain(double gamma) { return {gamma * gamma, 0.0, -1.0}; }

    /// (0, 1/2, 0): s = u y.
    [[nodiscard]] static SupplyRate passivity() { return {0.0, 0.5, 0.0}; }

    [[nodiscard]] Eigen::Matrix2d matrix() const;

    /// Spectral norm of the 2x2 supply matrix; sets the scale of the definiteness tolerance.
    [[nodiscard]] double scale() const;
};

/**
 * @brief Outcome of a finite-horizon dissipativity test
 *
 * `margin` is the smallest eigenvalue of the pencil (trajectory' Pi trajectory,
 * trajectory' trajectory) over the tested trajectory space, i.e. the minimum
 * supply per unit trajectory energy. It does not depend on the basis used.
 */
struct Certificate {
    bool dissipative = false;
    double margin = 0.0;
    int matrix_dim = 0;
    double tolerance = 0.0;
};

inline constexpr double kPsdRelativeTolerance = 1e-8;

/// [[Q I_L, S I_L], [S I_L, R I_L]].
[[nodiscard]] Matrix block_supply(const SupplyRate& sr, int horizon);

/// Smallest eigenvalue of basis' Pi basis for an orthonormal trajectory basis.
[[nodiscard]] double orthonormal_margin(const Matrix& basis, const Matrix& supply);

/// Certificate with verdict margin >= -tolerance, tolerance = kPsdRelativeTolerance * sr.scale().
[[nodiscard]] Certificate make_certificate(double margin, int matrix_dim, const SupplyRate& sr);

/**
 * Data-based (L - nu)-dissipativity of the measured plant.
 *
 * Equivalent to V' H' Pi_L H V >= 0; evaluated on the orthonormal basis of
 * the zero-initial-condition trajectory tails, since the first nu samples of
 * every such trajectory vanish and contribute nothing to the supply.
 */
[[nodiscard]] Certificate check_open_loop(const DataPage& page, const SupplyRate& sr);

/// Plant feedthrough read from the data trajectory driven by a unit impulse at step nu.
[[nodiscard]] double estimate_feedthrough(const DataPage& page);

/// Smallest gamma (within tol) passing the L2-gain test, by doubling then bisection.
[[nodiscard]] double finite_horizon_l2_gain(const DataPage& page, double tol = 1e-6);

/// Model-based reference: pencil of ([I; T]' Pi [I; T], [I; T]' [I; T]) with T = T_L(g).
[[nodiscard]] Certificate oracle_check_dissipativity(const StateSpace& sys, int horizon, const SupplyRate& sr);

/// Same test on a given lower-triangular input-output operator y = T u.
[[nodiscard]] Certificate oracle_check_operator(const Matrix& op, const SupplyRate& sr);

} // namespace datadiss
