#pragma once

#include <string>
#include <vector>

#include "datadiss/lti.hpp"

namespace datadiss {

inline constexpr double kDefaultRankTolerance = 1e-9;

/// Depth-L Hankel matrix, entry (i, j) = x_{i+j}. Requires 1 <= L <= N.
[[nodiscard]] Matrix hankel(const Vector& x, int depth);

/// Lower-triangular Toeplitz matrix, entry (i, j) = a_{i-j} for i >= j.
[[nodiscard]] Matrix toeplitz(const Vector& a);

/// Count of singular values above rank_tol * sigma_max.
[[nodiscard]] int numerical_rank(const Matrix& m, double rank_tol = kDefaultRankTolerance);

struct ExcitationReport {
    bool persistently_exciting = false;
    int order = 0;
    int rank = 0;
    int columns = 0;
    std::string reason;
};

/// rank(H_order(x)) == order, with numerical rank from the SVD.
[[nodiscard]] ExcitationReport is_persistently_exciting(const Vector& x, int order,
                                                        double rank_tol = kDefaultRankTolerance);

/// Largest order for which x is persistently exciting (0 if none).
[[nodiscard]] int max_excitation_order(const Vector& x, double rank_tol = kDefaultRankTolerance);

/// Orthonormal basis of ker(m); zero columns when m has full column rank.
[[nodiscard]] Matrix kernel_basis(const Matrix& m, double rank_tol = kDefaultRankTolerance);

/// Orthonormal basis of col(m) from the left singular vectors.
[[nodiscard]] Matrix range_basis(const Matrix& m, double rank_tol = kDefaultRankTolerance);

struct TruncationSelectors {
    Matrix drop_initial; ///< (L-nu) x L, drops the first nu samples of one signal
    Matrix stacked;      ///< 2(L-nu) x 2L, the same applied blockwise to (u; y)
};

[[nodiscard]] TruncationSelectors truncation_selectors(int depth, int nu);

/// 2nu x 2L selector picking u_0..u_{nu-1} and y_0..y_{nu-1} from (u; y).
[[nodiscard]] Matrix initial_window_selector(int depth, int nu);

/**
 * @brief Precomputed data matrices for one measured trajectory and horizon
 *
 * `hankel` is the stacked H_L(u, y); `kernel` is an orthonormal basis V of
 * ker(initial_window_selector * H), so every column of H V is a length-L
 * trajectory whose first nu inputs and outputs vanish. `n_u` and `n_y` are
 * the truncated blocks J_L^nu H_L(u) V and J_L^nu H_L(y) V.
 *
 * H V generally has a nontrivial kernel (V has N - L + 1 - 2 nu columns but
 * col(H V) has dimension L - nu), so downstream definiteness tests use
 * `trajectory_basis`: an orthonormal basis of col([n_u; n_y]).
 */
struct DataPage {
    Trajectory traj;
    int depth = 0;
    int nu = 0;
    int order_bound = 0;
    Matrix hankel;
    Matrix kernel;
    Matrix selector;
    Matrix n_u;
    Matrix n_y;
    Matrix trajectory_basis;
    int excitation_order = 0;
    std::vector<std::string> warnings;

    [[nodiscard]] int horizon() const { return depth - nu; }
    [[nodiscard]] int trajectory_dim() const { return static_cast<int>(trajectory_basis.cols()); }
    [[nodiscard]] auto basis_u() const { return trajectory_basis.topRows(horizon()); }
    [[nodiscard]] auto basis_y() const { return trajectory_basis.bottomRows(horizon()); }
};

/**
 * Builds the data page. Requires order_bound <= nu < depth <= N and input
 * persistently exciting of order depth + order_bound; violations throw
 * std::invalid_argument naming the achieved excitation order.
 */
[[nodiscard]] DataPage build_data_page(const Trajectory& traj, int depth, int nu, int order_bound,
                                       double rank_tol = kDefaultRankTolerance);

} // namespace datadiss
