#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "datadiss/types.hpp"

namespace datadiss {

/**
 * @brief Quadratic matrix function in standard form
 *
 *   Q(p) = q0 + sum_i p_i linear[i] + sum_{i<=j} p_i p_j quadratic[pair_index(i, j)]
 *
 * All coefficients are symmetric and share one size. `blocks` records the
 * diagonal block structure (a single block unless built by augmentation);
 * entries outside the blocks are zero in every coefficient.
 */
struct QmiProblem {
    Matrix q0;
    std::vector<Matrix> linear;
    std::vector<Matrix> quadratic;
    std::vector<int> blocks;
    /// Optional, one per block: the (d b) x (d b) lift L with Q_ii = L_ii and
    /// Q_ij = L_ij + L_ji. A Gram-structured lift keeps the DC split tight; without
    /// one, dc_split lifts the symmetric coefficients.
    std::vector<Matrix> lifts;

    [[nodiscard]] int dim() const { return static_cast<int>(q0.rows()); }
    [[nodiscard]] int params() const { return static_cast<int>(linear.size()); }

    /// Row-major position of (i, j), i <= j, among the d(d+1)/2 upper-triangular pairs.
    [[nodiscard]] static int pair_index(int i, int j, int d);

    /// Throws std::invalid_argument on inconsistent sizes, asymmetry above 1e-12 or bad blocks.
    void validate() const;
};

/// Problem with a single diagonal block; validates the coefficients.
[[nodiscard]] QmiProblem make_qmi(Matrix q0, std::vector<Matrix> linear, std::vector<Matrix> quadratic);

[[nodiscard]] Matrix evaluate(const QmiProblem& problem, const Vector& p);

/// Partial derivatives dQ/dp_k at p.
[[nodiscard]] std::vector<Matrix> partial_derivatives(const QmiProblem& problem, const Vector& p);

struct TopEigenpair {
    double value = 0.0;
    Vector vector;
};

/// Largest eigenvalue of Q(p) and a unit eigenvector, computed block by block.
[[nodiscard]] TopEigenpair max_eigenpair(const QmiProblem& problem, const Vector& p);

/// Largest eigenvalue of the dense Q(p); independent of the block bookkeeping.
[[nodiscard]] double max_eigenvalue(const QmiProblem& problem, const Vector& p);

/// The stored lifts, or per block the symmetric lift with L_ij = Q_ij / 2 for i != j.
[[nodiscard]] std::vector<Matrix> block_lifts(const QmiProblem& problem);

/// Q(p) = convex(p) - concave(p) with both quadratic parts matrix-convex in p.
struct DcSplit {
    QmiProblem convex;
    QmiProblem concave; ///< quadratic terms only
};

/**
 * Splits the quadratic part through the symmetric lifted matrix
 * Qbar (d m x d m, blocks Qbar_ii = Q_ii, Qbar_ij = Q_ij / 2), whose
 * positive and negative spectral parts give matrix-convex terms
 * (p (x) I)' Qbar_+ (p (x) I) and (p (x) I)' Qbar_- (p (x) I).
 */
[[nodiscard]] DcSplit dc_split(const QmiProblem& problem);

/**
 * Convex majorant at `center`: the concave part is replaced by its
 * linearization, so majorant(p) >= Q(p) with equality at p = center.
 */
[[nodiscard]] QmiProblem dc_majorant(const DcSplit& split, const Vector& center);

enum class InnerSolver {
    cutting_plane,
    direct_search,
};

struct SolverOptions {
    int max_iters = 50;
    double eps = 1e-6;
    std::optional<Vector> p0;
    double stagnation_tol = 1e-9;
    InnerSolver inner = InnerSolver::cutting_plane;
    /// Radius of the initial ellipsoid (or pattern step scale) around each DC iterate.
    double search_radius = 1.0;
    int inner_iters = 0; ///< 0 selects 60 (d + 1)^2
    /// Stop at the first iterate with lambda_max <= -eps; otherwise keep decreasing lambda_max until stagnation.
    bool stop_at_first_feasible = true;
};

struct SolveReport {
    std::optional<Vector> p;
    bool feasible = false;
    double final_margin = 0.0;
    int iterations = 0;
    std::vector<double> trace;
};

/// Minimizes a convex lambda_max(problem(p)) near `start`; returns (argmin, value).
[[nodiscard]] std::pair<Vector, double> minimize_convex_max_eigenvalue(const QmiProblem& problem,
                                                                       const Vector& start,
                                                                       const SolverOptions& opts,
                                                                       std::optional<double> target);

/**
 * DC iteration: linearize the concave part at the current point, minimize
 * lambda_max of the convex majorant, accept, repeat. The returned point is
 * re-checked by dense evaluation; feasible means lambda_max <= -eps.
 */
[[nodiscard]] SolveReport solve_feasibility(const QmiProblem& problem, const SolverOptions& opts = {});

struct Box {
    std::vector<std::pair<double, double>> bounds;
};

/// Grid scan over the box followed by compass-search refinement. Requires d <= 3.
[[nodiscard]] SolveReport direct_search(const QmiProblem& problem, const Box& box, int grid, double eps = 1e-6);

} // namespace datadiss
