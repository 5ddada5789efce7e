#include "datadiss/trajectory_algebra.hpp"

#include <algorithm>
#include <stdexcept>

namespace datadiss {

Matrix hankel(const Vector& x, int depth) {
    const auto n = static_cast<int>(x.size());
    if (depth < 1 || depth > n) {
        throw std::invalid_argument("hankel: depth " + std::to_string(depth) + " outside [1, "
                                    + std::to_string(n) + "]");
    }
    const int cols = n - depth + 1;
    Matrix h(depth, cols);
    for (int j = 0; j < cols; ++j) {
        h.col(j) = x.segment(j, depth);
    }
    return h;
}

Matrix toeplitz(const Vector& a) {
    const auto n = a.size();
    if (n < 1) {
        throw std::invalid_argument("toeplitz: sequence is empty");
    }
    Matrix t = Matrix::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        t.col(j).tail(n - j) = a.head(n - j);
    }
    return t;
}

int numerical_rank(const Matrix& m, double rank_tol) {
    if (m.size() == 0) {
        return 0;
    }
    Eigen::BDCSVD<Matrix> svd(m);
    const auto& s = svd.singularValues();
    if (s(0) == 0.0) {
        return 0;
    }
    return static_cast<int>((s.array() > rank_tol * s(0)).count());
}

ExcitationReport is_persistently_exciting(const Vector& x, int order, double rank_tol) {
    ExcitationReport report;
    report.order = order;
    const auto n = static_cast<int>(x.size());
    if (order < 1 || order > n) {
        report.reason = "insufficient data length";
        report.columns = std::max(0, n - order + 1);
        return report;
    }
    const Matrix h = hankel(x, order);
    report.columns = static_cast<int>(h.cols());
    if (h.cols() < order) {
        report.reason = "insufficient data length";
        report.rank = numerical_rank(h, rank_tol);
        return report;
    }
    report.rank = numerical_rank(h, rank_tol);
    report.persistently_exciting = report.rank == order;
    if (!report.persistently_exciting) {
        report.reason = "rank deficient";
    }
    return report;
}

int max_excitation_order(const Vector& x, double rank_tol) {
    // Excitation of order k implies excitation of every order below k.
    int lo = 0;
    int hi = static_cast<int>((x.size() + 1) / 2);
    while (lo < hi) {
        const int mid = (lo + hi + 1) / 2;
        if (is_persistently_exciting(x, mid, rank_tol).persistently_exciting) {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    return lo;
}

Matrix kernel_basis(const Matrix& m, double rank_tol) {
    const auto cols = m.cols();
    if (m.rows() == 0) {
        return Matrix::Identity(cols, cols);
    }
    Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeFullV);
    const auto& s = svd.singularValues();
    const int rank = s.size() == 0 || s(0) == 0.0
                         ? 0
                         : static_cast<int>((s.array() > rank_tol * s(0)).count());
    return svd.matrixV().rightCols(cols - rank);
}

Matrix range_basis(const Matrix& m, double rank_tol) {
    Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeThinU);
    const auto& s = svd.singularValues();
    const int rank = s.size() == 0 || s(0) == 0.0
                         ? 0
                         : static_cast<int>((s.array() > rank_tol * s(0)).count());
    return svd.matrixU().leftCols(rank);
}

TruncationSelectors truncation_selectors(int depth, int nu) {
    if (nu <= 0 || nu >= depth) {
        throw std::invalid_argument("truncation_selectors: requires 0 < nu < L");
    }
    const int h = depth - nu;
    TruncationSelectors sel;
    sel.drop_initial = Matrix::Zero(h, depth);
    sel.drop_initial.rightCols(h) = Matrix::Identity(h, h);
    sel.stacked = Matrix::Zero(2 * h, 2 * depth);
    sel.stacked.topLeftCorner(h, depth) = sel.drop_initial;
    sel.stacked.bottomRightCorner(h, depth) = sel.drop_initial;
    return sel;
}

Matrix initial_window_selector(int depth, int nu) {
    if (nu <= 0 || nu > depth) {
        throw std::invalid_argument("initial_window_selector: requires 0 < nu <= L");
    }
    Matrix v = Matrix::Zero(2 * nu, 2 * depth);
    v.topLeftCorner(nu, nu) = Matrix::Identity(nu, nu);
    v.block(nu, depth, nu, nu) = Matrix::Identity(nu, nu);
    return v;
}

DataPage build_data_page(const Trajectory& traj, int depth, int nu, int order_bound, double rank_tol) {
    const int n = traj.size();
    if (order_bound < 1) {
        throw std::invalid_argument("build_data_page: plant order bound must be at least 1");
    }
    if (nu < order_bound) {
        throw std::invalid_argument("build_data_page: nu = " + std::to_string(nu)
                                    + " is below the plant order bound " + std::to_string(order_bound));
    }
    if (nu >= depth) {
        throw std::invalid_argument("build_data_page: requires nu < L");
    }
    if (depth > n) {
        throw std::invalid_argument("build_data_page: insufficient data, L = " + std::to_string(depth)
                                    + " exceeds N = " + std::to_string(n));
    }

    const int required = depth + order_bound;
    const auto pe = is_persistently_exciting(traj.u, required, rank_tol);
    if (!pe.persistently_exciting) {
        const int achieved = max_excitation_order(traj.u, rank_tol);
        std::string why = pe.reason == "insufficient data length" ? "insufficient data" : "input not exciting";
        throw std::invalid_argument("build_data_page: " + why + ": input must be persistently exciting of order "
                                    + std::to_string(required) + " (L + n) but achieves order "
                                    + std::to_string(achieved) + " with N = " + std::to_string(n));
    }

    DataPage page{traj, depth, nu, order_bound, {}, {}, {}, {}, {}, {}, 0, {}};
    page.excitation_order = max_excitation_order(traj.u, rank_tol);
    if (page.excitation_order < depth + nu) {
        page.warnings.push_back("input is exciting of order " + std::to_string(page.excitation_order)
                                + " but not of order L + nu = " + std::to_string(depth + nu));
    }

    page.hankel.resize(2 * depth, n - depth + 1);
    page.hankel << hankel(traj.u, depth), hankel(traj.y, depth);

    const Matrix window = initial_window_selector(depth, nu);
    page.kernel = kernel_basis(window * page.hankel, rank_tol);
    if (page.kernel.cols() == 0) {
        throw std::invalid_argument("build_data_page: nu too large for data length (no zero-initial-condition "
                                    "trajectories are representable)");
    }

    const auto selectors = truncation_selectors(depth, nu);
    page.selector = selectors.stacked;
    const Matrix hv = page.hankel * page.kernel;
    page.n_u = selectors.drop_initial * hv.topRows(depth);
    page.n_y = selectors.drop_initial * hv.bottomRows(depth);

    Matrix stacked(2 * page.horizon(), hv.cols());
    stacked << page.n_u, page.n_y;
    page.trajectory_basis = range_basis(stacked, rank_tol);
    if (page.trajectory_dim() != page.horizon()) {
        page.warnings.push_back("zero-initial-condition trajectory space has dimension "
                                + std::to_string(page.trajectory_dim()) + ", expected L - nu = "
                                + std::to_string(page.horizon())
                                + " (noisy data, or plant order above the bound)");
    }
    return page;
}

} // namespace datadiss
