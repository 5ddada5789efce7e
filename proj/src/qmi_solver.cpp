#include "datadiss/qmi_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace datadiss {

namespace {

bool is_symmetric(const Matrix& m, double tol) {
    if (m.size() == 0) {
        return true;
    }
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    return (m - m.transpose()).cwiseAbs().maxCoeff() <= tol * scale;
}

Vector start_point(const QmiProblem& problem, const SolverOptions& opts) {
    if (opts.p0) {
        if (opts.p0->size() != problem.params()) {
            throw std::invalid_argument("solver: p0 has " + std::to_string(opts.p0->size()) + " entries, expected "
                                        + std::to_string(problem.params()));
        }
        return *opts.p0;
    }
    return Vector::Zero(problem.params());
}

Vector subgradient(const QmiProblem& problem, const Vector& p, const Vector& v) {
    const auto partials = partial_derivatives(problem, p);
    Vector g(problem.params());
    for (int k = 0; k < problem.params(); ++k) {
        g(k) = v.dot(partials[k] * v);
    }
    return g;
}

// Interval cutting for a single parameter.
std::pair<Vector, double> minimize_scalar(const QmiProblem& problem, const Vector& start, double radius,
                                          int max_evals, std::optional<double> target) {
    double lo = start(0) - radius;
    double hi = start(0) + radius;
    Vector best = start;
    double best_value = std::numeric_limits<double>::infinity();
    Vector x = start;
    for (int it = 0; it < max_evals && hi - lo > 1e-14 * (1.0 + std::abs(x(0))); ++it) {
        const auto top = max_eigenpair(problem, x);
        if (top.value < best_value) {
            best_value = top.value;
            best = x;
        }
        if (target && best_value <= *target) {
            break;
        }
        const double g = subgradient(problem, x, top.vector)(0);
        if (g == 0.0) {
            break;
        }
        // Points with f < best satisfy f(x) + g (y - x) < best.
        const double cut = x(0) - (top.value - best_value) / g;
        if (g > 0.0) {
            hi = std::min(hi, cut);
        } else {
            lo = std::max(lo, cut);
        }
        if (lo > hi) {
            break;
        }
        x(0) = 0.5 * (lo + hi);
    }
    return {best, best_value};
}

std::pair<Vector, double> minimize_ellipsoid(const QmiProblem& problem, const Vector& start, double radius,
                                             int max_evals, std::optional<double> target) {
    const int d = problem.params();
    const double dd = static_cast<double>(d);
    Vector c = start;
    Matrix shape = radius * radius * Matrix::Identity(d, d);
    Vector best = start;
    double best_value = std::numeric_limits<double>::infinity();
    double lower = -std::numeric_limits<double>::infinity();

    for (int it = 0; it < max_evals; ++it) {
        const auto top = max_eigenpair(problem, c);
        if (top.value < best_value) {
            best_value = top.value;
            best = c;
        }
        if (target && best_value <= *target) {
            break;
        }
        const Vector g = subgradient(problem, c, top.vector);
        const double gpg = g.dot(shape * g);
        if (!(gpg > 0.0)) {
            break;
        }
        const double width = std::sqrt(gpg);
        lower = std::max(lower, top.value - width);
        if (best_value - lower <= 1e-12 * (1.0 + std::abs(best_value))) {
            break;
        }
        // Deep cut keeping {y : f(c) + g'(y - c) <= best}.
        const double alpha = (top.value - best_value) / width;
        if (alpha >= 1.0) {
            break;
        }
        const Vector step = shape * g / width;
        c -= (1.0 + dd * alpha) / (dd + 1.0) * step;
        shape = (dd * dd / (dd * dd - 1.0)) * (1.0 - alpha * alpha)
                * (shape - (2.0 * (1.0 + dd * alpha) / ((dd + 1.0) * (1.0 + alpha))) * step * step.transpose());
        shape = 0.5 * (shape + shape.transpose());
    }
    return {best, best_value};
}

std::pair<Vector, double> compass_search(const QmiProblem& problem, const Vector& start, Vector steps,
                                         int max_evals, std::optional<double> target,
                                         const std::vector<std::pair<double, double>>* bounds = nullptr) {
    const int d = problem.params();
    Vector x = start;
    double fx = max_eigenpair(problem, x).value;
    int evals = 1;
    const double floor = 1e-10 * std::max(1.0, steps.maxCoeff());
    while (evals < max_evals && steps.maxCoeff() > floor) {
        if (target && fx <= *target) {
            break;
        }
        bool improved = false;
        for (int k = 0; k < d && !improved; ++k) {
            for (const double sign : {1.0, -1.0}) {
                Vector y = x;
                y(k) += sign * steps(k);
                if (bounds) {
                    y(k) = std::clamp(y(k), (*bounds)[k].first, (*bounds)[k].second);
                }
                const double fy = max_eigenpair(problem, y).value;
                ++evals;
                if (fy < fx) {
                    x = y;
                    fx = fy;
                    improved = true;
                    break;
                }
            }
        }
        if (!improved) {
            steps *= 0.5;
        }
    }
    return {x, fx};
}

} // namespace

int QmiProblem::pair_index(int i, int j, int d) {
    if (i > j) {
        std::swap(i, j);
    }
    return i * d - i * (i - 1) / 2 + (j - i);
}

void QmiProblem::validate() const {
    const int m = dim();
    const int d = params();
    if (q0.rows() != q0.cols()) {
        throw std::invalid_argument("QmiProblem: q0 must be square");
    }
    if (static_cast<int>(quadratic.size()) != d * (d + 1) / 2) {
        throw std::invalid_argument("QmiProblem: expected " + std::to_string(d * (d + 1) / 2)
                                    + " quadratic coefficients for d = " + std::to_string(d) + ", got "
                                    + std::to_string(quadratic.size()));
    }
    auto check = [&](const Matrix& c, const char* what) {
        if (c.rows() != m || c.cols() != m) {
            throw std::invalid_argument(std::string("QmiProblem: ") + what + " has the wrong size");
        }
        if (!is_symmetric(c, 1e-12)) {
            throw std::invalid_argument(std::string("QmiProblem: ") + what + " is not symmetric");
        }
    };
    check(q0, "q0");
    for (const auto& c : linear) check(c, "linear coefficient");
    for (const auto& c : quadratic) check(c, "quadratic coefficient");
    int total = 0;
    for (const int b : blocks) {
        if (b < 1) {
            throw std::invalid_argument("QmiProblem: block sizes must be positive");
        }
        total += b;
    }
    if (!lifts.empty()) {
        if (lifts.size() != blocks.size()) {
            throw std::invalid_argument("QmiProblem: expected one lift per block");
        }
        for (std::size_t k = 0; k < lifts.size(); ++k) {
            const int n = d * blocks[k];
            if (lifts[k].rows() != n || lifts[k].cols() != n || !is_symmetric(lifts[k], 1e-12)) {
                throw std::invalid_argument("QmiProblem: lift " + std::to_string(k) + " is malformed");
            }
        }
    }
    if (total != m) {
        throw std::invalid_argument("QmiProblem: block sizes sum to " + std::to_string(total) + ", expected "
                                    + std::to_string(m));
    }
}

QmiProblem make_qmi(Matrix q0, std::vector<Matrix> linear, std::vector<Matrix> quadratic) {
    QmiProblem problem{std::move(q0), std::move(linear), std::move(quadratic), {}, {}};
    problem.blocks = {problem.dim()};
    problem.validate();
    return problem;
}

Matrix evaluate(const QmiProblem& problem, const Vector& p) {
    const int d = problem.params();
    if (p.size() != d) {
        throw std::invalid_argument("evaluate: parameter vector has " + std::to_string(p.size())
                                    + " entries, expected " + std::to_string(d));
    }
    Matrix q = problem.q0;
    for (int i = 0; i < d; ++i) {
        q += p(i) * problem.linear[i];
        for (int j = i; j < d; ++j) {
            q += p(i) * p(j) * problem.quadratic[QmiProblem::pair_index(i, j, d)];
        }
    }
    return 0.5 * (q + q.transpose());
}

std::vector<Matrix> partial_derivatives(const QmiProblem& problem, const Vector& p) {
    const int d = problem.params();
    std::vector<Matrix> partials(problem.linear);
    for (int i = 0; i < d; ++i) {
        for (int j = i; j < d; ++j) {
            const Matrix& qij = problem.quadratic[QmiProblem::pair_index(i, j, d)];
            if (i == j) {
                partials[i] += 2.0 * p(i) * qij;
            } else {
                partials[i] += p(j) * qij;
                partials[j] += p(i) * qij;
            }
        }
    }
    return partials;
}

TopEigenpair max_eigenpair(const QmiProblem& problem, const Vector& p) {
    const Matrix q = evaluate(problem, p);
    TopEigenpair top;
    top.value = -std::numeric_limits<double>::infinity();
    top.vector = Vector::Zero(problem.dim());
    int offset = 0;
    for (const int b : problem.blocks) {
        Eigen::SelfAdjointEigenSolver<Matrix> eig(q.block(offset, offset, b, b));
        const double value = eig.eigenvalues()(b - 1);
        if (value > top.value) {
            top.value = value;
            top.vector.setZero();
            top.vector.segment(offset, b) = eig.eigenvectors().col(b - 1);
        }
        offset += b;
    }
    return top;
}

double max_eigenvalue(const QmiProblem& problem, const Vector& p) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(evaluate(problem, p), Eigen::EigenvaluesOnly);
    return eig.eigenvalues()(problem.dim() - 1);
}

std::vector<Matrix> block_lifts(const QmiProblem& problem) {
    if (!problem.lifts.empty()) {
        return problem.lifts;
    }
    const int d = problem.params();
    std::vector<Matrix> lifts;
    int offset = 0;
    for (const int b : problem.blocks) {
        Matrix lifted(d * b, d * b);
        for (int i = 0; i < d; ++i) {
            for (int j = 0; j < d; ++j) {
                const Matrix& qij = problem.quadratic[QmiProblem::pair_index(i, j, d)];
                lifted.block(i * b, j * b, b, b) = (i == j ? 1.0 : 0.5) * qij.block(offset, offset, b, b);
            }
        }
        lifts.push_back(std::move(lifted));
        offset += b;
    }
    return lifts;
}

DcSplit dc_split(const QmiProblem& problem) {
    const int d = problem.params();
    const int m = problem.dim();
    DcSplit split;
    split.convex = problem;
    split.concave = QmiProblem{Matrix::Zero(m, m), std::vector<Matrix>(d, Matrix::Zero(m, m)),
                               std::vector<Matrix>(problem.quadratic.size(), Matrix::Zero(m, m)), problem.blocks, {}};
    split.convex.lifts.clear();
    for (auto& c : split.convex.quadratic) {
        c.setZero();
    }

    const std::vector<Matrix> lifts = block_lifts(problem);
    int offset = 0;
    for (std::size_t k = 0; k < problem.blocks.size(); ++k) {
        const int b = problem.blocks[k];
        const Matrix& lifted = lifts[k];
        Eigen::SelfAdjointEigenSolver<Matrix> eig(lifted);
        const Vector pos = eig.eigenvalues().cwiseMax(0.0);
        const Vector neg = (-eig.eigenvalues()).cwiseMax(0.0);
        const Matrix& u = eig.eigenvectors();
        const Matrix lifted_pos = u * pos.asDiagonal() * u.transpose();
        const Matrix lifted_neg = u * neg.asDiagonal() * u.transpose();
        for (int i = 0; i < d; ++i) {
            for (int j = i; j < d; ++j) {
                const int idx = QmiProblem::pair_index(i, j, d);
                auto put = [&](const Matrix& l, Matrix& target) {
                    Matrix blk = l.block(i * b, j * b, b, b);
                    if (i != j) {
                        blk += l.block(j * b, i * b, b, b);
                    }
                    target.block(offset, offset, b, b) = 0.5 * (blk + blk.transpose());
                };
                put(lifted_pos, split.convex.quadratic[idx]);
                put(lifted_neg, split.concave.quadratic[idx]);
            }
        }
        offset += b;
    }
    return split;
}

QmiProblem dc_majorant(const DcSplit& split, const Vector& center) {
    // concave(p) is homogeneous quadratic: its linearization at c is
    // concave(c) + D concave(c)[p - c] = D concave(c)[p] - concave(c).
    QmiProblem major = split.convex;
    major.q0 += evaluate(split.concave, center);
    const auto partials = partial_derivatives(split.concave, center);
    for (int k = 0; k < major.params(); ++k) {
        major.linear[k] -= partials[k];
    }
    return major;
}

std::pair<Vector, double> minimize_convex_max_eigenvalue(const QmiProblem& problem, const Vector& start,
                                                         const SolverOptions& opts, std::optional<double> target) {
    const int d = problem.params();
    const int budget = opts.inner_iters > 0 ? opts.inner_iters : 60 * (d + 1) * (d + 1);
    if (opts.inner == InnerSolver::direct_search) {
        return compass_search(problem, start, Vector::Constant(d, opts.search_radius / 4.0), budget, target);
    }
    if (d == 1) {
        return minimize_scalar(problem, start, opts.search_radius, budget, target);
    }
    return minimize_ellipsoid(problem, start, opts.search_radius, budget, target);
}

SolveReport solve_feasibility(const QmiProblem& problem, const SolverOptions& opts) {
    problem.validate();
    if (opts.max_iters < 1) {
        throw std::invalid_argument("solve_feasibility: max_iters must be at least 1");
    }
    if (opts.eps < 0.0) {
        throw std::invalid_argument("solve_feasibility: eps must be nonnegative");
    }
    SolveReport report;
    Vector p = start_point(problem, opts);
    if (problem.params() == 0) {
        report.final_margin = max_eigenvalue(problem, p);
        report.trace.push_back(report.final_margin);
        report.feasible = report.final_margin <= -opts.eps + 1e-12;
        report.p = p;
        return report;
    }

    const DcSplit split = dc_split(problem);
    const std::optional<double> target =
        opts.stop_at_first_feasible ? std::optional<double>(-opts.eps) : std::nullopt;
    double value = max_eigenpair(problem, p).value;
    report.trace.push_back(value);
    for (int it = 0; it < opts.max_iters; ++it) {
        if (target && value <= *target) {
            break;
        }
        const QmiProblem major = dc_majorant(split, p);
        const Vector candidate = minimize_convex_max_eigenvalue(major, p, opts, target).first;
        const double next = max_eigenpair(problem, candidate).value;
        ++report.iterations;
        report.trace.push_back(next);
        const double improvement = value - next;
        if (next < value) {
            p = candidate;
            value = next;
        }
        if (improvement < opts.stagnation_tol) {
            break;
        }
    }

    // Certificate from an independent dense evaluation.
    report.final_margin = max_eigenvalue(problem, p);
    report.feasible = report.final_margin <= -opts.eps + 1e-12;
    report.p = p;
    return report;
}

SolveReport direct_search(const QmiProblem& problem, const Box& box, int grid, double eps) {
    problem.validate();
    const int d = problem.params();
    if (d < 1 || d > 3) {
        throw std::invalid_argument("direct_search: supports 1 to 3 parameters");
    }
    if (static_cast<int>(box.bounds.size()) != d) {
        throw std::invalid_argument("direct_search: box dimension does not match parameter count");
    }
    if (grid < 2) {
        throw std::invalid_argument("direct_search: grid needs at least 2 points per axis");
    }
    Vector lo(d);
    Vector width(d);
    for (int k = 0; k < d; ++k) {
        lo(k) = box.bounds[k].first;
        width(k) = box.bounds[k].second - box.bounds[k].first;
        if (!(width(k) >= 0.0)) {
            throw std::invalid_argument("direct_search: empty box");
        }
    }

    SolveReport report;
    Vector best(d);
    double best_value = std::numeric_limits<double>::infinity();
    long total = 1;
    for (int k = 0; k < d; ++k) total *= grid;
    for (long n = 0; n < total; ++n) {
        long rest = n;
        Vector p(d);
        for (int k = 0; k < d; ++k) {
            const int i = static_cast<int>(rest % grid);
            rest /= grid;
            p(k) = lo(k) + width(k) * i / (grid - 1);
        }
        const double v = max_eigenpair(problem, p).value;
        if (v < best_value) {
            best_value = v;
            best = p;
        }
    }
    report.trace.push_back(best_value);

    auto [refined, refined_value] =
        compass_search(problem, best, width / (grid - 1), 2000 * d, std::nullopt, &box.bounds);
    report.trace.push_back(refined_value);
    report.iterations = 1;
    report.p = refined_value < best_value ? refined : best;
    report.final_margin = max_eigenvalue(problem, *report.p);
    report.feasible = report.final_margin <= -eps + 1e-12;
    return report;
}

} // namespace datadiss
