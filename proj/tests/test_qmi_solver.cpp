#include "doctest.h"

#include "datadiss/qmi_solver.hpp"
#include "oracles.hpp"

using namespace datadiss;

namespace {

QmiProblem random_problem(std::mt19937_64& gen, int m, int d) {
    std::vector<Matrix> linear;
    std::vector<Matrix> quadratic;
    for (int i = 0; i < d; ++i) {
        linear.push_back(oracle::random_symmetric(gen, m));
    }
    for (int k = 0; k < d * (d + 1) / 2; ++k) {
        quadratic.push_back(oracle::random_symmetric(gen, m));
    }
    return make_qmi(oracle::random_symmetric(gen, m), linear, quadratic);
}

// Q(p) written out without pair bookkeeping: sum over all (i, j) with the
// off-diagonal coefficient split evenly.
Matrix evaluate_by_hand(const QmiProblem& q, const Vector& p) {
    const int d = q.params();
    Matrix out = q.q0;
    for (int i = 0; i < d; ++i) {
        out += p(i) * q.linear[i];
    }
    int k = 0;
    for (int i = 0; i < d; ++i) {
        for (int j = i; j < d; ++j) {
            out += p(i) * p(j) * q.quadratic[k++];
        }
    }
    return out;
}

} // namespace

TEST_CASE("pair index enumerates the upper triangle row by row") {
    for (int d = 1; d <= 5; ++d) {
        int expected = 0;
        for (int i = 0; i < d; ++i) {
            for (int j = i; j < d; ++j) {
                CHECK(QmiProblem::pair_index(i, j, d) == expected);
                CHECK(QmiProblem::pair_index(j, i, d) == expected);
                ++expected;
            }
        }
    }
}

TEST_CASE("evaluation and derivatives") {
    std::mt19937_64 gen(1);
    const QmiProblem q = random_problem(gen, 5, 3);
    const Vector p = oracle::random_vector(gen, 3);
    CHECK((evaluate(q, p) - evaluate_by_hand(q, p)).norm() < 1e-12);

    const auto partials = partial_derivatives(q, p);
    const double h = 1e-6;
    for (int k = 0; k < 3; ++k) {
        Vector pp = p;
        Vector pm = p;
        pp(k) += h;
        pm(k) -= h;
        const Matrix fd = (evaluate(q, pp) - evaluate(q, pm)) / (2.0 * h);
        CHECK((fd - partials[k]).norm() < 1e-7);
    }
    CHECK(max_eigenpair(q, p).value == doctest::Approx(oracle::max_eig(evaluate(q, p))));
    CHECK(max_eigenvalue(q, p) == doctest::Approx(oracle::max_eig(evaluate(q, p))));
}

TEST_CASE("malformed problems are rejected") {
    Matrix asym = Matrix::Identity(2, 2);
    asym(0, 1) = 1.0;
    CHECK_THROWS_AS((void)make_qmi(asym, {}, {}), std::invalid_argument);
    CHECK_THROWS_AS((void)make_qmi(Matrix::Identity(2, 2), {Matrix::Identity(2, 2)}, {}), std::invalid_argument);
    CHECK_THROWS_AS((void)make_qmi(Matrix::Identity(2, 2), {Matrix::Identity(3, 3)}, {Matrix::Identity(3, 3)}),
                    std::invalid_argument);
    std::mt19937_64 gen(2);
    QmiProblem q = random_problem(gen, 3, 1);
    q.blocks = {2};
    CHECK_THROWS_AS(q.validate(), std::invalid_argument);
    CHECK_THROWS_AS((void)evaluate(q, Vector::Zero(2)), std::invalid_argument);
}

TEST_CASE("difference-of-convex split reproduces Q and has convex parts") {
    std::mt19937_64 gen(3);
    for (int d = 1; d <= 3; ++d) {
        const QmiProblem q = random_problem(gen, 6, d);
        const DcSplit split = dc_split(q);
        for (int trial = 0; trial < 10; ++trial) {
            const Vector p = oracle::random_vector(gen, d, -3.0, 3.0);
            const Matrix diff = evaluate(split.convex, p) - evaluate(split.concave, p);
            CHECK((diff - evaluate(q, p)).norm() <= 1e-10 * (1.0 + evaluate(q, p).norm()));

            // midpoint convexity of lambda_max along a random segment
            const Vector x = oracle::random_vector(gen, d, -3.0, 3.0);
            const Vector y = oracle::random_vector(gen, d, -3.0, 3.0);
            for (const QmiProblem* part : {&split.convex, &split.concave}) {
                const double mid = max_eigenvalue(*part, 0.5 * (x + y));
                CHECK(mid <= 0.5 * (max_eigenvalue(*part, x) + max_eigenvalue(*part, y)) + 1e-9);
                // quadratic terms alone are matrix-convex: the midpoint gap is PSD
                Matrix gap = 0.5 * (evaluate(*part, x) + evaluate(*part, y)) - evaluate(*part, 0.5 * (x + y));
                CHECK(oracle::min_eig(gap) >= -1e-9);
            }
        }
    }
}

TEST_CASE("majorant dominates Q and touches it at the center") {
    std::mt19937_64 gen(4);
    const QmiProblem q = random_problem(gen, 5, 2);
    const DcSplit split = dc_split(q);
    const Vector c = oracle::random_vector(gen, 2);
    const QmiProblem major = dc_majorant(split, c);
    CHECK((evaluate(major, c) - evaluate(q, c)).norm() < 1e-10);
    for (int trial = 0; trial < 20; ++trial) {
        const Vector p = oracle::random_vector(gen, 2, -4.0, 4.0);
        CHECK(oracle::min_eig(evaluate(major, p) - evaluate(q, p)) >= -1e-9);
    }
}

TEST_CASE("solver finds a point of a feasible problem and certifies it") {
    std::mt19937_64 gen(5);
    for (int d = 1; d <= 3; ++d) {
        QmiProblem q = random_problem(gen, 8, d);
        // shift so that p* is strictly feasible
        const Vector p_star = oracle::random_vector(gen, d);
        q.q0 -= (oracle::max_eig(evaluate(q, p_star)) + 0.5) * Matrix::Identity(8, 8);
        SolverOptions opts;
        opts.search_radius = 3.0;
        const SolveReport r = solve_feasibility(q, opts);
        REQUIRE(r.p);
        if (r.feasible) {
            CHECK(oracle::max_eig(evaluate(q, *r.p)) <= -opts.eps + 1e-12);
        }
        const SolveReport grid = direct_search(q, Box{std::vector<std::pair<double, double>>(d, {-2.0, 2.0})}, 15);
        CHECK(grid.feasible);
    }
}

TEST_CASE("convex problem is solved from an infeasible start") {
    // Q(p) = diag(p0^2 + p1^2 - 1, (p0 - 0.5)^2 - 0.5): feasible near p = (0.5, 0)
    Matrix q0 = Matrix::Zero(2, 2);
    q0(0, 0) = -1.0;
    q0(1, 1) = -0.25;
    Matrix l0 = Matrix::Zero(2, 2);
    l0(1, 1) = -1.0;
    Matrix e00 = Matrix::Zero(2, 2);
    e00(0, 0) = 1.0;
    e00(1, 1) = 1.0;
    Matrix e11 = Matrix::Zero(2, 2);
    e11(0, 0) = 1.0;
    const QmiProblem q = make_qmi(q0, {l0, Matrix::Zero(2, 2)}, {e00, Matrix::Zero(2, 2), e11});
    SolverOptions opts;
    opts.p0 = Vector::Constant(2, 2.0);
    opts.search_radius = 4.0;
    const SolveReport r = solve_feasibility(q, opts);
    CHECK(r.feasible);
    CHECK(max_eigenvalue(q, *r.p) <= -opts.eps);
}

TEST_CASE("problems without feasible points are reported infeasible") {
    // Q(p) = I + p^2 I is never negative
    const QmiProblem q = make_qmi(Matrix::Identity(3, 3), {Matrix::Zero(3, 3)}, {Matrix::Identity(3, 3)});
    const SolveReport r = solve_feasibility(q);
    CHECK_FALSE(r.feasible);
    CHECK(r.final_margin >= 1.0 - 1e-12);
    CHECK_FALSE(direct_search(q, Box{{{-5.0, 5.0}}}, 50).feasible);
}

TEST_CASE("maximizing the margin keeps going past the first feasible point") {
    // lambda_max = (p - 1)^2 - 1 with p0 = 0.5: first-feasible stops at once
    Matrix q0 = Matrix::Zero(1, 1);
    const QmiProblem q =
        make_qmi(q0, {Matrix::Constant(1, 1, -2.0)}, {Matrix::Constant(1, 1, 1.0)});
    SolverOptions opts;
    opts.p0 = Vector::Constant(1, 0.5);
    const SolveReport first = solve_feasibility(q, opts);
    CHECK(first.feasible);
    CHECK(first.p->isApprox(*opts.p0));
    opts.stop_at_first_feasible = false;
    const SolveReport best = solve_feasibility(q, opts);
    CHECK(best.final_margin == doctest::Approx(-1.0).epsilon(1e-8));
    CHECK((*best.p)(0) == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("solver is deterministic and both inner methods agree on feasibility") {
    std::mt19937_64 gen(6);
    QmiProblem q = random_problem(gen, 6, 2);
    q.q0 -= (oracle::max_eig(evaluate(q, Vector::Constant(2, 0.3))) + 0.2) * Matrix::Identity(6, 6);
    SolverOptions opts;
    const SolveReport a = solve_feasibility(q, opts);
    const SolveReport b = solve_feasibility(q, opts);
    CHECK(a.trace == b.trace);
    CHECK(*a.p == *b.p);
    opts.inner = InnerSolver::direct_search;
    const SolveReport c = solve_feasibility(q, opts);
    CHECK(c.feasible == a.feasible);
}

TEST_CASE("block structure is honored") {
    std::mt19937_64 gen(7);
    QmiProblem a = random_problem(gen, 3, 2);
    QmiProblem b = random_problem(gen, 4, 2);
    QmiProblem joint;
    joint.q0 = Matrix::Zero(7, 7);
    joint.q0.topLeftCorner(3, 3) = a.q0;
    joint.q0.bottomRightCorner(4, 4) = b.q0;
    for (int i = 0; i < 2; ++i) {
        Matrix l = Matrix::Zero(7, 7);
        l.topLeftCorner(3, 3) = a.linear[i];
        l.bottomRightCorner(4, 4) = b.linear[i];
        joint.linear.push_back(l);
    }
    for (int k = 0; k < 3; ++k) {
        Matrix c = Matrix::Zero(7, 7);
        c.topLeftCorner(3, 3) = a.quadratic[k];
        c.bottomRightCorner(4, 4) = b.quadratic[k];
        joint.quadratic.push_back(c);
    }
    joint.blocks = {3, 4};
    joint.validate();
    const Vector p = oracle::random_vector(gen, 2);
    CHECK(max_eigenpair(joint, p).value == doctest::Approx(max_eigenvalue(joint, p)));
    CHECK(max_eigenpair(joint, p).value
          == doctest::Approx(std::max(max_eigenvalue(a, p), max_eigenvalue(b, p))));
    const DcSplit split = dc_split(joint);
    CHECK((evaluate(split.convex, p) - evaluate(split.concave, p) - evaluate(joint, p)).norm() < 1e-10);
}

TEST_CASE("problem without parameters is evaluated directly") {
    const QmiProblem neg = make_qmi(-Matrix::Identity(2, 2), {}, {});
    CHECK(solve_feasibility(neg).feasible);
    const QmiProblem pos = make_qmi(Matrix::Identity(2, 2), {}, {});
    CHECK_FALSE(solve_feasibility(pos).feasible);
}
