// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "datadiss/pipeline.hpp"
#include "oracles.hpp"

using namespace datadiss;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
    bool pass = true;
    std::string detail;
};

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string num(double x, int precision = 3) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", precision, x);
    return buf;
}

DataPage fixture_page(const StateSpace& sys, int depth, std::uint64_t seed) {
    const int n = sys.order();
    const Vector u = pe_input_uniform(2 * (depth + n) - 1, -1.0, 1.0, seed);
    return build_data_page(simulate(sys, u), depth, n, n);
}

Vector loop_output(const oracle::LoopSignals& s, Channel ch) {
    switch (ch) {
        case Channel::r_to_z: return s.z;
        case Channel::r_to_e: return s.e;
        case Channel::r_to_u: return s.u;
    }
    return s.z;
}

constexpr Channel kChannels[] = {Channel::r_to_z, Channel::r_to_e, Channel::r_to_u};

// Independent closed-loop margin: loop recursion, optional weight, Cholesky pencil.
double oracle_closed_loop_margin(const StateSpace& plant, const Vector& a, Channel ch, const SupplyRate& sr,
                                 const std::optional<Vector>& filter) {
    const int h = static_cast<int>(a.size());
    const Vector g = oracle::markov(plant, h);
    Matrix op(h, h);
    for (int j = 0; j < h; ++j) {
        op.col(j) = loop_output(oracle::simulate_loop(g, a, Vector::Unit(h, j)), ch);
    }
    if (filter) {
        Vector w = Vector::Zero(h);
        w.head(filter->size()) = *filter;
        op = oracle::convolution_matrix(w, h) * op;
    }
    Matrix x(2 * h, h);
    x << Matrix::Identity(h, h), op;
    return oracle::pencil_min(x, oracle::supply_matrix(sr.Q, sr.S, sr.R, h));
}

Outcome criterion_open_loop() {
    const auto t0 = Clock::now();
    std::mt19937_64 gen(2024);
    std::uniform_int_distribution<int> order(1, 3);
    std::uniform_int_distribution<int> depth(8, 20);
    std::uniform_real_distribution<double> entry(-2.0, 2.0);
    constexpr int fixtures = 60;
    int agree = 0;
    double worst = 0.0;
    for (int i = 0; i < fixtures; ++i) {
        const int n = order(gen);
        const int l = depth(gen);
        const StateSpace sys = random_stable_siso(n, 1000 + static_cast<std::uint64_t>(i));
        const DataPage page = fixture_page(sys, l, 5000 + static_cast<std::uint64_t>(i));
        const SupplyRate sr{entry(gen), entry(gen), entry(gen)};
        const Certificate data = check_open_loop(page, sr);
        const int h = page.horizon();
        Matrix x(2 * h, h);
        x << Matrix::Identity(h, h), oracle::convolution_matrix(oracle::markov(sys, h), h);
        const double model = oracle::pencil_min(x, oracle::supply_matrix(sr.Q, sr.S, sr.R, h));
        const bool model_verdict = model >= -kPsdRelativeTolerance * sr.scale();
        agree += data.dissipative == model_verdict ? 1 : 0;
        worst = std::max(worst, std::abs(data.margin - model));
    }
    const double elapsed = seconds_since(t0);
    Outcome o;
    o.pass = agree == fixtures && worst <= 1e-6 && elapsed < 30.0;
    o.detail = std::to_string(agree) + "/" + std::to_string(fixtures) + " verdicts agree, max margin gap "
               + num(worst) + ", " + num(elapsed) + " s";
    return o;
}

Outcome criterion_parametrization() {
    std::mt19937_64 gen(7);
    std::uniform_int_distribution<int> order(1, 3);
    std::uniform_int_distribution<int> taps(1, 5);
    constexpr int pairs = 20;
    double worst_sound = 0.0;
    double worst_complete = 0.0;
    for (int i = 0; i < pairs; ++i) {
        const int n = order(gen);
        const StateSpace plant = random_stable_siso(n, 300 + static_cast<std::uint64_t>(i));
        const DataPage page = fixture_page(plant, 14, 400 + static_cast<std::uint64_t>(i));
        const int h = page.horizon();
        Vector a = Vector::Zero(h);
        const int t = taps(gen);
        a.head(t) = oracle::random_vector(gen, t, -0.6, 0.6);
        const Channel ch = kChannels[i % 3];
        const ClosedLoopMap map = closed_loop_map(page, ImpulseResponse(a), ch);
        const Vector g = oracle::markov(plant, h);
        for (Eigen::Index j = 0; j < map.phi.cols(); ++j) {
            const Vector col = map.phi.col(j);
            const Vector ref = loop_output(oracle::simulate_loop(g, a, col.head(h)), ch);
            worst_sound = std::max(worst_sound, (col.tail(h) - ref).norm() / std::max(1e-300, col.norm()));
        }
        const Matrix basis = range_basis(map.phi);
        for (int k = 0; k < 20; ++k) {
            const Vector r = oracle::random_vector(gen, h);
            Vector traj(2 * h);
            traj << r, loop_output(oracle::simulate_loop(g, a, r), ch);
            const Vector residual = traj - basis * (basis.transpose() * traj);
            worst_complete = std::max(worst_complete, residual.norm() / traj.norm());
        }
    }
    Outcome o;
    o.pass = worst_sound <= 1e-8 && worst_complete <= 1e-8;
    o.detail = std::to_string(pairs) + " plant/FIR pairs, soundness " + num(worst_sound) + ", completeness "
               + num(worst_complete);
    return o;
}

Outcome criterion_closed_loop() {
    std::mt19937_64 gen(99);
    std::uniform_int_distribution<int> order(1, 3);
    std::uniform_int_distribution<int> depth(8, 16);
    std::uniform_real_distribution<double> entry(-2.0, 2.0);
    constexpr int cases = 25;
    int agree = 0;
    double worst = 0.0;
    for (int i = 0; i < cases; ++i) {
        const StateSpace plant = random_stable_siso(order(gen), 700 + static_cast<std::uint64_t>(i));
        const DataPage page = fixture_page(plant, depth(gen), 800 + static_cast<std::uint64_t>(i));
        const int h = page.horizon();
        Vector a = Vector::Zero(h);
        const int taps = std::min(h, 1 + i % 4);
        a.head(taps) = oracle::random_vector(gen, taps, -0.6, 0.6);
        const SupplyRate sr{entry(gen), entry(gen), entry(gen)};
        const Channel ch = kChannels[i % 3];
        std::optional<Vector> filter;
        if (i % 5 == 4) {
            filter = oracle::random_vector(gen, 2, 0.2, 1.0);
        }
        const Certificate data = validate_closed_loop(page, ImpulseResponse(a), ch, sr, filter);
        const double model = oracle_closed_loop_margin(plant, a, ch, sr, filter);
        agree += data.dissipative == (model >= -kPsdRelativeTolerance * sr.scale()) ? 1 : 0;
        worst = std::max(worst, std::abs(data.margin - model));
    }
    Outcome o;
    o.pass = agree == cases && worst <= 1e-6;
    o.detail = std::to_string(agree) + "/" + std::to_string(cases) + " verdicts agree, max margin gap " + num(worst);
    return o;
}

Outcome criterion_assembly() {
    std::mt19937_64 gen(31);
    std::uniform_real_distribution<double> entry(-2.0, 2.0);
    const StateSpace plant = random_stable_siso(2, 17);
    const DataPage page = fixture_page(plant, 16, 18);
    const int h = page.horizon();
    double worst_direct = 0.0;
    double worst_closed = 0.0;
    for (const ControllerBasis& basis : {pi_basis(h, 0.5), fir_basis(h, 3)}) {
        for (Channel ch : kChannels) {
            for (const bool filtered : {false, true}) {
                DissipativitySpec spec{ch, {entry(gen), entry(gen), entry(gen)}, std::nullopt, 0.0};
                if (filtered) {
                    spec.filter = oracle::random_vector(gen, 3, 0.1, 1.0);
                }
                const QmiProblem q = assemble_qmi(page, spec, basis);
                for (int k = 0; k < 20; ++k) {
                    const Vector p = oracle::random_vector(gen, basis.params());
                    const Matrix direct = direct_quadratic_form(page, spec, basis, p);
                    worst_direct =
                        std::max(worst_direct, (evaluate(q, p) - direct).norm() / std::max(1.0, direct.norm()));
                }
            }
        }
        const SupplyRate sr{entry(gen), entry(gen), entry(gen)};
        const QmiProblem generic = assemble_qmi(page, {Channel::r_to_z, sr, std::nullopt, 0.0}, basis);
        const QmiProblem closed = assemble_qmi_r_to_z_closed_form(page.basis_u(), page.basis_y(), sr, basis);
        worst_closed = std::max(worst_closed, (generic.q0 - closed.q0).cwiseAbs().maxCoeff());
        for (int i = 0; i < basis.params(); ++i) {
            worst_closed = std::max(worst_closed, (generic.linear[i] - closed.linear[i]).cwiseAbs().maxCoeff());
        }
        for (std::size_t k = 0; k < generic.quadratic.size(); ++k) {
            worst_closed =
                std::max(worst_closed, (generic.quadratic[k] - closed.quadratic[k]).cwiseAbs().maxCoeff());
        }
    }
    Outcome o;
    o.pass = worst_direct <= 1e-10 && worst_closed <= 1e-12;
    o.detail = "direct evaluation gap " + num(worst_direct) + " (relative), closed-form gap " + num(worst_closed);
    return o;
}

Outcome criterion_two_tank() {
    const auto t0 = Clock::now();
    const TwoTankRun run = run_two_tank(1, true);
    const double elapsed = seconds_since(t0);
    Outcome o;
    const bool pe = run.excitation.persistently_exciting && run.excitation.order == 112;
    double worst_margin = std::numeric_limits<double>::infinity();
    for (const auto& check : run.validation) {
        worst_margin = std::min(worst_margin, check.certificate.margin);
    }
    const bool feasible = run.controller.has_value() && !run.validation.empty() && worst_margin >= -1e-8;
    const bool step = run.controller.has_value() && run.step_error_after_100 < 0.05;
    const bool reference = run.reference_validation && run.reference_validation->dissipative;
    o.pass = pe && feasible && step && reference && elapsed < 120.0;
    o.detail = "(a) PE order 112 " + std::string(pe ? "yes" : "no");
    if (run.controller) {
        o.detail += ", (b) PI (" + num(run.controller->p(0), 4) + ", " + num(run.controller->p(1), 4)
                    + ") min margin " + num(worst_margin) + ", (c) max |z-1| after k=100 "
                    + num(run.step_error_after_100);
    } else {
        o.detail += ", (b) no feasible PI";
    }
    o.detail += ", (d) reference PI gains at 1.01x oracle gain " + std::string(reference ? "pass" : "fail") + ", "
                + num(elapsed) + " s";
    return o;
}

// Infeasible by construction: with Y = v v', tr(Y Q_i) = 0 and the quadratic
// form K_ij = tr(Y Q_ij) (halved off the diagonal) PSD, tr(Y Q(p)) >= tr(Y Q0) > 0.
QmiProblem infeasible_qmi(std::mt19937_64& gen, int m, int d) {
    const Vector v = oracle::random_vector(gen, m).normalized();
    const Matrix y = v * v.transpose();
    const Matrix root = oracle::random_symmetric(gen, d);
    const Matrix k = root * root.transpose();
    Matrix q0 = oracle::random_symmetric(gen, m);
    q0 += (0.2 - v.dot(q0 * v)) * y;
    std::vector<Matrix> linear;
    for (int i = 0; i < d; ++i) {
        Matrix l = oracle::random_symmetric(gen, m);
        l -= v.dot(l * v) * y;
        linear.push_back(l);
    }
    std::vector<Matrix> quadratic(d * (d + 1) / 2);
    for (int i = 0; i < d; ++i) {
        for (int j = i; j < d; ++j) {
            Matrix c = oracle::random_symmetric(gen, m);
            const double want = i == j ? k(i, i) : 2.0 * k(i, j);
            c += (want - v.dot(c * v)) * y;
            quadratic[QmiProblem::pair_index(i, j, d)] = c;
        }
    }
    return make_qmi(q0, linear, quadratic);
}

QmiProblem feasible_qmi(std::mt19937_64& gen, int m, int d) {
    std::vector<Matrix> linear;
    for (int i = 0; i < d; ++i) {
        linear.push_back(oracle::random_symmetric(gen, m, 0.5));
    }
    std::vector<Matrix> quadratic;
    for (int k = 0; k < d * (d + 1) / 2; ++k) {
        quadratic.push_back(oracle::random_symmetric(gen, m, 0.3));
    }
    QmiProblem q = make_qmi(oracle::random_symmetric(gen, m), linear, quadratic);
    const Vector p_star = oracle::random_vector(gen, d, -0.5, 0.5);
    q.q0 -= (oracle::max_eig(evaluate(q, p_star)) + 0.3) * Matrix::Identity(m, m);
    return q;
}

Outcome criterion_solver() {
    std::mt19937_64 gen(555);
    std::uniform_int_distribution<int> dim(5, 50);
    constexpr int problems = 20;
    int false_feasible = 0;
    int unverified = 0;
    int label_mismatch = 0;
    int solved = 0;
    int labelled_feasible = 0;
    for (int i = 0; i < problems; ++i) {
        const int d = 1 + i % 3;
        const int m = dim(gen);
        const bool constructed_feasible = i % 2 == 0;
        const QmiProblem q = constructed_feasible ? feasible_qmi(gen, m, d) : infeasible_qmi(gen, m, d);
        const int grid = d == 3 ? 11 : 21;
        const bool label =
            direct_search(q, Box{std::vector<std::pair<double, double>>(d, {-1.0, 1.0})}, grid).feasible;
        label_mismatch += label != constructed_feasible ? 1 : 0;
        labelled_feasible += label ? 1 : 0;

        SolverOptions opts;
        const SolveReport r = solve_feasibility(q, opts);
        if (r.feasible) {
            ++solved;
            if (!label) {
                ++false_feasible;
            }
            if (oracle::max_eig(evaluate(q, *r.p)) > -opts.eps + 1e-12) {
                ++unverified;
            }
        }
    }
    Outcome o;
    o.pass = false_feasible == 0 && unverified == 0 && label_mismatch == 0;
    o.detail = std::to_string(problems) + " problems (" + std::to_string(labelled_feasible)
               + " feasible by grid search), solver feasible on " + std::to_string(solved) + ", false feasible "
               + std::to_string(false_feasible) + ", unverified " + std::to_string(unverified)
               + ", label mismatches " + std::to_string(label_mismatch);
    return o;
}

Outcome criterion_small_gain() {
    StateSpace plant = random_stable_siso(2, 21);
    const DataPage unscaled = fixture_page(plant, 20, 22);
    // scale the output so the plant gain is 0.5; the bound c = 1/gamma then
    // gives |T_g| |T_a| <= sqrt(gamma) < 1
    plant.C *= 0.5 / finite_horizon_l2_gain(unscaled, 1e-9);
    plant.D *= 0.5 / finite_horizon_l2_gain(unscaled, 1e-9);
    const DataPage page = fixture_page(plant, 20, 22);
    const int h = page.horizon();
    const double gamma = finite_horizon_l2_gain(page, 1e-9);
    const double c = 1.0 / gamma;

    const ControllerBasis basis = fir_basis(h, 2);
    const DissipativitySpec spec{Channel::r_to_e, SupplyRate::l2_gain(1.0), Vector::Constant(1, 0.9), 0.0};
    SolverOptions opts;
    opts.stop_at_first_feasible = false;
    const SolveReport r =
        solve_feasibility(augment({assemble_qmi(page, spec, basis), small_gain_constraint(basis, c)}), opts);
    Outcome o;
    if (!r.feasible || !r.p) {
        o.pass = false;
        o.detail = "no feasible controller under the small-gain bound";
        return o;
    }
    const ImpulseResponse a = basis.impulse_of(*r.p);
    const double norm_a = Eigen::JacobiSVD<Matrix>(basis.toeplitz_of(*r.p)).singularValues()(0);
    const double norm_g =
        Eigen::JacobiSVD<Matrix>(oracle::convolution_matrix(oracle::markov(plant, h), h)).singularValues()(0);
    const double rho = norm_g * norm_a;

    double lo = 0.0;
    double hi = 1.0;
    auto passes = [&](double g) {
        return validate_closed_loop(page, a, Channel::r_to_z, SupplyRate::l2_gain(g)).dissipative;
    };
    while (!passes(hi) && hi < 1e6) {
        hi *= 2.0;
    }
    while (hi - lo > 1e-9) {
        const double mid = 0.5 * (lo + hi);
        (passes(mid) ? hi : lo) = mid;
    }
    const double gamma_cl = hi;
    Matrix op(h, h);
    for (int j = 0; j < h; ++j) {
        op.col(j) = oracle::simulate_loop(oracle::markov(plant, h), a.a, Vector::Unit(h, j)).z;
    }
    const double oracle_gain = Eigen::JacobiSVD<Matrix>(op).singularValues()(0);

    o.pass = r.p->size() == 2 && norm_a * norm_a < c && rho < 1.0 && std::isfinite(gamma_cl) && passes(gamma_cl)
             && gamma_cl <= rho / (1.0 - rho) + 1e-6 && gamma_cl < 1.0 / (1.0 - rho)
             && std::abs(gamma_cl - oracle_gain) <= 1e-6 * std::max(1.0, oracle_gain);
    o.detail = "plant gain " + num(gamma, 4) + ", |T_a|^2 " + num(norm_a * norm_a, 4) + " < c " + num(c, 4)
               + ", |T_g||T_a| " + num(rho, 4) + ", gamma_cl " + num(gamma_cl, 6) + " (oracle " + num(oracle_gain, 6)
               + ", bound " + num(rho / (1.0 - rho), 4) + ")";
    return o;
}

} // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"1 open-loop dissipativity equals model oracle", criterion_open_loop},
        {"2 closed-loop parametrization sound and complete", criterion_parametrization},
        {"3 closed-loop dissipativity equals model oracle", criterion_closed_loop},
        {"4 QMI assembly identity", criterion_assembly},
        {"5 two-tank reproduction", criterion_two_tank},
        {"6 solver contract", criterion_solver},
        {"7 small-gain constraint", criterion_small_gain},
    };
    int failures = 0;
    for (const auto& [name, run] : criteria) {
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        std::printf("%s  %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
        std::fflush(stdout);
        failures += o.pass ? 0 : 1;
    }
    return failures == 0 ? 0 : 1;
}
