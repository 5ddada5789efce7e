#include "datadiss/pipeline.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace datadiss {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(6);
    os << x;
    return os.str();
}

std::string fmt(const Vector& v) {
    std::string s = "(";
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        s += (i ? ", " : "") + fmt(v(i));
    }
    return s + ")";
}

DataPage page_for(const Trajectory& data, const RunConfig& config) {
    config.validate();
    return build_data_page(data, config.depth, config.nu, config.order_bound);
}

json page_json(const DataPage& page) {
    return {{"N", page.traj.size()},
            {"L", page.depth},
            {"nu", page.nu},
            {"n_bound", page.order_bound},
            {"horizon", page.horizon()},
            {"excitation_order", page.excitation_order},
            {"trajectory_dim", page.trajectory_dim()},
            {"kernel_columns", page.kernel.cols()},
            {"warnings", page.warnings}};
}

void page_text(std::ostringstream& os, const DataPage& page) {
    os << "data: N=" << page.traj.size() << " L=" << page.depth << " nu=" << page.nu << " n_bound=" << page.order_bound
       << " horizon=" << page.horizon() << "\n";
    os << "input persistently exciting up to order " << page.excitation_order << "\n";
    for (const auto& w : page.warnings) {
        os << "warning: " << w << "\n";
    }
}

json certificate_json(const Certificate& c) {
    return {{"dissipative", c.dissipative}, {"margin", c.margin}, {"tolerance", c.tolerance},
            {"matrix_dim", c.matrix_dim}};
}

std::string verdict(const Certificate& c) {
    return (c.dissipative ? "dissipative" : "NOT dissipative") + std::string(" (margin ") + fmt(c.margin) + ")";
}

json spec_json(const DissipativitySpec& s) {
    json j = {{"channel", std::string(to_string(s.channel))}, {"supply", supply_to_json(s.sr)}, {"delta", s.delta}};
    if (s.filter) {
        j["filter_taps"] = s.filter->size();
    }
    return j;
}

std::string spec_label(const DissipativitySpec& s) {
    std::string label = std::string(to_string(s.channel)) + " Q=" + fmt(s.sr.Q) + " S=" + fmt(s.sr.S)
                        + " R=" + fmt(s.sr.R);
    if (s.filter) {
        label += " filtered(" + std::to_string(s.filter->size()) + " taps)";
    }
    return label;
}

std::vector<SpecCheck> validate_all(const DataPage& page, const ImpulseResponse& a,
                                    const std::vector<DissipativitySpec>& specs) {
    std::vector<SpecCheck> out;
    for (const auto& s : specs) {
        out.push_back({s, validate_closed_loop(page, a, s.channel, s.sr, s.filter)});
    }
    return out;
}

json solve_json(const SolveReport& r, const ControllerBasis& basis) {
    json j = {{"feasible", r.feasible},
              {"final_margin", r.final_margin},
              {"iterations", r.iterations},
              {"trace", r.trace},
              {"basis", basis.kind},
              {"labels", basis.labels}};
    if (r.p) {
        j["p"] = vector_to_json(*r.p);
    }
    return j;
}

struct SynthesisOutcome {
    SolveReport solve;
    std::optional<double> small_gain_bound;
};

SynthesisOutcome synthesize(const DataPage& page, const RunConfig& config, const ControllerBasis& basis) {
    std::vector<QmiProblem> problems;
    for (const auto& s : config.specs) {
        problems.push_back(assemble_qmi(page, s, basis));
    }
    SynthesisOutcome out;
    if (config.small_gain) {
        out.small_gain_bound =
            config.small_gain->bound ? *config.small_gain->bound : 1.0 / finite_horizon_l2_gain(page);
        problems.push_back(small_gain_constraint(basis, *out.small_gain_bound));
    }
    if (problems.empty()) {
        throw std::invalid_argument("synthesis needs at least one spec or a small_gain bound");
    }
    out.solve = solve_feasibility(augment(problems), config.solver);
    return out;
}

double spectral_norm(const Matrix& m) {
    return Eigen::JacobiSVD<Matrix>(m).singularValues()(0);
}

std::complex<double> fir_frequency_response(const Vector& w, double omega) {
    std::complex<double> sum = 0.0;
    for (Eigen::Index k = 0; k < w.size(); ++k) {
        sum += w(k) * std::polar(1.0, -omega * static_cast<double>(k));
    }
    return sum;
}

std::vector<MagnitudeRow> sensitivity_magnitudes(const StateSpace& plant, const StateSpace& controller,
                                                 const DissipativitySpec& we, const DissipativitySpec& wu) {
    constexpr int points = 200;
    const double lo = std::log10(1e-3);
    const double hi = std::log10(std::numbers::pi);
    const double gamma_e = std::sqrt(we.sr.Q);
    const double gamma_u = std::sqrt(wu.sr.Q);
    std::vector<MagnitudeRow> rows;
    for (int i = 0; i < points; ++i) {
        const double omega = std::pow(10.0, lo + (hi - lo) * i / (points - 1));
        const auto g = frequency_response(plant, omega);
        const auto k = frequency_response(controller, omega);
        const auto s = 1.0 / (1.0 + g * k);
        rows.push_back({omega, std::abs(s), std::abs(k * s), gamma_e / std::abs(fir_frequency_response(*we.filter, omega)),
                        gamma_u / std::abs(fir_frequency_response(*wu.filter, omega))});
    }
    return rows;
}

} // namespace

StateSpace resolve_plant(const std::string& name) {
    if (name == "two_tank") {
        return two_tank_plant();
    }
    if (name == "unit_delay") {
        return unit_delay();
    }
    if (name.rfind("random:", 0) == 0) {
        const auto colon = name.find(':', 7);
        if (colon == std::string::npos) {
            throw std::invalid_argument("random plant must be written random:<order>:<seed>");
        }
        return random_stable_siso(std::stoi(name.substr(7, colon - 7)), std::stoull(name.substr(colon + 1)));
    }
    if (!fs::exists(name)) {
        throw std::invalid_argument("unknown plant '" + name
                                    + "' (expected two_tank, unit_delay, random:<order>:<seed> or a JSON file)");
    }
    return read_state_space(name);
}

ImpulseResponse fit_to_horizon(const ImpulseResponse& a, int horizon) {
    Vector out = Vector::Zero(horizon);
    const auto n = std::min<Eigen::Index>(horizon, a.size());
    out.head(n) = a.a.head(n);
    return ImpulseResponse(out);
}

std::string output_signal_name(Channel channel) {
    switch (channel) {
        case Channel::r_to_z: return "z";
        case Channel::r_to_e: return "e";
        case Channel::r_to_u: return "u";
    }
    return "z";
}

CommandResult cmd_generate(const GenerateArgs& args) {
    if (args.length < 1) {
        throw std::invalid_argument("generate: N must be positive");
    }
    const StateSpace plant = resolve_plant(args.plant);
    const Vector u = pe_input_uniform(args.length, -args.amplitude, args.amplitude, args.seed);
    const Trajectory traj = simulate(plant, u);
    write_trajectory_csv(args.out, traj);

    CommandResult res;
    const int achieved = max_excitation_order(u);
    std::ostringstream os;
    os << "wrote " << args.length << " samples of plant " << args.plant << " (seed " << args.seed << ") to "
       << args.out.string() << "\n";
    os << "input persistently exciting up to order " << achieved << "\n";
    res.report = {{"plant", args.plant}, {"N", args.length}, {"seed", args.seed}, {"excitation_order", achieved}};
    if (args.order) {
        const auto pe = is_persistently_exciting(u, *args.order);
        os << "persistently exciting of order " << *args.order << ": " << (pe.persistently_exciting ? "true" : "false");
        if (!pe.persistently_exciting) {
            os << " (warning: " << pe.reason << ", achieved order " << achieved << ")";
        }
        os << "\n";
        res.report["requested_order"] = *args.order;
        res.report["persistently_exciting"] = pe.persistently_exciting;
    }
    res.text = os.str();
    return res;
}

CommandResult cmd_check(const Trajectory& data, const RunConfig& config) {
    const DataPage page = page_for(data, config);
    std::vector<SupplyRate> supplies = config.open_loop;
    if (supplies.empty()) {
        for (const auto& s : config.specs) {
            supplies.push_back(s.sr);
        }
    }
    if (supplies.empty()) {
        throw std::invalid_argument("check: config lists no supply rates (open_loop or specs)");
    }
    CommandResult res;
    std::ostringstream os;
    page_text(os, page);
    const double gain = finite_horizon_l2_gain(page);
    os << "finite-horizon L2 gain estimate: " << fmt(gain) << "\n";
    json checks = json::array();
    for (const auto& sr : supplies) {
        const Certificate c = check_open_loop(page, sr);
        os << "supply Q=" << fmt(sr.Q) << " S=" << fmt(sr.S) << " R=" << fmt(sr.R) << ": " << verdict(c) << "\n";
        checks.push_back({{"supply", supply_to_json(sr)}, {"certificate", certificate_json(c)}});
        if (!c.dissipative) {
            res.exit_code = kExitNegative;
        }
    }
    res.report = {{"data", page_json(page)}, {"l2_gain_estimate", gain}, {"checks", checks}};
    res.text = os.str();
    return res;
}

CommandResult cmd_validate(const Trajectory& data, const ImpulseResponse& controller, const RunConfig& config) {
    const DataPage page = page_for(data, config);
    if (config.specs.empty()) {
        throw std::invalid_argument("validate: config lists no specs");
    }
    const ImpulseResponse a = fit_to_horizon(controller, page.horizon());
    CommandResult res;
    std::ostringstream os;
    page_text(os, page);
    json checks = json::array();
    for (const auto& check : validate_all(page, a, config.specs)) {
        os << spec_label(check.spec) << ": " << verdict(check.certificate) << "\n";
        checks.push_back({{"spec", spec_json(check.spec)}, {"certificate", certificate_json(check.certificate)}});
        if (!check.certificate.dissipative) {
            res.exit_code = kExitNegative;
        }
    }
    res.report = {{"data", page_json(page)}, {"controller_taps", controller.size()}, {"checks", checks}};
    res.text = os.str();
    return res;
}

CommandResult cmd_synthesize(const Trajectory& data, const RunConfig& config, const fs::path& controller_out) {
    const DataPage page = page_for(data, config);
    const ControllerBasis basis = config.basis.build(page.horizon());
    const SynthesisOutcome outcome = synthesize(page, config, basis);
    const SolveReport& r = outcome.solve;

    CommandResult res;
    std::ostringstream os;
    page_text(os, page);
    os << "solver: " << r.iterations << " iterations, final lambda_max " << fmt(r.final_margin) << "\n";
    res.report = {{"data", page_json(page)}, {"solve", solve_json(r, basis)}};
    if (outcome.small_gain_bound) {
        res.report["small_gain_bound"] = *outcome.small_gain_bound;
    }
    if (!r.feasible || !r.p) {
        os << "infeasible: no parameters with lambda_max <= -" << fmt(config.solver.eps) << " found\n";
        res.exit_code = kExitNegative;
        res.text = os.str();
        return res;
    }
    os << "feasible: p = " << fmt(*r.p);
    for (std::size_t i = 0; i < basis.labels.size(); ++i) {
        os << (i ? ", " : " [") << basis.labels[i];
    }
    os << "]\n";

    const ImpulseResponse a = basis.impulse_of(*r.p);
    write_controller_csv(controller_out, a);
    write_controller_sidecar(sidecar_path(controller_out), {basis.kind, basis.labels, *r.p, basis.sampling_time});
    os << "controller written to " << controller_out.string() << "\n";

    json checks = json::array();
    for (const auto& check : validate_all(page, a, config.specs)) {
        os << "post-validation " << spec_label(check.spec) << ": " << verdict(check.certificate) << "\n";
        checks.push_back({{"spec", spec_json(check.spec)}, {"certificate", certificate_json(check.certificate)}});
    }
    res.report["validation"] = checks;
    if (outcome.small_gain_bound) {
        const double norm_sq = std::pow(spectral_norm(basis.toeplitz_of(*r.p)), 2);
        os << "small gain: |T|^2 = " << fmt(norm_sq) << " vs c = " << fmt(*outcome.small_gain_bound) << "\n";
        res.report["controller_norm_squared"] = norm_sq;
    }
    res.text = os.str();
    return res;
}

CommandResult cmd_respond(const Trajectory& data, const ImpulseResponse& controller,
                          const std::optional<Vector>& reference, Channel channel, const RunConfig& config,
                          const fs::path& out) {
    const DataPage page = page_for(data, config);
    const int h = page.horizon();
    const Vector r = reference ? *reference : Vector::Ones(h);
    if (r.size() != h) {
        throw std::invalid_argument("respond: reference has " + std::to_string(r.size())
                                    + " samples, horizon L - nu is " + std::to_string(h));
    }
    const ImpulseResponse a = fit_to_horizon(controller, h);
    const ClosedLoopResponse resp = closed_loop_response(page, a, channel, r);
    const std::string name = output_signal_name(channel);
    write_response_csv(out, r, resp.output, name);

    CommandResult res;
    std::ostringstream os;
    page_text(os, page);
    os << "response " << to_string(channel) << " (" << (reference ? "reference file" : "unit step") << ") written to "
       << out.string() << "\n";
    os << "final " << name << " = " << fmt(resp.output(h - 1)) << ", reference residual " << fmt(resp.residual) << "\n";
    res.report = {{"data", page_json(page)},
                  {"channel", std::string(to_string(channel))},
                  {"reference", reference ? "file" : "step"},
                  {"final_output", resp.output(h - 1)},
                  {"residual", resp.residual}};
    res.text = os.str();
    return res;
}

RunConfig two_tank_config() {
    RunConfig c;
    c.depth = 110;
    c.nu = 2;
    c.order_bound = 2;
    const int h = c.depth - c.nu;
    Vector we(h);
    for (int k = 0; k < h; ++k) {
        we(k) = 6.0 * (1.0 - 0.995) * std::pow(0.995, k);
    }
    c.specs.push_back({Channel::r_to_e, SupplyRate::l2_gain(1.0), we, 0.0});
    c.specs.push_back({Channel::r_to_u, SupplyRate::l2_gain(1.0), Vector::Constant(1, 2.0), 0.0});
    c.basis = {BasisKind::pi, kTwoTankSamplingTime, 1};
    c.solver.p0 = Vector::Zero(2);
    c.solver.stop_at_first_feasible = false;
    c.seed = 1;
    return c;
}

TwoTankRun run_two_tank(std::uint64_t seed, bool use_model) {
    RunConfig config = two_tank_config();
    config.seed = seed;
    const StateSpace plant = two_tank_plant();
    const Vector u = pe_input_uniform(kTwoTankLength, -1.0, 1.0, seed);
    Trajectory data = simulate(plant, u);
    DataPage page = page_for(data, config);
    TwoTankRun run{.data = data,
                   .config = config,
                   .page = page,
                   .excitation = is_persistently_exciting(u, config.depth + config.nu),
                   .plant_gain = finite_horizon_l2_gain(page),
                   .solve = {},
                   .controller = std::nullopt,
                   .validation = {},
                   .step_reference = Vector::Ones(page.horizon()),
                   .step_output = {},
                   .step_error_after_100 = 0.0,
                   .reference_oracle_gain = std::nullopt,
                   .reference_validation = std::nullopt,
                   .magnitude = {}};
    const int h = page.horizon();
    const ControllerBasis basis = config.basis.build(h);
    run.solve = synthesize(run.page, config, basis).solve;
    if (run.solve.feasible && run.solve.p) {
        const Vector& p = *run.solve.p;
        run.controller = ControllerSidecar{basis.kind, basis.labels, p, basis.sampling_time};
        const ImpulseResponse a = basis.impulse_of(p);
        run.validation = validate_all(run.page, a, config.specs);
        run.step_output = closed_loop_response(run.page, a, Channel::r_to_z, run.step_reference).output;
        for (int k = 100; k < h; ++k) {
            run.step_error_after_100 = std::max(run.step_error_after_100, std::abs(run.step_output(k) - 1.0));
        }
        if (use_model) {
            run.magnitude = sensitivity_magnitudes(plant, pi_realization(p(0), p(1), basis.sampling_time),
                                                   config.specs[0], config.specs[1]);
        }
    }
    if (use_model) {
        Vector p_reference(2);
        p_reference << kReferenceKp, kReferenceKi;
        const ImpulseResponse a = basis.impulse_of(p_reference);
        run.reference_oracle_gain = spectral_norm(oracle_closed_loop_operator(plant, a, Channel::r_to_z));
        run.reference_validation =
            validate_closed_loop(run.page, a, Channel::r_to_z, SupplyRate::l2_gain(1.01 * *run.reference_oracle_gain));
    }
    return run;
}

CommandResult cmd_reproduce_two_tank(std::uint64_t seed, const fs::path& outdir, bool use_model) {
    const TwoTankRun run = run_two_tank(seed, use_model);
    write_trajectory_csv(outdir / "data.csv", run.data);
    write_text(outdir / "config.json", run_config_to_json(run.config).dump(2) + "\n");

    CommandResult res;
    std::ostringstream os;
    os << "two-tank reproduction (seed " << seed << ")\n";
    page_text(os, run.page);
    os << "persistently exciting of order " << run.excitation.order << ": "
       << (run.excitation.persistently_exciting ? "true" : "false") << "\n";
    os << "plant finite-horizon L2 gain estimate: " << fmt(run.plant_gain) << "\n";
    os << "spec: r_to_e L2 gain 1 with weight w_e(k) = 6 (1 - 0.995) 0.995^k; r_to_u L2 gain 1 with weight w_u = 2\n";
    const ControllerBasis basis = run.config.basis.build(run.page.horizon());
    res.report = {{"seed", seed},
                  {"data", page_json(run.page)},
                  {"persistently_exciting", run.excitation.persistently_exciting},
                  {"excitation_order_checked", run.excitation.order},
                  {"plant_l2_gain_estimate", run.plant_gain},
                  {"solve", solve_json(run.solve, basis)}};
    bool ok = run.excitation.persistently_exciting;

    if (run.controller) {
        const ImpulseResponse a = basis.impulse_of(run.controller->p);
        write_controller_csv(outdir / "controller.csv", a);
        write_controller_sidecar(outdir / "controller.json", *run.controller);
        write_response_csv(outdir / "step_response.csv", run.step_reference, run.step_output, "z");
        os << "feasible PI: Kp = " << fmt(run.controller->p(0)) << ", Ki = " << fmt(run.controller->p(1))
           << " (lambda_max " << fmt(run.solve.final_margin) << ")\n";
        json checks = json::array();
        for (const auto& check : run.validation) {
            os << "validation " << spec_label(check.spec) << ": " << verdict(check.certificate) << "\n";
            checks.push_back({{"spec", spec_json(check.spec)}, {"certificate", certificate_json(check.certificate)}});
            ok = ok && check.certificate.dissipative;
        }
        res.report["validation"] = checks;
        os << "step response: max |z_k - 1| for k >= 100 is " << fmt(run.step_error_after_100) << "\n";
        res.report["step_error_after_100"] = run.step_error_after_100;
        ok = ok && run.step_error_after_100 < 0.05;
    } else {
        os << "no feasible PI controller found (lambda_max " << fmt(run.solve.final_margin) << ")\n";
        ok = false;
    }

    if (run.reference_validation) {
        os << "reference PI gains (Kp, Ki) = (" << kReferenceKp << ", " << kReferenceKi << "): oracle r_to_z gain "
           << fmt(*run.reference_oracle_gain) << ", data-based check at 1.01x: " << verdict(*run.reference_validation) << "\n";
        res.report["reference_gains"] = {{"Kp", kReferenceKp},
                                     {"Ki", kReferenceKi},
                                     {"oracle_gain", *run.reference_oracle_gain},
                                     {"certificate", certificate_json(*run.reference_validation)}};
        ok = ok && run.reference_validation->dissipative;
    }
    if (!run.magnitude.empty()) {
        write_magnitude_csv(outdir / "magnitude.csv", run.magnitude);
        const std::string note = "plotting this magnitude plot requires knowledge of the plant model";
        os << "magnitude.csv written; note: " << note << "\n";
        res.report["magnitude_note"] = note;
    }
    res.report["all_checks_passed"] = ok;
    os << (ok ? "all checks passed" : "some checks FAILED") << "\n";
    res.exit_code = ok ? kExitOk : kExitNegative;
    res.text = os.str();
    write_text(outdir / "report.txt", res.text);
    write_text(outdir / "report.json", res.report.dump(2) + "\n");
    return res;
}

} // namespace datadiss
