#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "datadiss/pipeline.hpp"

using namespace datadiss;

namespace {

struct ControllerSource {
    std::string file;
    std::vector<double> pi;
};

ImpulseResponse load_controller(const ControllerSource& src, const RunConfig& config) {
    if (!src.pi.empty()) {
        if (config.basis.kind != BasisKind::pi) {
            throw std::invalid_argument("--pi requires a pi basis in the config");
        }
        const ControllerBasis basis = config.basis.build(config.depth - config.nu);
        return basis.impulse_of(Eigen::Vector2d(src.pi[0], src.pi[1]));
    }
    if (src.file.empty()) {
        throw std::invalid_argument("give a controller file or --pi KP KI");
    }
    return read_controller_csv(src.file);
}

int finish(const CommandResult& res, const std::string& json_out) {
    std::cout << res.text;
    if (!json_out.empty()) {
        write_text(json_out, res.report.dump(2) + "\n");
    }
    return res.exit_code;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Data-driven dissipativity analysis and controller synthesis"};
    app.require_subcommand(1);
    app.fallthrough();
    std::string json_out;
    app.add_option("--json", json_out, "Also write the machine-readable report here");

    GenerateArgs gen;
    auto* generate = app.add_subcommand("generate", "Simulate a plant under a random input and write k,u,y CSV");
    generate->add_option("--plant", gen.plant, "two_tank, unit_delay, random:<order>:<seed> or a state-space JSON file")
        ->capture_default_str();
    generate->add_option("-N,--length", gen.length, "Number of samples")->capture_default_str();
    generate->add_option("--seed", gen.seed, "Input seed")->capture_default_str();
    generate->add_option("--amplitude", gen.amplitude, "Input drawn uniformly from [-a, a)")->capture_default_str();
    std::optional<int> order;
    generate->add_option("--order", order, "Excitation order to confirm");
    std::string gen_out;
    generate->add_option("-o,--out", gen_out, "Output CSV")->required();

    std::string data_file;
    std::string config_file;
    auto* check = app.add_subcommand("check", "Open-loop dissipativity from data");
    check->add_option("data", data_file, "Trajectory CSV")->required()->check(CLI::ExistingFile);
    check->add_option("-c,--config", config_file, "Run configuration JSON")->required()->check(CLI::ExistingFile);

    ControllerSource ctrl;
    auto* validate = app.add_subcommand("validate", "Closed-loop dissipativity of a given controller from data");
    validate->add_option("data", data_file, "Trajectory CSV")->required()->check(CLI::ExistingFile);
    validate->add_option("controller", ctrl.file, "Controller CSV (k,a)")->check(CLI::ExistingFile);
    validate->add_option("--pi", ctrl.pi, "PI gains KP KI instead of a controller file")->expected(2);
    validate->add_option("-c,--config", config_file, "Run configuration JSON")->required()->check(CLI::ExistingFile);

    std::string ctrl_out;
    auto* synth = app.add_subcommand("synthesize", "Search controller parameters meeting every spec");
    synth->add_option("data", data_file, "Trajectory CSV")->required()->check(CLI::ExistingFile);
    synth->add_option("-c,--config", config_file, "Run configuration JSON")->required()->check(CLI::ExistingFile);
    synth->add_option("-o,--out", ctrl_out, "Controller CSV; a .json sidecar is written beside it")->required();

    std::string reference = "step";
    std::string channel = "r_to_z";
    std::string resp_out;
    auto* respond = app.add_subcommand("respond", "Closed-loop response to a reference, from data");
    respond->add_option("data", data_file, "Trajectory CSV")->required()->check(CLI::ExistingFile);
    respond->add_option("controller", ctrl.file, "Controller CSV (k,a)")->check(CLI::ExistingFile);
    respond->add_option("--pi", ctrl.pi, "PI gains KP KI instead of a controller file")->expected(2);
    respond->add_option("-c,--config", config_file, "Run configuration JSON")->required()->check(CLI::ExistingFile);
    respond->add_option("-r,--reference", reference, "Reference CSV (k,r) or 'step'")->capture_default_str();
    respond->add_option("--channel", channel, "r_to_z, r_to_e or r_to_u")->capture_default_str();
    respond->add_option("-o,--out", resp_out, "Response CSV")->required();

    std::uint64_t seed = 1;
    std::string outdir = "two_tank_out";
    bool data_only = false;
    auto* reproduce = app.add_subcommand("reproduce", "Two-tank design example end to end");
    reproduce->add_option("--seed", seed, "Input seed")->capture_default_str();
    reproduce->add_option("-o,--outdir", outdir, "Artifact directory")->capture_default_str();
    reproduce->add_flag("--data-only", data_only, "Skip the parts that need the plant model");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // usage errors share the generic error code; --help stays 0
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitError;
    }

    try {
        if (generate->parsed()) {
            gen.order = order;
            gen.out = gen_out;
            return finish(cmd_generate(gen), json_out);
        }
        if (reproduce->parsed()) {
            return finish(cmd_reproduce_two_tank(seed, outdir, !data_only), json_out);
        }
        const Trajectory data = read_trajectory_csv(data_file);
        const RunConfig config = read_run_config(config_file);
        if (check->parsed()) {
            return finish(cmd_check(data, config), json_out);
        }
        if (validate->parsed()) {
            return finish(cmd_validate(data, load_controller(ctrl, config), config), json_out);
        }
        if (synth->parsed()) {
            return finish(cmd_synthesize(data, config, ctrl_out), json_out);
        }
        if (respond->parsed()) {
            std::optional<Vector> r;
            if (reference != "step") {
                r = read_reference_csv(reference);
            }
            return finish(cmd_respond(data, load_controller(ctrl, config), r, channel_from_string(channel), config,
                                      resp_out),
                          json_out);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
    return kExitError;
}
