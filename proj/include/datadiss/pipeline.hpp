#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "datadiss/io.hpp"

namespace datadiss {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitNegative = 2; ///< clean run, but infeasible or not dissipative

struct CommandResult {
    int exit_code = kExitOk;
    std::string text;
    nlohmann::json report;
};

/// "two_tank", "unit_delay", "random:<order>:<seed>", or a state-space JSON file.
[[nodiscard]] StateSpace resolve_plant(const std::string& name);

/// Zero-pads or truncates a controller impulse response to the horizon.
[[nodiscard]] ImpulseResponse fit_to_horizon(const ImpulseResponse& a, int horizon);

[[nodiscard]] std::string output_signal_name(Channel channel);

struct GenerateArgs {
    std::string plant = "two_tank";
    int length = 223;
    std::uint64_t seed = 1;
    double amplitude = 1.0;
    std::optional<int> order; ///< excitation order to confirm, if any
    std::filesystem::path out;
};

/// Simulates the plant from rest under a uniform random input and writes the trajectory.
[[nodiscard]] CommandResult cmd_generate(const GenerateArgs& args);

/// Open-loop verdict for each `open_loop` supply (or each spec supply when none are listed).
[[nodiscard]] CommandResult cmd_check(const Trajectory& data, const RunConfig& config);

[[nodiscard]] CommandResult cmd_validate(const Trajectory& data, const ImpulseResponse& controller,
                                         const RunConfig& config);

/// Writes controller.csv and its sidecar only when a feasible point is found.
[[nodiscard]] CommandResult cmd_synthesize(const Trajectory& data, const RunConfig& config,
                                           const std::filesystem::path& controller_out);

/// Empty reference selects a unit step over the horizon.
[[nodiscard]] CommandResult cmd_respond(const Trajectory& data, const ImpulseResponse& controller,
                                        const std::optional<Vector>& reference, Channel channel,
                                        const RunConfig& config, const std::filesystem::path& out);

/// Documented mixed-sensitivity setup for the two-tank plant.
[[nodiscard]] RunConfig two_tank_config();

inline constexpr int kTwoTankLength = 223;
inline constexpr double kReferenceKp = 0.1551;
inline constexpr double kReferenceKi = 0.0084;

struct SpecCheck {
    DissipativitySpec spec;
    Certificate certificate;
};

struct TwoTankRun {
    Trajectory data;
    RunConfig config;
    DataPage page;
    ExcitationReport excitation;
    double plant_gain = 0.0;
    SolveReport solve;
    std::optional<ControllerSidecar> controller;
    std::vector<SpecCheck> validation;
    Vector step_reference;
    Vector step_output;
    double step_error_after_100 = 0.0;
    /// Model-based parts, present only when the plant model is used.
    std::optional<double> reference_oracle_gain;
    std::optional<Certificate> reference_validation;
    std::vector<MagnitudeRow> magnitude;
};

[[nodiscard]] TwoTankRun run_two_tank(std::uint64_t seed, bool use_model);

/// Artifacts: data.csv, config.json, controller.csv/.json, step_response.csv, magnitude.csv, report.txt/.json.
[[nodiscard]] CommandResult cmd_reproduce_two_tank(std::uint64_t seed, const std::filesystem::path& outdir,
                                                   bool use_model = true);

} // namespace datadiss
