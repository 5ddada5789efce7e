#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "datadiss/synthesis.hpp"

namespace datadiss {

/// 17 significant digits, so the value reads back exactly.
[[nodiscard]] std::string format_double(double x);

/// Header `k,u,y`, one row per sample.
void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj);
[[nodiscard]] Trajectory read_trajectory_csv(const std::filesystem::path& path);

/// Header `k,a`: controller impulse response.
void write_controller_csv(const std::filesystem::path& path, const ImpulseResponse& a);
[[nodiscard]] ImpulseResponse read_controller_csv(const std::filesystem::path& path);

/// Structured parameters stored next to a controller file.
struct ControllerSidecar {
    std::string basis;
    std::vector<std::string> labels;
    Vector p;
    double sampling_time = 0.0;
};

/// `controller.csv` -> `controller.json`.
[[nodiscard]] std::filesystem::path sidecar_path(const std::filesystem::path& controller_csv);

void write_controller_sidecar(const std::filesystem::path& path, const ControllerSidecar& sidecar);
[[nodiscard]] ControllerSidecar read_controller_sidecar(const std::filesystem::path& path);

/// Reference signal, header `k,r`.
[[nodiscard]] Vector read_reference_csv(const std::filesystem::path& path);

/// Header `k,r,<output_name>`.
void write_response_csv(const std::filesystem::path& path, const Vector& r, const Vector& output,
                        const std::string& output_name);

struct MagnitudeRow {
    double omega;
    double mag_se;
    double mag_su;
    double bound_we_inv;
    double bound_wu_inv;
};

/// Header `omega,mag_Se,mag_Su,bound_We_inv,bound_Wu_inv`.
void write_magnitude_csv(const std::filesystem::path& path, const std::vector<MagnitudeRow>& rows);

/// {"A": [[...]], "B": [[...]], "C": [[...]], "D": x}
[[nodiscard]] StateSpace state_space_from_json(const nlohmann::json& j);
[[nodiscard]] nlohmann::json state_space_to_json(const StateSpace& sys);
[[nodiscard]] StateSpace read_state_space(const std::filesystem::path& path);

enum class BasisKind {
    pi,
    fir,
};

struct BasisConfig {
    BasisKind kind = BasisKind::pi;
    double sampling_time = kTwoTankSamplingTime;
    int taps = 1;

    [[nodiscard]] ControllerBasis build(int horizon) const;
};

/// Remark-style bound T' T < c I; c defaults to 1 / (data-estimated plant gain).
struct SmallGainConfig {
    std::optional<double> bound;
};

struct RunConfig {
    int depth = 0;
    int nu = 0;
    int order_bound = 0;
    std::vector<DissipativitySpec> specs;
    std::vector<SupplyRate> open_loop;
    BasisConfig basis;
    SolverOptions solver;
    std::optional<SmallGainConfig> small_gain;
    std::uint64_t seed = 1;

    /// Throws std::invalid_argument unless 1 <= order_bound <= nu < depth.
    void validate() const;
};

/**
 * Parses the JSON configuration. Supply rates are {"Q", "S", "R"}; filters
 * are impulse-response arrays or {"gain": g, "pole": a, "length": n} for
 * w_k = g (1 - a) a^k (length defaults to the horizon).
 */
[[nodiscard]] RunConfig run_config_from_json(const nlohmann::json& j);
[[nodiscard]] nlohmann::json run_config_to_json(const RunConfig& config);
[[nodiscard]] RunConfig read_run_config(const std::filesystem::path& path);

[[nodiscard]] nlohmann::json supply_to_json(const SupplyRate& sr);
[[nodiscard]] SupplyRate supply_from_json(const nlohmann::json& j);

/// Expands a filter entry for a given horizon (see run_config_from_json).
[[nodiscard]] Vector filter_from_json(const nlohmann::json& j, int horizon);

[[nodiscard]] nlohmann::json vector_to_json(const Vector& v);
[[nodiscard]] Vector vector_from_json(const nlohmann::json& j);

void write_text(const std::filesystem::path& path, const std::string& text);

} // namespace datadiss
