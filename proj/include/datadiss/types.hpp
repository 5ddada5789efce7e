#pragma once

#include <string_view>

#include <Eigen/Dense>

namespace datadiss {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Signal pair of the standard feedback loop e = r - z, u = K e, z = G u.
enum class Channel {
    r_to_z,
    r_to_e,
    r_to_u,
};

[[nodiscard]] std::string_view to_string(Channel channel);

/// Accepts "r_to_z", "r_to_e", "r_to_u"; throws std::invalid_argument otherwise.
[[nodiscard]] Channel channel_from_string(std::string_view name);

} // namespace datadiss
