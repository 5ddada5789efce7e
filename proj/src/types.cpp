#include "datadiss/types.hpp"

#include <stdexcept>
#include <string>

namespace datadiss {

std::string_view to_string(Channel channel) {
    switch (channel) {
        case Channel::r_to_z: return "r_to_z";
        case Channel::r_to_e: return "r_to_e";
        case Channel::r_to_u: return "r_to_u";
    }
    return "unknown";
}

Channel channel_from_string(std::string_view name) {
    if (name == "r_to_z") return Channel::r_to_z;
    if (name == "r_to_e") return Channel::r_to_e;
    if (name == "r_to_u") return Channel::r_to_u;
    throw std::invalid_argument("unknown channel '" + std::string(name) + "' (expected r_to_z, r_to_e or r_to_u)");
}

} // namespace datadiss
