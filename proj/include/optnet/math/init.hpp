#pragma once

#include <cstddef>
#include <string_view>

#include "optnet/math/matrix.hpp"
#include "optnet/math/rng.hpp"

namespace optnet {

enum class Initializer { GlorotNormal, HeNormal };

std::string_view to_string(Initializer init);
Initializer parse_initializer(std::string_view name);

/// (fan_out x fan_in) matrix with N(0, 2 / (fan_in + fan_out)) entries.
Mat init_glorot(std::size_t fan_in, std::size_t fan_out, RngStream& rng);

/// (fan_out x fan_in) matrix with N(0, 2 / fan_in) entries.
Mat init_he(std::size_t fan_in, std::size_t fan_out, RngStream& rng);

Mat init_weights(Initializer init, std::size_t fan_in, std::size_t fan_out, RngStream& rng);

}  // namespace optnet
