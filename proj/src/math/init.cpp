#include "optnet/math/init.hpp"

#include <cmath>
#include <string>

#include "optnet/math/errors.hpp"

namespace optnet {

std::string_view to_string(Initializer init) {
  return init == Initializer::GlorotNormal ? "glorot" : "he";
}

Initializer parse_initializer(std::string_view name) {
  if (name == "glorot" || name == "glorot_normal") return Initializer::GlorotNormal;
  if (name == "he" || name == "he_normal") return Initializer::HeNormal;
  throw UsageError("unknown initializer '" + std::string(name) + "'");
}

namespace {

Mat normal_matrix(std::size_t fan_in, std::size_t fan_out, double variance, RngStream& rng) {
  if (fan_in == 0 || fan_out == 0) {
    throw DimensionError("initializer: fan_in and fan_out must be >= 1");
  }
  Mat w(fan_out, fan_in);
  const double stddev = std::sqrt(variance);
  for (double& v : w.values()) v = stddev * rng.normal();
  return w;
}

}  // namespace

Mat init_glorot(std::size_t fan_in, std::size_t fan_out, RngStream& rng) {
  return normal_matrix(fan_in, fan_out,
                       2.0 / static_cast<double>(fan_in + fan_out), rng);
}

Mat init_he(std::size_t fan_in, std::size_t fan_out, RngStream& rng) {
  return normal_matrix(fan_in, fan_out, 2.0 / static_cast<double>(fan_in), rng);
}

Mat init_weights(Initializer init, std::size_t fan_in, std::size_t fan_out, RngStream& rng) {
  return init == Initializer::GlorotNormal ? init_glorot(fan_in, fan_out, rng)
                                           : init_he(fan_in, fan_out, rng);
}

}  // namespace optnet
