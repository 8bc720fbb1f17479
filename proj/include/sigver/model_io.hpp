#ifndef SIGVER_MODEL_IO_HPP
#define SIGVER_MODEL_IO_HPP

#include <cstdint>
#include <iosfwd>
#include <string>

#include "sigver/network.hpp"

namespace sigver {

// "SGNT" container: format version, input shape, layer count, then per layer
// a kind tag, its hyperparameters, and (for conv/fc) weight and bias tensors
// as little-endian float32. Round-trips are bit-exact.
void save_network(std::ostream& out, const Network& net, std::uint64_t config_digest);
void save_network(const std::string& path, const Network& net, std::uint64_t config_digest);

struct LoadedNetwork {
    Network net;
    std::uint64_t config_digest = 0;
};

LoadedNetwork load_network(std::istream& in);
LoadedNetwork load_network(const std::string& path);

} // namespace sigver

#endif
