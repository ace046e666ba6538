#ifndef GSAV_INITIAL_DATA_HPP
#define GSAV_INITIAL_DATA_HPP

#include <cstdint>
#include <vector>

#include "gsav/grid.hpp"

namespace gsav {

/// Counter-based generator: sample j of stream `seed` is the splitmix64
/// finalizer applied to seed + (j+1) * golden-gamma. Stateless, so a sample
/// depends only on (seed, j) and reruns are bitwise reproducible.
std::uint64_t splitmix64_at(std::uint64_t seed, std::uint64_t index);

/// Uniform double in [0, 1) from the counter-based generator.
double uniform01_at(std::uint64_t seed, std::uint64_t index);

enum class InitKind {
    Spinodal,  // 0.03 + 0.001 * rand[-1,1], perturbation mean-corrected
    Bcp,       // two fields, uniform in [-1,1], exactly zero mean
    Mbe,       // uniform in [-0.001, 0.001]
};

InitKind parse_init_kind(const std::string& name);

std::vector<Field> make_initial(InitKind kind, const Grid& g, std::uint64_t seed);

}  // namespace gsav

#endif
