#include "gsav/initial_data.hpp"

#include <cmath>
#include <string>

namespace gsav {

std::uint64_t splitmix64_at(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t z = seed + (index + 1) * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

double uniform01_at(std::uint64_t seed, std::uint64_t index) {
    return double(splitmix64_at(seed, index) >> 11) * 0x1.0p-53;
}

InitKind parse_init_kind(const std::string& name) {
    if (name == "spinodal") return InitKind::Spinodal;
    if (name == "bcp") return InitKind::Bcp;
    if (name == "mbe") return InitKind::Mbe;
    throw ConfigError("unknown initial-data kind: " + name);
}

namespace {

/// Uniform [-1,1] samples for component `comp`.
Field uniform_pm1(const Grid& g, std::uint64_t seed, int comp) {
    Field f(g);
    const std::uint64_t base = static_cast<std::uint64_t>(comp) * static_cast<std::uint64_t>(g.size());
    for (long i = 0; i < g.size(); ++i)
        f.values[i] = 2.0 * uniform01_at(seed, base + static_cast<std::uint64_t>(i)) - 1.0;
    return f;
}

}  // namespace

std::vector<Field> make_initial(InitKind kind, const Grid& g, std::uint64_t seed) {
    switch (kind) {
        case InitKind::Spinodal: {
            Field f = uniform_pm1(g, seed, 0);
            const double mean = f.values.mean();
            // Shift-and-rescale: the perturbation carries no mass and stays
            // inside [-0.001, 0.001].
            f.values = 0.03 + 0.001 * (f.values - mean) / (1.0 + std::abs(mean));
            return {std::move(f)};
        }
        case InitKind::Bcp: {
            std::vector<Field> out;
            for (int c = 0; c < 2; ++c) {
                Field f = uniform_pm1(g, seed, c);
                const double mean = f.values.mean();
                // Shift to zero mean; the rescale keeps samples inside [-1,1].
                f.values = (f.values - mean) / (1.0 + std::abs(mean));
                out.push_back(std::move(f));
            }
            return out;
        }
        case InitKind::Mbe: {
            Field f = uniform_pm1(g, seed, 0);
            f.values *= 0.001;
            return {std::move(f)};
        }
    }
    throw ConfigError("unhandled initial-data kind");
}

}  // namespace gsav
