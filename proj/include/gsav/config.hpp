#ifndef GSAV_CONFIG_HPP
#define GSAV_CONFIG_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "gsav/models.hpp"
#include "gsav/schemes.hpp"

namespace gsav {

/// Full description of one simulation, read from flat `key = value` text
/// with dotted section names. Every effective value is echoed into the run
/// manifest.
struct RunConfig {
    // model
    std::string model = "cahn-hilliard";
    double epsilon = 1.0;        // interface parameter (meaning depends on model)
    bool epsilon_given_squared = false;
    double theta = 3.0;
    double mobility = 1.0;
    double sigma = 10.0, alpha = 0.1, beta = -0.75, gamma = 0.0;
    double epsilon_u = 0.075, epsilon_v = 0.05;
    double mobility_u = 1.0, mobility_v = 1.0;
    int split_double_well = 1;  // > 1 shares the double well across that many potentials

    // scheme
    std::string scheme = "first";
    std::string order = "bdf2";
    double eps1 = 0.0, eps2 = 0.0;
    std::vector<std::string> g = {"tanh:1e4"};

    // space
    int nx = 128, ny = 128;
    double ax = -M_PI, bx = M_PI, ay = -M_PI, by = M_PI;
    bool dealias = false;

    // time
    double dt = 1e-3;
    double t_final = 0.1;

    // adaptive stepping
    bool adaptive = false;
    double adapt_tol = 1e-3;
    double adapt_rho = 0.9;
    double dt_min = 1e-8;
    double dt_max = 1e-1;

    // initial data / forcing
    std::string init = "spinodal";  // spinodal | bcp | mbe | manufactured
    std::uint64_t seed = 1;

    // output
    std::string out_dir;        // empty: no files written
    long snapshot_every = 100;  // steps between snapshots

    void apply(const std::string& key, const std::string& value);
    static RunConfig from_file(const std::string& path);
    void apply_overrides(const std::vector<std::string>& key_equals_value);

    /// Effective settings as sorted key = value lines (the manifest body).
    std::string echo() const;

    ModelSpec make_model() const;
    SchemeKind make_scheme() const;
    std::vector<GFunction> make_g() const;
    Grid make_grid() const;
};

/// Parse a number that may carry a "pi" suffix ("-pi", "2pi", "0.5pi").
double parse_length(const std::string& text);

}  // namespace gsav

#endif
