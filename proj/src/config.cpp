#include "gsav/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace gsav {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError("bad numeric value for " + key + ": " + v);
    }
}

long to_long(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        const long x = std::stol(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError("bad integer value for " + key + ": " + v);
    }
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("bad boolean value for " + key + ": " + v);
}

std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::istringstream in(v);
    std::string item;
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

void apply_domain(const std::string& key, const std::string& v, double& lo, double& hi) {
    const auto colon = v.find(':');
    if (colon == std::string::npos) throw ConfigError(key + " expects lo:hi");
    lo = parse_length(trim(v.substr(0, colon)));
    hi = parse_length(trim(v.substr(colon + 1)));
}

}  // namespace

double parse_length(const std::string& text) {
    std::string t = trim(text);
    double mult = 1.0;
    if (t.size() >= 2 && t.substr(t.size() - 2) == "pi") {
        mult = M_PI;
        t = trim(t.substr(0, t.size() - 2));
        if (t.empty() || t == "+") t = "1";
        if (t == "-") t = "-1";
    }
    return mult * to_double("domain bound", t);
}

void RunConfig::apply(const std::string& key, const std::string& value) {
    if (key == "model") model = value;
    else if (key == "model.epsilon") { epsilon = to_double(key, value); epsilon_given_squared = false; }
    else if (key == "model.epsilon_sq") { epsilon = std::sqrt(to_double(key, value)); epsilon_given_squared = true; }
    else if (key == "model.theta") theta = to_double(key, value);
    else if (key == "model.mobility") mobility = to_double(key, value);
    else if (key == "model.sigma") sigma = to_double(key, value);
    else if (key == "model.alpha") alpha = to_double(key, value);
    else if (key == "model.beta") beta = to_double(key, value);
    else if (key == "model.gamma") gamma = to_double(key, value);
    else if (key == "model.epsilon_u") epsilon_u = to_double(key, value);
    else if (key == "model.epsilon_v") epsilon_v = to_double(key, value);
    else if (key == "model.mobility_u") mobility_u = to_double(key, value);
    else if (key == "model.mobility_v") mobility_v = to_double(key, value);
    else if (key == "model.split_double_well") split_double_well = static_cast<int>(to_long(key, value));
    else if (key == "scheme") scheme = value;
    else if (key == "scheme.order") order = value;
    else if (key == "scheme.eps1") eps1 = to_double(key, value);
    else if (key == "scheme.eps2") eps2 = to_double(key, value);
    else if (key == "g") g = split_list(value);
    else if (key == "grid.n") { nx = ny = static_cast<int>(to_long(key, value)); }
    else if (key == "grid.nx") nx = static_cast<int>(to_long(key, value));
    else if (key == "grid.ny") ny = static_cast<int>(to_long(key, value));
    else if (key == "domain.x") apply_domain(key, value, ax, bx);
    else if (key == "domain.y") apply_domain(key, value, ay, by);
    else if (key == "dealias") dealias = to_bool(key, value);
    else if (key == "time.dt") dt = to_double(key, value);
    else if (key == "time.t_final") t_final = to_double(key, value);
    else if (key == "adaptive.enabled") adaptive = to_bool(key, value);
    else if (key == "adaptive.tol") adapt_tol = to_double(key, value);
    else if (key == "adaptive.rho") adapt_rho = to_double(key, value);
    else if (key == "adaptive.dt_min") dt_min = to_double(key, value);
    else if (key == "adaptive.dt_max") dt_max = to_double(key, value);
    else if (key == "init") init = value;
    else if (key == "seed") seed = static_cast<std::uint64_t>(to_long(key, value));
    else if (key == "output.dir") out_dir = value;
    else if (key == "output.every") snapshot_every = to_long(key, value);
    else throw ConfigError("unknown config key: " + key);
}

RunConfig RunConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    RunConfig cfg;
    std::string line;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key = value");
        cfg.apply(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return cfg;
}

void RunConfig::apply_overrides(const std::vector<std::string>& kvs) {
    for (const auto& kv : kvs) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw ConfigError("override expects key=value: " + kv);
        std::string key = kv.substr(0, eq), value = kv.substr(eq + 1);
        apply(std::string(key.begin(), key.end()), value);
    }
}

std::string RunConfig::echo() const {
    std::ostringstream out;
    out.precision(17);
    out << "adaptive.dt_max = " << dt_max << "\n";
    out << "adaptive.dt_min = " << dt_min << "\n";
    out << "adaptive.enabled = " << (adaptive ? "true" : "false") << "\n";
    out << "adaptive.rho = " << adapt_rho << "\n";
    out << "adaptive.tol = " << adapt_tol << "\n";
    out << "dealias = " << (dealias ? "true" : "false") << "\n";
    out << "domain.x = " << ax << ":" << bx << "\n";
    out << "domain.y = " << ay << ":" << by << "\n";
    out << "g = ";
    for (size_t i = 0; i < g.size(); ++i) out << (i ? "," : "") << g[i];
    out << "\n";
    out << "grid.nx = " << nx << "\n";
    out << "grid.ny = " << ny << "\n";
    out << "init = " << init << "\n";
    out << "model = " << model << "\n";
    out << "model.alpha = " << alpha << "\n";
    out << "model.beta = " << beta << "\n";
    out << "model.epsilon = " << epsilon << "\n";
    out << "model.epsilon_u = " << epsilon_u << "\n";
    out << "model.epsilon_v = " << epsilon_v << "\n";
    out << "model.gamma = " << gamma << "\n";
    out << "model.mobility = " << mobility << "\n";
    out << "model.mobility_u = " << mobility_u << "\n";
    out << "model.mobility_v = " << mobility_v << "\n";
    out << "model.sigma = " << sigma << "\n";
    out << "model.split_double_well = " << split_double_well << "\n";
    out << "model.theta = " << theta << "\n";
    out << "output.dir = " << out_dir << "\n";
    out << "output.every = " << snapshot_every << "\n";
    out << "scheme = " << scheme << "\n";
    out << "scheme.eps1 = " << eps1 << "\n";
    out << "scheme.eps2 = " << eps2 << "\n";
    out << "scheme.order = " << order << "\n";
    out << "seed = " << seed << "\n";
    out << "time.dt = " << dt << "\n";
    out << "time.t_final = " << t_final << "\n";
    return out.str();
}

ModelSpec RunConfig::make_model() const {
    if (model == "allen-cahn" || model == "cahn-hilliard") {
        ModelSpec m = model == "allen-cahn" ? allen_cahn(epsilon, mobility)
                                            : cahn_hilliard(epsilon, mobility);
        if (split_double_well > 1) {
            // F = sum of split_double_well identical shares; each share is a
            // double well with stiffness reduced by the share count.
            const double share_eps = epsilon * std::sqrt(static_cast<double>(split_double_well));
            m.potentials.assign(split_double_well, DoubleWell{share_eps});
        }
        return m;
    }
    if (model == "cahn-hilliard-log")
        return cahn_hilliard_log(epsilon * epsilon, theta, mobility);
    if (model == "mbe") return mbe_no_slope_selection(epsilon, mobility);
    if (model == "bcp")
        return bcp(epsilon_u, epsilon_v, sigma, alpha, beta, gamma, mobility_u, mobility_v);
    throw ConfigError("unknown model: " + model);
}

SchemeKind RunConfig::make_scheme() const { return SchemeKind::parse(scheme, order, eps1, eps2); }

std::vector<GFunction> RunConfig::make_g() const {
    std::vector<GFunction> out;
    for (const auto& spec : g) out.push_back(GFunction::parse(spec));
    const size_t n_pot = make_model().potentials.size();
    if (out.size() == 1 && n_pot > 1) out.assign(n_pot, out[0]);
    if (out.size() != n_pot) throw ConfigError("need one G per potential");
    return out;
}

Grid RunConfig::make_grid() const { return Grid(nx, ny, ax, bx, ay, by); }

}  // namespace gsav
