#include "gsav/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iomanip>
#include <sstream>

#include "gsav/snapshot.hpp"

namespace gsav {

namespace {

double onelevel_energy(SpectralContext& ctx, const ModelSpec& model,
                       std::span<const GFunction> gs, const SchemeKind& kind,
                       const SchemeState& s) {
    if (kind.family == SchemeKind::Family::Third) {
        double e = 0;
        for (int c = 0; c < model.components; ++c) {
            Eigen::ArrayXd sym = symbol_array(ctx, model.linear[c]);
            e += 0.5 * inner(ctx, apply_symbol(ctx, sym, s.phi[c]), s.phi[c]);
        }
        return e + bulk_energy(ctx, model.potentials[0], s.phi);
    }
    SchemeKind proxy = kind;
    proxy.stencil = Stencil::Bdf1;
    proxy.eps1 = proxy.eps2 = 0;
    if (proxy.family == SchemeKind::Family::StabilizedCn)
        proxy.family = SchemeKind::Family::Second;
    if (proxy.family == SchemeKind::Family::MultiCn)
        return modified_energy(ctx, model, gs, kind, s);  // already one-level
    return modified_energy(ctx, model, gs, proxy, s);
}

DiagRecord make_record(SpectralContext& ctx, const ModelSpec& model,
                       std::span<const GFunction> gs, const SchemeKind& kind,
                       const SchemeState& s) {
    DiagRecord rec;
    rec.step = s.step;
    rec.t = s.t;
    rec.dt = s.dt;
    rec.e_original = original_energy(ctx, model, s.phi);
    // Before enough history exists, fall back to the one-level form so the
    // column stays finite; the audit starts at first_audit_index().
    if (kind.two_level() && !s.has_history())
        rec.e_modified = onelevel_energy(ctx, model, gs, kind, s);
    else
        rec.e_modified = modified_energy(ctx, model, gs, kind, s);
    rec.mass.resize(model.components);
    for (int c = 0; c < model.components; ++c) rec.mass[c] = integrate(ctx, s.phi[c]);
    rec.xi = s.xi_last;
    rec.r = s.r;
    rec.newton_iters = s.newton_iters;
    return rec;
}

void write_diag_csv(const std::string& path, const std::vector<DiagRecord>& diag,
                    int components, int n_potentials) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path);
    out << "step,t,dt,E_original,E_modified";
    for (int c = 0; c < components; ++c) out << ",mass_" << c;
    for (int i = 0; i < n_potentials; ++i) out << ",xi_" << i;
    for (int i = 0; i < n_potentials; ++i) out << ",r_" << i;
    out << ",newton_iters\n";
    out << std::setprecision(17);
    for (const auto& rec : diag) {
        out << rec.step << ',' << rec.t << ',' << rec.dt << ',' << rec.e_original << ','
            << rec.e_modified;
        for (long c = 0; c < rec.mass.size(); ++c) out << ',' << rec.mass[c];
        for (long i = 0; i < rec.xi.size(); ++i) out << ',' << rec.xi[i];
        for (long i = 0; i < rec.r.size(); ++i) out << ',' << rec.r[i];
        out << ',' << rec.newton_iters << '\n';
    }
}

std::string snapshot_name(long step, int component) {
    std::ostringstream name;
    name << "snap-" << std::setw(8) << std::setfill('0') << step << "-c" << component << ".gsav";
    return name.str();
}

struct LoopIo {
    std::string dir;  // empty: no output
    long every = 0;

    void snapshots(const SchemeState& s) const {
        if (dir.empty()) return;
        for (size_t c = 0; c < s.phi.size(); ++c)
            write_snapshot(dir + "/" + snapshot_name(s.step, static_cast<int>(c)), s.phi[c], s.t,
                           static_cast<int>(c));
    }
    bool due(long step) const { return !dir.empty() && every > 0 && step % every == 0; }
};

}  // namespace

std::string resolve_out_dir(const RunConfig& cfg) {
    if (cfg.out_dir.empty()) return "";
    std::filesystem::path p(cfg.out_dir);
    if (p.is_relative()) {
        if (const char* root = std::getenv("GSAV_OUTPUT_ROOT")) p = std::filesystem::path(root) / p;
    }
    return p.string();
}

AdaptDecision adapt_dt(const SchemeState& prev, const SchemeState& trial, double tol, double rho,
                       double dt_min, double dt_max) {
    if (!(tol > 0) || !(rho > 0) || rho > 1) throw ConfigError("adaptive needs tol > 0, 0 < rho <= 1");
    if (!(dt_min > 0) || dt_min > dt_max) throw ConfigError("adaptive needs 0 < dt_min <= dt_max");
    if (!prev.has_history()) throw MissingHistory("adaptive predictor needs two levels");
    // Linear extrapolation over the trial step; with uniform spacing this is
    // the usual 2 phi^n - phi^{n-1} predictor.
    const double ratio = prev.dt_prev > 0 ? trial.dt / prev.dt_prev : 1.0;
    double num = 0, den = 0;
    for (size_t c = 0; c < trial.phi.size(); ++c) {
        const Eigen::ArrayXd pred =
            prev.phi[c].values + ratio * (prev.phi[c].values - prev.phi_prev[c].values);
        num += (trial.phi[c].values - pred).matrix().squaredNorm();
        den += trial.phi[c].values.matrix().squaredNorm();
    }
    AdaptDecision dec;
    dec.error = std::sqrt(num) / std::max(std::sqrt(den), 1e-14);
    const double dt = trial.dt;
    if (dec.error == 0) {
        dec.dt_next = dt_max;
        dec.accept = true;
        return dec;
    }
    dec.dt_next = std::clamp(rho * std::sqrt(tol / dec.error) * dt, dt_min, dt_max);
    dec.accept = dec.error <= tol;
    return dec;
}

RunResult run(const RunConfig& cfg, const RunOptions& opts) {
    const Grid grid = cfg.make_grid();
    SpectralContext ctx(grid, cfg.dealias);
    const ModelSpec model = cfg.make_model();
    const SchemeKind kind = cfg.make_scheme();
    const std::vector<GFunction> gs = cfg.make_g();
    if (!(cfg.t_final >= 0)) throw ConfigError("t_final must be >= 0");
    if (!(cfg.dt > 0)) throw ConfigError("dt must be positive");

    std::vector<Field> phi0;
    Forcing forcing;
    std::optional<ManufacturedAllenCahn> mfg;
    if (cfg.init == "manufactured") {
        mfg.emplace(ctx, model);
        phi0 = {mfg->exact(0.0)};
        forcing = [&m = *mfg](double t) { return m.forcing(t); };
    } else {
        phi0 = make_initial(parse_init_kind(cfg.init), grid, cfg.seed);
    }
    if (phi0.size() != static_cast<size_t>(model.components))
        throw ConfigError("initial-data kind does not match the model's component count");

    SchemeState state = init_state(ctx, model, gs, std::move(phi0), cfg.dt);

    LoopIo io;
    io.dir = opts.write_files ? resolve_out_dir(cfg) : "";
    io.every = cfg.snapshot_every;
    if (!io.dir.empty()) {
        if (cfg.snapshot_every < 1) throw ConfigError("output.every must be >= 1");
        std::filesystem::create_directories(io.dir);
        std::ofstream manifest(io.dir + "/manifest.txt");
        manifest << cfg.echo();
    }

    RunResult result;
    auto record = [&](const SchemeState& s) {
        if (opts.collect_diag && (s.step % opts.diag_every == 0))
            result.diag.push_back(make_record(ctx, model, gs, kind, s));
    };
    record(state);
    io.snapshots(state);

    auto step_once = [&](const SchemeState& s) {
        try {
            return advance(ctx, model, kind, gs, s, forcing);
        } catch (const Error& e) {
            throw Error("step " + std::to_string(s.step + 1) + ": " + e.what());
        }
    };

    if (!cfg.adaptive) {
        const long nsteps = std::llround(cfg.t_final / cfg.dt);
        if (std::abs(nsteps * cfg.dt - cfg.t_final) > 1e-9 * std::max(cfg.t_final, 1.0))
            throw ConfigError("dt must divide t_final");
        for (long k = 0; k < nsteps; ++k) {
            state = step_once(state);
            ++result.accepted_steps;
            result.max_xi_deviation =
                std::max(result.max_xi_deviation, (state.xi_last - 1.0).abs().maxCoeff());
            record(state);
            if (io.due(state.step)) io.snapshots(state);
        }
    } else {
        // The steppers use uniform-spacing stencils, so a dt change restarts
        // the two-level history (the next step runs the one-level startup).
        // The discarded level is kept aside to feed the error predictor.
        state.dt = std::clamp(cfg.dt, cfg.dt_min, cfg.dt_max);
        int rejects_at_min = 0;
        std::vector<Field> stash_prev;
        double stash_spacing = 0;
        while (cfg.t_final - state.t > 1e-12 * std::max(cfg.t_final, 1.0)) {
            state.dt = std::min(state.dt, cfg.t_final - state.t);
            if (state.has_history() &&
                std::abs(state.dt - state.dt_prev) > 1e-12 * state.dt_prev) {
                stash_prev = state.phi_prev;
                stash_spacing = state.dt_prev;
                state.phi_prev.clear();
                state.r_prev.resize(0);
            }
            const bool can_judge = state.has_history() || !stash_prev.empty();
            SchemeState trial = step_once(state);
            if (!can_judge) {
                state = trial;
                ++result.accepted_steps;
                record(state);
                if (io.due(state.step)) io.snapshots(state);
                continue;
            }
            SchemeState judge = state;
            if (!judge.has_history()) {
                judge.phi_prev = stash_prev;
                judge.dt_prev = stash_spacing;
            }
            const AdaptDecision dec =
                adapt_dt(judge, trial, cfg.adapt_tol, cfg.adapt_rho, cfg.dt_min, cfg.dt_max);
            if (dec.accept) {
                state = trial;
                stash_prev.clear();
                // deadband: keep the current dt unless the controller asks
                // for a real change, so BDF2 segments stay uniform
                if (dec.dt_next < 0.8 * state.dt || dec.dt_next > 1.25 * state.dt)
                    state.dt = dec.dt_next;
                rejects_at_min = 0;
                ++result.accepted_steps;
                result.max_xi_deviation =
                    std::max(result.max_xi_deviation, (state.xi_last - 1.0).abs().maxCoeff());
                record(state);
                if (io.due(state.step)) io.snapshots(state);
            } else {
                ++result.rejected_steps;
                if (state.dt <= cfg.dt_min * (1.0 + 1e-12)) {
                    if (++rejects_at_min >= 10)
                        throw StallError("step rejected 10 times at dt_min");
                } else {
                    rejects_at_min = 0;
                }
                state.dt = dec.dt_next;
            }
        }
    }

    if (!io.dir.empty()) {
        if (io.every <= 0 || state.step % io.every != 0) io.snapshots(state);
        write_diag_csv(io.dir + "/diag.csv", result.diag, model.components,
                       static_cast<int>(model.potentials.size()));
    }
    result.state = std::move(state);
    return result;
}

std::vector<ConvergenceRow> measure_convergence(const RunConfig& cfg,
                                                const std::vector<double>& dts,
                                                ConvergenceReference ref, bool parallel) {
    if (dts.empty()) throw ConfigError("empty dt list");
    for (size_t i = 1; i < dts.size(); ++i)
        if (!(dts[i] < dts[i - 1])) throw ConfigError("dt list must be strictly decreasing");
    if (ref == ConvergenceReference::Exact && cfg.init != "manufactured")
        throw ConfigError("exact reference requires init = manufactured");

    auto run_at = [&](double dt) {
        RunConfig c = cfg;
        c.dt = dt;
        c.out_dir.clear();
        RunOptions opts;
        opts.collect_diag = false;
        opts.write_files = false;
        return run(c, opts);
    };

    std::vector<RunResult> results(dts.size());
    if (parallel) {
        std::vector<std::future<RunResult>> futs;
        for (double dt : dts)
            futs.push_back(std::async(std::launch::async, [&, dt] { return run_at(dt); }));
        for (size_t i = 0; i < futs.size(); ++i) results[i] = futs[i].get();
    } else {
        for (size_t i = 0; i < dts.size(); ++i) results[i] = run_at(dts[i]);
    }

    Field reference;
    if (ref == ConvergenceReference::Exact) {
        const Grid grid = cfg.make_grid();
        SpectralContext ctx(grid, cfg.dealias);
        const ModelSpec model = cfg.make_model();
        reference = ManufacturedAllenCahn(ctx, model).exact(cfg.t_final);
    } else {
        reference = run_at(dts.back() / 4.0).state.phi[0];
    }

    std::vector<ConvergenceRow> rows(dts.size());
    for (size_t i = 0; i < dts.size(); ++i) {
        rows[i].dt = dts[i];
        rows[i].error = (results[i].state.phi[0].values - reference.values).abs().maxCoeff();
        rows[i].max_xi_deviation = results[i].max_xi_deviation;
        if (i > 0)
            rows[i].order = std::log(rows[i - 1].error / rows[i].error) /
                            std::log(dts[i - 1] / dts[i]);
    }
    return rows;
}

CompareGReport compare_g_variants(const RunConfig& cfg, const std::vector<std::string>& g_list,
                                  bool parallel) {
    if (g_list.size() < 2) throw ConfigError("compare-g needs at least two G variants");
    auto run_g = [&](const std::string& gspec) {
        RunConfig c = cfg;
        c.g = {gspec};
        c.out_dir.clear();
        RunOptions opts;
        opts.write_files = false;
        return run(c, opts);
    };

    std::vector<RunResult> results(g_list.size());
    if (parallel) {
        std::vector<std::future<RunResult>> futs;
        for (const auto& gspec : g_list)
            futs.push_back(std::async(std::launch::async, [&, gspec] { return run_g(gspec); }));
        for (size_t i = 0; i < futs.size(); ++i) results[i] = futs[i].get();
    } else {
        for (size_t i = 0; i < g_list.size(); ++i) results[i] = run_g(g_list[i]);
    }

    CompareGReport rep;
    rep.g_names = g_list;
    const size_t n = g_list.size();
    rep.pairwise_l2 = Eigen::MatrixXd::Zero(n, n);
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = i + 1; j < n; ++j) {
            double num = 0, ni = 0, nj = 0;
            for (size_t c = 0; c < results[i].state.phi.size(); ++c) {
                num += (results[i].state.phi[c].values - results[j].state.phi[c].values)
                           .matrix()
                           .squaredNorm();
                ni += results[i].state.phi[c].values.matrix().squaredNorm();
                nj += results[j].state.phi[c].values.matrix().squaredNorm();
            }
            const double rel = std::sqrt(num) / std::max({std::sqrt(ni), std::sqrt(nj), 1e-300});
            rep.pairwise_l2(i, j) = rep.pairwise_l2(j, i) = rel;
            rep.max_pairwise_l2 = std::max(rep.max_pairwise_l2, rel);
        }
    }

    const size_t n_rec = results[0].diag.size();
    for (const auto& r : results)
        if (r.diag.size() != n_rec) throw Error("G-variant runs recorded different step counts");
    rep.energy_curves.resize(n);
    for (size_t i = 0; i < n; ++i) {
        rep.energy_curves[i].reserve(n_rec);
        for (const auto& rec : results[i].diag) rep.energy_curves[i].push_back(rec.e_original);
    }
    rep.times.reserve(n_rec);
    for (const auto& rec : results[0].diag) rep.times.push_back(rec.t);
    for (size_t k = 0; k < n_rec; ++k) {
        double lo = rep.energy_curves[0][k], hi = lo, sum = 0;
        for (size_t i = 0; i < n; ++i) {
            const double e = rep.energy_curves[i][k];
            lo = std::min(lo, e);
            hi = std::max(hi, e);
            sum += e;
        }
        const double spread = (hi - lo) / std::max(std::abs(sum / n), 1e-300);
        rep.max_energy_spread = std::max(rep.max_energy_spread, spread);
    }
    return rep;
}

}  // namespace gsav
