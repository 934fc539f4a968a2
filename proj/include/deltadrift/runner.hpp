#pragma once

#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numbers>
#include <string>
#include <thread>
#include <vector>

#include "config.hpp"
#include "report.hpp"
#include "tdse.hpp"

namespace deltadrift {

inline const char* error_type_name(const std::exception& e) {
    if (dynamic_cast<const NonPositiveScale*>(&e)) return "NonPositiveScale";
    if (dynamic_cast<const NonPositiveParameter*>(&e)) return "NonPositiveParameter";
    if (dynamic_cast<const OpenChannel*>(&e)) return "OpenChannel";
    if (dynamic_cast<const UnderResolved*>(&e)) return "UnderResolved";
    if (dynamic_cast<const SolverDiverged*>(&e)) return "SolverDiverged";
    if (dynamic_cast<const DomainExceeded*>(&e)) return "DomainExceeded";
    if (dynamic_cast<const InsufficientSamples*>(&e)) return "InsufficientSamples";
    if (dynamic_cast<const ParseError*>(&e)) return "ParseError";
    if (dynamic_cast<const ValidationError*>(&e)) return "ValidationError";
    if (dynamic_cast<const Error*>(&e)) return "Error";
    return "InternalError";
}

// 0 = success, 2 = validation failure, 3 = solver-integrity failure.
inline int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const SolverDiverged*>(&e) ||
        dynamic_cast<const DomainExceeded*>(&e))
        return 3;
    if (dynamic_cast<const Error*>(&e))
        return 2;
    return 1;
}

struct IntegrityReport {
    double norm_drift_max = 0.0;
    double leak_max = 0.0;
    double channel2_max = 0.0; // only meaningful when the coupling is off
};

struct OracleRun {
    Grid grid{};
    double w = 0.0;
    double dt_nominal = 0.0;
    double rate_analytic = 0.0;
    DecayCurve curve{};
    IntegrityReport integrity{};
};

// Propagate one oracle run and sample the decay curve on a uniform t grid.
// Integrity bounds: norm drift <= 1e-8 and (while the coupling is off)
// channel-2 norm <= 1e-14 at every sample; boundary leak <= 1e-4 at every
// sample inside the fit window, where the curve is actually trusted.
// Violations abort the run.
inline OracleRun run_oracle_curve(const RunConfig& cfg) {
    const auto p = validate(cfg.params, cfg.t_final);
    const auto res = resonance_params(p, cfg.n);

    OracleRun out;
    out.grid = build_grid(p, cfg.n, cfg.t_final, cfg.n_points, cfg.pad);
    out.w = cfg.w_over_dx * out.grid.dx;
    const double period = 2.0 * std::numbers::pi * p.hbar / res.e_bar_n;
    out.dt_nominal = period / cfg.dt_divisor;
    out.rate_analytic = 2.0 * hd_ratio(res) / p.hbar;

    auto state = initial_state(out.grid, p, cfg.n);
    const double norm0 = region_norm(out.grid, state.phi1, p.a_bar * p.r0);
    const bool coupling_off = p.v0_override.has_value() || p.u0_bar == 0.0;
    const ScalingFrame<double> f{p.r0, p.v};

    out.curve.samples.reserve(cfg.sample_count + 1);
    std::vector<double> leaks;
    leaks.reserve(cfg.sample_count + 1);
    for (int i = 0; i <= cfg.sample_count; ++i) {
        const double t_target = cfg.t_final * i / cfg.sample_count;
        const double gap = t_target - state.t;
        if (gap > 0.0) {
            const int m = std::max(1, static_cast<int>(std::ceil(gap / out.dt_nominal - 1e-12)));
            const double dt = gap / m;
            for (int k = 0; k < m; ++k)
                step(out.grid, state, p, dt, out.w);
        }

        const double drift = std::abs(total_norm(out.grid, state) - 1.0);
        out.integrity.norm_drift_max = std::max(out.integrity.norm_drift_max, drift);
        if (drift > 1e-8)
            throw SolverDiverged("norm drift " + format_sig17(drift) +
                                 " exceeds 1e-8 at t = " + format_sig17(state.t));
        leaks.push_back(leak_norm(out.grid, state));
        if (coupling_off) {
            const double ch2 =
                std::sqrt(detail::trapezoid_sq(out.grid, state.phi2, 0, out.grid.n_points - 1));
            out.integrity.channel2_max = std::max(out.integrity.channel2_max, ch2);
            if (ch2 > 1e-14)
                throw SolverDiverged("channel-2 norm " + format_sig17(ch2) +
                                     " broke zero-coupling isolation at t = " +
                                     format_sig17(state.t));
        }

        DecaySample sample;
        sample.t = state.t;
        sample.tau = tau_of_t(f, state.t);
        sample.p_numeric = survival_numeric(out.grid, state, p, norm0);
        sample.p_analytic = survival_probability(p, cfg.n, state.t);
        out.curve.samples.push_back(sample);
    }

    out.curve.fit_window = default_fit_window(out.curve.samples);
    for (size_t i = 0; i < out.curve.samples.size(); ++i) {
        if (out.curve.samples[i].tau > out.curve.fit_window.second)
            break;
        out.integrity.leak_max = std::max(out.integrity.leak_max, leaks[i]);
        if (leaks[i] > 1e-4)
            throw DomainExceeded("boundary leak " + format_sig17(leaks[i]) +
                                 " exceeds 1e-4 inside the fit window at t = " +
                                 format_sig17(out.curve.samples[i].t));
    }
    const auto fit = fit_decay_rate(out.curve.samples, out.curve.fit_window);
    out.curve.fitted_rate = fit.rate;
    out.curve.r_squared = fit.r_squared;
    return out;
}

struct RunOutcome {
    std::string out_path;
    std::string summary_path; // compare mode only
    nlohmann::ordered_json headline;
};

namespace detail {

inline std::string default_out(const RunConfig& cfg) {
    if (!cfg.out.empty())
        return cfg.out;
    return cfg.mode + (cfg.format == "json" ? ".json" : ".csv");
}

inline void emit_rows(const RunConfig& cfg, const std::string& path,
                      const std::vector<std::string>& header,
                      const std::vector<std::vector<std::string>>& rows) {
    if (cfg.format == "csv") {
        write_csv(path, header, rows);
        return;
    }
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& row : rows) {
        nlohmann::ordered_json obj;
        for (size_t i = 0; i < header.size(); ++i) {
            // Numeric cells round-trip through the same fixed formatting.
            try {
                size_t pos = 0;
                const double x = std::stod(row[i], &pos);
                if (pos == row[i].size()) {
                    obj[header[i]] = x;
                    continue;
                }
            } catch (...) {
            }
            obj[header[i]] = row[i];
        }
        arr.push_back(obj);
    }
    write_json(path, arr);
}

} // namespace detail

inline RunOutcome run_analytic(const RunConfig& cfg) {
    const auto p = validate(cfg.params, cfg.t_final);
    (void)resonance_params(p, cfg.n); // surface OpenChannel and friends up front
    std::vector<std::vector<std::string>> rows;
    rows.reserve(cfg.sample_count + 1);
    const ScalingFrame<double> f{p.r0, p.v};
    for (int i = 0; i <= cfg.sample_count; ++i) {
        const double t = cfg.t_final * i / cfg.sample_count;
        const double tau = tau_of_t(f, t);
        const double alpha = decay_exponent(p, cfg.n, t);
        rows.push_back({format_sig17(t), format_sig17(tau), format_sig17(alpha),
                        format_sig17(survival_probability(p, cfg.n, t)),
                        format_sig17(nonadiabatic_probability(p, cfg.n, t))});
    }
    RunOutcome rc;
    rc.out_path = detail::default_out(cfg);
    detail::emit_rows(cfg, rc.out_path,
                      {"t", "tau", "alpha", "p_survival", "p_nonadiabatic"}, rows);
    rc.headline["mode"] = "analytic";
    rc.headline["rows"] = cfg.sample_count + 1;
    rc.headline["out"] = rc.out_path;
    return rc;
}

inline RunOutcome run_oracle(const RunConfig& cfg) {
    const auto run = run_oracle_curve(cfg);
    std::vector<std::vector<std::string>> rows;
    rows.reserve(run.curve.samples.size());
    for (const auto& s : run.curve.samples)
        rows.push_back({format_sig17(s.t), format_sig17(s.tau),
                        format_sig17(s.p_analytic), format_sig17(s.p_numeric)});
    RunOutcome rc;
    rc.out_path = detail::default_out(cfg);
    detail::emit_rows(cfg, rc.out_path, {"t", "tau", "p_survival", "p_numeric"}, rows);
    rc.headline["mode"] = "oracle";
    rc.headline["rows"] = run.curve.samples.size();
    rc.headline["rate_fit"] = run.curve.fitted_rate;
    rc.headline["r_squared"] = run.curve.r_squared;
    rc.headline["out"] = rc.out_path;
    return rc;
}

inline RunOutcome run_compare(const RunConfig& cfg) {
    const auto run = run_oracle_curve(cfg);
    const double rel_err =
        (run.curve.fitted_rate - run.rate_analytic) / run.rate_analytic;

    std::vector<std::vector<std::string>> rows;
    rows.reserve(run.curve.samples.size());
    const auto p = validate(cfg.params, cfg.t_final);
    for (const auto& s : run.curve.samples) {
        const double alpha = decay_exponent(p, cfg.n, s.t);
        rows.push_back({format_sig17(s.t), format_sig17(s.tau), format_sig17(alpha),
                        format_sig17(s.p_analytic),
                        format_sig17(1.0 - s.p_analytic),
                        format_sig17(s.p_numeric),
                        format_sig17(run.curve.fitted_rate),
                        format_sig17(run.rate_analytic), format_sig17(rel_err)});
    }
    RunOutcome rc;
    rc.out_path = detail::default_out(cfg);
    detail::emit_rows(cfg, rc.out_path,
                      {"t", "tau", "alpha", "p_survival", "p_nonadiabatic",
                       "p_numeric", "rate_fit", "rate_analytic", "rel_err"},
                      rows);

    nlohmann::ordered_json summary;
    summary["mode"] = "compare";
    summary["rate_fit"] = run.curve.fitted_rate;
    summary["rate_analytic"] = run.rate_analytic;
    summary["rel_err"] = rel_err;
    summary["r_squared"] = run.curve.r_squared;
    summary["fit_window"] = {run.curve.fit_window.first, run.curve.fit_window.second};
    summary["samples"] = run.curve.samples.size();
    summary["integrity"]["norm_drift_max"] = run.integrity.norm_drift_max;
    summary["integrity"]["boundary_leak_max"] = run.integrity.leak_max;
    summary["integrity"]["channel2_norm_max"] = run.integrity.channel2_max;
    rc.summary_path = rc.out_path + ".summary.json";
    write_json(rc.summary_path, summary);
    rc.headline = summary;
    rc.headline["out"] = rc.out_path;
    rc.headline["summary_out"] = rc.summary_path;
    return rc;
}

namespace detail {

inline PhysicalParams with_param(const PhysicalParams& base, const std::string& name,
                                 double value) {
    PhysicalParams p = base;
    if (name == "mu") p.mu = value;
    else if (name == "hbar") p.hbar = value;
    else if (name == "u0_bar") p.u0_bar = value;
    else if (name == "v2_offset") p.v2_offset = value;
    else if (name == "a_bar") p.a_bar = value;
    else if (name == "r0") p.r0 = value;
    else if (name == "v") p.v = value;
    else if (name == "v0_override") p.v0_override = value;
    else throw ValidationError("unsweepable parameter \"" + name + "\"");
    return p;
}

} // namespace detail

// One row of headline scalars per sweep value. Points run concurrently up to
// cfg.jobs workers; rows are emitted in input order regardless of scheduling.
inline RunOutcome run_sweep(const RunConfig& cfg) {
    if (!cfg.sweep)
        throw ValidationError("sweep mode requires a sweep axis");
    const auto& axis = *cfg.sweep;
    std::vector<std::vector<std::string>> rows(axis.values.size());

    std::atomic<size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;

    auto worker = [&]() {
        for (;;) {
            const size_t i = next.fetch_add(1);
            if (i >= axis.values.size())
                return;
            try {
                const double value = axis.values[i];
                PhysicalParams p = cfg.params;
                int n = cfg.n;
                if (axis.param == "n") {
                    if (std::floor(value) != value || value < 1.0)
                        throw ValidationError("sweep over n needs integer values >= 1");
                    n = static_cast<int>(value);
                } else {
                    p = detail::with_param(cfg.params, axis.param, value);
                }
                p = validate(p, cfg.t_final);
                const auto res = resonance_params(p, n);
                rows[i] = {axis.param, format_sig17(value), format_sig17(res.h_sq),
                           format_sig17(res.d_sq), format_sig17(res.delta_shift),
                           format_sig17(saturation_nonadiabatic(p, n))};
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error)
                    first_error = std::current_exception();
                return;
            }
        }
    };

    const size_t n_workers =
        std::min<size_t>(std::max(1, cfg.jobs), axis.values.size());
    std::vector<std::thread> pool;
    pool.reserve(n_workers);
    for (size_t k = 0; k < n_workers; ++k)
        pool.emplace_back(worker);
    for (auto& th : pool)
        th.join();
    if (first_error)
        std::rethrow_exception(first_error);

    RunOutcome rc;
    rc.out_path = detail::default_out(cfg);
    detail::emit_rows(cfg, rc.out_path,
                      {"sweep_param", "sweep_value", "h_sq", "d_sq", "delta_shift",
                       "p_saturation"},
                      rows);
    rc.headline["mode"] = "sweep";
    rc.headline["rows"] = axis.values.size();
    rc.headline["out"] = rc.out_path;
    return rc;
}

inline RunOutcome run(const RunConfig& cfg) {
    if (cfg.mode == "analytic")
        return run_analytic(cfg);
    if (cfg.mode == "oracle")
        return run_oracle(cfg);
    if (cfg.mode == "compare")
        return run_compare(cfg);
    if (cfg.mode == "sweep")
        return run_sweep(cfg);
    throw ValidationError("unknown mode \"" + cfg.mode + "\"");
}

} // namespace deltadrift
