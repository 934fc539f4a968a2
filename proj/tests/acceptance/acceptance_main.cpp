// Acceptance gates for the deltadrift artifact. Each numbered block prints a
// single PASS/FAIL verdict line (indented lines are supporting detail) and the
// process exits with the number of failed gates. Tolerances are pinned here,
// not configurable. argv[1] must be the path to the deltadrift CLI binary.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "deltadrift.hpp"
#include "support/quadrature.hpp"

using namespace deltadrift;

namespace {

int g_failures = 0;

void verdict(int idx, const std::string& name, bool ok, const std::string& note) {
    std::string line = "[" + std::to_string(idx) + "/8] " + name + " ";
    while (line.size() < 58) line += '.';
    line += ok ? " PASS" : " FAIL";
    if (!note.empty()) line += "  (" + note + ")";
    std::puts(line.c_str());
    if (!ok) ++g_failures;
}

void info(const std::string& line) { std::puts(("       " + line).c_str()); }

std::string fmt(const char* f, double a) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

// The randomized parameter protocol shared by gates 1 and 2: log-uniform
// strength in [1e-2, 10] routed either through the override or through the
// two-channel reduction with a closed second channel, a in [0.5, 10],
// n in {1..5}.
std::vector<std::pair<PhysicalParams, int>> random_sets() {
    std::mt19937 gen(987654321);
    std::uniform_real_distribution<double> log_strength(-2.0, 1.0);
    std::uniform_real_distribution<double> a_dist(0.5, 10.0);
    std::uniform_int_distribution<int> n_dist(1, 5);
    std::uniform_real_distribution<double> gap_dist(0.1, 3.0);
    std::bernoulli_distribution coin(0.5);
    std::vector<std::pair<PhysicalParams, int>> sets;
    for (int trial = 0; trial < 100; ++trial) {
        PhysicalParams p;
        p.a_bar = a_dist(gen);
        const int n = n_dist(gen);
        const double strength = std::pow(10.0, log_strength(gen));
        if (coin(gen)) {
            p.v0_override = coin(gen) ? strength : -strength;
        } else {
            p.u0_bar = strength;
            const double k_n = n * std::numbers::pi / p.a_bar;
            p.v2_offset = 0.5 * k_n * k_n * (1.0 + gap_dist(gen));
        }
        sets.emplace_back(p, n);
    }
    return sets;
}

PhysicalParams reference_params(double v0) {
    PhysicalParams p;
    p.a_bar = std::numbers::pi;
    p.v0_override = v0;
    p.v2_offset = 2.0; // matched closed-channel gap; inert under the override
    return p;
}

RunConfig oracle_config(double v0, double v, double t_final, int n_points,
                        double pad, double w_over_dx) {
    RunConfig cfg;
    cfg.mode = "oracle";
    cfg.params = reference_params(v0);
    cfg.params.v = v;
    cfg.n = 1;
    cfg.t_final = t_final;
    cfg.sample_count = 300;
    cfg.n_points = n_points;
    cfg.pad = pad;
    cfg.w_over_dx = w_over_dx;
    cfg.dt_divisor = 200.0;
    return cfg;
}

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run_cli(const std::string& cli, const std::string& args,
            const std::filesystem::path& out, const std::filesystem::path& err) {
    const std::string cmd =
        cli + " " + args + " > " + out.string() + " 2> " + err.string();
    const int raw = std::system(cmd.c_str());
    if (raw == -1 || !WIFEXITED(raw)) return -1;
    return WEXITSTATUS(raw);
}

} // namespace

// --- gate 1: algebraic identities over 100 random sets ---------------------
static void gate_identities(const std::vector<std::pair<PhysicalParams, int>>& sets) {
    double worst = 0.0;
    for (const auto& [p, n] : sets) {
        const auto r = resonance_params(p, n);
        worst = std::max(worst,
                         std::abs(r.d_sq * r.delta_shift * r.delta_shift + r.h_sq - 1.0));
        worst = std::max(worst, std::abs(r.h_sq * (1.0 + r.g * r.g) - 1.0));
    }
    verdict(1, "identities D2 d2 + H2 = 1 and H2 (1 + g2) = 1", worst <= 1e-12,
            "max rel dev " + fmt("%.2e", worst) + " over 100 sets, tol 1e-12");
}

// --- gate 2: Lorentzian consistency and shrinking detuning error ------------
static void gate_lorentzian(const std::vector<std::pair<PhysicalParams, int>>& sets) {
    double worst = 0.0;
    for (const auto& [p, n] : sets) {
        const auto r = resonance_params(p, n);
        worst = std::max(worst, std::abs(lorentzian_approx(r, 0.0) - 1.0));
        worst = std::max(worst, std::abs(amplitude_sq(p, r.v0_bar, r.k_bar_n) - 1.0));
    }
    const auto p = reference_params(0.5); // g = 1 level
    const auto r = resonance_params(p, 1);
    std::vector<double> errs;
    for (const double frac : {1e-1, 1e-2, 1e-3}) {
        const double de = frac * r.e_bar_n;
        const double k = std::sqrt(2.0 * p.mu * (r.e_bar_n + de)) / p.hbar;
        errs.push_back(std::abs(amplitude_sq(p, r.v0_bar, k) - lorentzian_approx(r, de)));
    }
    const bool mono = errs[0] > errs[1] && errs[1] > errs[2];
    verdict(2, "Lorentzian matches A2 on resonance, error shrinks",
            worst <= 1e-12 && mono,
            "max on-resonance dev " + fmt("%.2e", worst) + ", err " +
                fmt("%.1e", errs[0]) + " > " + fmt("%.1e", errs[1]) + " > " +
                fmt("%.1e", errs[2]));
}

// --- gate 3: scaling transform vs quadrature, norm, TDSE residual ----------
static double mapped_residual(double h) {
    const ScalingFrame<double> f{1.0, 0.5};
    const auto st = box_eigenstate<double>(1, 2.0);
    const double t0 = 0.8;
    const std::complex<double> i{0.0, 1.0};
    const double r = scale_factor(f, t0);
    double worst = 0.0;
    for (double x = 0.2 * r; x <= 1.6 * r; x += 0.1 * r) {
        const auto at = [&](double xx, double tt) {
            return lab_wavefunction(f, st, xx, tt);
        };
        const std::complex<double> dt = (at(x, t0 + h) - at(x, t0 - h)) / (2.0 * h);
        const std::complex<double> dxx =
            (at(x + h, t0) - 2.0 * at(x, t0) + at(x - h, t0)) / (h * h);
        worst = std::max(worst, std::abs(i * dt + 0.5 * dxx));
    }
    return worst;
}

static void gate_transform() {
    double tau_dev = 0.0;
    for (const double v : {-0.05, 0.0, 0.5, 2.0}) {
        const ScalingFrame<double> f{1.0, v};
        for (double t = 0.5; t <= 10.0; t += 0.5) {
            const double quad = testsupport::integrate(
                [&](double s) {
                    const double r = f.r0 + f.v * s;
                    return 1.0 / (r * r);
                },
                0.0, t);
            tau_dev = std::max(tau_dev, std::abs(tau_of_t(f, t) / quad - 1.0));
        }
    }
    double norm_dev = 0.0;
    const ScalingFrame<double> f{1.0, 0.5};
    const auto st = box_eigenstate<double>(1, 2.0);
    for (const double t : {0.0, 0.7, 3.0}) {
        const double r = scale_factor(f, t);
        const double nrm = testsupport::integrate(
            [&](double x) { return std::norm(lab_wavefunction(f, st, x, t)); }, 0.0,
            2.0 * r);
        norm_dev = std::max(norm_dev, std::abs(nrm - 1.0));
    }
    const double r1 = mapped_residual(2e-3);
    const double r2 = mapped_residual(1e-3);
    const double r3 = mapped_residual(5e-4);
    const double order = std::log2(r2 / r3);
    const bool ok = tau_dev <= 1e-12 && norm_dev <= 1e-10 && r1 > r2 && r2 > r3 &&
                    order >= 1.0;
    verdict(3, "tau vs quadrature, lab norm, mapped TDSE residual", ok,
            "tau dev " + fmt("%.1e", tau_dev) + ", norm dev " + fmt("%.1e", norm_dev) +
                ", residual order " + fmt("%.2f", order));
}

// --- gates 4 and 5: oracle decay rates, static and moving -------------------
struct StaticLeg {
    double v0 = 0.0;
    OracleRun run; // w = 4 dx leg, reused by gate 5
};

static void gate_static_rate(std::vector<StaticLeg>& legs,
                             std::vector<IntegrityReport>& integrity) {
    bool ok = true;
    info("static reference: n_points=4096, pad=8, t_final=3, 300 samples");
    for (const double v0 : {0.5, 1.0, 2.0}) {
        std::vector<double> rels;
        double analytic = 0.0;
        for (const double wdx : {8.0, 4.0, 2.0}) {
            const auto cfg = oracle_config(v0, 0.0, 3.0, 4096, 8.0, wdx);
            const auto run = run_oracle_curve(cfg);
            integrity.push_back(run.integrity);
            analytic = run.rate_analytic;
            const double rel = run.curve.fitted_rate / run.rate_analytic - 1.0;
            rels.push_back(rel);
            info("v0=" + fmt("%.1f", v0) + " w=" + fmt("%.0f", wdx) +
                   "dx: rate_fit=" + fmt("%.6f", run.curve.fitted_rate) +
                   " rate_analytic=" + fmt("%.6f", analytic) + " rel=" +
                   fmt("%+.4f", rel) + " r2=" + fmt("%.4f", run.curve.r_squared));
            if (wdx == 4.0) legs.push_back({v0, run});
        }
        const bool within = std::abs(rels[1]) <= 0.15;
        const bool improving = std::abs(rels[1]) <= std::abs(rels[0]) + 1e-3 &&
                               std::abs(rels[2]) <= std::abs(rels[1]) + 1e-3;
        if (!within)
            info("v0=" + fmt("%.1f", v0) + ": |rel| " + fmt("%.3f", std::abs(rels[1])) +
                   " exceeds the 0.15 gate at w=4dx");
        if (!improving) info("v0=" + fmt("%.1f", v0) + ": not improving under w-halving");
        ok = ok && within && improving;
    }
    verdict(4, "static fitted rate within 15% of 2|H/D|, w-converging", ok,
            ok ? "all strengths within gate" : "15% gate violated; see table above");
}

static void gate_moving_rate(const std::vector<StaticLeg>& legs,
                             std::vector<IntegrityReport>& integrity) {
    bool ok = true;
    info("moving runs: v=0.2, n_points=32768, pad=16, t_final=45, 300 samples");
    for (const auto& leg : legs) {
        const auto cfg = oracle_config(leg.v0, 0.2, 45.0, 32768, 16.0, 4.0);
        const auto run = run_oracle_curve(cfg);
        integrity.push_back(run.integrity);
        const std::pair<double, double> common{
            std::max(run.curve.fit_window.first, leg.run.curve.fit_window.first),
            std::min(run.curve.fit_window.second, leg.run.curve.fit_window.second)};
        const auto fm = fit_decay_rate(run.curve.samples, common);
        const auto fs = fit_decay_rate(leg.run.curve.samples, common);
        const double ratio = fm.rate / fs.rate - 1.0;
        const bool linear = run.curve.r_squared >= 0.98;
        const bool matches = std::abs(ratio) <= 0.20;
        info("v0=" + fmt("%.1f", leg.v0) + ": r2=" + fmt("%.5f", run.curve.r_squared) +
               ", common-window slope ratio-1=" + fmt("%+.4f", ratio) + " (tau in [" +
               fmt("%.3f", common.first) + ", " + fmt("%.3f", common.second) + "])");
        ok = ok && linear && matches;
    }
    verdict(5, "moving run linear in tau (R2 >= 0.98), slope matches", ok,
            ok ? "reduction to the stationary problem verified" : "gate violated");
}

// --- gate 6: saturation of the nonadiabatic probability ---------------------
static void gate_saturation() {
    const auto p0 = reference_params(0.5);
    double worst = 0.0;
    for (const double v : {0.05, 0.2, 1.0, 5.0}) {
        auto p = p0;
        p.v = v;
        const auto r = resonance_params(p, 1);
        const double tau_quad = testsupport::integrate(
            [&](double s) {
                const double rr = p.r0 + p.v * s;
                return 1.0 / (rr * rr);
            },
            0.0, 1e6);
        const double integrated = 1.0 - std::exp(-2.0 * hd_ratio(r) * tau_quad / p.hbar);
        const double closed = 1.0 - std::exp(-2.0 * hd_ratio(r) / (p.hbar * p.r0 * p.v));
        worst = std::max(worst, std::abs(integrated - closed));
        worst = std::max(worst,
                         std::abs(nonadiabatic_probability(p, 1, 1e6) - closed));
        worst = std::max(worst, std::abs(saturation_nonadiabatic(p, 1) - closed));
    }
    verdict(6, "P_nonadiabatic(1e6) matches 1 - exp(-2|H/D|/(R0 v))", worst <= 1e-3,
            "max abs dev " + fmt("%.2e", worst) + " over v grid, tol 1e-3");
}

// --- gate 7: solver integrity bounds and the exit-3 contract ----------------
static void gate_integrity(const std::vector<IntegrityReport>& integrity,
                           const std::string& cli,
                           const std::filesystem::path& scratch) {
    double drift = 0.0, leak = 0.0;
    for (const auto& rep : integrity) {
        drift = std::max(drift, rep.norm_drift_max);
        leak = std::max(leak, rep.leak_max);
    }
    // zero-coupling isolation probe; the box is kept wide enough that the
    // freely dispersing edge tail stays clear of the leak monitor
    RunConfig iso;
    iso.mode = "oracle";
    iso.params.a_bar = std::numbers::pi;
    iso.params.u0_bar = 0.0;
    iso.params.v2_offset = 2.0;
    iso.n = 1;
    iso.t_final = 1.0;
    iso.sample_count = 40;
    iso.n_points = 768;
    iso.pad = 6.0;
    const auto iso_run = run_oracle_curve(iso);
    // an integrity violation must surface as exit code 3 from the CLI
    const auto bad_cfg = scratch / "leaky.json";
    {
        std::ofstream out(bad_cfg);
        out << R"({"mode":"oracle","mu":1,"hbar":1,"u0_bar":0,"v2_offset":2,)"
            << R"("a_bar":3.141592653589793,"r0":1,"v":0,"v0_override":2.0,)"
            << R"("n":1,"t_final":4,"sample_count":40,"n_points":512,"pad":8})"
            << "\n";
    }
    const int code = run_cli(cli,
                             "oracle --config " + bad_cfg.string() + " --out " +
                                 (scratch / "leaky.csv").string(),
                             scratch / "leaky.out", scratch / "leaky.err");
    nlohmann::json rec;
    try {
        rec = nlohmann::json::parse(slurp(scratch / "leaky.err"));
    } catch (...) {
    }
    const std::string etype =
        rec.contains("error") ? rec["error"].value("type", "") : "";
    const bool ok = drift <= 1e-8 && leak <= 1e-4 &&
                    iso_run.integrity.channel2_max <= 1e-14 && code == 3 &&
                    etype == "DomainExceeded";
    verdict(7, "norm drift, boundary leak, channel isolation, exit 3", ok,
            "drift " + fmt("%.1e", drift) + ", leak " + fmt("%.1e", leak) +
                ", ch2 " + fmt("%.1e", iso_run.integrity.channel2_max) +
                ", violating run exit " + std::to_string(code) + " [" + etype + "]");
}

// --- gate 8: CLI byte determinism -------------------------------------------
static void gate_determinism(const std::string& cli,
                             const std::filesystem::path& scratch) {
    const auto cfg_path = scratch / "compare.json";
    {
        std::ofstream out(cfg_path);
        out << R"({"mode":"compare","mu":1,"hbar":1,"u0_bar":0,"v2_offset":2,)"
            << R"("a_bar":3.141592653589793,"r0":1,"v":0,"v0_override":2.0,)"
            << R"("n":1,"t_final":4,"sample_count":40,"n_points":512,"pad":12})"
            << "\n";
    }
    const auto o1 = scratch / "det1.csv";
    const auto o2 = scratch / "det2.csv";
    const int c1 = run_cli(cli, "compare --config " + cfg_path.string() + " --out " + o1.string(),
                           scratch / "det1.out", scratch / "det1.err");
    const int c2 = run_cli(cli, "compare --config " + cfg_path.string() + " --out " + o2.string(),
                           scratch / "det2.out", scratch / "det2.err");
    const std::string b1 = slurp(o1);
    const std::string b2 = slurp(o2);
    const std::string s1 = slurp(scratch / "det1.csv.summary.json");
    const std::string s2 = slurp(scratch / "det2.csv.summary.json");
    const bool ok = c1 == 0 && c2 == 0 && !b1.empty() && b1 == b2 && s1 == s2;
    verdict(8, "two identical CLI invocations, byte-identical CSV", ok,
            "exit " + std::to_string(c1) + "/" + std::to_string(c2) + ", csv " +
                std::to_string(b1.size()) + " bytes, " +
                (b1 == b2 ? "identical" : "DIFFER"));
}

int main(int argc, char** argv) {
    if (argc < 2) {
        std::puts("usage: acceptance <path-to-deltadrift-cli>");
        return 99;
    }
    const std::string cli = argv[1];
    const auto scratch = std::filesystem::current_path() / "acceptance_scratch";
    std::filesystem::remove_all(scratch);
    std::filesystem::create_directories(scratch);

    const auto guarded = [](int idx, const char* name, auto&& fn) {
        try {
            fn();
        } catch (const std::exception& e) {
            verdict(idx, name, false, std::string("aborted: ") + e.what());
        }
    };

    const auto sets = random_sets();
    guarded(1, "identities D2 d2 + H2 = 1 and H2 (1 + g2) = 1",
            [&] { gate_identities(sets); });
    guarded(2, "Lorentzian matches A2 on resonance, error shrinks",
            [&] { gate_lorentzian(sets); });
    guarded(3, "tau vs quadrature, lab norm, mapped TDSE residual",
            [&] { gate_transform(); });

    std::vector<StaticLeg> legs;
    std::vector<IntegrityReport> integrity;
    guarded(4, "static fitted rate within 15% of 2|H/D|, w-converging",
            [&] { gate_static_rate(legs, integrity); });
    guarded(5, "moving run linear in tau (R2 >= 0.98), slope matches",
            [&] { gate_moving_rate(legs, integrity); });
    guarded(6, "P_nonadiabatic(1e6) matches 1 - exp(-2|H/D|/(R0 v))",
            [&] { gate_saturation(); });
    guarded(7, "norm drift, boundary leak, channel isolation, exit 3",
            [&] { gate_integrity(integrity, cli, scratch); });
    guarded(8, "two identical CLI invocations, byte-identical CSV",
            [&] { gate_determinism(cli, scratch); });

    std::filesystem::remove_all(scratch);
    std::printf("%d/8 gates passed\n", 8 - g_failures);
    return g_failures;
}
