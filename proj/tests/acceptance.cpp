// Acceptance runner. Prints one PASS/FAIL line per criterion.
// Usage: dic_acceptance [--cli PATH] [AC1 AC2 ...]

#include <sys/wait.h>

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "config.hpp"
#include "controllers.hpp"
#include "experiment.hpp"
#include "homogeneous.hpp"
#include "lyapunov.hpp"
#include "plants.hpp"
#include "simulator.hpp"

using namespace dic;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string cli_path;

std::string fmt(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

std::uint64_t ulp_distance(double a, double b)
{
    if (a == b) {
        return 0;
    }
    if (std::signbit(a) != std::signbit(b)) {
        return UINT64_MAX;
    }
    const auto ia = std::bit_cast<std::uint64_t>(std::fabs(a));
    const auto ib = std::bit_cast<std::uint64_t>(std::fabs(b));
    return ia > ib ? ia - ib : ib - ia;
}

const Trajectory& bundled_run(const std::string& name)
{
    static std::map<std::string, Trajectory> cache;
    auto it = cache.find(name);
    if (it == cache.end()) {
        it = cache.emplace(name, simulate_config(parse_config(bundled_config_text(name)))).first;
    }
    return it->second;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run_cli(const std::string& args, const fs::path& outdir)
{
    const std::string cmd = "DIC_OUTPUT_DIR='" + outdir.string() + "' '" + cli_path + "' " + args +
                            " >/dev/null 2>&1";
    const int st = std::system(cmd.c_str());
    return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

// ---------------------------------------------------------------------------

Outcome ac1()
{
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> logz(-3.0, 3.0);
    std::uniform_int_distribution<int> k(0, 256);  // exponents k/64 in [0, 4]
    std::uniform_int_distribution<int> sgn(0, 1);
    std::uint64_t worst = 0;
    bool monotone = true;
    for (int i = 0; i < 1000; ++i) {
        const double mag = std::pow(10.0, logz(rng));
        const double z = sgn(rng) ? mag : -mag;
        const double p = k(rng) / 64.0;
        const double q = k(rng) / 64.0;
        const double pp = std::max(p, 1.0 / 64.0);

        worst = std::max(worst, ulp_distance(signed_pow(z, p) * signed_pow(z, q),
                                             std::pow(std::fabs(z), p + q)));
        worst = std::max(worst, ulp_distance(signed_pow(z, 0.0) * std::pow(std::fabs(z), p),
                                             signed_pow(z, p)));
        worst = std::max(worst, ulp_distance(signed_pow(-z, p), -signed_pow(z, p)));

        const Weights w({3.0, 2.0}, 5.0);
        const double x[2] = {z, sgn(rng) ? mag * mag : -mag};
        const double eps = std::ldexp(1.0, k(rng) / 16 - 8);
        const auto dx = dilation(x, w, eps);
        const double n = hom_norm(x, w);
        if (!(n > 0.0)) {
            monotone = false;
        }
        worst = std::max(worst, ulp_distance(hom_norm(dx, w), eps * n));

        const double z2 = z + std::fabs(z) * 1e-3;
        if (!(signed_pow(z2, pp) > signed_pow(z, pp))) {
            monotone = false;
        }
    }
    const double zero[2] = {0.0, 0.0};
    const bool definite = hom_norm(zero, Weights({3.0, 2.0})) == 0.0;
    return {worst <= 4 && monotone && definite,
            "max ulp " + std::to_string(worst) + ", monotone " + (monotone ? "yes" : "no")};
}

Outcome ac2()
{
    const GainSet g{2.0, 5.0, 0.5, 0.7, 8.0, 17.6};
    const double eps[] = {0.5, 2.0, 10.0};

    const VectorField of = [&](std::span<const double> x) {
        const State5 f = of_error_field({x[0], x[1], x[2], x[3], x[4]}, g, 0.0);
        return std::vector<double>(f.begin(), f.end());
    };
    const Exclusion of_ex[] = {[&](std::span<const double> x) {
        return std::cbrt(std::fabs(x[0] + g.k4 * signed_pow(x[1] + x[3], 1.5)));
    }};
    const auto r5 = check_field_homogeneity(of, Weights({3.0, 2.0, 3.0, 2.0, 1.0}), -1.0, 100, eps,
                                            1e-9, of_ex, 11);

    const VectorField sf = [&](std::span<const double> x) {
        const State3 f = sf_error_field({x[0], x[1], x[2]}, g, 0.0);
        return std::vector<double>(f.begin(), f.end());
    };
    const Exclusion sf_ex[] = {[&](std::span<const double> x) {
        return std::cbrt(std::fabs(x[0] + g.k4 * signed_pow(x[1], 1.5)));
    }};
    const auto r3 =
        check_field_homogeneity(sf, Weights({3.0, 2.0, 1.0}), -1.0, 100, eps, 1e-9, sf_ex, 12);

    return {r5.passed && r3.passed && r5.max_relative_error < 1e-9 && r3.max_relative_error < 1e-9,
            "output-feedback field err " + fmt(r5.max_relative_error) + ", state-feedback err " +
                fmt(r3.max_relative_error)};
}

Outcome ac3()
{
    const auto sf = scaling_study(parse_config(bundled_config_text("sf_pendulum")), 3.0, 1e-3);
    const auto of = scaling_study(parse_config(bundled_config_text("of_pendulum")), 3.0, 1e-3);
    auto part = [](const char* name, const ScalingStudy& s) {
        std::string d = std::string(name) + " mismatch " + fmt(s.mismatch);
        if (s.first_exceed_time) {
            d += " (exceeds 1e-9 from t=" + fmt(*s.first_exceed_time) + ")";
        }
        return d;
    };
    return {sf.mismatch <= kScalingTolerance && of.mismatch <= kScalingTolerance,
            part("sf", sf) + ", " + part("of", of)};
}

struct Reproduction {
    double max_norm = 0.0;
    double max_zr = 0.0;
    double max_e1 = 0.0;
    double max_e2 = 0.0;
};

Reproduction reproduction(const Trajectory& tr)
{
    const Weights w({3.0, 2.0});
    Reproduction r;
    for (std::size_t i = 0; i < tr.size(); ++i) {
        if (tr.t[i] < 20.0) {
            continue;
        }
        const double x[2] = {tr.x1[i], tr.x2[i]};
        r.max_norm = std::max(r.max_norm, hom_norm(x, w));
        r.max_zr = std::max(r.max_zr, std::fabs(tr.z[i] + tr.rho[i]));
        if (tr.has_observer) {
            r.max_e1 = std::max(r.max_e1, std::fabs(tr.xhat1[i] - tr.x1[i]));
            r.max_e2 = std::max(r.max_e2, std::fabs(tr.xhat2[i] - tr.x2[i]));
        }
    }
    return r;
}

Outcome ac4()
{
    const auto r = reproduction(bundled_run("sf_pendulum"));
    return {r.max_norm <= 1e-2 && r.max_zr <= 5e-2,
            "t in [20,30]: hom norm " + fmt(r.max_norm) + ", |z+rho| " + fmt(r.max_zr)};
}

Outcome ac5()
{
    const auto r = reproduction(bundled_run("of_pendulum"));
    return {r.max_norm <= 1e-2 && r.max_zr <= 5e-2 && r.max_e1 <= 1e-4 && r.max_e2 <= 1e-4,
            "t >= 20: |e1| " + fmt(r.max_e1) + ", |e2| " + fmt(r.max_e2) + ", hom norm " +
                fmt(r.max_norm) + ", |z+rho| " + fmt(r.max_zr)};
}

Outcome ac6()
{
    const auto tw = chattering_metric(bundled_run("twisting_pendulum"));
    const auto sf = chattering_metric(bundled_run("sf_pendulum"));
    const auto of = chattering_metric(bundled_run("of_pendulum"));
    const bool pass = tw.max_step_jump >= 1.2 && tw.sign_flip_fraction >= 0.3 &&
                      sf.max_step_jump <= 0.05 && of.max_step_jump <= 0.05;
    return {pass, "twisting jump " + fmt(tw.max_step_jump) + " flips " +
                      fmt(tw.sign_flip_fraction) + "; dic-sf jump " + fmt(sf.max_step_jump) +
                      ", dic-of jump " + fmt(of.max_step_jump)};
}

Outcome ac7()
{
    const auto base = parse_config(bundled_config_text("sf_pendulum"));
    const auto s = precision_study(base, {1e-2, 3e-3, 1e-3, 3e-4, 1e-4});
    return {precision_in_bands(s),
            "slope x1 " + fmt(s.slope_x1) + ", slope x2 " + fmt(s.slope_x2) +
                (s.valid ? "" : " (some run did not settle)")};
}

double rel_inf(const State3& a, const State3& b)
{
    double num = 0.0, den = 0.0;
    for (int k = 0; k < 3; ++k) {
        num = std::max(num, std::fabs(a[k] - b[k]));
        den = std::max(den, std::fabs(b[k]));
    }
    return num / std::max(den, 1e-12);
}

Outcome ac8()
{
    const GainSet paper{2.0, 5.0, 0.5, 0.0, std::nullopt, std::nullopt};
    const auto t0 = std::chrono::steady_clock::now();
    const auto fast = certify_sf(paper, 0.6, 2.0 * SFCertParams::gamma1_threshold(paper));
    const double fast_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    const bool fast_ok = !fast.passed && fast.samples == 0 && fast_ms < 10.0;

    const auto s = search_parameters(paper, 0.4, 400, kDefaultCertSamples, 1);
    if (!s.params) {
        return {false, "search found no certificate (" + s.report.reason + ")"};
    }
    const auto& cert = s.report;
    const bool cert_ok = cert.passed && cert.kappa > 0.0 && cert.min_V > 0.0 && cert.L == 0.4;

    // Settling times of random initial conditions under the certified gains.
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> d(-2.0, 2.0);
    const Controller ctrl(ControllerType::DicStateFeedback, cert.gains);
    const Perturbation rho = Perturbation::sinusoid(0.4, 1.0, 0.0, 0.4);
    const Weights w3({3.0, 2.0, 1.0});
    int settled = 0;
    double worst_ratio = 0.0;
    for (int i = 0; i < 10; ++i) {
        const State2 x0{d(rng), d(rng)};
        const double z0 = d(rng);
        const double bound = cert.settling_bound_at({x0[0], x0[1], z0 + rho.eval(0.0).rho});
        // x3 = z + rho keeps an O(h) residual of about 0.015 at h = 1e-4 with these
        // gains, so the finer step is needed to resolve a 1e-2 settle threshold.
        const double t_end = std::min(bound, 40.0);
        const auto tr = simulate(make_double_integrator().dynamics(), ctrl, rho, x0, {z0, {0.0, 0.0}},
                                 SimConfig{1e-5, t_end, Method::ExplicitEuler, 100});
        double settle = 0.0;
        for (std::size_t k = 0; k < tr.size(); ++k) {
            const double x[3] = {tr.x1[k], tr.x2[k], tr.z[k] + tr.rho[k]};
            if (hom_norm(x, w3) > 1e-2) {
                settle = tr.t[std::min(k + 1, tr.size() - 1)];
            }
        }
        if (settle <= 0.8 * tr.t_end() && settle <= bound) {
            ++settled;
        }
        worst_ratio = std::max(worst_ratio, settle / bound);
    }

    // Gradient (central differences) and W-decomposition cross-checks.
    const SFCertParams base{cert.base_gains, cert.gamma1, cert.base_L};
    std::mt19937_64 rng2(9);
    double worst_grad = 0.0, worst_w = 0.0;
    int checked = 0;
    while (checked < 200) {
        const State3 x{d(rng2), d(rng2), d(rng2)};
        const double xi = xi1_coordinate(x, base.gains.k1);
        if (std::fabs(x[0]) < 1e-2 || std::fabs(x[1]) < 1e-2 || std::fabs(x[2]) < 1e-2 ||
            std::fabs(xi) < 1e-2) {
            continue;
        }
        const State3 g = grad_V_sf(x, base);
        State3 fd{};
        for (int k = 0; k < 3; ++k) {
            const double h = 1e-6 * std::max(1.0, std::fabs(x[k]));
            State3 a = x, b = x;
            a[k] += h;
            b[k] -= h;
            fd[k] = (V_sf(a, base) - V_sf(b, base)) / (2.0 * h);
        }
        worst_grad = std::max(worst_grad, rel_inf(g, fd));
        const double rd = 0.3 * base.L;
        const double vd = Vdot_sf(x, base, rd);
        worst_w = std::max(worst_w, std::fabs(w_terms_sf(x, base, rd).sum() - vd) /
                                        std::max(std::fabs(vd), 1e-12));
        ++checked;
    }
    const bool settle_ok = settled == 10;
    const bool cross_ok = worst_grad <= 1e-5 && worst_w <= 1e-10;

    return {fast_ok && cert_ok && settle_ok && cross_ok,
            std::string("fast-fail ") + (fast_ok ? "ok" : "bad") + "; gains (" +
                fmt(cert.gains.k1) + "," + fmt(cert.gains.k2) + "," + fmt(cert.gains.k3) + "," +
                fmt(cert.gains.k4) + ") L " + fmt(cert.L) + (cert_ok ? " certified" : " NOT certified") +
                " kappa " + fmt(cert.kappa) + " min V " + fmt(cert.min_V) + "; " +
                std::to_string(settled) + "/10 settled within bound, settle/bound max " + fmt(worst_ratio) + "; grad err " + fmt(worst_grad) +
                ", W err " + fmt(worst_w)};
}

Outcome ac9()
{
    std::vector<std::string> notes;
    bool pass = true;

    const fs::path root = fs::temp_directory_path() / "dic_acceptance_ac9";
    fs::remove_all(root);
    for (const auto& name : bundled_config_names()) {
        const std::string a = to_csv(bundled_run(name));
        const std::string b = to_csv(simulate_config(parse_config(bundled_config_text(name))));
        if (a != b) {
            pass = false;
            notes.push_back(name + " csv differs");
        }
    }
    if (!cli_path.empty()) {
        const int r1 = run_cli("run sf_pendulum", root / "a");
        const int r2 = run_cli("run sf_pendulum", root / "b");
        if (r1 != 0 || r2 != 0 ||
            slurp(root / "a" / "sf_pendulum.csv") != slurp(root / "b" / "sf_pendulum.csv")) {
            pass = false;
            notes.push_back("cli csv differs");
        }
    }

    std::size_t trips = 0;
    for (const auto& name : bundled_config_names()) {
        const auto c = parse_config(bundled_config_text(name));
        const auto text = serialize_config(c);
        const auto back = parse_config(text);
        if (!(back == c) || serialize_config(back) != text) {
            pass = false;
            notes.push_back(name + " round trip");
        }
        ++trips;
    }

    if (cli_path.empty()) {
        pass = false;
        notes.push_back("no --cli given, exit codes not exercised");
    } else {
        fs::create_directories(root);
        {
            std::ofstream(root / "bad.cfg") << "[controller]\nk1 = 2\nk2 = five\n";
            std::ofstream(root / "unstable.cfg")
                << "[plant]\ntype = double-integrator\n"
                   "[controller]\ntype = twisting\nk1 = 1\nk2 = 1\n"
                   "[perturbation]\ntype = constant\nvalue = 1e308\n"
                   "[sim]\nh = 0.1\nt_end = 100\n";
        }
        const int ok = run_cli("run twisting_pendulum", root / "c");
        const int bad = run_cli("run '" + (root / "bad.cfg").string() + "'", root / "c");
        const int unstable = run_cli("run '" + (root / "unstable.cfg").string() + "'", root / "c");
        notes.push_back("exit codes ok/malformed/unstable = " + std::to_string(ok) + "/" +
                        std::to_string(bad) + "/" + std::to_string(unstable));
        if (ok != 0 || bad != 2 || unstable != 3) {
            pass = false;
        }
    }

    std::string detail = std::to_string(bundled_config_names().size()) +
                         " bundled csvs identical, " + std::to_string(trips) + " round trips";
    for (const auto& n : notes) {
        detail += "; " + n;
    }
    return {pass, detail};
}

}  // namespace

int main(int argc, char** argv)
{
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"AC1", ac1}, {"AC2", ac2}, {"AC3", ac3}, {"AC4", ac4}, {"AC5", ac5},
        {"AC6", ac6}, {"AC7", ac7}, {"AC8", ac8}, {"AC9", ac9},
    };

    std::vector<std::string> selected;
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--cli" && i + 1 < argc) {
            cli_path = argv[++i];
        } else {
            selected.push_back(a);
        }
    }
    for (const auto& s : selected) {
        if (std::none_of(criteria.begin(), criteria.end(), [&](const auto& c) { return c.first == s; })) {
            std::cerr << "unknown criterion " << s << "\n";
            return 2;
        }
    }

    int failed = 0;
    for (const auto& [name, fn] : criteria) {
        if (!selected.empty() && std::find(selected.begin(), selected.end(), name) == selected.end()) {
            continue;
        }
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("%s %s  %s  [%.2f s]\n", name.c_str(), o.pass ? "PASS" : "FAIL", o.detail.c_str(),
                    secs);
        std::fflush(stdout);
        failed += o.pass ? 0 : 1;
    }
    return failed == 0 ? 0 : 1;
}
