#include "lyapunov.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <vector>

#include "homogeneous.hpp"

namespace dic {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double cube(double v) { return v * v * v; }

/// Splits [0, n) into fixed chunks, evaluates them on worker threads and
/// returns the per-chunk results in chunk order.
template <class Partial, class Fn>
std::vector<Partial> parallel_chunks(std::size_t n, Fn fn)
{
    const std::size_t workers =
        std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, 16);
    const std::size_t chunks = std::min<std::size_t>(workers, std::max<std::size_t>(n, 1));
    std::vector<Partial> out(chunks);
    std::vector<std::jthread> threads;
    for (std::size_t c = 0; c < chunks; ++c) {
        const std::size_t b = n * c / chunks;
        const std::size_t e = n * (c + 1) / chunks;
        threads.emplace_back([&out, &fn, c, b, e] { out[c] = fn(b, e); });
    }
    threads.clear();
    return out;
}

struct SphereStats {
    double min_V = kInf;
    double max_Vdot = -kInf;
    double min_ratio = kInf;  // -Vdot / V^{4/5}
};

void merge(SphereStats& a, const SphereStats& b)
{
    a.min_V = std::min(a.min_V, b.min_V);
    a.max_Vdot = std::max(a.max_Vdot, b.max_Vdot);
    a.min_ratio = std::min(a.min_ratio, b.min_ratio);
}

std::string fmt(double v)
{
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

}  // namespace

// ---------------------------------------------------------------------------

double SFCertParams::gamma12() const
{
    return 2.5 * cube(gains.k1 / gains.k2);
}

double SFCertParams::gamma1_threshold(const GainSet& g)
{
    return 1.5 * std::pow(g.k1 / g.k2, 5.0);
}

double xi1_coordinate(const State3& x, double k1)
{
    return x[0] - signed_pow(x[2], 3.0) / cube(k1);
}

double V_sf(const State3& x, const SFCertParams& p)
{
    const double xi = xi1_coordinate(x, p.gains.k1);
    return p.gamma1 * std::pow(std::fabs(xi), 5.0 / 3.0) + p.gamma12() * xi * x[1] +
           std::pow(std::fabs(x[1]), 2.5) + std::pow(std::fabs(x[2]), 5.0) / 5.0;
}

State3 grad_V_sf(const State3& x, const SFCertParams& p)
{
    const double k1 = p.gains.k1;
    const double g12 = p.gamma12();
    const double xi = xi1_coordinate(x, k1);
    const double d_xi = (5.0 / 3.0) * p.gamma1 * signed_pow(xi, 2.0 / 3.0) + g12 * x[1];
    return {d_xi, g12 * xi + 2.5 * signed_pow(x[1], 1.5),
            signed_pow(x[2], 4.0) - d_xi * 3.0 * x[2] * x[2] / cube(k1)};
}

namespace {

void require_off_switching(const State3& x, const GainSet& g)
{
    if (x[0] + g.k4 * signed_pow(x[1], 1.5) == 0.0) {
        throw std::domain_error("Vdot is set-valued on the switching set");
    }
}

void require_rho_dot(double rho_dot, double L)
{
    if (std::fabs(rho_dot) > L * (1.0 + 1e-12)) {
        throw std::invalid_argument("|rho_dot| exceeds the Lipschitz bound L");
    }
}

}  // namespace

double Vdot_sf(const State3& x, const SFCertParams& p, double rho_dot)
{
    require_off_switching(x, p.gains);
    require_rho_dot(rho_dot, p.L);
    const State3 g = grad_V_sf(x, p);
    const State3 f = sf_error_field(x, p.gains, rho_dot);
    return g[0] * f[0] + g[1] * f[1] + g[2] * f[2];
}

double alpha_sf(double xi1, double x3, double k1)
{
    const double a = signed_pow(x3, 3.0) / cube(k1);
    return signed_pow(xi1 + a, 1.0 / 3.0) - signed_pow(a, 1.0 / 3.0) - signed_pow(xi1, 1.0 / 3.0);
}

WDecomposition w_terms_sf(const State3& x, const SFCertParams& p, double rho_dot)
{
    require_off_switching(x, p.gains);
    require_rho_dot(rho_dot, p.L);
    const GainSet& g = p.gains;
    const double g12 = p.gamma12();
    const double xi = xi1_coordinate(x, g.k1);
    const double x2 = x[1];
    const double x3 = x[2];
    const double a = (5.0 / 3.0) * p.gamma1 * signed_pow(xi, 2.0 / 3.0) + g12 * x2;

    WDecomposition w;
    w.w1 = a * x2 - 2.5 * g.k2 * (0.4 * g12 * xi + signed_pow(x2, 1.5)) *
                        ((g.k1 / g.k2) * signed_pow(xi, 1.0 / 3.0) + signed_pow(x2, 0.5));
    w.w2 = -g.k1 * (g12 * xi + 2.5 * signed_pow(x2, 1.5)) * alpha_sf(xi, x3, g.k1);
    const double s = sign(x[0] + g.k4 * signed_pow(x2, 1.5));
    w.w3 = (g.k3 * s - rho_dot) * x3 * x3 * (3.0 / cube(g.k1) * a - signed_pow(x3, 2.0));
    return w;
}

// ---------------------------------------------------------------------------

void OFCertParams::validate() const
{
    gains.validate(true);
    if (!(gamma1 > 0.0) || !(gamma2 > 0.0) || !(mu > 0.0)) {
        throw std::invalid_argument("OF certificate: gamma1, gamma2, mu must be positive");
    }
}

double omega(double x2, double e2, double k2)
{
    return k2 * signed_pow(x2, 0.5) - k2 * signed_pow(x2 + e2, 0.5);
}

double V1_obs(double x1, double x2, const OFCertParams& p)
{
    const double g12 = 2.5 * cube(p.gains.k1 / p.gains.k2);
    return p.gamma1 * std::pow(std::fabs(x1), 5.0 / 3.0) + g12 * x1 * x2 +
           std::pow(std::fabs(x2), 2.5);
}

namespace {

double eps1_coordinate(double e1, double e2, double l1)
{
    return e1 - signed_pow(e2, 1.5) / std::pow(l1, 1.5);
}

}  // namespace

double V2_obs(double e1, double e2, const OFCertParams& p)
{
    const double eps = eps1_coordinate(e1, e2, *p.gains.l1);
    return std::pow(std::fabs(eps), 5.0 / 3.0) + p.gamma2 * std::pow(std::fabs(e2), 2.5);
}

double V_obs(const State4& s, const OFCertParams& p)
{
    return V1_obs(s[0], s[1], p) + p.mu * V2_obs(s[2], s[3], p);
}

State4 grad_V_obs(const State4& s, const OFCertParams& p)
{
    const double g12 = 2.5 * cube(p.gains.k1 / p.gains.k2);
    const double l1 = *p.gains.l1;
    const double eps = eps1_coordinate(s[2], s[3], l1);
    const double d_eps = (5.0 / 3.0) * signed_pow(eps, 2.0 / 3.0);
    return {(5.0 / 3.0) * p.gamma1 * signed_pow(s[0], 2.0 / 3.0) + g12 * s[1],
            g12 * s[0] + 2.5 * signed_pow(s[1], 1.5),
            p.mu * d_eps,
            p.mu * (-d_eps * 1.5 * std::sqrt(std::fabs(s[3])) / std::pow(l1, 1.5) +
                    2.5 * p.gamma2 * signed_pow(s[3], 1.5))};
}

State4 of_nominal_field(const State4& s, const GainSet& g)
{
    const double l1 = g.l1.value_or(0.0);
    const double l2 = g.l2.value_or(0.0);
    return {s[1], -g.k1 * signed_pow(s[0], 1.0 / 3.0) - g.k2 * signed_pow(s[1] + s[3], 0.5),
            -l1 * signed_pow(s[2], 2.0 / 3.0) + s[3], -l2 * signed_pow(s[2], 1.0 / 3.0)};
}

double V1dot_obs(const State4& s, const OFCertParams& p)
{
    const State4 g = grad_V_obs(s, p);
    const State4 f = of_nominal_field(s, p.gains);
    return g[0] * f[0] + g[1] * f[1];
}

double V2dot_obs(double e1, double e2, const OFCertParams& p)
{
    OFCertParams unit = p;
    unit.mu = 1.0;
    const State4 s{0.0, 0.0, e1, e2};
    const State4 g = grad_V_obs(s, unit);
    const State4 f = of_nominal_field(s, p.gains);
    return g[2] * f[2] + g[3] * f[3];
}

double Vdot_obs(const State4& s, const OFCertParams& p)
{
    return V1dot_obs(s, p) + p.mu * V2dot_obs(s[2], s[3], p);
}

// ---------------------------------------------------------------------------

double settling_bound(double V0, double kappa)
{
    if (!(kappa > 0.0)) {
        throw std::invalid_argument("settling_bound: kappa must be positive");
    }
    if (!(V0 >= 0.0)) {
        throw std::invalid_argument("settling_bound: V0 must be non-negative");
    }
    return 5.0 / kappa * std::pow(V0, 0.2);
}

double CertificateReport::value_at(const State3& x0) const
{
    if (kind != "sf") {
        throw std::logic_error("value_at: only defined for state-feedback certificates");
    }
    const SFCertParams base{base_gains, gamma1, base_L};
    const State3 xs{x0[0] / state_scale, x0[1] / state_scale, x0[2] / state_scale};
    return V_sf(xs, base);
}

double CertificateReport::settling_bound_at(const State3& x0) const
{
    if (!passed) {
        throw std::logic_error("settling bound requested from a failed certificate");
    }
    return settling_bound(value_at(x0), kappa);
}

CertificateReport certify_sf(const GainSet& gains, double L, double gamma1, std::size_t n,
                             std::uint64_t seed)
{
    CertificateReport rep;
    rep.kind = "sf";
    rep.gains = rep.base_gains = gains;
    rep.L = rep.base_L = L;
    rep.gamma1 = gamma1;
    rep.seed = seed;
    if (!(L >= 0.0)) {
        throw std::invalid_argument("certify_sf: L must be non-negative");
    }
    if (!(gains.k3 > L)) {
        rep.reason = "k3 <= L: the integral gain cannot dominate the perturbation rate";
        return rep;
    }
    gains.validate(false);
    if (!(gamma1 > SFCertParams::gamma1_threshold(gains))) {
        throw std::invalid_argument("certify_sf: gamma1 must exceed (3/2)(k1/k2)^5");
    }
    const SFCertParams p{gains, gamma1, L};
    rep.gamma12 = p.gamma12();

    const Exclusion switching = [k4 = gains.k4](std::span<const double> x) {
        return std::cbrt(std::fabs(x[0] + k4 * signed_pow(x[1], 1.5)));
    };
    const Weights w({3.0, 2.0, 1.0}, 5.0);
    const auto points = sphere_sample(w, n, std::span(&switching, 1), seed);
    rep.samples = points.size();

    const auto parts = parallel_chunks<SphereStats>(points.size(), [&](std::size_t b, std::size_t e) {
        SphereStats st;
        for (std::size_t i = b; i < e; ++i) {
            const State3 x{points[i][0], points[i][1], points[i][2]};
            const double v = V_sf(x, p);
            const State3 g = grad_V_sf(x, p);
            const State3 f = sf_error_field(x, gains, 0.0);
            // Vdot is affine in rho_dot, so rho_dot = +-L gives the worst case.
            const double vd = g[0] * f[0] + g[1] * f[1] + g[2] * f[2] + std::fabs(g[2]) * L;
            st.min_V = std::min(st.min_V, v);
            st.max_Vdot = std::max(st.max_Vdot, vd);
            st.min_ratio = std::min(st.min_ratio, -vd / std::pow(std::max(v, 0.0), 0.8));
        }
        return st;
    });
    SphereStats total;
    for (const auto& part : parts) {
        merge(total, part);
    }
    rep.min_V = total.min_V;
    rep.max_Vdot = total.max_Vdot;
    rep.passed = total.min_V > 0.0 && total.max_Vdot < 0.0;
    if (rep.passed) {
        rep.kappa = total.min_ratio;
    } else {
        rep.reason = total.min_V > 0.0 ? "Vdot is not negative on the whole sphere"
                                       : "V is not positive on the whole sphere";
    }
    return rep;
}

CertificateReport certify_of(const OFCertParams& params, std::size_t n, std::uint64_t seed)
{
    params.validate();
    CertificateReport rep;
    rep.kind = "of";
    rep.gains = rep.base_gains = params.gains;
    rep.gamma1 = params.gamma1;
    rep.gamma12 = 2.5 * cube(params.gains.k1 / params.gains.k2);
    rep.gamma2 = params.gamma2;
    rep.mu = params.mu;
    rep.seed = seed;

    const Weights w4({3.0, 2.0, 3.0, 2.0}, 5.0);
    const auto points = sphere_sample(w4, n, {}, seed);
    rep.samples = points.size();

    struct Partial {
        SphereStats st;
        double holder = 0.0;
    };
    const double k2 = params.gains.k2;
    const auto parts = parallel_chunks<Partial>(points.size(), [&](std::size_t b, std::size_t e) {
        Partial pa;
        for (std::size_t i = b; i < e; ++i) {
            const State4 s{points[i][0], points[i][1], points[i][2], points[i][3]};
            const double v = V_obs(s, params);
            const double vd = Vdot_obs(s, params);
            pa.st.min_V = std::min(pa.st.min_V, v);
            pa.st.max_Vdot = std::max(pa.st.max_Vdot, vd);
            pa.st.min_ratio = std::min(pa.st.min_ratio, -vd / std::pow(std::max(v, 0.0), 0.8));
            if (s[3] != 0.0) {
                pa.holder = std::max(pa.holder, std::fabs(omega(s[1], s[3], k2)) /
                                                    (k2 * std::sqrt(std::fabs(s[3]))));
            }
        }
        return pa;
    });
    SphereStats total;
    double holder = 0.0;
    for (const auto& part : parts) {
        merge(total, part.st);
        holder = std::max(holder, part.holder);
    }
    rep.min_V = total.min_V;
    rep.max_Vdot = total.max_Vdot;
    rep.passed = total.min_V > 0.0 && total.max_Vdot < 0.0;
    if (rep.passed) {
        rep.kappa = total.min_ratio;
    } else {
        rep.reason = total.min_V > 0.0 ? "Vdot is not negative on the whole sphere"
                                       : "V is not positive on the whole sphere";
    }

    // Constants of the bound Vdot <= -a1|x|^4 + a2 c k2 |x|^3 |e| - mu a3 |e|^4,
    // measured on the two-dimensional unit spheres of x and e separately.
    const Weights w2({3.0, 2.0}, 5.0);
    const auto half = sphere_sample(w2, std::max<std::size_t>(n / 2, 1), {}, seed + 1);
    const double g12 = rep.gamma12;
    double alpha1 = kInf, alpha2 = 0.0, alpha3 = kInf;
    for (const auto& q : half) {
        const State4 xs{q[0], q[1], 0.0, 0.0};
        alpha1 = std::min(alpha1, -V1dot_obs(xs, params));
        alpha2 = std::max(alpha2, std::fabs(g12 * q[0] + 2.5 * signed_pow(q[1], 1.5)));
        alpha3 = std::min(alpha3, -V2dot_obs(q[0], q[1], params));
    }
    rep.measured["alpha1"] = alpha1;
    rep.measured["alpha2"] = alpha2;
    rep.measured["alpha3"] = alpha3;
    rep.measured["c"] = holder;
    rep.measured["max_V1dot_e0_slice"] = -alpha1;
    return rep;
}

std::optional<double> find_mu_threshold(OFCertParams params, std::size_t n, std::uint64_t seed,
                                        double lo, double hi, int iterations)
{
    if (!(lo > 0.0) || !(hi > lo)) {
        throw std::invalid_argument("find_mu_threshold: need 0 < lo < hi");
    }
    auto passes = [&](double mu) {
        params.mu = mu;
        return certify_of(params, n, seed).passed;
    };
    if (!passes(hi)) {
        return std::nullopt;
    }
    if (passes(lo)) {
        return lo;
    }
    for (int i = 0; i < iterations; ++i) {
        const double mid = std::sqrt(lo * hi);
        (passes(mid) ? hi : lo) = mid;
    }
    return hi;
}

SearchResult search_parameters(const GainSet& gains, double L, std::size_t budget, std::size_t n,
                               std::uint64_t seed)
{
    if (budget < 1) {
        throw std::invalid_argument("search_parameters: budget must be at least 1");
    }
    SearchResult res;
    res.best_margin = kInf;
    res.report.gains = res.report.base_gains = gains;
    res.report.L = res.report.base_L = L;
    res.report.seed = seed;
    if (!(gains.k3 > L)) {
        res.report.reason = "k3 <= L: the integral gain cannot dominate the perturbation rate";
        return res;
    }
    gains.validate(false);

    constexpr int kGammaLevels = 16;
    constexpr int kShrinkLevels = 40;
    const std::size_t search_n = std::min<std::size_t>(n, 20000);
    bool have_best = false;
    for (int i = 0; i < kShrinkLevels && res.certify_calls < budget; ++i) {
        const double s = std::ldexp(1.0, -i);
        GainSet base = gains;
        base.k3 = gains.k3 * s;
        const double thr = SFCertParams::gamma1_threshold(base);
        for (int j = 1; j <= kGammaLevels && res.certify_calls < budget; ++j) {
            const double g1 = thr * std::ldexp(1.0, j);
            CertificateReport rep = certify_sf(base, L * s, g1, search_n, seed);
            ++res.certify_calls;
            if (rep.min_V > 0.0 && rep.max_Vdot < res.best_margin) {
                res.best_margin = rep.max_Vdot;
                res.report = rep;
                have_best = true;
            }
            if (!rep.passed || res.certify_calls >= budget) {
                continue;
            }
            // Confirm with the full sample count and an independent seed.
            CertificateReport full = certify_sf(base, L * s, g1, n, seed + 1);
            ++res.certify_calls;
            if (!full.passed) {
                continue;
            }
            const double lambda = 1.0 / s;
            full.gains = scale_gains(base, lambda, false);
            full.L = L;
            full.state_scale = lambda;
            res.report = full;
            res.params = SFCertParams{full.gains, g1, L};
            return res;
        }
    }
    if (!have_best) {
        res.report.reason = "no positive definite candidate found within budget";
    } else {
        res.report.reason = "budget exhausted; best max Vdot " + fmt(res.best_margin);
    }
    res.report.passed = false;
    return res;
}

// ---------------------------------------------------------------------------

std::string certificate_summary(const CertificateReport& r)
{
    std::ostringstream os;
    os << (r.kind == "sf" ? "State-feedback" : "Output-feedback") << " Lyapunov certificate: "
       << (r.passed ? "PASSED" : "FAILED") << "\n";
    if (!r.reason.empty()) {
        os << "  reason: " << r.reason << "\n";
    }
    os << "  gains: k1=" << fmt(r.gains.k1) << " k2=" << fmt(r.gains.k2) << " k3=" << fmt(r.gains.k3)
       << " k4=" << fmt(r.gains.k4);
    if (r.gains.l1) {
        os << " l1=" << fmt(*r.gains.l1) << " l2=" << fmt(r.gains.l2.value_or(0.0));
    }
    os << "\n";
    if (r.kind == "sf") {
        os << "  L=" << fmt(r.L) << " gamma1=" << fmt(r.gamma1) << " gamma12=" << fmt(r.gamma12)
           << " state_scale=" << fmt(r.state_scale) << "\n";
    } else {
        os << "  gamma1=" << fmt(r.gamma1) << " gamma2=" << fmt(r.gamma2) << " mu=" << fmt(r.mu)
           << "\n";
    }
    os << "  samples=" << r.samples << " seed=" << r.seed << "\n";
    os << "  min V on sphere=" << fmt(r.min_V) << "  max Vdot on sphere=" << fmt(r.max_Vdot) << "\n";
    if (r.passed) {
        os << "  kappa=" << fmt(r.kappa) << "  (T(x0) <= 5/kappa V(x0)^(1/5))\n";
    }
    for (const auto& [k, v] : r.measured) {
        os << "  " << k << "=" << fmt(v) << "\n";
    }
    return os.str();
}

std::string certificate_record(const CertificateReport& r)
{
    std::ostringstream os;
    os << "format_version = 1\n[certificate]\n";
    os << "kind = " << r.kind << "\n";
    os << "passed = " << (r.passed ? "true" : "false") << "\n";
    if (!r.reason.empty()) {
        os << "reason = " << r.reason << "\n";
    }
    os << "samples = " << r.samples << "\nseed = " << r.seed << "\n";
    os << "min_V = " << fmt(r.min_V) << "\nmax_Vdot = " << fmt(r.max_Vdot) << "\n";
    os << "kappa = " << fmt(r.kappa) << "\n";
    os << "L = " << fmt(r.L) << "\n";
    os << "gamma1 = " << fmt(r.gamma1) << "\ngamma12 = " << fmt(r.gamma12) << "\n";
    os << "gamma2 = " << fmt(r.gamma2) << "\nmu = " << fmt(r.mu) << "\n";
    os << "state_scale = " << fmt(r.state_scale) << "\n";
    os << "[gains]\n";
    os << "k1 = " << fmt(r.gains.k1) << "\nk2 = " << fmt(r.gains.k2) << "\nk3 = " << fmt(r.gains.k3)
       << "\nk4 = " << fmt(r.gains.k4) << "\n";
    if (r.gains.l1) {
        os << "l1 = " << fmt(*r.gains.l1) << "\n";
    }
    if (r.gains.l2) {
        os << "l2 = " << fmt(*r.gains.l2) << "\n";
    }
    os << "[base_gains]\n";
    os << "k1 = " << fmt(r.base_gains.k1) << "\nk2 = " << fmt(r.base_gains.k2)
       << "\nk3 = " << fmt(r.base_gains.k3) << "\nk4 = " << fmt(r.base_gains.k4) << "\n";
    os << "L = " << fmt(r.base_L) << "\n";
    if (!r.measured.empty()) {
        os << "[measured]\n";
        for (const auto& [k, v] : r.measured) {
            os << k << " = " << fmt(v) << "\n";
        }
    }
    return os.str();
}

}  // namespace dic
