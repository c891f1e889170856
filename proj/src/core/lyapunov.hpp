#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "controllers.hpp"

namespace dic {

// ---------------------------------------------------------------------------
// State feedback: V(x) = g1 |xi1|^{5/3} + g12 xi1 x2 + |x2|^{5/2} + |x3|^5 / 5
// with xi1 = x1 - [x3]^3 / k1^3 and g12 = (5/2) (k1/k2)^3.
// ---------------------------------------------------------------------------

struct SFCertParams {
    GainSet gains;
    double gamma1 = 0.0;
    double L = 0.0;

    double gamma12() const;
    /// V is positive definite only above (3/2)(k1/k2)^5.
    static double gamma1_threshold(const GainSet& g);
};

double xi1_coordinate(const State3& x, double k1);

double V_sf(const State3& x, const SFCertParams& p);
State3 grad_V_sf(const State3& x, const SFCertParams& p);

/// grad V . f along the state-feedback closed loop. Throws on the switching
/// set x1 + k4 [x2]^{3/2} = 0, where the derivative is set-valued.
double Vdot_sf(const State3& x, const SFCertParams& p, double rho_dot);

/// The three groups W1 (xi1, x2), W2 (xi1, x2, x3), W3 (x, rho_dot) whose sum is Vdot.
struct WDecomposition {
    double w1 = 0.0;
    double w2 = 0.0;
    double w3 = 0.0;
    double sum() const { return w1 + w2 + w3; }
};
WDecomposition w_terms_sf(const State3& x, const SFCertParams& p, double rho_dot);

/// [xi1 + [x3]^3/k1^3]^{1/3} - [[x3]^3/k1^3]^{1/3} - [xi1]^{1/3}
double alpha_sf(double xi1, double x3, double k1);

// ---------------------------------------------------------------------------
// Output feedback (no perturbation, no integrator): V = V1(x) + mu V2(e)
// ---------------------------------------------------------------------------

struct OFCertParams {
    GainSet gains;  // needs l1, l2
    double gamma1 = 0.0;
    double gamma2 = 0.0;
    double mu = 1.0;

    void validate() const;
};

using State4 = std::array<double, 4>;  // (x1, x2, e1, e2)

/// -k2 ([x2 + e2]^{1/2} - [x2]^{1/2})
double omega(double x2, double e2, double k2);

double V1_obs(double x1, double x2, const OFCertParams& p);
double V2_obs(double e1, double e2, const OFCertParams& p);
double V_obs(const State4& s, const OFCertParams& p);
State4 grad_V_obs(const State4& s, const OFCertParams& p);
/// Unperturbed observer closed loop without integral action.
State4 of_nominal_field(const State4& s, const GainSet& g);
double V1dot_obs(const State4& s, const OFCertParams& p);
double V2dot_obs(double e1, double e2, const OFCertParams& p);
double Vdot_obs(const State4& s, const OFCertParams& p);

// ---------------------------------------------------------------------------
// Certificates
// ---------------------------------------------------------------------------

inline constexpr std::size_t kDefaultCertSamples = 100000;

struct CertificateReport {
    std::string kind = "sf";  // "sf" or "of"
    bool passed = false;
    std::string reason;
    double min_V = 0.0;
    double max_Vdot = 0.0;  // worst case over rho_dot in [-L, L]
    double kappa = 0.0;     // min over samples of -Vdot / V^{4/5}, when passed
    std::size_t samples = 0;
    std::uint64_t seed = 0;

    GainSet gains;  // the certified gain set
    double L = 0.0;

    // The Lyapunov function is V_base(x / state_scale) with the base gains.
    GainSet base_gains;
    double base_L = 0.0;
    double state_scale = 1.0;
    double gamma1 = 0.0;
    double gamma12 = 0.0;
    double gamma2 = 0.0;
    double mu = 0.0;

    std::map<std::string, double> measured;  // empirical constants (OF)

    double value_at(const State3& x0) const;
    /// (5 / kappa) V(x0)^{1/5}
    double settling_bound_at(const State3& x0) const;
};

/// (5 / kappa) V0^{1/5}
double settling_bound(double V0, double kappa);

/// Sphere check of V and worst-case Vdot for the state-feedback loop,
/// weights (3, 2, 1). Fails without sampling when k3 <= L.
CertificateReport certify_sf(const GainSet& gains, double L, double gamma1,
                             std::size_t n = kDefaultCertSamples, std::uint64_t seed = 1);

/// Sphere check on (x1, x2, e1, e2) with weights (3, 2, 3, 2). Also records
/// the measured constants alpha1..alpha3, the Hoelder constant c and the
/// e = 0 slice maximum of V1dot.
CertificateReport certify_of(const OFCertParams& params, std::size_t n = kDefaultCertSamples,
                             std::uint64_t seed = 1);

/// Bisection for the smallest mu (within [lo, hi]) at which certify_of passes.
std::optional<double> find_mu_threshold(OFCertParams params, std::size_t n, std::uint64_t seed,
                                        double lo, double hi, int iterations = 30);

struct SearchResult {
    std::optional<SFCertParams> params;  // certified (transported) parameters
    CertificateReport report;            // final report, or the best failing one
    std::size_t certify_calls = 0;
    double best_margin = 0.0;  // smallest max_Vdot seen
};

/// Geometric sweep: k3 and L are shrunk together by s = 2^-i with k1, k2, k4
/// fixed, gamma1 runs over gamma1_threshold * 2^j. A hit is re-checked at n
/// samples and carried back with lambda = 1/s, so the returned gains are
/// scale_gains(base, 1/s) (same k3, larger k1, k2) for the requested L.
SearchResult search_parameters(const GainSet& gains, double L, std::size_t budget,
                               std::size_t n = kDefaultCertSamples, std::uint64_t seed = 1);

std::string certificate_summary(const CertificateReport& r);
/// Key-value record (same family as run configs).
std::string certificate_record(const CertificateReport& r);

}  // namespace dic
