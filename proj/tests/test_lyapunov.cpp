#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "homogeneous.hpp"
#include "lyapunov.hpp"
#include "simulator.hpp"

using namespace dic;

namespace {

const GainSet kPaper{2.0, 5.0, 0.5, 0.0};
const GainSet kOF{2.0 * std::cbrt(9.0), 5.0 * std::sqrt(3.0), 1.5, 0.0, 8.0, 17.6};

SFCertParams sf_params(const GainSet& g = kPaper, double L = 0.4)
{
    return {g, 4.0 * SFCertParams::gamma1_threshold(g), L};
}

OFCertParams of_params(double mu = 100.0)
{
    return {kOF, 4.0, 0.01, mu};
}

double rel(double a, double b)
{
    return std::fabs(a - b) / std::max({std::fabs(a), std::fabs(b), 1e-300});
}

}  // namespace

TEST(VSf, ZeroAndGamma12)
{
    const auto p = sf_params();
    EXPECT_EQ(V_sf({0.0, 0.0, 0.0}, p), 0.0);
    EXPECT_DOUBLE_EQ(p.gamma12(), 0.16);
    EXPECT_DOUBLE_EQ(SFCertParams::gamma1_threshold(kPaper), 1.5 * std::pow(0.4, 5));
}

TEST(VSf, HomogeneousOfDegreeFive)
{
    const auto p = sf_params();
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> d(-2.0, 2.0);
    std::uniform_real_distribution<double> ed(0.2, 5.0);
    for (int i = 0; i < 500; ++i) {
        const State3 x{d(rng), d(rng), d(rng)};
        const double e = ed(rng);
        const State3 xe{e * e * e * x[0], e * e * x[1], e * x[2]};
        EXPECT_LT(rel(V_sf(xe, p), std::pow(e, 5) * V_sf(x, p)), 1e-13);
    }
}

TEST(VSf, GradientMatchesFiniteDifferences)
{
    const auto p = sf_params(GainSet{2.0, 5.0, 0.5, 0.7});
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> d(-2.0, 2.0);
    int checked = 0;
    while (checked < 100) {
        const State3 x{d(rng), d(rng), d(rng)};
        if (std::fabs(xi1_coordinate(x, p.gains.k1)) < 1e-2 || std::fabs(x[1]) < 1e-2) {
            continue;  // keep the fractional powers away from their kinks
        }
        const State3 g = grad_V_sf(x, p);
        for (int k = 0; k < 3; ++k) {
            const double hstep = 1e-6 * std::max(1.0, std::fabs(x[k]));
            State3 a = x, b = x;
            a[k] += hstep;
            b[k] -= hstep;
            const double fd = (V_sf(a, p) - V_sf(b, p)) / (2.0 * hstep);
            EXPECT_LT(std::fabs(fd - g[k]), 1e-5 * std::max(1.0, std::fabs(g[k])));
        }
        ++checked;
    }
}

TEST(VSf, WDecompositionMatchesGradientForm)
{
    const auto p = sf_params(GainSet{2.0, 5.0, 0.5, 0.7});
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> d(-2.0, 2.0);
    std::uniform_real_distribution<double> rd(-0.4, 0.4);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const State3 x{d(rng), d(rng), d(rng)};
        const double r = rd(rng);
        const double vd = Vdot_sf(x, p, r);
        const double scale = std::max(std::fabs(vd), 1e-12);
        worst = std::max(worst, std::fabs(w_terms_sf(x, p, r).sum() - vd) / scale);
    }
    EXPECT_LT(worst, 1e-10);
}

TEST(VSf, W1OnS1)
{
    const auto p = sf_params();
    const double k1 = p.gains.k1, k2 = p.gains.k2;
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> d(-2.0, 2.0);
    for (int i = 0; i < 200; ++i) {
        const double xi = d(rng);
        const double x3 = d(rng);
        const double x1 = xi + signed_pow(x3, 3.0) / (k1 * k1 * k1);
        const double x2 = -std::pow(k1 / k2, 2) * signed_pow(xi, 2.0 / 3.0);
        const double expected = -2.5 * std::pow(k1 / k2, 5) *
                                (2.0 / 3.0 * std::pow(k2 / k1, 3) * p.gamma1 - std::pow(k1 / k2, 2)) *
                                std::pow(std::fabs(xi), 4.0 / 3.0);
        const double w1 = w_terms_sf({x1, x2, x3}, p, 0.0).w1;
        EXPECT_NEAR(w1, expected, 1e-12 * std::max(1.0, std::fabs(expected)));
    }
}

TEST(VSf, W3OnS2)
{
    const auto p = sf_params();
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> d(-2.0, 2.0);
    for (int i = 0; i < 200; ++i) {
        const double x3 = d(rng);
        const State3 x{signed_pow(x3, 3.0) / std::pow(p.gains.k1, 3), 0.0, x3};
        const double bound = -(p.gains.k3 - p.L) * std::pow(std::fabs(x3), 4);
        for (double r : {-p.L, p.L}) {
            EXPECT_LE(w_terms_sf(x, p, r).w3, bound + 1e-14);
        }
    }
}

TEST(VSf, AlphaVanishes)
{
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> d(-3.0, 3.0);
    for (int i = 0; i < 100; ++i) {
        EXPECT_EQ(alpha_sf(0.0, d(rng), 2.0), 0.0);
        EXPECT_EQ(alpha_sf(d(rng), 0.0, 2.0), 0.0);
    }
}

TEST(VSf, VdotRejectsSwitchingSetAndLargeRhoDot)
{
    const auto p = sf_params(GainSet{2.0, 5.0, 0.5, 1.0});
    EXPECT_THROW(Vdot_sf({-1.0, 1.0, 0.3}, p, 0.0), std::domain_error);
    EXPECT_THROW(Vdot_sf({1.0, 1.0, 0.3}, p, 0.5), std::invalid_argument);
}

TEST(VSf, NominalVdotHomogeneousOfDegreeFour)
{
    const auto p = sf_params(GainSet{2.0, 5.0, 0.5, 0.7});
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> d(-2.0, 2.0);
    std::uniform_real_distribution<double> ed(0.2, 5.0);
    for (int i = 0; i < 300; ++i) {
        const State3 x{d(rng), d(rng), d(rng)};
        const double e = ed(rng);
        const State3 xe{e * e * e * x[0], e * e * x[1], e * x[2]};
        EXPECT_LT(rel(Vdot_sf(xe, p, 0.0), std::pow(e, 4) * Vdot_sf(x, p, 0.0)), 1e-9);
    }
}

TEST(SettlingBound, Examples)
{
    EXPECT_EQ(settling_bound(0.0, 1.0), 0.0);
    EXPECT_DOUBLE_EQ(settling_bound(1.0, 5.0), 1.0);
    EXPECT_THROW(settling_bound(1.0, 0.0), std::invalid_argument);
}

TEST(CertifySf, FastFailWhenK3NotAboveL)
{
    const auto r = certify_sf(kPaper, 0.6, 2.0 * SFCertParams::gamma1_threshold(kPaper));
    EXPECT_FALSE(r.passed);
    EXPECT_EQ(r.samples, 0u);
    EXPECT_NE(r.reason.find("k3 <= L"), std::string::npos);
}

TEST(CertifySf, RejectsGammaBelowThreshold)
{
    EXPECT_THROW(certify_sf(kPaper, 0.1, SFCertParams::gamma1_threshold(kPaper)),
                 std::invalid_argument);
}

TEST(CertifySf, PositiveDefiniteAtTwiceThreshold)
{
    const auto r = certify_sf(kPaper, 0.0, 2.0 * SFCertParams::gamma1_threshold(kPaper), 20000);
    EXPECT_GT(r.min_V, 0.0);
}

TEST(CertifySf, DeterministicForFixedSeed)
{
    const double g1 = 2.0 * SFCertParams::gamma1_threshold(kPaper);
    const auto a = certify_sf(kPaper, 0.1, g1, 5000, 9);
    const auto b = certify_sf(kPaper, 0.1, g1, 5000, 9);
    EXPECT_EQ(a.min_V, b.min_V);
    EXPECT_EQ(a.max_Vdot, b.max_Vdot);
    EXPECT_EQ(certificate_record(a), certificate_record(b));
}

TEST(Search, InfeasibleMakesNoCalls)
{
    const auto s = search_parameters(kPaper, 0.6, 10);
    EXPECT_FALSE(s.params);
    EXPECT_EQ(s.certify_calls, 0u);
}

TEST(Search, PaperGainsWithoutPerturbation)
{
    const auto s = search_parameters(kPaper, 0.0, 200, 20000);
    EXPECT_LE(s.certify_calls, 200u);
    EXPECT_TRUE(s.params);
    EXPECT_GT(s.report.kappa, 0.0);
}

TEST(Search, CertifiedAtL04AndRobustToMoreSamples)
{
    const auto s = search_parameters(kPaper, 0.4, 400);
    ASSERT_TRUE(s.params);
    const auto& r = s.report;
    EXPECT_TRUE(r.passed);
    EXPECT_GT(r.kappa, 0.0);
    EXPECT_GT(r.min_V, 0.0);
    EXPECT_EQ(r.L, 0.4);
    // Same certificate, ten times the samples and a fresh seed.
    const auto again = certify_sf(r.base_gains, r.base_L, r.gamma1, 10 * kDefaultCertSamples, 77);
    EXPECT_TRUE(again.passed) << again.max_Vdot;

    // The kappa bound holds on fresh sphere points of the base certificate.
    const Weights w({3.0, 2.0, 1.0});
    const auto pts = sphere_sample(w, 2000, {}, 123);
    const SFCertParams base{r.base_gains, r.gamma1, r.base_L};
    for (const auto& q : pts) {
        const State3 xb{q[0], q[1], q[2]};
        if (xb[0] + base.gains.k4 * signed_pow(xb[1], 1.5) == 0.0) {
            continue;
        }
        const double v = V_sf(xb, base);
        const double vd = std::max(Vdot_sf(xb, base, -base.L), Vdot_sf(xb, base, base.L));
        EXPECT_LE(vd, -0.5 * r.kappa * std::pow(v, 0.8));
    }
}

TEST(VObs, ZeroAndHomogeneity)
{
    const auto p = of_params();
    EXPECT_EQ(V_obs({0.0, 0.0, 0.0, 0.0}, p), 0.0);
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> d(-2.0, 2.0);
    std::uniform_real_distribution<double> ed(0.2, 5.0);
    for (int i = 0; i < 300; ++i) {
        const State4 s{d(rng), d(rng), d(rng), d(rng)};
        const double e = ed(rng);
        const State4 se{e * e * e * s[0], e * e * s[1], e * e * e * s[2], e * e * s[3]};
        EXPECT_LT(rel(V_obs(se, p), std::pow(e, 5) * V_obs(s, p)), 1e-13);
    }
}

TEST(VObs, GradientMatchesFiniteDifferences)
{
    const auto p = of_params();
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> d(-2.0, 2.0);
    const double l1 = *p.gains.l1;
    int checked = 0;
    while (checked < 100) {
        const State4 s{d(rng), d(rng), d(rng), d(rng)};
        const double eps1 = s[2] - signed_pow(s[3], 1.5) / std::pow(l1, 1.5);
        if (std::fabs(s[0]) < 1e-2 || std::fabs(s[1]) < 1e-2 || std::fabs(eps1) < 1e-2 ||
            std::fabs(s[3]) < 1e-2) {
            continue;
        }
        const State4 g = grad_V_obs(s, p);
        for (int k = 0; k < 4; ++k) {
            const double hstep = 1e-6 * std::max(1.0, std::fabs(s[k]));
            State4 a = s, b = s;
            a[k] += hstep;
            b[k] -= hstep;
            const double fd = (V_obs(a, p) - V_obs(b, p)) / (2.0 * hstep);
            EXPECT_LT(std::fabs(fd - g[k]), 1e-5 * std::max(1.0, std::fabs(g[k])));
        }
        ++checked;
    }
}

TEST(VObs, V2dotOnS3)
{
    const auto p = of_params();
    const double l1 = *p.gains.l1, l2 = *p.gains.l2;
    std::mt19937_64 rng(10);
    std::uniform_real_distribution<double> d(-2.0, 2.0);
    for (int i = 0; i < 200; ++i) {
        const double e2 = d(rng);
        const double e1 = signed_pow(e2, 1.5) / std::pow(l1, 1.5);
        const double expected = -2.5 * (l2 / std::sqrt(l1)) * p.gamma2 * e2 * e2;
        EXPECT_NEAR(V2dot_obs(e1, e2, p), expected, 1e-11 * std::max(1.0, std::fabs(expected)));
    }
}

TEST(CertifyOf, PassesAndMeasuresConstants)
{
    const auto r = certify_of(of_params(), 20000, 3);
    EXPECT_TRUE(r.passed) << r.reason;
    EXPECT_GT(r.kappa, 0.0);
    for (const char* key : {"alpha1", "alpha2", "alpha3", "c", "max_V1dot_e0_slice"}) {
        ASSERT_TRUE(r.measured.count(key)) << key;
        EXPECT_TRUE(std::isfinite(r.measured.at(key))) << key;
    }
    EXPECT_LT(r.measured.at("max_V1dot_e0_slice"), 0.0);
}

TEST(CertifyOf, MuThresholdIsMonotone)
{
    const auto mu = find_mu_threshold(of_params(), 5000, 4, 1e-3, 1e4, 25);
    ASSERT_TRUE(mu);
    for (double f : {1.5, 4.0, 50.0}) {
        EXPECT_TRUE(certify_of(of_params(*mu * f), 5000, 4).passed) << f;
    }
}

TEST(CertifyOf, RecordCarriesKindAndMeasured)
{
    const auto r = certify_of(of_params(), 2000, 5);
    const std::string rec = certificate_record(r);
    EXPECT_NE(rec.find("kind = of"), std::string::npos);
    EXPECT_NE(rec.find("[measured]"), std::string::npos);
    EXPECT_NE(rec.find("seed = 5"), std::string::npos);
}
