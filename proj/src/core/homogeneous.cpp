#include "homogeneous.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace dic {

double signed_pow(double z, double p)
{
    if (!(p >= 0.0)) {
        throw std::invalid_argument("signed_pow: exponent must be non-negative, got " +
                                    std::to_string(p));
    }
    if (z == 0.0) {
        return 0.0;
    }
    if (p == 0.0) {
        return sign(z);
    }
    return std::copysign(std::pow(std::fabs(z), p), z);
}

Weights::Weights(std::vector<double> r, double p) : r_(std::move(r)), p_(p)
{
    if (r_.empty()) {
        throw std::invalid_argument("Weights: at least one coordinate weight is required");
    }
    for (double ri : r_) {
        if (!(ri > 0.0) || !std::isfinite(ri)) {
            throw std::invalid_argument("Weights: every weight must be positive");
        }
    }
    if (!(p_ >= 1.0) || !std::isfinite(p_)) {
        throw std::invalid_argument("Weights: norm exponent must be >= 1");
    }
}

namespace {

void require_dim(std::span<const double> x, const Weights& w, const char* who)
{
    if (x.size() != w.size()) {
        throw std::invalid_argument(std::string(who) + ": dimension mismatch (" +
                                    std::to_string(x.size()) + " vs " +
                                    std::to_string(w.size()) + ")");
    }
}

double inf_norm(std::span<const double> v)
{
    double m = 0.0;
    for (double vi : v) {
        m = std::max(m, std::fabs(vi));
    }
    return m;
}

bool is_small_int(double v)
{
    return v >= 1.0 && v <= 64.0 && v == std::floor(v);
}

// a^(num/den) for a > 0. With integer num and den the binary exponent of a is
// split off in multiples of den, so scaling a by 2^(den k) scales the result
// by exactly 2^(num k).
double ratio_pow(double a, double num, double den)
{
    if (a == 0.0) {
        return 0.0;
    }
    if (!is_small_int(num) || !is_small_int(den) || !std::isfinite(a)) {
        return std::pow(a, num / den);
    }
    int e = 0;
    const double m = std::frexp(a, &e);
    const int d = static_cast<int>(den);
    const int q = (e >= 0 ? e : e - d + 1) / d;
    const double mant = std::ldexp(m, e - q * d);
    return std::ldexp(std::pow(mant, num / den), q * static_cast<int>(num));
}

}  // namespace

std::vector<double> dilation(std::span<const double> x, const Weights& w, double eps)
{
    require_dim(x, w, "dilation");
    if (!(eps > 0.0)) {
        throw std::invalid_argument("dilation: eps must be positive");
    }
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        out[i] = std::pow(eps, w.r()[i]) * x[i];
    }
    return out;
}

double hom_norm(std::span<const double> x, const Weights& w)
{
    require_dim(x, w, "hom_norm");
    double sum = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sum += ratio_pow(std::fabs(x[i]), w.p(), w.r()[i]);
    }
    return ratio_pow(sum, 1.0, w.p());
}

std::vector<std::vector<double>> sphere_sample(const Weights& w, std::size_t n,
                                               std::span<const Exclusion> exclusions,
                                               std::uint64_t seed, double min_distance)
{
    if (n == 0) {
        throw std::invalid_argument("sphere_sample: n must be at least 1");
    }
    const std::size_t dim = w.size();
    const std::size_t pairs = (n + 1) / 2;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    std::vector<std::vector<double>> points;
    points.reserve(2 * pairs);
    std::vector<double> x(dim);
    std::size_t attempts = 0;
    const std::size_t max_attempts = 100 * pairs + 1000;
    while (points.size() < 2 * pairs) {
        if (++attempts > max_attempts) {
            throw std::runtime_error("sphere_sample: exclusions reject nearly every direction");
        }
        double s = 0.0;
        for (std::size_t i = 0; i < dim; ++i) {
            x[i] = gauss(rng);
            s += std::pow(std::fabs(x[i]), w.p() / w.r()[i]);
        }
        if (!(s > 0.0)) {
            continue;
        }
        // hom_norm(D_eps d) = eps * hom_norm(d), so the radial equation has
        // the closed form eps = 1 / hom_norm(d).
        const double eps = std::pow(s, -1.0 / w.p());
        for (std::size_t i = 0; i < dim; ++i) {
            x[i] *= std::pow(eps, w.r()[i]);
        }
        bool excluded = false;
        for (const auto& ex : exclusions) {
            if (ex(x) < min_distance) {
                excluded = true;
                break;
            }
        }
        if (excluded) {
            continue;
        }
        points.push_back(x);
        std::vector<double> neg(dim);
        std::transform(x.begin(), x.end(), neg.begin(), [](double v) { return -v; });
        points.push_back(std::move(neg));
    }
    return points;
}

HomogeneityReport check_field_homogeneity(const VectorField& field, const Weights& w,
                                          double degree, std::size_t n_samples,
                                          std::span<const double> eps_set, double tolerance,
                                          std::span<const Exclusion> exclusions,
                                          std::uint64_t seed)
{
    HomogeneityReport report;
    report.tested_degree = degree;
    const auto points = sphere_sample(w, n_samples, exclusions, seed);
    for (const auto& x : points) {
        const std::vector<double> fx = field(x);
        if (fx.size() != w.size()) {
            throw std::invalid_argument("check_field_homogeneity: field dimension mismatch");
        }
        const double denom = std::max(inf_norm(fx), 1e-12);
        for (double eps : eps_set) {
            const std::vector<double> fd = field(dilation(x, w, eps));
            double err = 0.0;
            for (std::size_t i = 0; i < fx.size(); ++i) {
                const double back = fd[i] / (std::pow(eps, degree) * std::pow(eps, w.r()[i]));
                err = std::max(err, std::fabs(back - fx[i]));
            }
            report.max_relative_error = std::max(report.max_relative_error, err / denom);
            ++report.samples_tested;
        }
    }
    report.passed = report.max_relative_error <= tolerance;
    return report;
}

}  // namespace dic
