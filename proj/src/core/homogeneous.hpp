#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace dic {

/// |z|^p * sgn(z). For p == 0 this is the sign function with sgn(0) = 0.
/// Throws std::invalid_argument for negative p.
double signed_pow(double z, double p);

/// sgn(z) with sgn(0) = 0.
inline double sign(double z) { return z > 0.0 ? 1.0 : (z < 0.0 ? -1.0 : 0.0); }

/// Dilation weights r_i > 0 and the exponent p >= 1 of the homogeneous norm.
class Weights {
public:
    explicit Weights(std::vector<double> r, double p = 5.0);

    const std::vector<double>& r() const { return r_; }
    double p() const { return p_; }
    std::size_t size() const { return r_.size(); }

private:
    std::vector<double> r_;
    double p_;
};

std::vector<double> dilation(std::span<const double> x, const Weights& w, double eps);

/// (sum_i |x_i|^{p/r_i})^{1/p}
double hom_norm(std::span<const double> x, const Weights& w);

using VectorField = std::function<std::vector<double>(std::span<const double>)>;

/// Returns the homogeneous distance of a point to some discontinuity set.
/// Points closer than the sampler's threshold are discarded.
using Exclusion = std::function<double(std::span<const double>)>;

/// Points on the homogeneous unit sphere. ceil(n/2) random directions are
/// drawn and each contributes the antithetic pair {x, -x}.
std::vector<std::vector<double>> sphere_sample(const Weights& w, std::size_t n,
                                               std::span<const Exclusion> exclusions = {},
                                               std::uint64_t seed = 1,
                                               double min_distance = 1e-6);

struct HomogeneityReport {
    double tested_degree = 0.0;
    double max_relative_error = 0.0;
    std::size_t samples_tested = 0;
    bool passed = false;
};

/// Checks f(D_eps x) = eps^degree D_eps f(x) on sphere samples. The error is
/// measured after undoing the dilation:
///   |eps^-degree D_{1/eps} f(D_eps x) - f(x)|_inf / max(|f(x)|_inf, 1e-12).
HomogeneityReport check_field_homogeneity(const VectorField& field, const Weights& w,
                                          double degree, std::size_t n_samples,
                                          std::span<const double> eps_set,
                                          double tolerance = 1e-9,
                                          std::span<const Exclusion> exclusions = {},
                                          std::uint64_t seed = 1);

}  // namespace dic
