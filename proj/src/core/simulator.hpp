#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "controllers.hpp"
#include "plants.hpp"

namespace dic {

enum class Method { ExplicitEuler, Rk4 };

std::string_view to_string(Method m);
Method method_from_string(std::string_view name);

struct SimConfig {
    double h = 1e-4;
    double t_end = 30.0;
    Method method = Method::ExplicitEuler;
    std::size_t record_stride = 1;

    void validate() const;
    std::size_t steps() const;
    bool operator==(const SimConfig&) const = default;
};

/// Raised when the state stops being finite.
class NumericError : public std::runtime_error {
public:
    NumericError(std::size_t step, double t);

    std::size_t step() const { return step_; }
    double time() const { return time_; }

private:
    std::size_t step_;
    double time_;
};

struct Trajectory {
    double h = 0.0;  // integration step
    std::size_t record_stride = 1;
    bool has_observer = false;

    std::vector<double> t;
    std::vector<double> x1;
    std::vector<double> x2;
    std::vector<double> xhat1;  // empty without observer
    std::vector<double> xhat2;
    std::vector<double> z;
    std::vector<double> u;
    std::vector<double> rho;

    std::size_t size() const { return t.size(); }
    double t_end() const { return t.empty() ? 0.0 : t.back(); }
    bool operator==(const Trajectory&) const = default;
};

/// Fixed-step integration of plant + controller. The control is computed
/// once per step and held. Throws NumericError on a non-finite state.
Trajectory simulate(const PlantDynamics& plant, const Controller& controller,
                    const Perturbation& perturbation, const State2& x0,
                    const ControllerState& ctrl0, const SimConfig& cfg);

/// Header `t,x1,x2,xhat1,xhat2,z,u,rho`, shortest round-trip doubles.
void write_csv(std::ostream& os, const Trajectory& traj);
std::string to_csv(const Trajectory& traj);

struct SettlingReport {
    std::optional<double> settle_time;  // empty: not reached
    double sup_x1 = 0.0;
    double sup_x2 = 0.0;
    double nu1 = 0.0;  // sup_x1 / h^3
    double nu2 = 0.0;  // sup_x2 / h^2
    double window_start = 0.0;
};

inline constexpr double kDefaultSettleTolerance = 1e-2;
inline constexpr double kSettledWindowFraction = 0.2;

/// hom_norm of (x1, x2) with weights (3, 2).
double position_velocity_norm(double x1, double x2);

/// T* is the first recorded time after which the (3,2)-homogeneous norm of
/// (x1, x2) stays <= tol. Sup norms are taken over [max(T*, 0.8 t_end), t_end].
SettlingReport settling_metrics(const Trajectory& traj, double tol = kDefaultSettleTolerance);

struct ChatteringReport {
    double max_step_jump = 0.0;
    double sign_flip_fraction = 0.0;
};

/// Over the last 20% of the horizon: max |u[i] - u[i-1]| and the fraction of
/// consecutive pairs with u[i] * u[i-1] < 0.
ChatteringReport chattering_metric(const Trajectory& traj);

struct PrecisionStudy {
    std::vector<double> steps;
    std::vector<double> sup_x1;
    std::vector<double> sup_x2;
    double slope_x1 = 0.0;  // NaN when degenerate
    double slope_x2 = 0.0;
    bool degenerate = false;  // some sup norm is exactly zero, no log fit
    bool valid = true;        // false when some run did not settle
    std::string reason;
};

inline constexpr double kStudySettleTolerance = 0.1;

/// Runs `run(h)` for every step size (in parallel), takes the steady-state sup
/// norms and fits log(sup) against log(h) by least squares. Needs at least
/// three steps spanning 1.5 decades.
PrecisionStudy precision_scaling_study(const std::function<Trajectory(double)>& run,
                                       std::span<const double> steps,
                                       double settle_tol = kStudySettleTolerance);

/// Least-squares slope of y against x.
double fit_slope(std::span<const double> x, std::span<const double> y);

}  // namespace dic
