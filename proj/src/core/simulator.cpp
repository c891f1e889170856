#include "simulator.hpp"

#include <algorithm>
#include <charconv>
#include <future>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include "homogeneous.hpp"

namespace dic {

std::string_view to_string(Method m)
{
    return m == Method::Rk4 ? "rk4" : "explicit-euler";
}

Method method_from_string(std::string_view name)
{
    if (name == "explicit-euler" || name == "euler") {
        return Method::ExplicitEuler;
    }
    if (name == "rk4") {
        return Method::Rk4;
    }
    throw std::invalid_argument("unknown integration method '" + std::string(name) + "'");
}

void SimConfig::validate() const
{
    if (!(h > 0.0) || !std::isfinite(h)) {
        throw std::invalid_argument("sim: step h must be positive");
    }
    if (!(t_end >= 0.0) || !std::isfinite(t_end)) {
        throw std::invalid_argument("sim: t_end must be non-negative");
    }
    if (record_stride < 1) {
        throw std::invalid_argument("sim: record_stride must be >= 1");
    }
    if (t_end / h > 1e12) {
        throw std::invalid_argument("sim: t_end / h is too large");
    }
}

std::size_t SimConfig::steps() const
{
    return static_cast<std::size_t>(std::llround(t_end / h));
}

NumericError::NumericError(std::size_t step, double t)
    : std::runtime_error("non-finite state at step " + std::to_string(step) + " (t = " +
                         std::to_string(t) + ")"),
      step_(step), time_(t)
{
}

namespace {

struct Augmented {
    State2 x;
    ControllerState c;
};

Augmented axpy(const Augmented& a, double s, const Augmented& d)
{
    return {{a.x[0] + s * d.x[0], a.x[1] + s * d.x[1]},
            {a.c.z + s * d.c.z, {a.c.xhat[0] + s * d.c.xhat[0], a.c.xhat[1] + s * d.c.xhat[1]}}};
}

bool finite(const Augmented& a)
{
    return std::isfinite(a.x[0]) && std::isfinite(a.x[1]) && std::isfinite(a.c.z) &&
           std::isfinite(a.c.xhat[0]) && std::isfinite(a.c.xhat[1]);
}

}  // namespace

Trajectory simulate(const PlantDynamics& plant, const Controller& controller,
                    const Perturbation& perturbation, const State2& x0,
                    const ControllerState& ctrl0, const SimConfig& cfg)
{
    cfg.validate();
    const std::size_t n = cfg.steps();
    const bool obs = controller.has_observer();

    Trajectory traj;
    traj.h = cfg.h;
    traj.record_stride = cfg.record_stride;
    traj.has_observer = obs;
    const std::size_t rows = n / cfg.record_stride + 1;
    for (auto* col : {&traj.t, &traj.x1, &traj.x2, &traj.z, &traj.u, &traj.rho}) {
        col->reserve(rows);
    }
    if (obs) {
        traj.xhat1.reserve(rows);
        traj.xhat2.reserve(rows);
    }

    Augmented s{x0, ctrl0};
    if (!controller.has_integrator()) {
        s.c.z = 0.0;
    }
    if (!finite(s)) {
        throw NumericError(0, 0.0);
    }

    auto deriv = [&](const Augmented& a, double t, double u) {
        const double rho = perturbation.eval(t).rho;
        return Augmented{plant(a.x, t, u, rho), controller.rate(a.x, a.c)};
    };

    for (std::size_t i = 0;; ++i) {
        const double t = static_cast<double>(i) * cfg.h;
        const double rho = perturbation.eval(t).rho;
        const double u = controller.output(s.x, s.c);
        if (i % cfg.record_stride == 0) {
            traj.t.push_back(t);
            traj.x1.push_back(s.x[0]);
            traj.x2.push_back(s.x[1]);
            traj.z.push_back(s.c.z);
            traj.u.push_back(u);
            traj.rho.push_back(rho);
            if (obs) {
                traj.xhat1.push_back(s.c.xhat[0]);
                traj.xhat2.push_back(s.c.xhat[1]);
            }
        }
        if (i == n) {
            break;
        }
        if (cfg.method == Method::ExplicitEuler) {
            const Augmented d{plant(s.x, t, u, rho), controller.rate(s.x, s.c)};
            s = axpy(s, cfg.h, d);
        } else {
            const double h = cfg.h;
            const Augmented k1 = deriv(s, t, u);
            const Augmented k2 = deriv(axpy(s, h / 2, k1), t + h / 2, u);
            const Augmented k3 = deriv(axpy(s, h / 2, k2), t + h / 2, u);
            const Augmented k4 = deriv(axpy(s, h, k3), t + h, u);
            Augmented sum = axpy(k1, 2.0, k2);
            sum = axpy(sum, 2.0, k3);
            sum = axpy(sum, 1.0, k4);
            s = axpy(s, h / 6.0, sum);
        }
        if (!controller.has_integrator()) {
            s.c.z = 0.0;
        }
        if (!finite(s)) {
            throw NumericError(i + 1, static_cast<double>(i + 1) * cfg.h);
        }
    }
    return traj;
}

namespace {

void put_double(std::ostream& os, double v)
{
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    os.write(buf, res.ptr - buf);
}

}  // namespace

void write_csv(std::ostream& os, const Trajectory& traj)
{
    os << "t,x1,x2,xhat1,xhat2,z,u,rho\n";
    for (std::size_t i = 0; i < traj.size(); ++i) {
        put_double(os, traj.t[i]);
        os << ',';
        put_double(os, traj.x1[i]);
        os << ',';
        put_double(os, traj.x2[i]);
        os << ',';
        if (traj.has_observer) {
            put_double(os, traj.xhat1[i]);
        }
        os << ',';
        if (traj.has_observer) {
            put_double(os, traj.xhat2[i]);
        }
        os << ',';
        put_double(os, traj.z[i]);
        os << ',';
        put_double(os, traj.u[i]);
        os << ',';
        put_double(os, traj.rho[i]);
        os << '\n';
    }
}

std::string to_csv(const Trajectory& traj)
{
    std::ostringstream os;
    write_csv(os, traj);
    return os.str();
}

double position_velocity_norm(double x1, double x2)
{
    static const Weights w({3.0, 2.0}, 5.0);
    const double v[2] = {x1, x2};
    return hom_norm(v, w);
}

SettlingReport settling_metrics(const Trajectory& traj, double tol)
{
    if (!(tol > 0.0)) {
        throw std::invalid_argument("settling_metrics: tol must be positive");
    }
    SettlingReport rep;
    const std::size_t n = traj.size();
    if (n == 0) {
        return rep;
    }
    // Walk backwards to find the start of the final run of in-tolerance samples.
    std::size_t first = n;
    while (first > 0 && position_velocity_norm(traj.x1[first - 1], traj.x2[first - 1]) <= tol) {
        --first;
    }
    const double t_end = traj.t_end();
    double start = (1.0 - kSettledWindowFraction) * t_end;
    if (first < n) {
        rep.settle_time = traj.t[first];
        start = std::max(start, *rep.settle_time);
    }
    rep.window_start = start;
    for (std::size_t i = 0; i < n; ++i) {
        if (traj.t[i] >= start) {
            rep.sup_x1 = std::max(rep.sup_x1, std::fabs(traj.x1[i]));
            rep.sup_x2 = std::max(rep.sup_x2, std::fabs(traj.x2[i]));
        }
    }
    rep.nu1 = rep.sup_x1 / (traj.h * traj.h * traj.h);
    rep.nu2 = rep.sup_x2 / (traj.h * traj.h);
    return rep;
}

ChatteringReport chattering_metric(const Trajectory& traj)
{
    ChatteringReport rep;
    const double start = (1.0 - kSettledWindowFraction) * traj.t_end();
    std::size_t pairs = 0;
    std::size_t flips = 0;
    for (std::size_t i = 1; i < traj.size(); ++i) {
        if (traj.t[i - 1] < start) {
            continue;
        }
        ++pairs;
        rep.max_step_jump = std::max(rep.max_step_jump, std::fabs(traj.u[i] - traj.u[i - 1]));
        if (traj.u[i] * traj.u[i - 1] < 0.0) {
            ++flips;
        }
    }
    rep.sign_flip_fraction = pairs ? static_cast<double>(flips) / static_cast<double>(pairs) : 0.0;
    return rep;
}

double fit_slope(std::span<const double> x, std::span<const double> y)
{
    const auto n = static_cast<double>(x.size());
    double sx = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
    }
    const double mx = sx / n;
    const double my = sy / n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxy / sxx;
}

PrecisionStudy precision_scaling_study(const std::function<Trajectory(double)>& run,
                                       std::span<const double> steps, double settle_tol)
{
    if (steps.size() < 3) {
        throw std::invalid_argument("precision study: need at least three step sizes");
    }
    const auto [lo, hi] = std::minmax_element(steps.begin(), steps.end());
    if (!(*lo > 0.0) || std::log10(*hi / *lo) < 1.5) {
        throw std::invalid_argument("precision study: steps must be positive and span 1.5 decades");
    }

    std::vector<std::future<SettlingReport>> jobs;
    for (double h : steps) {
        jobs.push_back(std::async(std::launch::async,
                                  [&run, h, settle_tol] { return settling_metrics(run(h), settle_tol); }));
    }

    PrecisionStudy study;
    study.steps.assign(steps.begin(), steps.end());
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        const SettlingReport rep = jobs[i].get();
        if (!rep.settle_time && study.valid) {
            study.valid = false;
            study.reason = "run with h = " + std::to_string(steps[i]) + " did not settle";
        }
        study.sup_x1.push_back(rep.sup_x1);
        study.sup_x2.push_back(rep.sup_x2);
    }

    const auto has_zero = [](const std::vector<double>& v) {
        return std::any_of(v.begin(), v.end(), [](double s) { return s == 0.0; });
    };
    if (has_zero(study.sup_x1) || has_zero(study.sup_x2)) {
        study.degenerate = true;
        study.slope_x1 = study.slope_x2 = std::numeric_limits<double>::quiet_NaN();
        return study;
    }
    std::vector<double> lh, l1, l2;
    for (std::size_t i = 0; i < steps.size(); ++i) {
        lh.push_back(std::log(steps[i]));
        l1.push_back(std::log(study.sup_x1[i]));
        l2.push_back(std::log(study.sup_x2[i]));
    }
    study.slope_x1 = fit_slope(lh, l1);
    study.slope_x2 = fit_slope(lh, l2);
    return study;
}

}  // namespace dic
