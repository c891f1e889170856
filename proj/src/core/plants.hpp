#pragma once

#include <array>
#include <functional>
#include <optional>
#include <vector>

namespace dic {

using State2 = std::array<double, 2>;

/// (x2, u + rho)
State2 double_integrator_rhs(const State2& x, double u, double rho);

struct PendulumParams {
    double m = 1.1;    // kg
    double l = 1.0;    // m
    double g = 9.815;  // m/s^2

    void validate() const;
    bool operator==(const PendulumParams&) const = default;
};

/// Frictionless pendulum, x = (theta, theta_dot), u is the applied torque.
State2 pendulum_rhs(const State2& x, double u, const PendulumParams& params, double rho);

/// A perturbation signal rho(t) together with its Lipschitz bound L.
class Perturbation {
public:
    enum class Kind { Zero, Constant, Sinusoid, Tabulated };

    struct Value {
        double rho = 0.0;
        std::optional<double> rho_dot;  // empty for tabulated signals
    };

    static Perturbation zero();
    static Perturbation constant(double c);
    /// A sin(w t + phi). The Lipschitz bound defaults to |A w| and may not be smaller.
    static Perturbation sinusoid(double amplitude, double frequency, double phase = 0.0,
                                 std::optional<double> lipschitz = std::nullopt);
    /// Piecewise-linear interpolation of samples spaced dt apart, held beyond the last one.
    static Perturbation tabulated(std::vector<double> samples, double dt, double lipschitz);

    Value eval(double t) const;

    /// rho -> lambda * rho (and L -> lambda * L).
    Perturbation scaled(double lambda) const;

    Kind kind() const { return kind_; }
    double lipschitz() const { return lipschitz_; }
    double amplitude() const { return amplitude_; }
    double frequency() const { return frequency_; }
    double phase() const { return phase_; }
    const std::vector<double>& samples() const { return samples_; }
    double sample_dt() const { return sample_dt_; }

private:
    Kind kind_ = Kind::Zero;
    double amplitude_ = 0.0;  // also the constant value
    double frequency_ = 0.0;
    double phase_ = 0.0;
    double lipschitz_ = 0.0;
    std::vector<double> samples_;
    double sample_dt_ = 0.0;
};

struct ReferenceSignal {
    std::function<double(double)> r;
    std::function<double(double)> rdot;
    std::function<double(double)> rddot;

    static ReferenceSignal zero();
    /// A sin(w t)
    static ReferenceSignal sinusoid(double amplitude, double frequency);
};

/// Right-hand side (x, t, control, rho) -> xdot of a second order system.
using PlantDynamics = std::function<State2(const State2&, double, double, double)>;

/// xdot2 = drift(x, t) + input_gain * torque + rho
struct Plant {
    std::function<double(const State2&, double)> drift;
    double input_gain = 1.0;

    State2 rhs(const State2& x, double t, double torque, double rho) const;
    PlantDynamics dynamics() const;
};

Plant make_double_integrator();
Plant make_pendulum(const PendulumParams& params);

/// Tracking-error coordinates e = (xi1 - r, xi2 - rdot) driven through the
/// cancelling torque tau = (u - known_f + rddot) / input_gain. When rddot is
/// not fed forward it acts as part of the perturbation. Any mismatch between
/// known_f and the true drift is likewise folded into the perturbation.
class NormalForm {
public:
    NormalForm(Plant plant, std::function<double(const State2&, double)> known_f,
               ReferenceSignal reference, bool feed_rddot);

    double torque(const State2& xi, double t, double u) const;
    State2 to_error(const State2& xi, double t) const;
    State2 from_error(const State2& e, double t) const;
    State2 rhs(const State2& e, double t, double u, double rho) const;
    PlantDynamics dynamics() const;

private:
    Plant plant_;
    std::function<double(const State2&, double)> known_f_;
    ReferenceSignal reference_;
    bool feed_rddot_;
};

/// Uses the plant's own drift as the known term.
NormalForm to_normal_form(const Plant& plant, ReferenceSignal reference, bool feed_rddot);
NormalForm to_normal_form(const Plant& plant, std::function<double(const State2&, double)> known_f,
                          ReferenceSignal reference, bool feed_rddot);

}  // namespace dic
