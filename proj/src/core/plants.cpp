#include "plants.hpp"

#include <cmath>
#include <stdexcept>

namespace dic {

State2 double_integrator_rhs(const State2& x, double u, double rho)
{
    return {x[1], u + rho};
}

void PendulumParams::validate() const
{
    if (!(m > 0.0) || !(l > 0.0) || !(g > 0.0)) {
        throw std::invalid_argument("pendulum parameters m, l, g must be positive");
    }
}

State2 pendulum_rhs(const State2& x, double u, const PendulumParams& p, double rho)
{
    return {x[1], -(p.g / p.l) * std::sin(x[0]) + u / (p.m * p.l * p.l) + rho};
}

Perturbation Perturbation::zero()
{
    return Perturbation{};
}

Perturbation Perturbation::constant(double c)
{
    if (!std::isfinite(c)) {
        throw std::invalid_argument("constant perturbation must be finite");
    }
    Perturbation p;
    p.kind_ = Kind::Constant;
    p.amplitude_ = c;
    return p;
}

Perturbation Perturbation::sinusoid(double amplitude, double frequency, double phase,
                                    std::optional<double> lipschitz)
{
    const double bound = std::fabs(amplitude * frequency);
    Perturbation p;
    p.kind_ = Kind::Sinusoid;
    p.amplitude_ = amplitude;
    p.frequency_ = frequency;
    p.phase_ = phase;
    p.lipschitz_ = lipschitz.value_or(bound);
    if (!(p.lipschitz_ >= bound)) {
        throw std::invalid_argument("sinusoid perturbation: lipschitz bound below |A*w|");
    }
    return p;
}

Perturbation Perturbation::tabulated(std::vector<double> samples, double dt, double lipschitz)
{
    if (samples.empty() || !(dt > 0.0) || !(lipschitz >= 0.0)) {
        throw std::invalid_argument("tabulated perturbation: need samples, dt > 0, L >= 0");
    }
    Perturbation p;
    p.kind_ = Kind::Tabulated;
    p.samples_ = std::move(samples);
    p.sample_dt_ = dt;
    p.lipschitz_ = lipschitz;
    return p;
}

Perturbation::Value Perturbation::eval(double t) const
{
    switch (kind_) {
    case Kind::Zero:
        return {0.0, 0.0};
    case Kind::Constant:
        return {amplitude_, 0.0};
    case Kind::Sinusoid: {
        const double arg = frequency_ * t + phase_;
        return {amplitude_ * std::sin(arg), amplitude_ * frequency_ * std::cos(arg)};
    }
    case Kind::Tabulated: {
        const double pos = std::max(t, 0.0) / sample_dt_;
        const auto i = static_cast<std::size_t>(pos);
        if (i + 1 >= samples_.size()) {
            return {samples_.back(), std::nullopt};
        }
        const double frac = pos - static_cast<double>(i);
        return {samples_[i] + frac * (samples_[i + 1] - samples_[i]), std::nullopt};
    }
    }
    return {};
}

Perturbation Perturbation::scaled(double lambda) const
{
    Perturbation p = *this;
    p.amplitude_ *= lambda;
    p.lipschitz_ *= std::fabs(lambda);
    for (double& s : p.samples_) {
        s *= lambda;
    }
    return p;
}

ReferenceSignal ReferenceSignal::zero()
{
    auto z = [](double) { return 0.0; };
    return {z, z, z};
}

ReferenceSignal ReferenceSignal::sinusoid(double a, double w)
{
    return {[a, w](double t) { return a * std::sin(w * t); },
            [a, w](double t) { return a * w * std::cos(w * t); },
            [a, w](double t) { return -a * w * w * std::sin(w * t); }};
}

State2 Plant::rhs(const State2& x, double t, double torque, double rho) const
{
    return {x[1], drift(x, t) + input_gain * torque + rho};
}

PlantDynamics Plant::dynamics() const
{
    return [plant = *this](const State2& x, double t, double u, double rho) {
        return plant.rhs(x, t, u, rho);
    };
}

Plant make_double_integrator()
{
    return Plant{[](const State2&, double) { return 0.0; }, 1.0};
}

Plant make_pendulum(const PendulumParams& params)
{
    params.validate();
    const double gl = params.g / params.l;
    return Plant{[gl](const State2& x, double) { return -gl * std::sin(x[0]); },
                 1.0 / (params.m * params.l * params.l)};
}

NormalForm::NormalForm(Plant plant, std::function<double(const State2&, double)> known_f,
                       ReferenceSignal reference, bool feed_rddot)
    : plant_(std::move(plant)), known_f_(std::move(known_f)), reference_(std::move(reference)),
      feed_rddot_(feed_rddot)
{
    if (!(plant_.input_gain != 0.0)) {
        throw std::invalid_argument("normal form requires a nonzero input gain");
    }
}

double NormalForm::torque(const State2& xi, double t, double u) const
{
    const double ff = feed_rddot_ ? reference_.rddot(t) : 0.0;
    return (u - known_f_(xi, t) + ff) / plant_.input_gain;
}

State2 NormalForm::to_error(const State2& xi, double t) const
{
    return {xi[0] - reference_.r(t), xi[1] - reference_.rdot(t)};
}

State2 NormalForm::from_error(const State2& e, double t) const
{
    return {e[0] + reference_.r(t), e[1] + reference_.rdot(t)};
}

State2 NormalForm::rhs(const State2& e, double t, double u, double rho) const
{
    const State2 xi = from_error(e, t);
    const State2 d = plant_.rhs(xi, t, torque(xi, t, u), rho);
    return {d[0] - reference_.rdot(t), d[1] - reference_.rddot(t)};
}

PlantDynamics NormalForm::dynamics() const
{
    return [nf = *this](const State2& e, double t, double u, double rho) {
        return nf.rhs(e, t, u, rho);
    };
}

NormalForm to_normal_form(const Plant& plant, ReferenceSignal reference, bool feed_rddot)
{
    return NormalForm(plant, plant.drift, std::move(reference), feed_rddot);
}

NormalForm to_normal_form(const Plant& plant, std::function<double(const State2&, double)> known_f,
                          ReferenceSignal reference, bool feed_rddot)
{
    return NormalForm(plant, std::move(known_f), std::move(reference), feed_rddot);
}

}  // namespace dic
