#include "controllers.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "homogeneous.hpp"

namespace dic {

void GainSet::validate(bool with_observer) const
{
    if (!(k1 > 0.0) || !(k2 > 0.0) || !(k3 > 0.0)) {
        throw std::invalid_argument("gains k1, k2, k3 must be positive");
    }
    if (!std::isfinite(k4)) {
        throw std::invalid_argument("gain k4 must be finite");
    }
    if (with_observer && (!l1 || !l2 || !(*l1 > 0.0) || !(*l2 > 0.0))) {
        throw std::invalid_argument("observer gains l1, l2 must be present and positive");
    }
}

GainSet scale_gains(const GainSet& g, double lambda, bool with_observer)
{
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
        throw std::invalid_argument("scale_gains: lambda must be positive");
    }
    GainSet out = g;
    out.k1 = std::pow(lambda, 2.0 / 3.0) * g.k1;
    out.k2 = std::sqrt(lambda) * g.k2;
    out.k3 = lambda * g.k3;
    out.k4 = std::pow(lambda, -1.5) * g.k4;
    if (with_observer) {
        if (g.l1) {
            out.l1 = std::cbrt(lambda) * *g.l1;
        }
        if (g.l2) {
            out.l2 = std::pow(lambda, 2.0 / 3.0) * *g.l2;
        }
    }
    return out;
}

double dic_control(double x1, double x2_used, double z, const GainSet& g)
{
    return -g.k1 * signed_pow(x1, 1.0 / 3.0) - g.k2 * signed_pow(x2_used, 0.5) + z;
}

double dic_integrator_rate(double x1, double x2_used, const GainSet& g)
{
    return -g.k3 * sign(x1 + g.k4 * signed_pow(x2_used, 1.5));
}

State2 observer_rate(const State2& xhat, double x1, const GainSet& g)
{
    const double l1 = g.l1.value_or(0.0);
    const double l2 = g.l2.value_or(0.0);
    const double e1 = xhat[0] - x1;
    return {-l1 * signed_pow(e1, 2.0 / 3.0) + xhat[1],
            -l2 * signed_pow(e1, 1.0 / 3.0) - g.k1 * signed_pow(x1, 1.0 / 3.0) -
                g.k2 * signed_pow(xhat[1], 0.5)};
}

double twisting_control(double x1, double x2, double k1, double k2)
{
    return -k1 * sign(x1) - k2 * sign(x2);
}

std::string_view to_string(ControllerType type)
{
    switch (type) {
    case ControllerType::DicStateFeedback:
        return "dic-sf";
    case ControllerType::DicOutputFeedback:
        return "dic-of";
    case ControllerType::Twisting:
        return "twisting";
    }
    return "?";
}

ControllerType controller_type_from_string(std::string_view name)
{
    if (name == "dic-sf") {
        return ControllerType::DicStateFeedback;
    }
    if (name == "dic-of") {
        return ControllerType::DicOutputFeedback;
    }
    if (name == "twisting") {
        return ControllerType::Twisting;
    }
    throw std::invalid_argument("unknown controller type '" + std::string(name) + "'");
}

Controller::Controller(ControllerType type, GainSet gains) : type_(type), gains_(std::move(gains))
{
    if (type_ == ControllerType::Twisting) {
        if (!(gains_.k1 > 0.0) || !(gains_.k2 > 0.0)) {
            throw std::invalid_argument("twisting gains k1, k2 must be positive");
        }
    } else {
        gains_.validate(has_observer());
    }
}

double Controller::output(const State2& x, const ControllerState& s) const
{
    switch (type_) {
    case ControllerType::DicStateFeedback:
        return dic_control(x[0], x[1], s.z, gains_);
    case ControllerType::DicOutputFeedback:
        return dic_control(x[0], s.xhat[1], s.z, gains_);
    case ControllerType::Twisting:
        return twisting_control(x[0], x[1], gains_.k1, gains_.k2);
    }
    return 0.0;
}

ControllerState Controller::rate(const State2& x, const ControllerState& s) const
{
    ControllerState d{0.0, {0.0, 0.0}};
    switch (type_) {
    case ControllerType::DicStateFeedback:
        d.z = dic_integrator_rate(x[0], x[1], gains_);
        break;
    case ControllerType::DicOutputFeedback:
        d.z = dic_integrator_rate(x[0], s.xhat[1], gains_);
        d.xhat = observer_rate(s.xhat, x[0], gains_);
        break;
    case ControllerType::Twisting:
        break;
    }
    return d;
}

State3 sf_error_field(const State3& x, const GainSet& g, double rho_dot)
{
    return {x[1],
            -g.k1 * signed_pow(x[0], 1.0 / 3.0) - g.k2 * signed_pow(x[1], 0.5) + x[2],
            -g.k3 * sign(x[0] + g.k4 * signed_pow(x[1], 1.5)) + rho_dot};
}

State5 of_error_field(const State5& s, const GainSet& g, double rho_dot)
{
    const double x1 = s[0], x2 = s[1], e1 = s[2], e2 = s[3], x3 = s[4];
    const double l1 = g.l1.value_or(0.0);
    const double l2 = g.l2.value_or(0.0);
    return {x2,
            -g.k1 * signed_pow(x1, 1.0 / 3.0) - g.k2 * signed_pow(x2 + e2, 0.5) + x3,
            -l1 * signed_pow(e1, 2.0 / 3.0) + e2,
            -l2 * signed_pow(e1, 1.0 / 3.0) - x3,
            -g.k3 * sign(x1 + g.k4 * signed_pow(x2 + e2, 1.5)) + rho_dot};
}

}  // namespace dic
