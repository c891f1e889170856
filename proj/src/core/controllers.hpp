#pragma once

#include <array>
#include <optional>
#include <string_view>

#include "plants.hpp"

namespace dic {

struct GainSet {
    double k1 = 0.0;
    double k2 = 0.0;
    double k3 = 0.0;
    double k4 = 0.0;  // any sign
    std::optional<double> l1;
    std::optional<double> l2;

    /// k1, k2, k3 > 0; with_observer additionally requires l1, l2 > 0.
    void validate(bool with_observer) const;
    bool operator==(const GainSet&) const = default;
};

/// (k1, k2, k3, k4, l1, l2) -> (lambda^{2/3} k1, lambda^{1/2} k2, lambda k3,
/// lambda^{-3/2} k4, lambda^{1/3} l1, lambda^{2/3} l2). Observer gains are only
/// touched when with_observer is set.
GainSet scale_gains(const GainSet& g, double lambda, bool with_observer);

/// u = -k1 [x1]^{1/3} - k2 [x2]^{1/2} + z
double dic_control(double x1, double x2_used, double z, const GainSet& g);

/// zdot = -k3 sgn(x1 + k4 [x2]^{3/2})
double dic_integrator_rate(double x1, double x2_used, const GainSet& g);

/// Finite-time observer driven by the measured position; it copies the
/// nominal control without the integrator state.
State2 observer_rate(const State2& xhat, double x1, const GainSet& g);

/// u = -k1 sgn(x1) - k2 sgn(x2)
double twisting_control(double x1, double x2, double k1, double k2);

enum class ControllerType { DicStateFeedback, DicOutputFeedback, Twisting };

std::string_view to_string(ControllerType type);
ControllerType controller_type_from_string(std::string_view name);

struct ControllerState {
    double z = 0.0;
    State2 xhat{0.0, 0.0};  // ignored unless the controller has an observer
};

/// One of the three control laws bound to a gain set.
class Controller {
public:
    Controller(ControllerType type, GainSet gains);

    ControllerType type() const { return type_; }
    const GainSet& gains() const { return gains_; }
    bool has_observer() const { return type_ == ControllerType::DicOutputFeedback; }
    bool has_integrator() const { return type_ != ControllerType::Twisting; }

    double output(const State2& x, const ControllerState& s) const;
    /// Time derivative of the internal state (z, xhat).
    ControllerState rate(const State2& x, const ControllerState& s) const;

private:
    ControllerType type_;
    GainSet gains_;
};

using State3 = std::array<double, 3>;
using State5 = std::array<double, 5>;

/// State-feedback closed loop in (x1, x2, x3 = z + rho):
///   x1' = x2, x2' = -k1 [x1]^{1/3} - k2 [x2]^{1/2} + x3,
///   x3' = -k3 sgn(x1 + k4 [x2]^{3/2}) + rho_dot
State3 sf_error_field(const State3& x, const GainSet& g, double rho_dot);

/// Output-feedback closed loop in (x1, x2, e1, e2, x3) with e = xhat - x.
State5 of_error_field(const State5& s, const GainSet& g, double rho_dot);

}  // namespace dic
