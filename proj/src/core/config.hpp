#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "controllers.hpp"
#include "plants.hpp"
#include "simulator.hpp"

namespace dic {

inline constexpr int kFormatVersion = 1;

/// A config problem, with the offending line (0 if not line-specific) and key.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::size_t line, std::string key, const std::string& message);

    std::size_t line() const { return line_; }
    const std::string& key() const { return key_; }

private:
    std::size_t line_;
    std::string key_;
};

struct RunConfig {
    struct PlantSection {
        std::string type = "pendulum";  // pendulum | double-integrator
        PendulumParams pendulum;
        std::string input = "direct";   // direct | normal-form
        double x1_0 = 0.0;
        double x2_0 = 0.0;
        bool operator==(const PlantSection&) const = default;
    };
    struct ControllerSection {
        ControllerType type = ControllerType::DicStateFeedback;
        GainSet gains;         // as written, before lambda
        double lambda = 1.0;   // applied to k1..k4
        double z0 = 0.0;
        double xhat1_0 = 0.0;
        double xhat2_0 = 0.0;
        bool operator==(const ControllerSection&) const = default;
    };
    struct PerturbationSection {
        std::string type = "zero";  // zero | constant | sinusoid | tabulated
        double value = 0.0;
        double amplitude = 0.0;
        double frequency = 0.0;
        double phase = 0.0;
        double lipschitz = 0.0;
        std::vector<double> samples;
        double sample_dt = 0.0;
        bool operator==(const PerturbationSection&) const = default;
    };
    struct OutputSection {
        std::string trajectory;  // CSV path, relative to the output directory
        std::string summary;
        bool chattering = false;
        bool operator==(const OutputSection&) const = default;
    };

    std::string name;  // optional label
    PlantSection plant;
    ControllerSection controller;
    PerturbationSection perturbation;
    SimConfig sim;
    OutputSection output;

    bool operator==(const RunConfig&) const = default;

    /// Checks cross-field consistency; throws ConfigError.
    void validate() const;

    GainSet effective_gains() const;
    Controller make_controller() const;
    Perturbation make_perturbation() const;
    PlantDynamics make_plant() const;
    State2 initial_state() const;
    ControllerState initial_controller_state() const;
};

RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::string& path);
std::string serialize_config(const RunConfig& cfg);

/// Names of the configs compiled into the library.
std::vector<std::string> bundled_config_names();
/// Text of a bundled config; throws ConfigError for unknown names.
std::string bundled_config_text(std::string_view name);

}  // namespace dic
