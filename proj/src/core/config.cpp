#include "config.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace dic {

ConfigError::ConfigError(std::size_t line, std::string key, const std::string& message)
    : std::runtime_error(line ? "line " + std::to_string(line) + ": " + message : message),
      line_(line), key_(std::move(key))
{
}

namespace {

const std::map<std::string, std::set<std::string>, std::less<>> kAllowed = {
    {"", {"format_version", "name"}},
    {"plant", {"type", "m", "l", "g", "input", "x1_0", "x2_0"}},
    {"controller",
     {"type", "k1", "k2", "k3", "k4", "l1", "l2", "lambda", "z0", "xhat1_0", "xhat2_0"}},
    {"perturbation",
     {"type", "value", "amplitude", "frequency", "phase", "lipschitz", "samples", "sample_dt"}},
    {"sim", {"method", "h", "t_end", "record_stride"}},
    {"output", {"trajectory", "summary", "chattering"}},
};

std::string_view trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

struct Entry {
    std::string value;
    std::size_t line;
};

using Section = std::map<std::string, Entry, std::less<>>;

double to_double(const Entry& e, const std::string& key)
{
    double v = 0.0;
    const char* b = e.value.data();
    const char* end = b + e.value.size();
    const auto res = std::from_chars(b, end, v);
    if (res.ec != std::errc() || res.ptr != end || !std::isfinite(v)) {
        throw ConfigError(e.line, key, "key '" + key + "': expected a finite number, got '" +
                                           e.value + "'");
    }
    return v;
}

std::size_t to_count(const Entry& e, const std::string& key)
{
    std::size_t v = 0;
    const char* b = e.value.data();
    const char* end = b + e.value.size();
    const auto res = std::from_chars(b, end, v);
    if (res.ec != std::errc() || res.ptr != end) {
        throw ConfigError(e.line, key, "key '" + key + "': expected a count, got '" + e.value + "'");
    }
    return v;
}

bool to_bool(const Entry& e, const std::string& key)
{
    if (e.value == "true") {
        return true;
    }
    if (e.value == "false") {
        return false;
    }
    throw ConfigError(e.line, key, "key '" + key + "': expected true or false");
}

std::vector<double> to_list(const Entry& e, const std::string& key)
{
    std::vector<double> out;
    std::string_view rest = e.value;
    while (!rest.empty()) {
        const auto comma = rest.find(',');
        const std::string item(trim(rest.substr(0, comma)));
        out.push_back(to_double(Entry{item, e.line}, key));
        if (comma == std::string_view::npos) {
            break;
        }
        rest = rest.substr(comma + 1);
    }
    return out;
}

/// Reads optional typed values out of a parsed section.
class Reader {
public:
    Reader(const Section& s, std::string name) : s_(s), name_(std::move(name)) {}

    const Entry* find(const std::string& key) const
    {
        const auto it = s_.find(key);
        return it == s_.end() ? nullptr : &it->second;
    }
    std::string qualified(const std::string& key) const { return name_ + "." + key; }

    void num(const std::string& key, double& out) const
    {
        if (const Entry* e = find(key)) {
            out = to_double(*e, qualified(key));
        }
    }
    void str(const std::string& key, std::string& out) const
    {
        if (const Entry* e = find(key)) {
            out = e->value;
        }
    }
    double required(const std::string& key) const
    {
        const Entry* e = find(key);
        if (!e) {
            throw ConfigError(0, qualified(key), "missing required key '" + qualified(key) + "'");
        }
        return to_double(*e, qualified(key));
    }
    std::size_t line_of(const std::string& key) const
    {
        const Entry* e = find(key);
        return e ? e->line : 0;
    }

private:
    const Section& s_;
    std::string name_;
};

std::string fmt(double v)
{
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

}  // namespace

RunConfig parse_config(std::string_view text)
{
    std::map<std::string, Section, std::less<>> sections;
    sections[""];
    std::string current;
    std::size_t lineno = 0;
    std::istringstream in{std::string(text)};
    std::string raw;
    while (std::getline(in, raw)) {
        ++lineno;
        std::string_view line = raw;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        if (line.front() == '[') {
            if (line.back() != ']') {
                throw ConfigError(lineno, "", "malformed section header");
            }
            current = std::string(trim(line.substr(1, line.size() - 2)));
            if (!kAllowed.contains(current) || current.empty()) {
                throw ConfigError(lineno, current, "unknown section [" + current + "]");
            }
            if (sections.contains(current)) {
                throw ConfigError(lineno, current, "duplicate section [" + current + "]");
            }
            sections[current];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError(lineno, "", "expected 'key = value'");
        }
        const std::string key(trim(line.substr(0, eq)));
        const std::string value(trim(line.substr(eq + 1)));
        const std::string where = current.empty() ? key : current + "." + key;
        if (!kAllowed.at(current).contains(key)) {
            throw ConfigError(lineno, where, "unknown key '" + where + "'");
        }
        if (value.empty()) {
            throw ConfigError(lineno, where, "empty value for '" + where + "'");
        }
        auto& sec = sections[current];
        if (sec.contains(key)) {
            throw ConfigError(lineno, where, "duplicate key '" + where + "'");
        }
        sec[key] = Entry{value, lineno};
    }

    RunConfig cfg;
    const Reader top(sections[""], "");
    if (const Entry* e = top.find("format_version")) {
        if (e->value != std::to_string(kFormatVersion)) {
            throw ConfigError(e->line, "format_version", "unsupported format_version " + e->value);
        }
    }
    top.str("name", cfg.name);

    const Reader plant(sections["plant"], "plant");
    plant.str("type", cfg.plant.type);
    plant.num("m", cfg.plant.pendulum.m);
    plant.num("l", cfg.plant.pendulum.l);
    plant.num("g", cfg.plant.pendulum.g);
    plant.str("input", cfg.plant.input);
    plant.num("x1_0", cfg.plant.x1_0);
    plant.num("x2_0", cfg.plant.x2_0);
    if (cfg.plant.type != "pendulum" && cfg.plant.type != "double-integrator") {
        throw ConfigError(plant.line_of("type"), "plant.type",
                          "plant.type must be pendulum or double-integrator");
    }
    if (cfg.plant.input != "direct" && cfg.plant.input != "normal-form") {
        throw ConfigError(plant.line_of("input"), "plant.input",
                          "plant.input must be direct or normal-form");
    }

    const Reader ctrl(sections["controller"], "controller");
    std::string type = "dic-sf";
    ctrl.str("type", type);
    try {
        cfg.controller.type = controller_type_from_string(type);
    } catch (const std::invalid_argument& ex) {
        throw ConfigError(ctrl.line_of("type"), "controller.type", ex.what());
    }
    auto& g = cfg.controller.gains;
    g.k1 = ctrl.required("k1");
    g.k2 = ctrl.required("k2");
    if (cfg.controller.type == ControllerType::Twisting) {
        ctrl.num("k3", g.k3);
    } else {
        g.k3 = ctrl.required("k3");
    }
    ctrl.num("k4", g.k4);
    if (cfg.controller.type == ControllerType::DicOutputFeedback) {
        g.l1 = ctrl.required("l1");
        g.l2 = ctrl.required("l2");
    } else {
        if (ctrl.find("l1")) {
            g.l1 = ctrl.required("l1");
        }
        if (ctrl.find("l2")) {
            g.l2 = ctrl.required("l2");
        }
    }
    ctrl.num("lambda", cfg.controller.lambda);
    ctrl.num("z0", cfg.controller.z0);
    ctrl.num("xhat1_0", cfg.controller.xhat1_0);
    ctrl.num("xhat2_0", cfg.controller.xhat2_0);

    const Reader pert(sections["perturbation"], "perturbation");
    auto& p = cfg.perturbation;
    pert.str("type", p.type);
    pert.num("value", p.value);
    pert.num("amplitude", p.amplitude);
    pert.num("frequency", p.frequency);
    pert.num("phase", p.phase);
    pert.num("sample_dt", p.sample_dt);
    if (const Entry* e = pert.find("samples")) {
        p.samples = to_list(*e, "perturbation.samples");
    }
    if (pert.find("lipschitz")) {
        pert.num("lipschitz", p.lipschitz);
    } else if (p.type == "sinusoid") {
        p.lipschitz = std::fabs(p.amplitude * p.frequency);
    }

    const Reader sim(sections["sim"], "sim");
    if (const Entry* e = sim.find("method")) {
        try {
            cfg.sim.method = method_from_string(e->value);
        } catch (const std::invalid_argument& ex) {
            throw ConfigError(e->line, "sim.method", ex.what());
        }
    }
    sim.num("h", cfg.sim.h);
    sim.num("t_end", cfg.sim.t_end);
    if (const Entry* e = sim.find("record_stride")) {
        cfg.sim.record_stride = to_count(*e, "sim.record_stride");
    }

    const Reader out(sections["output"], "output");
    out.str("trajectory", cfg.output.trajectory);
    out.str("summary", cfg.output.summary);
    if (const Entry* e = out.find("chattering")) {
        cfg.output.chattering = to_bool(*e, "output.chattering");
    }

    cfg.validate();
    return cfg;
}

void RunConfig::validate() const
{
    try {
        if (plant.type == "pendulum") {
            plant.pendulum.validate();
        }
        if (!(controller.lambda > 0.0)) {
            throw std::invalid_argument("controller.lambda must be positive");
        }
        (void)make_controller();
        (void)make_perturbation();
        sim.validate();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::invalid_argument& ex) {
        throw ConfigError(0, "", ex.what());
    }
}

RunConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError(0, "", "cannot open config file '" + path + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string serialize_config(const RunConfig& cfg)
{
    std::ostringstream os;
    os << "format_version = " << kFormatVersion << "\n";
    if (!cfg.name.empty()) {
        os << "name = " << cfg.name << "\n";
    }
    os << "\n[plant]\n";
    os << "type = " << cfg.plant.type << "\n";
    os << "m = " << fmt(cfg.plant.pendulum.m) << "\n";
    os << "l = " << fmt(cfg.plant.pendulum.l) << "\n";
    os << "g = " << fmt(cfg.plant.pendulum.g) << "\n";
    os << "input = " << cfg.plant.input << "\n";
    os << "x1_0 = " << fmt(cfg.plant.x1_0) << "\n";
    os << "x2_0 = " << fmt(cfg.plant.x2_0) << "\n";

    const auto& c = cfg.controller;
    os << "\n[controller]\n";
    os << "type = " << to_string(c.type) << "\n";
    os << "k1 = " << fmt(c.gains.k1) << "\n";
    os << "k2 = " << fmt(c.gains.k2) << "\n";
    os << "k3 = " << fmt(c.gains.k3) << "\n";
    os << "k4 = " << fmt(c.gains.k4) << "\n";
    if (c.gains.l1) {
        os << "l1 = " << fmt(*c.gains.l1) << "\n";
    }
    if (c.gains.l2) {
        os << "l2 = " << fmt(*c.gains.l2) << "\n";
    }
    os << "lambda = " << fmt(c.lambda) << "\n";
    os << "z0 = " << fmt(c.z0) << "\n";
    os << "xhat1_0 = " << fmt(c.xhat1_0) << "\n";
    os << "xhat2_0 = " << fmt(c.xhat2_0) << "\n";

    const auto& p = cfg.perturbation;
    os << "\n[perturbation]\n";
    os << "type = " << p.type << "\n";
    os << "value = " << fmt(p.value) << "\n";
    os << "amplitude = " << fmt(p.amplitude) << "\n";
    os << "frequency = " << fmt(p.frequency) << "\n";
    os << "phase = " << fmt(p.phase) << "\n";
    os << "lipschitz = " << fmt(p.lipschitz) << "\n";
    if (!p.samples.empty()) {
        os << "samples = ";
        for (std::size_t i = 0; i < p.samples.size(); ++i) {
            os << (i ? ", " : "") << fmt(p.samples[i]);
        }
        os << "\n";
    }
    os << "sample_dt = " << fmt(p.sample_dt) << "\n";

    os << "\n[sim]\n";
    os << "method = " << to_string(cfg.sim.method) << "\n";
    os << "h = " << fmt(cfg.sim.h) << "\n";
    os << "t_end = " << fmt(cfg.sim.t_end) << "\n";
    os << "record_stride = " << cfg.sim.record_stride << "\n";

    os << "\n[output]\n";
    if (!cfg.output.trajectory.empty()) {
        os << "trajectory = " << cfg.output.trajectory << "\n";
    }
    if (!cfg.output.summary.empty()) {
        os << "summary = " << cfg.output.summary << "\n";
    }
    os << "chattering = " << (cfg.output.chattering ? "true" : "false") << "\n";
    return os.str();
}

GainSet RunConfig::effective_gains() const
{
    if (controller.lambda == 1.0) {
        return controller.gains;
    }
    return scale_gains(controller.gains, controller.lambda, false);
}

Controller RunConfig::make_controller() const
{
    return Controller(controller.type, effective_gains());
}

Perturbation RunConfig::make_perturbation() const
{
    const auto& p = perturbation;
    if (p.type == "zero") {
        return Perturbation::zero();
    }
    if (p.type == "constant") {
        return Perturbation::constant(p.value);
    }
    if (p.type == "sinusoid") {
        return Perturbation::sinusoid(p.amplitude, p.frequency, p.phase, p.lipschitz);
    }
    if (p.type == "tabulated") {
        return Perturbation::tabulated(p.samples, p.sample_dt, p.lipschitz);
    }
    throw std::invalid_argument("perturbation.type must be zero, constant, sinusoid or tabulated");
}

PlantDynamics RunConfig::make_plant() const
{
    if (plant.type == "double-integrator") {
        return make_double_integrator().dynamics();
    }
    const Plant pend = make_pendulum(plant.pendulum);
    if (plant.input == "normal-form") {
        return to_normal_form(pend, ReferenceSignal::zero(), true).dynamics();
    }
    return pend.dynamics();
}

State2 RunConfig::initial_state() const
{
    return {plant.x1_0, plant.x2_0};
}

ControllerState RunConfig::initial_controller_state() const
{
    return {controller.z0, {controller.xhat1_0, controller.xhat2_0}};
}

namespace {

constexpr std::string_view kSfPendulum = R"(# State feedback with discontinuous integral action on the pendulum.
format_version = 1
name = sf_pendulum

[plant]
type = pendulum
m = 1.1
l = 1
g = 9.815
input = direct
x1_0 = 2
x2_0 = 2

[controller]
type = dic-sf
k1 = 2
k2 = 5
k3 = 0.5
k4 = 0
z0 = 0

[perturbation]
type = sinusoid
amplitude = 0.4
frequency = 1
lipschitz = 0.4

[sim]
method = explicit-euler
h = 1e-4
t_end = 30
record_stride = 1

[output]
trajectory = sf_pendulum.csv
summary = sf_pendulum.summary
chattering = true
)";

constexpr std::string_view kOfPendulum = R"(# Output feedback: lambda-scaled controller gains plus the finite-time observer.
format_version = 1
name = of_pendulum

[plant]
type = pendulum
m = 1.1
l = 1
g = 9.815
input = direct
x1_0 = 2
x2_0 = 2

[controller]
type = dic-of
k1 = 2
k2 = 5
k3 = 0.5
k4 = 0
lambda = 3
l1 = 8        # 2 L with L = 4
l2 = 17.6     # 1.1 L^2
z0 = 0
xhat1_0 = 0
xhat2_0 = 0

[perturbation]
type = sinusoid
amplitude = 0.4
frequency = 1
lipschitz = 0.4

[sim]
method = explicit-euler
h = 1e-4
t_end = 30
record_stride = 1

[output]
trajectory = of_pendulum.csv
summary = of_pendulum.summary
chattering = true
)";

constexpr std::string_view kTwistingPendulum = R"(# Twisting baseline (discontinuous control).
format_version = 1
name = twisting_pendulum

[plant]
type = pendulum
m = 1.1
l = 1
g = 9.815
input = direct
x1_0 = 2
x2_0 = 2

[controller]
type = twisting
k1 = 1.2
k2 = 0.6

[perturbation]
type = sinusoid
amplitude = 0.4
frequency = 1
lipschitz = 0.4

[sim]
method = explicit-euler
h = 1e-4
t_end = 30
record_stride = 1

[output]
trajectory = twisting_pendulum.csv
summary = twisting_pendulum.summary
chattering = true
)";

}  // namespace

std::vector<std::string> bundled_config_names()
{
    return {"sf_pendulum", "of_pendulum", "twisting_pendulum"};
}

std::string bundled_config_text(std::string_view name)
{
    if (name == "sf_pendulum") {
        return std::string(kSfPendulum);
    }
    if (name == "of_pendulum") {
        return std::string(kOfPendulum);
    }
    if (name == "twisting_pendulum") {
        return std::string(kTwistingPendulum);
    }
    throw ConfigError(0, "", "unknown bundled config '" + std::string(name) + "'");
}

}  // namespace dic
