#include "experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <future>
#include <sstream>
#include <stdexcept>

namespace dic {

namespace {

std::string fmt(double v)
{
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string fmt_opt(const std::optional<double>& v)
{
    return v ? fmt(*v) : std::string("none");
}

std::filesystem::path resolve(const std::filesystem::path& outdir, const std::string& name)
{
    const std::filesystem::path p(name);
    return p.is_absolute() ? p : outdir / p;
}

}  // namespace

std::filesystem::path default_output_dir()
{
    if (const char* env = std::getenv("DIC_OUTPUT_DIR"); env && *env) {
        return env;
    }
    return ".";
}

void write_atomic(const std::filesystem::path& path, const std::string& content)
{
    namespace fs = std::filesystem;
    std::error_code ec;
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path(), ec);
        if (ec) {
            throw std::runtime_error("cannot create directory '" + path.parent_path().string() +
                                     "': " + ec.message());
        }
    }
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw std::runtime_error("cannot write '" + tmp.string() + "'");
        }
        out << content;
        out.flush();
        if (!out) {
            throw std::runtime_error("write failed for '" + tmp.string() + "'");
        }
    }
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp);
        throw std::runtime_error("cannot rename into '" + path.string() + "': " + ec.message());
    }
}

std::string embedded_config(const RunConfig& cfg, const std::string& prefix)
{
    std::istringstream in(serialize_config(cfg));
    std::ostringstream out;
    out << "[" << prefix << "]\n";
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.front() == '[') {
            out << "[" << prefix << "." << line.substr(1) << "\n";
        } else {
            out << line << "\n";
        }
    }
    return out.str();
}

Trajectory simulate_config(const RunConfig& cfg)
{
    cfg.validate();
    return simulate(cfg.make_plant(), cfg.make_controller(), cfg.make_perturbation(),
                    cfg.initial_state(), cfg.initial_controller_state(), cfg.sim);
}

WindowMetrics window_metrics(const Trajectory& traj, double window_start)
{
    WindowMetrics m;
    if (traj.has_observer) {
        m.max_e1 = 0.0;
        m.max_e2 = 0.0;
    }
    for (std::size_t i = 0; i < traj.size(); ++i) {
        if (traj.t[i] < window_start) {
            continue;
        }
        m.max_z_plus_rho = std::max(m.max_z_plus_rho, std::fabs(traj.z[i] + traj.rho[i]));
        if (traj.has_observer) {
            m.max_e1 = std::max(*m.max_e1, std::fabs(traj.xhat1[i] - traj.x1[i]));
            m.max_e2 = std::max(*m.max_e2, std::fabs(traj.xhat2[i] - traj.x2[i]));
        }
    }
    return m;
}

std::string run_summary(const RunConfig& cfg, const RunResult& r)
{
    std::ostringstream os;
    os << "format_version = " << kFormatVersion << "\n";
    os << "kind = run\n";
    os << "version = " << kLibraryVersion << "\n";
    os << "\n[settling]\n";
    os << "tolerance = " << fmt(kDefaultSettleTolerance) << "\n";
    os << "settle_time = " << fmt_opt(r.settling.settle_time) << "\n";
    os << "window_start = " << fmt(r.settling.window_start) << "\n";
    os << "sup_x1 = " << fmt(r.settling.sup_x1) << "\n";
    os << "sup_x2 = " << fmt(r.settling.sup_x2) << "\n";
    os << "nu1 = " << fmt(r.settling.nu1) << "\n";
    os << "nu2 = " << fmt(r.settling.nu2) << "\n";
    os << "max_z_plus_rho = " << fmt(r.window.max_z_plus_rho) << "\n";
    if (r.window.max_e1) {
        os << "max_e1 = " << fmt(*r.window.max_e1) << "\n";
        os << "max_e2 = " << fmt(*r.window.max_e2) << "\n";
    }
    if (r.chattering) {
        os << "\n[chattering]\n";
        os << "max_step_jump = " << fmt(r.chattering->max_step_jump) << "\n";
        os << "sign_flip_fraction = " << fmt(r.chattering->sign_flip_fraction) << "\n";
    }
    os << "\n" << embedded_config(cfg);
    return os.str();
}

RunResult run_experiment(const RunConfig& cfg, const std::filesystem::path& outdir)
{
    RunResult r;
    r.trajectory = simulate_config(cfg);
    r.settling = settling_metrics(r.trajectory);
    r.window = window_metrics(r.trajectory, r.settling.window_start);
    if (cfg.output.chattering) {
        r.chattering = chattering_metric(r.trajectory);
    }
    if (!cfg.output.trajectory.empty()) {
        const auto path = resolve(outdir, cfg.output.trajectory);
        write_atomic(path, to_csv(r.trajectory));
        r.artifacts.push_back(path);
    }
    if (!cfg.output.summary.empty()) {
        const auto path = resolve(outdir, cfg.output.summary);
        write_atomic(path, run_summary(cfg, r));
        r.artifacts.push_back(path);
    }
    return r;
}

// ---------------------------------------------------------------------------

FigureData figure_data(std::size_t stride)
{
    if (stride == 0) {
        throw std::invalid_argument("figure stride must be positive");
    }
    const auto names = bundled_config_names();
    std::vector<RunConfig> cfgs;
    for (const auto& n : names) {
        cfgs.push_back(parse_config(bundled_config_text(n)));
    }
    std::vector<std::future<Trajectory>> jobs;
    for (const auto& c : cfgs) {
        jobs.push_back(std::async(std::launch::async, [&c] { return simulate_config(c); }));
    }
    std::vector<Trajectory> tr;
    for (auto& j : jobs) {
        tr.push_back(j.get());
    }
    const Trajectory& sf = tr[0];
    const Trajectory& of = tr[1];
    const Trajectory& tw = tr[2];
    if (sf.size() != of.size() || sf.size() != tw.size()) {
        throw std::runtime_error("figure configs must share the time grid");
    }

    std::ostringstream f1, f2, f3, f4;
    f1 << "t,x1_sf,x1_of,xhat1_of,x1_twisting\n";
    f2 << "t,x2_sf,x2_of,xhat2_of,x2_twisting\n";
    f3 << "t,z_sf,z_of,minus_rho\n";
    f4 << "t,u_sf,u_of,u_twisting\n";
    for (std::size_t i = 0; i < sf.size(); i += stride) {
        const std::string t = fmt(sf.t[i]);
        f1 << t << ',' << fmt(sf.x1[i]) << ',' << fmt(of.x1[i]) << ',' << fmt(of.xhat1[i]) << ','
           << fmt(tw.x1[i]) << '\n';
        f2 << t << ',' << fmt(sf.x2[i]) << ',' << fmt(of.x2[i]) << ',' << fmt(of.xhat2[i]) << ','
           << fmt(tw.x2[i]) << '\n';
        f3 << t << ',' << fmt(sf.z[i]) << ',' << fmt(of.z[i]) << ',' << fmt(-sf.rho[i]) << '\n';
        f4 << t << ',' << fmt(sf.u[i]) << ',' << fmt(of.u[i]) << ',' << fmt(tw.u[i]) << '\n';
    }

    std::ostringstream man;
    man << "format_version = " << kFormatVersion << "\n";
    man << "kind = figures\n";
    man << "version = " << kLibraryVersion << "\n";
    man << "stride = " << stride << "\n";
    man << "\n[files]\n";
    man << "fig1_x1.csv = t,x1_sf,x1_of,xhat1_of,x1_twisting\n";
    man << "fig2_x2.csv = t,x2_sf,x2_of,xhat2_of,x2_twisting\n";
    man << "fig3_z.csv = t,z_sf,z_of,minus_rho\n";
    man << "fig4_u.csv = t,u_sf,u_of,u_twisting\n";
    for (std::size_t k = 0; k < cfgs.size(); ++k) {
        man << "\n" << embedded_config(cfgs[k], "config." + names[k]);
    }
    return {f1.str(), f2.str(), f3.str(), f4.str(), man.str()};
}

std::vector<std::filesystem::path> reproduce_figures(const std::filesystem::path& outdir,
                                                     std::size_t stride)
{
    const FigureData d = figure_data(stride);
    const std::vector<std::pair<std::string, const std::string*>> files = {
        {"fig1_x1.csv", &d.fig1}, {"fig2_x2.csv", &d.fig2},   {"fig3_z.csv", &d.fig3},
        {"fig4_u.csv", &d.fig4},  {"figures.summary", &d.manifest}};
    std::vector<std::filesystem::path> out;
    for (const auto& [name, text] : files) {
        const auto path = outdir / name;
        write_atomic(path, *text);
        out.push_back(path);
    }
    return out;
}

// ---------------------------------------------------------------------------

std::vector<double> default_precision_steps()
{
    return {1e-2, 3e-3, 1e-3, 3e-4, 1e-4};
}

PrecisionStudy precision_study(const RunConfig& base, const std::vector<double>& steps,
                               double settle_tol)
{
    base.validate();
    auto run = [&base](double h) {
        RunConfig c = base;
        c.sim.h = h;
        c.sim.record_stride = 1;
        return simulate_config(c);
    };
    return precision_scaling_study(run, steps, settle_tol);
}

bool precision_in_bands(const PrecisionStudy& s)
{
    return s.valid && !s.degenerate && s.slope_x1 >= kPrecisionSlopeX1Lo &&
           s.slope_x1 <= kPrecisionSlopeX1Hi && s.slope_x2 >= kPrecisionSlopeX2Lo &&
           s.slope_x2 <= kPrecisionSlopeX2Hi;
}

std::string precision_record(const RunConfig& base, const PrecisionStudy& s)
{
    std::ostringstream os;
    os << "format_version = " << kFormatVersion << "\n";
    os << "kind = study-precision\n";
    os << "version = " << kLibraryVersion << "\n";
    os << "\n[result]\n";
    os << "valid = " << (s.valid ? "true" : "false") << "\n";
    os << "degenerate = " << (s.degenerate ? "true" : "false") << "\n";
    if (!s.reason.empty()) {
        os << "reason = " << s.reason << "\n";
    }
    os << "slope_x1 = " << fmt(s.slope_x1) << "\n";
    os << "slope_x2 = " << fmt(s.slope_x2) << "\n";
    os << "band_x1 = " << fmt(kPrecisionSlopeX1Lo) << ", " << fmt(kPrecisionSlopeX1Hi) << "\n";
    os << "band_x2 = " << fmt(kPrecisionSlopeX2Lo) << ", " << fmt(kPrecisionSlopeX2Hi) << "\n";
    os << "in_bands = " << (precision_in_bands(s) ? "true" : "false") << "\n";
    os << "\n[runs]\n";
    for (std::size_t i = 0; i < s.steps.size(); ++i) {
        os << "h_" << i << " = " << fmt(s.steps[i]) << ", " << fmt(s.sup_x1[i]) << ", "
           << fmt(s.sup_x2[i]) << "\n";
    }
    os << "\n" << embedded_config(base);
    return os.str();
}

ScalingStudy scaling_study(const RunConfig& base, double lambda, double h)
{
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
        throw std::invalid_argument("lambda must be positive and finite");
    }
    if (base.controller.type == ControllerType::Twisting) {
        throw std::invalid_argument("the scaling study needs a DIC controller");
    }
    base.validate();
    SimConfig sim = base.sim;
    sim.record_stride = 1;
    if (h > 0.0) {
        sim.h = h;
    }
    sim.validate();

    const bool obs = base.controller.type == ControllerType::DicOutputFeedback;
    const PlantDynamics plant = make_double_integrator().dynamics();
    const GainSet g = base.effective_gains();
    const Perturbation rho = base.make_perturbation();
    const State2 x0 = base.initial_state();
    const ControllerState c0 = base.initial_controller_state();

    const State2 x0s{lambda * x0[0], lambda * x0[1]};
    const ControllerState c0s{lambda * c0.z, {lambda * c0.xhat[0], lambda * c0.xhat[1]}};

    auto fa = std::async(std::launch::async, [&] {
        return simulate(plant, Controller(base.controller.type, g), rho, x0, c0, sim);
    });
    const Trajectory b = simulate(plant, Controller(base.controller.type, scale_gains(g, lambda, obs)),
                                  rho.scaled(lambda), x0s, c0s, sim);
    const Trajectory a = fa.get();

    std::vector<const std::vector<double>*> ca = {&a.x1, &a.x2, &a.z};
    std::vector<const std::vector<double>*> cb = {&b.x1, &b.x2, &b.z};
    if (obs) {
        ca.insert(ca.end(), {&a.xhat1, &a.xhat2});
        cb.insert(cb.end(), {&b.xhat1, &b.xhat2});
    }
    double scale = 0.0;
    for (const auto* col : ca) {
        for (double v : *col) {
            scale = std::max(scale, std::fabs(v));
        }
    }
    const double denom = scale > 0.0 ? scale : 1.0;
    ScalingStudy s;
    double diff = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t c = 0; c < ca.size(); ++c) {
            diff = std::max(diff, std::fabs((*ca[c])[i] - (*cb[c])[i] / lambda));
        }
        if (!s.first_exceed_time && diff / denom > kScalingTolerance) {
            s.first_exceed_time = a.t[i];
        }
    }
    s.lambda = lambda;
    s.h = sim.h;
    s.with_observer = obs;
    s.mismatch = diff / denom;
    s.samples = a.size();
    return s;
}

std::string scaling_record(const RunConfig& base, const ScalingStudy& s)
{
    std::ostringstream os;
    os << "format_version = " << kFormatVersion << "\n";
    os << "kind = study-scaling\n";
    os << "version = " << kLibraryVersion << "\n";
    os << "\n[result]\n";
    os << "plant = double-integrator\n";
    os << "lambda = " << fmt(s.lambda) << "\n";
    os << "h = " << fmt(s.h) << "\n";
    os << "with_observer = " << (s.with_observer ? "true" : "false") << "\n";
    os << "samples = " << s.samples << "\n";
    os << "mismatch = " << fmt(s.mismatch) << "\n";
    os << "first_exceed_time = " << fmt_opt(s.first_exceed_time) << "\n";
    os << "tolerance = " << fmt(kScalingTolerance) << "\n";
    os << "passed = " << (s.mismatch <= kScalingTolerance ? "true" : "false") << "\n";
    os << "\n" << embedded_config(base);
    return os.str();
}

CertifyOutcome certify_study(const CertifyRequest& req)
{
    CertifyOutcome out;
    if (req.kind == "sf") {
        if (!(req.gains.k3 > req.L) || req.gamma1) {
            const double g1 = req.gamma1 ? *req.gamma1
                                         : 2.0 * SFCertParams::gamma1_threshold(req.gains);
            out.report = certify_sf(req.gains, req.L, g1, req.samples, req.seed);
            return out;
        }
        out.search = search_parameters(req.gains, req.L, req.budget, req.samples, req.seed);
        out.report = out.search->report;
        return out;
    }
    if (req.kind == "of") {
        OFCertParams p;
        p.gains = req.gains;
        p.gamma1 = req.gamma1 ? *req.gamma1 : 2.0 * SFCertParams::gamma1_threshold(req.gains);
        p.gamma2 = req.gamma2;
        p.mu = req.mu;
        out.report = certify_of(p, req.samples, req.seed);
        return out;
    }
    throw std::invalid_argument("certify kind must be sf or of");
}

}  // namespace dic
