#include "dic/dic.h"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>

#include "config.hpp"
#include "experiment.hpp"
#include "lyapunov.hpp"
#include "simulator.hpp"

struct dic_config {
    dic::RunConfig cfg;
};

struct dic_trajectory {
    dic::Trajectory traj;
};

struct dic_certificate {
    dic::CertificateReport report;
    std::size_t certify_calls = 0;
};

namespace {

thread_local std::string g_last_error;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

dic_status fail(dic_status s, std::string msg)
{
    g_last_error = std::move(msg);
    return s;
}

// Maps the exception in flight to a status code.
dic_status translate()
{
    try {
        throw;
    } catch (const dic::ConfigError& e) {
        return fail(DIC_ERR_CONFIG, e.what());
    } catch (const dic::NumericError& e) {
        return fail(DIC_ERR_NUMERIC, e.what());
    } catch (const std::filesystem::filesystem_error& e) {
        return fail(DIC_ERR_IO, e.what());
    } catch (const std::invalid_argument& e) {
        return fail(DIC_ERR_INVALID_ARGUMENT, e.what());
    } catch (const std::domain_error& e) {
        return fail(DIC_ERR_INVALID_ARGUMENT, e.what());
    } catch (const std::runtime_error& e) {
        return fail(DIC_ERR_IO, e.what());
    } catch (const std::exception& e) {
        return fail(DIC_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(DIC_ERR_INTERNAL, "unknown error");
    }
}

template <class F>
dic_status guarded(F&& f)
{
    g_last_error.clear();
    try {
        return f();
    } catch (...) {
        return translate();
    }
}

dic_status copy_out(const std::string& s, char** out)
{
    char* p = static_cast<char*>(std::malloc(s.size() + 1));
    if (!p) {
        return fail(DIC_ERR_INTERNAL, "out of memory");
    }
    std::memcpy(p, s.c_str(), s.size() + 1);
    *out = p;
    return DIC_OK;
}

std::filesystem::path outdir_or_default(const char* outdir)
{
    return outdir ? std::filesystem::path(outdir) : dic::default_output_dir();
}

void fill_settling(const dic::SettlingReport& s, const dic::WindowMetrics& w, dic_settling* out)
{
    out->settled = s.settle_time ? 1 : 0;
    out->settle_time = s.settle_time.value_or(kNaN);
    out->window_start = s.window_start;
    out->sup_x1 = s.sup_x1;
    out->sup_x2 = s.sup_x2;
    out->nu1 = s.nu1;
    out->nu2 = s.nu2;
    out->max_z_plus_rho = w.max_z_plus_rho;
    out->has_observer = w.max_e1 ? 1 : 0;
    out->max_e1 = w.max_e1.value_or(kNaN);
    out->max_e2 = w.max_e2.value_or(kNaN);
}

#define DIC_REQUIRE(cond, what)                                  \
    do {                                                         \
        if (!(cond)) {                                           \
            return fail(DIC_ERR_INVALID_ARGUMENT, what);         \
        }                                                        \
    } while (0)

}  // namespace

extern "C" {

const char* dic_version(void)
{
    return dic::kLibraryVersion.data();
}

const char* dic_last_error(void)
{
    return g_last_error.c_str();
}

const char* dic_status_name(dic_status s)
{
    switch (s) {
    case DIC_OK: return "ok";
    case DIC_ERR_INVALID_ARGUMENT: return "invalid argument";
    case DIC_ERR_CONFIG: return "config error";
    case DIC_ERR_NUMERIC: return "numeric failure";
    case DIC_ERR_CRITERION: return "criterion failure";
    case DIC_ERR_IO: return "i/o error";
    case DIC_ERR_INTERNAL: return "internal error";
    }
    return "unknown status";
}

void dic_string_free(char* s)
{
    std::free(s);
}

dic_status dic_default_output_dir(char** out)
{
    DIC_REQUIRE(out, "out is NULL");
    return guarded([&] { return copy_out(dic::default_output_dir().string(), out); });
}

dic_status dic_config_parse(const char* text, dic_config** out)
{
    DIC_REQUIRE(text && out, "text or out is NULL");
    return guarded([&] {
        *out = new dic_config{dic::parse_config(text)};
        return DIC_OK;
    });
}

dic_status dic_config_load(const char* path, dic_config** out)
{
    DIC_REQUIRE(path && out, "path or out is NULL");
    return guarded([&] {
        *out = new dic_config{dic::load_config(path)};
        return DIC_OK;
    });
}

size_t dic_bundled_config_count(void)
{
    return dic::bundled_config_names().size();
}

const char* dic_bundled_config_name(size_t i)
{
    static const std::vector<std::string> names = dic::bundled_config_names();
    return i < names.size() ? names[i].c_str() : nullptr;
}

dic_status dic_config_bundled(const char* name, dic_config** out)
{
    DIC_REQUIRE(name && out, "name or out is NULL");
    return guarded([&] {
        *out = new dic_config{dic::parse_config(dic::bundled_config_text(name))};
        return DIC_OK;
    });
}

dic_status dic_config_serialize(const dic_config* cfg, char** out)
{
    DIC_REQUIRE(cfg && out, "cfg or out is NULL");
    return guarded([&] { return copy_out(dic::serialize_config(cfg->cfg), out); });
}

dic_status dic_config_set_step(dic_config* cfg, double h)
{
    DIC_REQUIRE(cfg, "cfg is NULL");
    return guarded([&] {
        dic::RunConfig c = cfg->cfg;
        c.sim.h = h;
        try {
            c.validate();
        } catch (const dic::ConfigError& e) {
            return fail(DIC_ERR_INVALID_ARGUMENT, e.what());
        }
        cfg->cfg = c;
        return DIC_OK;
    });
}

void dic_config_free(dic_config* cfg)
{
    delete cfg;
}

dic_status dic_simulate(const dic_config* cfg, dic_trajectory** out)
{
    DIC_REQUIRE(cfg && out, "cfg or out is NULL");
    return guarded([&] {
        *out = new dic_trajectory{dic::simulate_config(cfg->cfg)};
        return DIC_OK;
    });
}

size_t dic_trajectory_size(const dic_trajectory* tr)
{
    return tr ? tr->traj.size() : 0;
}

int dic_trajectory_has_observer(const dic_trajectory* tr)
{
    return tr && tr->traj.has_observer ? 1 : 0;
}

dic_status dic_trajectory_column(const dic_trajectory* tr, dic_column col, const double** data,
                                 size_t* n)
{
    DIC_REQUIRE(tr && data && n, "tr, data or n is NULL");
    const dic::Trajectory& t = tr->traj;
    const std::vector<double>* v = nullptr;
    switch (col) {
    case DIC_COL_T: v = &t.t; break;
    case DIC_COL_X1: v = &t.x1; break;
    case DIC_COL_X2: v = &t.x2; break;
    case DIC_COL_XHAT1: v = &t.xhat1; break;
    case DIC_COL_XHAT2: v = &t.xhat2; break;
    case DIC_COL_Z: v = &t.z; break;
    case DIC_COL_U: v = &t.u; break;
    case DIC_COL_RHO: v = &t.rho; break;
    }
    DIC_REQUIRE(v, "unknown column");
    *data = v->data();
    *n = v->size();
    return DIC_OK;
}

dic_status dic_trajectory_csv(const dic_trajectory* tr, char** out)
{
    DIC_REQUIRE(tr && out, "tr or out is NULL");
    return guarded([&] { return copy_out(dic::to_csv(tr->traj), out); });
}

dic_status dic_trajectory_settling(const dic_trajectory* tr, double tol, dic_settling* out)
{
    DIC_REQUIRE(tr && out, "tr or out is NULL");
    return guarded([&] {
        const auto s = dic::settling_metrics(tr->traj, tol > 0.0 ? tol : dic::kDefaultSettleTolerance);
        fill_settling(s, dic::window_metrics(tr->traj, s.window_start), out);
        return DIC_OK;
    });
}

dic_status dic_trajectory_chattering(const dic_trajectory* tr, dic_chattering* out)
{
    DIC_REQUIRE(tr && out, "tr or out is NULL");
    return guarded([&] {
        const auto c = dic::chattering_metric(tr->traj);
        out->max_step_jump = c.max_step_jump;
        out->sign_flip_fraction = c.sign_flip_fraction;
        return DIC_OK;
    });
}

void dic_trajectory_free(dic_trajectory* tr)
{
    delete tr;
}

dic_status dic_run(const dic_config* cfg, const char* outdir, dic_settling* settling,
                   char** summary)
{
    DIC_REQUIRE(cfg, "cfg is NULL");
    return guarded([&] {
        const auto r = dic::run_experiment(cfg->cfg, outdir_or_default(outdir));
        if (settling) {
            fill_settling(r.settling, r.window, settling);
        }
        if (summary) {
            return copy_out(dic::run_summary(cfg->cfg, r), summary);
        }
        return DIC_OK;
    });
}

dic_status dic_reproduce_figures(const char* outdir, size_t stride)
{
    return guarded([&] {
        dic::reproduce_figures(outdir_or_default(outdir), stride ? stride : dic::kFigureStride);
        return DIC_OK;
    });
}

dic_status dic_study_precision(const dic_config* cfg, const double* steps, size_t n_steps,
                               const char* outdir, dic_precision_result* out)
{
    DIC_REQUIRE(cfg && out, "cfg or out is NULL");
    DIC_REQUIRE(steps || n_steps == 0, "steps is NULL");
    return guarded([&] {
        const std::vector<double> h = steps && n_steps ? std::vector<double>(steps, steps + n_steps)
                                                       : dic::default_precision_steps();
        const auto s = dic::precision_study(cfg->cfg, h);
        out->slope_x1 = s.slope_x1;
        out->slope_x2 = s.slope_x2;
        out->valid = s.valid ? 1 : 0;
        out->degenerate = s.degenerate ? 1 : 0;
        out->in_bands = dic::precision_in_bands(s) ? 1 : 0;
        if (outdir) {
            dic::write_atomic(std::filesystem::path(outdir) / "study_precision.summary",
                              dic::precision_record(cfg->cfg, s));
        }
        if (!out->in_bands) {
            return fail(DIC_ERR_CRITERION, s.reason.empty() ? "precision slopes outside bands"
                                                            : "precision study: " + s.reason);
        }
        return DIC_OK;
    });
}

dic_status dic_study_scaling(const dic_config* cfg, double lambda, double h, const char* outdir,
                             dic_scaling_result* out)
{
    DIC_REQUIRE(cfg && out, "cfg or out is NULL");
    return guarded([&] {
        const auto s = dic::scaling_study(cfg->cfg, lambda, h);
        out->lambda = s.lambda;
        out->h = s.h;
        out->mismatch = s.mismatch;
        out->samples = s.samples;
        out->with_observer = s.with_observer ? 1 : 0;
        out->passed = s.mismatch <= dic::kScalingTolerance ? 1 : 0;
        if (outdir) {
            dic::write_atomic(std::filesystem::path(outdir) / "study_scaling.summary",
                              dic::scaling_record(cfg->cfg, s));
        }
        if (!out->passed) {
            return fail(DIC_ERR_CRITERION, "scaling mismatch above tolerance");
        }
        return DIC_OK;
    });
}

void dic_certify_request_init(dic_certify_request* req)
{
    if (!req) {
        return;
    }
    const dic::CertifyRequest d;
    *req = dic_certify_request{};
    req->kind = "sf";
    req->k1 = d.gains.k1;
    req->k2 = d.gains.k2;
    req->k3 = d.gains.k3;
    req->k4 = d.gains.k4;
    req->L = d.L;
    req->gamma2 = d.gamma2;
    req->mu = d.mu;
    req->samples = d.samples;
    req->seed = d.seed;
    req->budget = d.budget;
}

dic_status dic_study_certify(const dic_certify_request* req, const char* outdir,
                             dic_certificate** out)
{
    DIC_REQUIRE(req && out, "req or out is NULL");
    return guarded([&] {
        dic::CertifyRequest r;
        r.kind = req->kind ? req->kind : "sf";
        r.gains = dic::GainSet{req->k1, req->k2, req->k3, req->k4, std::nullopt, std::nullopt};
        if (req->has_observer_gains) {
            r.gains.l1 = req->l1;
            r.gains.l2 = req->l2;
        }
        r.L = req->L;
        if (req->has_gamma1) {
            r.gamma1 = req->gamma1;
        }
        r.gamma2 = req->gamma2;
        r.mu = req->mu;
        r.samples = req->samples;
        r.seed = req->seed;
        r.budget = req->budget;
        const auto o = dic::certify_study(r);
        auto* c = new dic_certificate{o.report, o.search ? o.search->certify_calls : 0};
        *out = c;
        if (outdir) {
            dic::write_atomic(std::filesystem::path(outdir) / "study_certify.summary",
                              dic::certificate_record(c->report));
        }
        if (!c->report.passed) {
            return fail(DIC_ERR_CRITERION, "certificate failed: " + c->report.reason);
        }
        return DIC_OK;
    });
}

dic_status dic_certificate_info_get(const dic_certificate* c, dic_certificate_info* out)
{
    DIC_REQUIRE(c && out, "c or out is NULL");
    const auto& r = c->report;
    out->passed = r.passed ? 1 : 0;
    out->min_V = r.min_V;
    out->max_Vdot = r.max_Vdot;
    out->kappa = r.kappa;
    out->samples = r.samples;
    out->seed = r.seed;
    out->k1 = r.gains.k1;
    out->k2 = r.gains.k2;
    out->k3 = r.gains.k3;
    out->k4 = r.gains.k4;
    out->L = r.L;
    out->state_scale = r.state_scale;
    out->gamma1 = r.gamma1;
    out->gamma12 = r.gamma12;
    out->gamma2 = r.gamma2;
    out->mu = r.mu;
    out->certify_calls = c->certify_calls;
    return DIC_OK;
}

dic_status dic_certificate_reason(const dic_certificate* c, char** out)
{
    DIC_REQUIRE(c && out, "c or out is NULL");
    return guarded([&] { return copy_out(c->report.reason, out); });
}

dic_status dic_certificate_summary(const dic_certificate* c, char** out)
{
    DIC_REQUIRE(c && out, "c or out is NULL");
    return guarded([&] { return copy_out(dic::certificate_summary(c->report), out); });
}

dic_status dic_certificate_record(const dic_certificate* c, char** out)
{
    DIC_REQUIRE(c && out, "c or out is NULL");
    return guarded([&] { return copy_out(dic::certificate_record(c->report), out); });
}

dic_status dic_certificate_value(const dic_certificate* c, const double x0[3], double* V)
{
    DIC_REQUIRE(c && x0 && V, "c, x0 or V is NULL");
    return guarded([&] {
        try {
            *V = c->report.value_at({x0[0], x0[1], x0[2]});
        } catch (const std::logic_error& e) {
            return fail(DIC_ERR_INVALID_ARGUMENT, e.what());
        }
        return DIC_OK;
    });
}

dic_status dic_certificate_settling_bound(const dic_certificate* c, const double x0[3], double* T)
{
    DIC_REQUIRE(c && x0 && T, "c, x0 or T is NULL");
    return guarded([&] {
        try {
            *T = c->report.settling_bound_at({x0[0], x0[1], x0[2]});
        } catch (const std::logic_error& e) {
            return fail(DIC_ERR_INVALID_ARGUMENT, e.what());
        }
        return DIC_OK;
    });
}

void dic_certificate_free(dic_certificate* c)
{
    delete c;
}

}  // extern "C"
