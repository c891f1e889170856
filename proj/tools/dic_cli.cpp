// Command-line front end. Talks to the library only through dic/dic.h.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dic/dic.h"

namespace {

// Pass msg when other library calls happened after the failing one.
int report(dic_status s, const char* msg = nullptr)
{
    if (s != DIC_OK) {
        std::cerr << "error (" << dic_status_name(s) << "): " << (msg ? msg : dic_last_error())
                  << "\n";
    }
    switch (s) {
    case DIC_OK: return 0;
    case DIC_ERR_NUMERIC: return 3;
    case DIC_ERR_CRITERION: return 4;
    default: return 2;
    }
}

std::string take(char* s)
{
    std::string out = s ? s : "";
    dic_string_free(s);
    return out;
}

bool is_bundled(const std::string& name)
{
    for (size_t i = 0; i < dic_bundled_config_count(); ++i) {
        if (name == dic_bundled_config_name(i)) {
            return true;
        }
    }
    return false;
}

// A path wins over a bundled name of the same spelling.
dic_status open_config(const std::string& ref, dic_config** out)
{
    if (!std::filesystem::exists(ref) && is_bundled(ref)) {
        return dic_config_bundled(ref.c_str(), out);
    }
    return dic_config_load(ref.c_str(), out);
}

struct ConfigHandle {
    dic_config* p = nullptr;
    ~ConfigHandle() { dic_config_free(p); }
};

std::string resolve_outdir(const std::string& flag)
{
    if (!flag.empty()) {
        return flag;
    }
    char* dir = nullptr;
    if (dic_default_output_dir(&dir) != DIC_OK) {
        return ".";
    }
    return take(dir);
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Discontinuous integral control experiments"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(dic_version()));

    std::string outdir;

    auto* run = app.add_subcommand("run", "simulate a config and write its artifacts");
    std::string run_config;
    run->add_option("config", run_config, "config file or bundled config name")->required();
    run->add_option("--outdir", outdir, "output directory (default: $DIC_OUTPUT_DIR or .)");

    auto* list = app.add_subcommand("list-configs", "print the bundled config names");
    auto* show = app.add_subcommand("show-config", "print a config in resolved form");
    std::string show_config;
    show->add_option("config", show_config, "config file or bundled config name")->required();

    auto* figs = app.add_subcommand("reproduce-figures", "write the figure datasets");
    std::size_t stride = 0;
    figs->add_option("--outdir", outdir, "output directory (default: $DIC_OUTPUT_DIR or .)");
    figs->add_option("--stride", stride, "keep every n-th integration step (default 10)");

    auto* study = app.add_subcommand("study", "precision, scaling or certificate studies");
    study->require_subcommand(1);
    study->add_option("--outdir", outdir, "output directory (default: $DIC_OUTPUT_DIR or .)");

    auto* precision = study->add_subcommand("precision", "steady-state precision against h");
    std::string precision_config = "sf_pendulum";
    std::vector<double> steps;
    precision->add_option("--config", precision_config, "config file or bundled name");
    precision->add_option("--steps", steps, "integration steps (default 1e-2 .. 1e-4)")
        ->delimiter(',');

    auto* scaling = study->add_subcommand("scaling", "lambda-scaled trajectory comparison");
    std::string scaling_config = "sf_pendulum";
    double lambda = 3.0;
    double scaling_h = 0.0;
    scaling->add_option("--config", scaling_config, "config file or bundled name");
    scaling->add_option("--lambda", lambda, "scale factor")->check(CLI::PositiveNumber);
    scaling->add_option("--step", scaling_h, "integration step (default: the config's)");

    auto* certify = study->add_subcommand("certify", "Lyapunov certificate check or search");
    dic_certify_request req;
    dic_certify_request_init(&req);
    std::string kind = "sf";
    std::optional<double> k1, k2, k3, k4, l1, l2, gamma1;
    std::size_t samples = req.samples;
    std::uint64_t seed = req.seed;
    std::size_t budget = req.budget;
    certify->add_option("--kind", kind, "sf or of")->check(CLI::IsMember({"sf", "of"}));
    certify->add_option("--L", req.L, "bound on |d rho / dt|");
    certify->add_option("--k1", k1);
    certify->add_option("--k2", k2);
    certify->add_option("--k3", k3);
    certify->add_option("--k4", k4);
    certify->add_option("--l1", l1);
    certify->add_option("--l2", l2);
    certify->add_option("--gamma1", gamma1, "check this gamma1 instead of searching");
    certify->add_option("--gamma2", req.gamma2);
    certify->add_option("--mu", req.mu);
    certify->add_option("--samples", samples);
    certify->add_option("--seed", seed);
    certify->add_option("--budget", budget, "certify calls allowed to the search");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    if (*list) {
        for (size_t i = 0; i < dic_bundled_config_count(); ++i) {
            std::cout << dic_bundled_config_name(i) << "\n";
        }
        return 0;
    }

    if (*show) {
        ConfigHandle cfg;
        if (dic_status s = open_config(show_config, &cfg.p); s != DIC_OK) {
            return report(s);
        }
        char* text = nullptr;
        if (dic_status s = dic_config_serialize(cfg.p, &text); s != DIC_OK) {
            return report(s);
        }
        std::cout << take(text);
        return 0;
    }

    const std::string dir = resolve_outdir(outdir);

    if (*run) {
        ConfigHandle cfg;
        if (dic_status s = open_config(run_config, &cfg.p); s != DIC_OK) {
            return report(s);
        }
        char* summary = nullptr;
        const dic_status s = dic_run(cfg.p, dir.c_str(), nullptr, &summary);
        if (s == DIC_OK) {
            std::cout << take(summary);
        }
        return report(s);
    }

    if (*figs) {
        const dic_status s = dic_reproduce_figures(dir.c_str(), stride);
        if (s == DIC_OK) {
            for (const char* f :
                 {"fig1_x1.csv", "fig2_x2.csv", "fig3_z.csv", "fig4_u.csv", "figures.summary"}) {
                std::cout << (std::filesystem::path(dir) / f).string() << "\n";
            }
        }
        return report(s);
    }

    if (*precision) {
        ConfigHandle cfg;
        if (dic_status s = open_config(precision_config, &cfg.p); s != DIC_OK) {
            return report(s);
        }
        dic_precision_result r{};
        const dic_status s =
            dic_study_precision(cfg.p, steps.empty() ? nullptr : steps.data(), steps.size(),
                                dir.c_str(), &r);
        if (s == DIC_OK || s == DIC_ERR_CRITERION) {
            std::cout << "slope_x1 = " << r.slope_x1 << "\nslope_x2 = " << r.slope_x2
                      << "\nin_bands = " << (r.in_bands ? "true" : "false") << "\n";
        }
        return report(s);
    }

    if (*scaling) {
        ConfigHandle cfg;
        if (dic_status s = open_config(scaling_config, &cfg.p); s != DIC_OK) {
            return report(s);
        }
        dic_scaling_result r{};
        const dic_status s = dic_study_scaling(cfg.p, lambda, scaling_h, dir.c_str(), &r);
        if (s == DIC_OK || s == DIC_ERR_CRITERION) {
            std::cout << "lambda = " << r.lambda << "\nh = " << r.h << "\nmismatch = " << r.mismatch
                      << "\npassed = " << (r.passed ? "true" : "false") << "\n";
        }
        return report(s);
    }

    if (*certify) {
        req.kind = kind.c_str();
        if (kind == "of") {
            // Output-feedback defaults: lambda = 3 scaled gains with l1 = 8, l2 = 17.6.
            req.k1 = 2.0 * std::cbrt(9.0);
            req.k2 = 5.0 * std::sqrt(3.0);
            req.k3 = 1.5;
            req.has_observer_gains = 1;
            req.l1 = 8.0;
            req.l2 = 17.6;
        }
        req.k1 = k1.value_or(req.k1);
        req.k2 = k2.value_or(req.k2);
        req.k3 = k3.value_or(req.k3);
        req.k4 = k4.value_or(req.k4);
        if (l1 || l2) {
            req.has_observer_gains = 1;
            req.l1 = l1.value_or(req.l1);
            req.l2 = l2.value_or(req.l2);
        }
        if (gamma1) {
            req.has_gamma1 = 1;
            req.gamma1 = *gamma1;
        }
        req.samples = samples;
        req.seed = seed;
        req.budget = budget;
        dic_certificate* cert = nullptr;
        const dic_status s = dic_study_certify(&req, dir.c_str(), &cert);
        const std::string err = dic_last_error();
        if (cert) {
            char* text = nullptr;
            if (dic_certificate_record(cert, &text) == DIC_OK) {
                std::cout << take(text);
            }
            dic_certificate_free(cert);
        }
        return report(s, err.c_str());
    }
    return 0;
}
