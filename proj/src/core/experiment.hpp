#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "config.hpp"
#include "lyapunov.hpp"
#include "simulator.hpp"

namespace dic {

inline constexpr std::string_view kLibraryVersion = "0.1.0";

/// Output directory from DIC_OUTPUT_DIR, else the current directory.
std::filesystem::path default_output_dir();

/// Writes through a temporary sibling and renames it into place.
/// Throws std::runtime_error on I/O failure.
void write_atomic(const std::filesystem::path& path, const std::string& content);

/// Serialized config with every section renamed to [<prefix>.<name>] and the
/// top-level keys moved to [<prefix>], so it can be embedded in another record.
std::string embedded_config(const RunConfig& cfg, const std::string& prefix = "config");

Trajectory simulate_config(const RunConfig& cfg);

/// Steady-state extras over [window_start, t_end].
struct WindowMetrics {
    double max_z_plus_rho = 0.0;
    std::optional<double> max_e1;  // observer runs only
    std::optional<double> max_e2;
};
WindowMetrics window_metrics(const Trajectory& traj, double window_start);

struct RunResult {
    Trajectory trajectory;
    SettlingReport settling;
    WindowMetrics window;
    std::optional<ChatteringReport> chattering;
    std::vector<std::filesystem::path> artifacts;
};

std::string run_summary(const RunConfig& cfg, const RunResult& result);

/// Simulates and writes the artifacts named in the output section (relative
/// paths resolve against outdir). Throws ConfigError or NumericError.
RunResult run_experiment(const RunConfig& cfg, const std::filesystem::path& outdir);

// Figure datasets. Column layouts:
//   fig1_x1.csv  t,x1_sf,x1_of,xhat1_of,x1_twisting
//   fig2_x2.csv  t,x2_sf,x2_of,xhat2_of,x2_twisting
//   fig3_z.csv   t,z_sf,z_of,minus_rho
//   fig4_u.csv   t,u_sf,u_of,u_twisting
inline constexpr std::size_t kFigureStride = 10;

struct FigureData {
    std::string fig1;
    std::string fig2;
    std::string fig3;
    std::string fig4;
    std::string manifest;
};

/// Runs the three bundled pendulum configs and assembles the figure CSVs.
FigureData figure_data(std::size_t stride = kFigureStride);
std::vector<std::filesystem::path> reproduce_figures(const std::filesystem::path& outdir,
                                                     std::size_t stride = kFigureStride);

// ---------------------------------------------------------------------------
// Studies
// ---------------------------------------------------------------------------

inline constexpr double kPrecisionSlopeX1Lo = 2.5;
inline constexpr double kPrecisionSlopeX1Hi = 3.5;
inline constexpr double kPrecisionSlopeX2Lo = 1.5;
inline constexpr double kPrecisionSlopeX2Hi = 2.5;

std::vector<double> default_precision_steps();

PrecisionStudy precision_study(const RunConfig& base, const std::vector<double>& steps,
                               double settle_tol = kStudySettleTolerance);
bool precision_in_bands(const PrecisionStudy& s);
std::string precision_record(const RunConfig& base, const PrecisionStudy& s);

inline constexpr double kScalingTolerance = 1e-9;

struct ScalingStudy {
    double lambda = 1.0;
    double h = 0.0;
    bool with_observer = false;
    double mismatch = 0.0;  // max_t |a(t) - b(t)/lambda|_inf / max_t |a(t)|_inf
    std::size_t samples = 0;
    // First time the running mismatch exceeds kScalingTolerance. Rounding
    // differences get amplified by the non-Lipschitz terms near x2 = 0 and
    // e1 = 0, so this usually marks the start of the chatter regime.
    std::optional<double> first_exceed_time;
};

/// The config's loop on the double integrator (where the scaling is exact)
/// against the same loop with scale_gains(lambda) and lambda-scaled initial
/// state, integrator, observer and perturbation. h <= 0 keeps the config step.
ScalingStudy scaling_study(const RunConfig& base, double lambda, double h = 0.0);
std::string scaling_record(const RunConfig& base, const ScalingStudy& s);

struct CertifyRequest {
    std::string kind = "sf";  // sf | of
    GainSet gains{2.0, 5.0, 0.5, 0.0, std::nullopt, std::nullopt};
    double L = 0.4;
    std::optional<double> gamma1;  // sf: direct check instead of a search
    double gamma2 = 0.01;          // of
    double mu = 100.0;             // of
    std::size_t samples = kDefaultCertSamples;
    std::uint64_t seed = 1;
    std::size_t budget = 400;  // certify calls allowed to the search
};

struct CertifyOutcome {
    CertificateReport report;
    std::optional<SearchResult> search;
};

CertifyOutcome certify_study(const CertifyRequest& req);

}  // namespace dic
