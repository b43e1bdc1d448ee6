#ifndef WCL_EXPERIMENT_HPP
#define WCL_EXPERIMENT_HPP

// Experiment orchestration behind the command-line tool.
//
// A task is described by a small JSON config ("wcl-config-v1") naming one
// command and its parameters.  Parsing is strict: unknown fields are
// rejected, and the normalized form (to_json) round-trips byte-identically,
// so configs can serve as golden files.  A sweep config holds a list of
// task configs and runs them concurrently; reports are merged in config
// order, never completion order, and every primary report depends only on
// the config, not on thread counts.  Wall-clock metadata goes into a
// .meta.json sidecar next to each report, never into the report itself.

#include "wcl/analysis.hpp"
#include "wcl/open_map.hpp"
#include "wcl/res1d.hpp"
#include "wcl/thermo.hpp"
#include "wcl/transfer_matrix.hpp"
#include "wcl/trapped_set.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace wcl {

enum class Command {
    classical_dim,
    pressure,
    rate_function,
    baker_spectrum,
    damped_spectrum,
    weyl_fit,
    gap_report,
    concentration,
    ld_profile,
    resonance_1d,
    sweep,
};

std::string command_name(Command c);
Command command_from_name(const std::string& name);

enum class Res1dMethod { cap, scaling, oracle };

struct ExperimentConfig {
    Command command = Command::pressure;

    // map-side tasks
    OpenMapSpec map;
    std::optional<DampingField> damping;
    std::size_t N = 0;                  // single-spectrum commands
    std::vector<std::size_t> N_ladder;  // ladder commands
    double phase_a = 0.0, phase_b = 0.0;

    // classical-dim
    TrapDirection direction = TrapDirection::full;
    int depth_min = 1, depth_max = 6;
    std::uint64_t cell_cap = 10'000'000;

    // thermodynamic quantities
    double s = 0.5;
    double beta = 1.0;
    int T = 20;
    std::uint64_t word_cap = 10'000'000;
    std::vector<double> alpha_grid;
    RateMethod rate_method = RateMethod::automatic;
    double window = 0.0;  // empirical histogram half-width; 0 = default
    LdTail tail = LdTail::below;

    // counting
    double r = 0.5;
    std::vector<double> eps_grid;

    // resonance-1d
    Potential1D potential;
    Res1dMethod method = Res1dMethod::cap;
    Grid1D grid;  // L, n, hbar
    double eta = 1.0, r0 = 1.0;
    double theta = 0.1;
    TmBox box;
    SheetBranch sheet = SheetBranch::second_sheet;
    double e_lo = 0.0, e_hi = 0.0;  // both 0 = auto: [0, max potential height]
    double max_width = 1.0;         // in units of hbar
    std::size_t count = 0;          // keep the k narrowest; 0 = all
    bool stability = false;         // re-run with perturbed absorber/angle
    double stability_rel_tol = 0.01;

    int threads = 0;  // task pool cap; 0 = WCL_THREADS or hardware default

    std::string output;  // primary report path; empty = standard output

    std::vector<ExperimentConfig> tasks;  // sweep only

    void validate() const;  // std::invalid_argument on bad configs
    ojson to_json() const;  // normalized form; round-trips byte-identically
    ojson to_json_core() const;  // to_json minus output and threads
};

// Strict loaders; any malformed document is a std::invalid_argument.
ExperimentConfig config_from_json(const ojson& j);
ExperimentConfig config_from_json_text(const std::string& text);

struct TaskOutcome {
    ojson report;                       // primary report document
    std::string csv;                    // tabular mirror; empty for scalars
    std::vector<std::string> warnings;  // soft diagnostics, sidecar only
};

// Runs one non-sweep task on a validated config.
TaskOutcome run_task(const ExperimentConfig& config);

// Writes the report to config.output plus a CSV sibling (.csv) when the
// outcome has one and a .meta.json sidecar (timestamps, thread settings,
// warnings); all writes are atomic.  With an empty output path the report
// text goes to *stdout_text instead and nothing touches the filesystem.
// Returns the paths written.
std::vector<std::string> write_outputs(const ExperimentConfig& config,
                                       const TaskOutcome& outcome,
                                       double elapsed_seconds,
                                       std::string* stdout_text);

struct SweepResult {
    ojson summary;
    std::string summary_csv;
    int exit_code = 0;  // first failing task's code in config order, else 0
};

// Runs config.tasks through a pool capped by threads and WCL_THREADS,
// writing each task's outputs as it completes; the summary lists every
// task in config order with its status.
SweepResult run_sweep(const ExperimentConfig& config);

// Exit code for an exception thrown by config parsing or a task: 2 for
// config errors, 3 for numerical failures, 4 for capacity overruns.
int exit_code_for(const std::exception& e);

// Effective pool width after the WCL_THREADS cap and the task count.
int task_pool_threads(int requested, std::size_t task_count);

} // namespace wcl

#endif
