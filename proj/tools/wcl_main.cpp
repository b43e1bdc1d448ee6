// wcl: command-line front end over the experiment runner.
//
// Every subcommand can be driven by flags or by --config FILE holding a
// normalized "wcl-config-v1" document; --emit-config PATH writes that
// normalized form (use "-" for standard output) without running, which is
// also how sweep task lists are authored.  Reports are deterministic: the
// primary JSON and CSV files depend only on the config, wall-clock metadata
// goes to the .meta.json sidecar, and WCL_THREADS only caps the task pool.
//
// Exit codes: 0 success, 2 config error, 3 numerical failure, 4 capacity.

#include "wcl/errors.hpp"
#include "wcl/experiment.hpp"
#include "wcl/parallel.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <string>
#include <utility>
#include <vector>

using namespace wcl;

namespace {

[[noreturn]] void bad(const std::string& what) { throw std::invalid_argument(what); }

// ---- flag-syntax parsers: comma lists, lo..hi ranges, lo:hi:count grids --

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = s.find(sep, start);
        if (pos == std::string::npos) {
            parts.push_back(s.substr(start));
            return parts;
        }
        parts.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
}

double parse_one_double(const std::string& tok, const char* what) {
    try {
        std::size_t used = 0;
        const double v = std::stod(tok, &used);
        if (used != tok.size()) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        bad(std::string(what) + ": \"" + tok + "\" is not a number");
    }
}

long long parse_one_int(const std::string& tok, const char* what) {
    try {
        std::size_t used = 0;
        const long long v = std::stoll(tok, &used);
        if (used != tok.size()) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        bad(std::string(what) + ": \"" + tok + "\" is not an integer");
    }
}

std::vector<double> parse_doubles(const std::string& s, const char* what) {
    if (s.empty()) bad(std::string(what) + ": empty list");
    std::vector<double> out;
    for (const std::string& tok : split(s, ','))
        out.push_back(parse_one_double(tok, what));
    return out;
}

std::vector<int> parse_ints(const std::string& s, const char* what) {
    if (s.empty()) bad(std::string(what) + ": empty list");
    std::vector<int> out;
    for (const std::string& tok : split(s, ','))
        out.push_back(int(parse_one_int(tok, what)));
    return out;
}

std::vector<std::size_t> parse_sizes(const std::string& s, const char* what) {
    std::vector<std::size_t> out;
    for (long long v : parse_ints(s, what)) {
        if (v < 0) bad(std::string(what) + ": negative entry");
        out.push_back(std::size_t(v));
    }
    return out;
}

// "1..8" -> [1, 8]
std::pair<int, int> parse_range(const std::string& s, const char* what) {
    const std::size_t pos = s.find("..");
    if (pos == std::string::npos)
        bad(std::string(what) + ": expected lo..hi, got \"" + s + "\"");
    return {int(parse_one_int(s.substr(0, pos), what)),
            int(parse_one_int(s.substr(pos + 2), what))};
}

std::pair<double, double> parse_pair2(const std::string& s, const char* what) {
    const std::vector<double> v = parse_doubles(s, what);
    if (v.size() != 2) bad(std::string(what) + ": expected two values");
    return {v[0], v[1]};
}

// comma list, or lo:hi:count for a uniform grid
std::vector<double> parse_grid(const std::string& s, const char* what) {
    if (s.find(':') == std::string::npos) return parse_doubles(s, what);
    const std::vector<std::string> parts = split(s, ':');
    if (parts.size() != 3)
        bad(std::string(what) + ": expected lo:hi:count, got \"" + s + "\"");
    const double lo = parse_one_double(parts[0], what);
    const double hi = parse_one_double(parts[1], what);
    const long long count = parse_one_int(parts[2], what);
    if (count < 2) bad(std::string(what) + ": grid needs at least 2 points");
    std::vector<double> out;
    out.reserve(std::size_t(count));
    for (long long i = 0; i < count; ++i)
        out.push_back(lo + (hi - lo) * double(i) / double(count - 1));
    return out;
}

// ---- flag storage --------------------------------------------------------

struct Flags {
    std::string config_path, emit_config, output;
    int threads = 0;

    int M = 0;
    std::string keep;
    std::string phases = "0,0";
    std::size_t N = 0;
    std::string n_ladder;

    std::string depths = "1..6";
    std::string direction = "full";
    std::uint64_t cell_cap = 10'000'000;

    double s = 0.5;
    std::string b, damping_samples;
    double beta = 1.0;
    int T = -1;  // -1 keeps the per-command default
    std::uint64_t word_cap = 10'000'000;
    std::string alphas;
    std::string method;
    double rate_window = 0.0;
    std::string tail = "below";

    double r = 0.5;
    std::string eps;

    std::string potential = "gaussian";
    std::string centers, heights, widths, edges;
    double hbar = 0.0;
    double L = 10.0;
    std::size_t n = 400;
    double eta = 1.0, r0 = 0.0;
    double theta = 0.1;
    std::string box;
    std::string sheet = "second";
    std::string window1d;
    double max_width = 1.0;
    std::size_t count = 0;
    bool stability = false;
    double stability_rel_tol = 0.01;

    std::string sweep_file;
};

// ---- config construction from flags -------------------------------------

OpenMapSpec flags_map(const Flags& f, CLI::App* sub) {
    if (sub->count("--keep") > 0)
        return OpenMapSpec(f.M, parse_ints(f.keep, "--keep"));
    return closed_map(f.M);
}

DampingField flags_damping(const Flags& f, CLI::App* sub) {
    if (sub->count("--b") > 0 && sub->count("--damping-samples") > 0)
        bad("--b and --damping-samples are mutually exclusive");
    if (sub->count("--damping-samples") > 0)
        return DampingField::sampled(
            parse_doubles(f.damping_samples, "--damping-samples"));
    if (sub->count("--b") == 0) bad("a damping field is required: pass --b");
    return DampingField::per_branch(parse_doubles(f.b, "--b"));
}

Potential1D flags_potential(const Flags& f) {
    if (f.potential == "gaussian") {
        const std::vector<double> cs = parse_doubles(f.centers, "--centers");
        const std::vector<double> hs = parse_doubles(f.heights, "--heights");
        const std::vector<double> ws = parse_doubles(f.widths, "--widths");
        if (cs.size() != hs.size() || cs.size() != ws.size())
            bad("gaussian potential needs equal-length --centers, --heights, --widths");
        std::vector<GaussianBump> bumps;
        for (std::size_t i = 0; i < cs.size(); ++i)
            bumps.push_back({cs[i], hs[i], ws[i]});
        return Potential1D::gaussian(std::move(bumps));
    }
    if (f.potential == "piecewise")
        return Potential1D::piecewise(parse_doubles(f.edges, "--edges"),
                                      parse_doubles(f.heights, "--heights"));
    bad("--potential must be gaussian or piecewise");
}

ExperimentConfig flags_to_config(const std::string& name, const Flags& f,
                                 CLI::App* sub) {
    ExperimentConfig c;
    c.command = command_from_name(name);
    c.threads = f.threads;
    c.output = f.output;

    auto phases = parse_pair2(f.phases, "--phases");
    c.phase_a = phases.first;
    c.phase_b = phases.second;

    switch (c.command) {
        case Command::classical_dim: {
            c.map = flags_map(f, sub);
            if (f.direction == "forward") c.direction = TrapDirection::forward;
            else if (f.direction == "backward") c.direction = TrapDirection::backward;
            else if (f.direction == "full") c.direction = TrapDirection::full;
            else bad("--direction must be forward, backward, or full");
            auto [lo, hi] = parse_range(f.depths, "--depths");
            c.depth_min = lo;
            c.depth_max = hi;
            c.cell_cap = f.cell_cap;
            break;
        }
        case Command::pressure:
            c.map = flags_map(f, sub);
            c.s = f.s;
            if (sub->count("--b") > 0 || sub->count("--damping-samples") > 0) {
                c.damping = flags_damping(f, sub);
                c.beta = f.beta;
            }
            c.T = f.T >= 0 ? f.T : 20;
            c.word_cap = f.word_cap;
            break;

        case Command::rate_function:
            c.map = flags_map(f, sub);
            c.damping = flags_damping(f, sub);
            c.alpha_grid = parse_grid(f.alphas, "--alphas");
            if (!f.method.empty()) {
                if (f.method == "auto" || f.method == "automatic")
                    c.rate_method = RateMethod::automatic;
                else if (f.method == "legendre") c.rate_method = RateMethod::legendre;
                else if (f.method == "empirical") c.rate_method = RateMethod::empirical;
                else bad("--method must be auto, legendre, or empirical");
            }
            c.T = f.T >= 0 ? f.T : 16;
            c.window = f.rate_window;
            c.word_cap = f.word_cap;
            break;

        case Command::baker_spectrum:
            c.map = flags_map(f, sub);
            c.N = f.N;
            break;

        case Command::damped_spectrum:
            c.map = flags_map(f, sub);
            c.damping = flags_damping(f, sub);
            c.N = f.N;
            break;

        case Command::weyl_fit:
            c.map = flags_map(f, sub);
            c.N_ladder = parse_sizes(f.n_ladder, "--N-ladder");
            c.r = f.r;
            break;

        case Command::gap_report:
            c.map = flags_map(f, sub);
            if (sub->count("--b") > 0 || sub->count("--damping-samples") > 0)
                c.damping = flags_damping(f, sub);
            c.N_ladder = parse_sizes(f.n_ladder, "--N-ladder");
            c.T = f.T >= 0 ? f.T : 20;
            c.word_cap = f.word_cap;
            break;

        case Command::concentration:
            c.map = flags_map(f, sub);
            c.damping = flags_damping(f, sub);
            c.N_ladder = parse_sizes(f.n_ladder, "--N-ladder");
            c.eps_grid = parse_grid(f.eps, "--eps");
            break;

        case Command::ld_profile:
            c.map = flags_map(f, sub);
            c.damping = flags_damping(f, sub);
            c.N_ladder = parse_sizes(f.n_ladder, "--N-ladder");
            c.alpha_grid = parse_grid(f.alphas, "--alphas");
            if (f.tail == "below") c.tail = LdTail::below;
            else if (f.tail == "above") c.tail = LdTail::above;
            else bad("--tail must be below or above");
            if (!f.method.empty()) {
                if (f.method == "auto" || f.method == "automatic")
                    c.rate_method = RateMethod::automatic;
                else if (f.method == "legendre") c.rate_method = RateMethod::legendre;
                else if (f.method == "empirical") c.rate_method = RateMethod::empirical;
                else bad("--method must be auto, legendre, or empirical");
            }
            c.T = f.T >= 0 ? f.T : 16;
            c.window = f.rate_window;
            c.word_cap = f.word_cap;
            break;

        case Command::resonance_1d: {
            if (sub->count("--method") == 0) bad("resonance-1d: --method is required");
            if (sub->count("--hbar") == 0) bad("resonance-1d: --hbar is required");
            c.potential = flags_potential(f);
            if (f.method == "cap") c.method = Res1dMethod::cap;
            else if (f.method == "scaling") c.method = Res1dMethod::scaling;
            else if (f.method == "oracle") c.method = Res1dMethod::oracle;
            else bad("--method must be cap, scaling, or oracle");
            c.grid.hbar = f.hbar;
            c.grid.L = f.L;
            c.grid.n = f.n;
            c.eta = f.eta;
            c.r0 = f.r0;
            c.theta = f.theta;
            if (c.method == Res1dMethod::oracle) {
                if (sub->count("--box") == 0) bad("oracle: --box is required");
                const std::vector<double> v = parse_doubles(f.box, "--box");
                if (v.size() != 4) bad("--box needs re_lo,re_hi,im_lo,im_hi");
                c.box = TmBox{v[0], v[1], v[2], v[3]};
                if (f.sheet == "second" || f.sheet == "second_sheet")
                    c.sheet = SheetBranch::second_sheet;
                else if (f.sheet == "physical" || f.sheet == "physical_sheet")
                    c.sheet = SheetBranch::physical_sheet;
                else bad("--sheet must be second or physical");
            } else if (!f.window1d.empty()) {
                auto [lo, hi] = parse_pair2(f.window1d, "--window");
                c.e_lo = lo;
                c.e_hi = hi;
            }
            c.max_width = f.max_width;
            c.count = f.count;
            c.stability = f.stability;
            c.stability_rel_tol = f.stability_rel_tol;
            break;
        }

        case Command::sweep:
            bad("sweep is driven by a config file");
    }

    c.validate();
    return c;
}

// ---- config file loading -------------------------------------------------

std::string read_config_file(const std::string& path) {
    try {
        return read_file(path);
    } catch (const std::exception& e) {
        bad(std::string("config: ") + e.what());
    }
}

// With --config, task flags would be silently ignored; reject them instead.
void reject_task_flags(CLI::App* sub) {
    for (const CLI::Option* opt : sub->get_options()) {
        const std::string name = opt->get_name();
        if (name == "--config" || name == "--emit-config" || name == "--output" ||
            name == "--threads" || name == "--help" || name == "--kernel-threads")
            continue;
        if (opt->count() > 0)
            bad("--config replaces task flags; drop " + name);
    }
}

ExperimentConfig build_config(const std::string& name, Flags& f, CLI::App* sub) {
    if (!f.config_path.empty()) {
        reject_task_flags(sub);
        ExperimentConfig c = config_from_json_text(read_config_file(f.config_path));
        if (command_name(c.command) != name)
            bad("config command \"" + command_name(c.command) +
                "\" does not match subcommand \"" + name + "\"");
        if (sub->count("--output") > 0) c.output = f.output;
        if (sub->count("--threads") > 0) c.threads = f.threads;
        c.validate();
        return c;
    }
    if (name == "sweep") {
        if (f.sweep_file.empty()) bad("sweep: pass a config file");
        ExperimentConfig c = config_from_json_text(read_config_file(f.sweep_file));
        if (c.command != Command::sweep) bad("sweep: config command must be sweep");
        if (sub->count("--output") > 0) c.output = f.output;
        if (sub->count("--threads") > 0) c.threads = f.threads;
        c.validate();
        return c;
    }
    return flags_to_config(name, f, sub);
}

// ---- output --------------------------------------------------------------

void print_error(int code, const std::string& what) {
    ojson err;
    err["schema"] = "wcl-error-v1";
    ojson inner;
    inner["type"] = code == 2 ? "config" : code == 4 ? "capacity" : "numerical";
    inner["what"] = what;
    err["error"] = std::move(inner);
    std::fputs(json_emit(err).c_str(), stderr);
}

int run(const std::string& name, Flags& f, CLI::App* sub) {
    ExperimentConfig cfg = build_config(name, f, sub);

    if (sub->count("--emit-config") > 0) {
        const std::string text = json_emit(cfg.to_json());
        if (f.emit_config == "-")
            std::fputs(text.c_str(), stdout);
        else
            write_file_atomic(f.emit_config, text);
        return 0;
    }

    const auto t0 = std::chrono::steady_clock::now();
    if (cfg.command == Command::sweep) {
        SweepResult result = run_sweep(cfg);
        const double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                .count();
        TaskOutcome outcome{std::move(result.summary),
                            std::move(result.summary_csv),
                            {}};
        std::string text;
        write_outputs(cfg, outcome, elapsed, &text);
        if (!text.empty()) std::fputs(text.c_str(), stdout);
        return result.exit_code;
    }

    const TaskOutcome outcome = run_task(cfg);
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::string text;
    write_outputs(cfg, outcome, elapsed, &text);
    for (const std::string& wmsg : outcome.warnings)
        std::fprintf(stderr, "warning: %s\n", wmsg.c_str());
    if (!text.empty()) std::fputs(text.c_str(), stdout);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"wcl: open quantum maps, damped propagators, and 1D resonances"};
    app.require_subcommand(1);

    int kernel_threads_opt = 1;
    app.add_option("--kernel-threads", kernel_threads_opt,
                   "OpenMP threads inside compute kernels; results are "
                   "bit-identical at any setting");

    Flags f;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", f.config_path,
                        "JSON config file replacing the task flags");
        sub->add_option("--emit-config", f.emit_config,
                        "write the normalized config here (\"-\" = stdout) and exit");
        sub->add_option("-o,--output", f.output,
                        "primary report path; CSV and .meta.json land beside it");
        sub->add_option("--threads", f.threads, "task pool cap (0 = WCL_THREADS)");
    };
    auto add_map = [&](CLI::App* sub) {
        sub->add_option("--M", f.M, "branch count");
        sub->add_option("--keep", f.keep, "kept branches, e.g. 0,2 (default: all)");
        sub->add_option("--phases", f.phases, "boundary phases a,b in [0,1)");
    };

    CLI::App* cd = app.add_subcommand("classical-dim",
                                      "box dimension of a trapped set");
    add_common(cd);
    add_map(cd);
    cd->add_option("--direction", f.direction, "forward, backward, or full");
    cd->add_option("--depths", f.depths, "fit depth range lo..hi");
    cd->add_option("--cell-cap", f.cell_cap, "cell enumeration cap");

    CLI::App* pr = app.add_subcommand("pressure",
                                      "topological pressure, orbit sum vs closed form");
    add_common(pr);
    add_map(pr);
    pr->add_option("--s", f.s, "coefficient of the expansion potential");
    pr->add_option("--b", f.b, "per-branch damping constants");
    pr->add_option("--damping-samples", f.damping_samples,
                   "sampled damping field on a uniform grid");
    pr->add_option("--beta", f.beta, "damping coefficient");
    pr->add_option("--T", f.T, "word length");
    pr->add_option("--word-cap", f.word_cap, "orbit enumeration cap");

    CLI::App* rf = app.add_subcommand("rate-function",
                                      "large-deviation rate function of the damping");
    add_common(rf);
    add_map(rf);
    rf->add_option("--b", f.b, "per-branch damping constants");
    rf->add_option("--damping-samples", f.damping_samples, "sampled damping field");
    rf->add_option("--alphas", f.alphas, "alpha list or lo:hi:count grid");
    rf->add_option("--method", f.method, "auto, legendre, or empirical");
    rf->add_option("--T", f.T, "empirical word length");
    rf->add_option("--window", f.rate_window, "empirical histogram half-width");
    rf->add_option("--word-cap", f.word_cap, "orbit enumeration cap");

    CLI::App* bs = app.add_subcommand("baker-spectrum",
                                      "eigenvalues of one open baker propagator");
    add_common(bs);
    add_map(bs);
    bs->add_option("--N", f.N, "matrix dimension (multiple of M)");

    CLI::App* ds = app.add_subcommand("damped-spectrum",
                                      "eigenvalues of one damped closed propagator");
    add_common(ds);
    add_map(ds);
    ds->add_option("--b", f.b, "per-branch damping constants");
    ds->add_option("--damping-samples", f.damping_samples, "sampled damping field");
    ds->add_option("--N", f.N, "matrix dimension (multiple of M)");

    CLI::App* wf = app.add_subcommand("weyl-fit",
                                      "counting exponent across an N ladder");
    add_common(wf);
    add_map(wf);
    wf->add_option("--N-ladder", f.n_ladder, "increasing N list, e.g. 27,81,243");
    wf->add_option("--r", f.r, "modulus threshold in [0, 1.1]");

    CLI::App* gr = app.add_subcommand("gap-report",
                                      "outer moduli against the pressure prediction");
    add_common(gr);
    add_map(gr);
    gr->add_option("--N-ladder", f.n_ladder, "increasing N list");
    gr->add_option("--b", f.b, "per-branch damping (damped variant)");
    gr->add_option("--damping-samples", f.damping_samples, "sampled damping field");
    gr->add_option("--T", f.T, "pressure word length");
    gr->add_option("--word-cap", f.word_cap, "orbit enumeration cap");

    CLI::App* co = app.add_subcommand("concentration",
                                      "decay-rate concentration near the mean damping");
    add_common(co);
    add_map(co);
    co->add_option("--b", f.b, "per-branch damping constants");
    co->add_option("--damping-samples", f.damping_samples, "sampled damping field");
    co->add_option("--N-ladder", f.n_ladder, "increasing N list");
    co->add_option("--eps", f.eps, "epsilon list or lo:hi:count grid");

    CLI::App* ld = app.add_subcommand("ld-profile",
                                      "large-deviation tail counts and exponents");
    add_common(ld);
    add_map(ld);
    ld->add_option("--b", f.b, "per-branch damping constants");
    ld->add_option("--damping-samples", f.damping_samples, "sampled damping field");
    ld->add_option("--N-ladder", f.n_ladder, "increasing N list");
    ld->add_option("--alphas", f.alphas, "alpha list or lo:hi:count grid");
    ld->add_option("--tail", f.tail, "below or above");
    ld->add_option("--method", f.method, "rate-function method");
    ld->add_option("--T", f.T, "empirical word length");
    ld->add_option("--window", f.rate_window, "empirical histogram half-width");
    ld->add_option("--word-cap", f.word_cap, "orbit enumeration cap");

    CLI::App* r1 = app.add_subcommand("resonance-1d",
                                      "1D Schrodinger resonances: cap, scaling, oracle");
    add_common(r1);
    r1->add_option("--potential", f.potential, "gaussian or piecewise");
    r1->add_option("--centers", f.centers, "gaussian centers");
    r1->add_option("--heights", f.heights, "bump or interval heights");
    r1->add_option("--widths", f.widths, "gaussian widths");
    r1->add_option("--edges", f.edges, "piecewise breakpoints");
    r1->add_option("--method", f.method, "cap, scaling, or oracle");
    r1->add_option("--hbar", f.hbar, "Planck constant");
    r1->add_option("--L", f.L, "half-width of the computational box");
    r1->add_option("--n", f.n, "grid subinterval count");
    r1->add_option("--eta", f.eta, "absorber strength (cap)");
    r1->add_option("--r0", f.r0, "absorber onset radius (cap)");
    r1->add_option("--theta", f.theta, "scaling angle in (0, pi/4)");
    r1->add_option("--box", f.box, "oracle box re_lo,re_hi,im_lo,im_hi");
    r1->add_option("--sheet", f.sheet, "second or physical");
    r1->add_option("--window", f.window1d, "energy window e_lo,e_hi");
    r1->add_option("--max-width", f.max_width, "width cutoff in units of hbar");
    r1->add_option("--count", f.count, "keep only the k narrowest");
    r1->add_flag("--stability", f.stability,
                 "drop eigenvalues that move under a perturbed absorber/angle");
    r1->add_option("--stability-rel-tol", f.stability_rel_tol,
                   "relative drift tolerance for --stability");

    CLI::App* sw = app.add_subcommand("sweep", "run a config file of task configs");
    add_common(sw);
    sw->add_option("file", f.sweep_file, "sweep config file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        print_error(2, std::string("flag parsing: ") + e.what());
        return 2;
    }

    set_kernel_threads(kernel_threads_opt);
    CLI::App* sub = app.get_subcommands().front();
    try {
        return run(sub->get_name(), f, sub);
    } catch (const std::exception& e) {
        const int code = exit_code_for(e);
        print_error(code, e.what());
        return code;
    }
}
