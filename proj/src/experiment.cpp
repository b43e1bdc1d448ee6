#include "wcl/experiment.hpp"

#include "wcl/baker.hpp"
#include "wcl/eigensolver.hpp"
#include "wcl/errors.hpp"
#include "wcl/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <exception>
#include <functional>
#include <initializer_list>
#include <new>
#include <set>
#include <thread>
#include <utility>

namespace wcl {

namespace {

[[noreturn]] void bad(const std::string& what) { throw std::invalid_argument(what); }

// ---- strict JSON field access -------------------------------------------

void check_fields(const ojson& j, const char* where,
                  std::initializer_list<const char*> allowed) {
    if (!j.is_object()) bad(std::string(where) + ": expected an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const char* a : allowed)
            if (it.key() == a) { known = true; break; }
        if (!known)
            bad(std::string(where) + ": unknown field \"" + it.key() + "\"");
    }
}

const ojson& need(const ojson& j, const char* where, const char* key) {
    auto it = j.find(key);
    if (it == j.end())
        bad(std::string(where) + ": missing field \"" + key + "\"");
    return *it;
}

double as_double(const ojson& v, const char* where, const char* key) {
    if (!v.is_number())
        bad(std::string(where) + ": field \"" + key + "\" must be a number");
    return v.get<double>();
}

int as_int(const ojson& v, const char* where, const char* key) {
    if (!v.is_number_integer())
        bad(std::string(where) + ": field \"" + key + "\" must be an integer");
    return v.get<int>();
}

std::size_t as_size(const ojson& v, const char* where, const char* key) {
    if (!v.is_number_integer() || v.is_number_float() ||
        (v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() < 0))
        bad(std::string(where) + ": field \"" + key + "\" must be a nonnegative integer");
    return v.get<std::size_t>();
}

std::uint64_t as_u64(const ojson& v, const char* where, const char* key) {
    return static_cast<std::uint64_t>(as_size(v, where, key));
}

bool as_bool(const ojson& v, const char* where, const char* key) {
    if (!v.is_boolean())
        bad(std::string(where) + ": field \"" + key + "\" must be a boolean");
    return v.get<bool>();
}

std::string as_string(const ojson& v, const char* where, const char* key) {
    if (!v.is_string())
        bad(std::string(where) + ": field \"" + key + "\" must be a string");
    return v.get<std::string>();
}

std::vector<double> as_double_list(const ojson& v, const char* where, const char* key) {
    if (!v.is_array())
        bad(std::string(where) + ": field \"" + key + "\" must be an array");
    std::vector<double> out;
    out.reserve(v.size());
    for (const ojson& e : v) out.push_back(as_double(e, where, key));
    return out;
}

std::vector<int> as_int_list(const ojson& v, const char* where, const char* key) {
    if (!v.is_array())
        bad(std::string(where) + ": field \"" + key + "\" must be an array");
    std::vector<int> out;
    out.reserve(v.size());
    for (const ojson& e : v) out.push_back(as_int(e, where, key));
    return out;
}

std::vector<std::size_t> as_size_list(const ojson& v, const char* where, const char* key) {
    if (!v.is_array())
        bad(std::string(where) + ": field \"" + key + "\" must be an array");
    std::vector<std::size_t> out;
    out.reserve(v.size());
    for (const ojson& e : v) out.push_back(as_size(e, where, key));
    return out;
}

// ---- name tables ---------------------------------------------------------

const char* direction_name(TrapDirection d) {
    switch (d) {
        case TrapDirection::forward: return "forward";
        case TrapDirection::backward: return "backward";
        case TrapDirection::full: return "full";
    }
    bad("unreachable direction");
}

TrapDirection direction_from_name(const std::string& s) {
    if (s == "forward") return TrapDirection::forward;
    if (s == "backward") return TrapDirection::backward;
    if (s == "full") return TrapDirection::full;
    bad("direction must be forward, backward, or full, got \"" + s + "\"");
}

const char* rate_method_name(RateMethod m) {
    switch (m) {
        case RateMethod::automatic: return "automatic";
        case RateMethod::legendre: return "legendre";
        case RateMethod::empirical: return "empirical";
    }
    bad("unreachable rate method");
}

RateMethod rate_method_from_name(const std::string& s) {
    if (s == "automatic" || s == "auto") return RateMethod::automatic;
    if (s == "legendre") return RateMethod::legendre;
    if (s == "empirical") return RateMethod::empirical;
    bad("method must be automatic, legendre, or empirical, got \"" + s + "\"");
}

const char* tail_name(LdTail t) {
    return t == LdTail::below ? "below" : "above";
}

LdTail tail_from_name(const std::string& s) {
    if (s == "below") return LdTail::below;
    if (s == "above") return LdTail::above;
    bad("tail must be below or above, got \"" + s + "\"");
}

const char* res1d_method_name(Res1dMethod m) {
    switch (m) {
        case Res1dMethod::cap: return "cap";
        case Res1dMethod::scaling: return "scaling";
        case Res1dMethod::oracle: return "oracle";
    }
    bad("unreachable resonance method");
}

Res1dMethod res1d_method_from_name(const std::string& s) {
    if (s == "cap") return Res1dMethod::cap;
    if (s == "scaling") return Res1dMethod::scaling;
    if (s == "oracle") return Res1dMethod::oracle;
    bad("method must be cap, scaling, or oracle, got \"" + s + "\"");
}

const char* sheet_name(SheetBranch b) {
    return b == SheetBranch::second_sheet ? "second_sheet" : "physical_sheet";
}

SheetBranch sheet_from_name(const std::string& s) {
    if (s == "second_sheet" || s == "second") return SheetBranch::second_sheet;
    if (s == "physical_sheet" || s == "physical") return SheetBranch::physical_sheet;
    bad("sheet must be second_sheet or physical_sheet, got \"" + s + "\"");
}

// ---- sub-object parsing --------------------------------------------------

OpenMapSpec parse_map(const ojson& j) {
    check_fields(j, "map", {"M", "keep"});
    OpenMapSpec m(as_int(need(j, "map", "M"), "map", "M"),
                  as_int_list(need(j, "map", "keep"), "map", "keep"));
    m.validate();
    return m;
}

DampingField parse_damping(const ojson& j) {
    check_fields(j, "damping", {"per_branch", "sampled"});
    if (j.size() != 1)
        bad("damping: exactly one of per_branch or sampled required");
    if (j.contains("per_branch"))
        return DampingField::per_branch(
            as_double_list(j["per_branch"], "damping", "per_branch"));
    return DampingField::sampled(as_double_list(j["sampled"], "damping", "sampled"));
}

Potential1D parse_potential(const ojson& j) {
    const std::string kind = as_string(need(j, "potential", "kind"), "potential", "kind");
    if (kind == "gaussian_barriers") {
        check_fields(j, "potential", {"kind", "bumps"});
        const ojson& arr = need(j, "potential", "bumps");
        if (!arr.is_array()) bad("potential: bumps must be an array");
        std::vector<GaussianBump> bumps;
        for (const ojson& e : arr) {
            check_fields(e, "potential bump", {"center", "height", "width"});
            GaussianBump b;
            b.center = as_double(need(e, "bump", "center"), "bump", "center");
            b.height = as_double(need(e, "bump", "height"), "bump", "height");
            b.width = as_double(need(e, "bump", "width"), "bump", "width");
            bumps.push_back(b);
        }
        Potential1D v = Potential1D::gaussian(std::move(bumps));
        v.validate();
        return v;
    }
    if (kind == "piecewise_constant") {
        check_fields(j, "potential", {"kind", "edges", "heights"});
        Potential1D v = Potential1D::piecewise(
            as_double_list(need(j, "potential", "edges"), "potential", "edges"),
            as_double_list(need(j, "potential", "heights"), "potential", "heights"));
        v.validate();
        return v;
    }
    bad("potential: kind must be gaussian_barriers or piecewise_constant, got \"" +
        kind + "\"");
}

TmBox parse_box(const ojson& j) {
    check_fields(j, "box", {"re_lo", "re_hi", "im_lo", "im_hi"});
    TmBox b;
    b.re_lo = as_double(need(j, "box", "re_lo"), "box", "re_lo");
    b.re_hi = as_double(need(j, "box", "re_hi"), "box", "re_hi");
    b.im_lo = as_double(need(j, "box", "im_lo"), "box", "im_lo");
    b.im_hi = as_double(need(j, "box", "im_hi"), "box", "im_hi");
    return b;
}

std::pair<double, double> parse_pair(const ojson& j, const char* where, const char* key) {
    if (!j.is_array() || j.size() != 2)
        bad(std::string(where) + ": field \"" + key + "\" must be a 2-element array");
    return {as_double(j[0], where, key), as_double(j[1], where, key)};
}

ojson box_json(const TmBox& b) {
    ojson j;
    j["re_lo"] = b.re_lo;
    j["re_hi"] = b.re_hi;
    j["im_lo"] = b.im_lo;
    j["im_hi"] = b.im_hi;
    return j;
}

// ---- helpers shared by validate/run -------------------------------------

void check_ladder(const std::vector<std::size_t>& ladder, int M, std::size_t min_len) {
    if (ladder.size() < min_len)
        bad("N_ladder needs at least " + std::to_string(min_len) + " entries");
    for (std::size_t i = 0; i < ladder.size(); ++i) {
        if (ladder[i] == 0 || ladder[i] % std::size_t(M) != 0)
            bad("N_ladder entries must be positive multiples of M");
        if (i > 0 && ladder[i] <= ladder[i - 1])
            bad("N_ladder must be strictly increasing");
    }
}

void check_phases(double a, double b) {
    if (!(a >= 0.0 && a < 1.0) || !(b >= 0.0 && b < 1.0))
        bad("phases must lie in [0, 1)");
}

bool wants_map(Command c) {
    switch (c) {
        case Command::classical_dim:
        case Command::pressure:
        case Command::rate_function:
        case Command::baker_spectrum:
        case Command::damped_spectrum:
        case Command::weyl_fit:
        case Command::gap_report:
        case Command::concentration:
        case Command::ld_profile:
            return true;
        default:
            return false;
    }
}

} // namespace

// ---- command names -------------------------------------------------------

std::string command_name(Command c) {
    switch (c) {
        case Command::classical_dim: return "classical-dim";
        case Command::pressure: return "pressure";
        case Command::rate_function: return "rate-function";
        case Command::baker_spectrum: return "baker-spectrum";
        case Command::damped_spectrum: return "damped-spectrum";
        case Command::weyl_fit: return "weyl-fit";
        case Command::gap_report: return "gap-report";
        case Command::concentration: return "concentration";
        case Command::ld_profile: return "ld-profile";
        case Command::resonance_1d: return "resonance-1d";
        case Command::sweep: return "sweep";
    }
    bad("unreachable command");
}

Command command_from_name(const std::string& name) {
    static const std::pair<const char*, Command> table[] = {
        {"classical-dim", Command::classical_dim},
        {"pressure", Command::pressure},
        {"rate-function", Command::rate_function},
        {"baker-spectrum", Command::baker_spectrum},
        {"damped-spectrum", Command::damped_spectrum},
        {"weyl-fit", Command::weyl_fit},
        {"gap-report", Command::gap_report},
        {"concentration", Command::concentration},
        {"ld-profile", Command::ld_profile},
        {"resonance-1d", Command::resonance_1d},
        {"sweep", Command::sweep},
    };
    for (const auto& [n, c] : table)
        if (name == n) return c;
    bad("unknown command \"" + name + "\"");
}

// ---- validation ----------------------------------------------------------

void ExperimentConfig::validate() const {
    if (wants_map(command)) map.validate();
    check_phases(phase_a, phase_b);
    if (threads < 0) bad("threads must be nonnegative");

    switch (command) {
        case Command::classical_dim:
            if (depth_min < 1) bad("depth_min must be at least 1");
            if (depth_max - depth_min < 2)
                bad("the dimension fit needs at least 3 depths");
            if (cell_cap == 0) bad("cell_cap must be positive");
            break;

        case Command::pressure:
            if (!std::isfinite(s)) bad("s must be finite");
            if (damping) {
                damping->validate(map.M);
                if (!std::isfinite(beta)) bad("beta must be finite");
            }
            if (T < 1) bad("T must be at least 1");
            if (word_cap == 0) bad("word_cap must be positive");
            break;

        case Command::rate_function:
            if (!damping) bad("rate-function requires a damping field");
            damping->validate(map.M);
            if (alpha_grid.empty()) bad("alpha_grid must be nonempty");
            for (double a : alpha_grid)
                if (!std::isfinite(a)) bad("alpha_grid entries must be finite");
            if (T < 1) bad("T must be at least 1");
            if (window < 0.0) bad("window must be nonnegative");
            if (word_cap == 0) bad("word_cap must be positive");
            break;

        case Command::baker_spectrum:
            if (N == 0 || N % std::size_t(map.M) != 0)
                bad("N must be a positive multiple of M");
            break;

        case Command::damped_spectrum:
            if (!map.closed()) bad("damped-spectrum requires the closed map");
            if (!damping) bad("damped-spectrum requires a damping field");
            damping->validate(map.M);
            if (N == 0 || N % std::size_t(map.M) != 0)
                bad("N must be a positive multiple of M");
            break;

        case Command::weyl_fit:
            if (damping) bad("weyl-fit takes no damping field");
            // the fit window drops the smallest N, and 3 points must survive
            check_ladder(N_ladder, map.M, 4);
            if (!(r >= 0.0 && r <= 1.1)) bad("r must lie in [0, 1.1]");
            break;

        case Command::gap_report:
            if (damping) {
                if (!map.closed())
                    bad("a damped gap report requires the closed map");
                damping->validate(map.M);
            }
            check_ladder(N_ladder, map.M, 1);
            if (T < 1) bad("T must be at least 1");
            if (word_cap == 0) bad("word_cap must be positive");
            break;

        case Command::concentration:
            if (!map.closed()) bad("concentration requires the closed map");
            if (!damping) bad("concentration requires a damping field");
            damping->validate(map.M);
            check_ladder(N_ladder, map.M, 1);
            if (eps_grid.empty()) bad("eps_grid must be nonempty");
            for (double e : eps_grid)
                if (!(e > 0.0)) bad("eps_grid entries must be positive");
            break;

        case Command::ld_profile:
            if (!map.closed()) bad("ld-profile requires the closed map");
            if (!damping) bad("ld-profile requires a damping field");
            damping->validate(map.M);
            check_ladder(N_ladder, map.M, 1);
            if (alpha_grid.empty()) bad("alpha_grid must be nonempty");
            if (T < 1) bad("T must be at least 1");
            if (window < 0.0) bad("window must be nonnegative");
            if (word_cap == 0) bad("word_cap must be positive");
            break;

        case Command::resonance_1d:
            potential.validate();
            if (!(grid.hbar > 0.0)) bad("hbar must be positive");
            if (method == Res1dMethod::cap || method == Res1dMethod::scaling) {
                grid.validate();
                if (!(e_lo <= e_hi)) bad("window requires e_lo <= e_hi");
                if (!(max_width > 0.0)) bad("max_width must be positive");
                if (stability && !(stability_rel_tol > 0.0))
                    bad("stability_rel_tol must be positive");
            }
            if (method == Res1dMethod::cap) {
                if (!(eta > 0.0)) bad("eta must be positive");
                if (!(r0 > 0.0)) bad("r0 must be positive");
            }
            if (method == Res1dMethod::scaling) {
                if (potential.kind != Potential1D::Kind::gaussian_barriers)
                    bad("complex scaling needs an analytic (gaussian) potential");
                const double quarter_pi = std::atan(1.0);
                if (!(theta > 0.0) || !(theta < quarter_pi))
                    bad("theta must lie in (0, pi/4)");
                if (stability && !(theta + 0.02 < quarter_pi))
                    bad("theta too close to pi/4 for the stability re-run");
            }
            if (method == Res1dMethod::oracle) {
                if (potential.kind != Potential1D::Kind::piecewise_constant)
                    bad("the transfer-matrix oracle needs a piecewise potential");
                if (!(box.re_lo < box.re_hi) || !(box.im_lo < box.im_hi))
                    bad("box must have positive extent");
                if (stability) bad("the oracle has no stability re-run");
            }
            break;

        case Command::sweep: {
            if (tasks.empty()) bad("sweep needs at least one task");
            std::set<std::string> outputs;
            for (const ExperimentConfig& t : tasks) {
                if (t.command == Command::sweep) bad("sweep tasks cannot nest");
                if (t.output.empty()) bad("every sweep task needs an output path");
                if (!outputs.insert(t.output).second)
                    bad("sweep tasks share the output path \"" + t.output + "\"");
                t.validate();
            }
            break;
        }
    }
}

// ---- normalization -------------------------------------------------------

ojson ExperimentConfig::to_json() const {
    ojson j;
    j["schema"] = "wcl-config-v1";
    j["command"] = command_name(command);

    switch (command) {
        case Command::classical_dim:
            j["map"] = map.to_json();
            j["direction"] = direction_name(direction);
            j["depth_min"] = depth_min;
            j["depth_max"] = depth_max;
            j["cell_cap"] = cell_cap;
            break;

        case Command::pressure:
            j["map"] = map.to_json();
            j["s"] = s;
            if (damping) {
                j["damping"] = damping->to_json();
                j["beta"] = beta;
            }
            j["T"] = T;
            j["word_cap"] = word_cap;
            break;

        case Command::rate_function:
            j["map"] = map.to_json();
            j["damping"] = damping->to_json();
            j["alpha_grid"] = alpha_grid;
            j["method"] = rate_method_name(rate_method);
            j["T"] = T;
            j["window"] = window;
            j["word_cap"] = word_cap;
            break;

        case Command::baker_spectrum:
            j["map"] = map.to_json();
            j["N"] = N;
            j["phases"] = ojson::array({phase_a, phase_b});
            break;

        case Command::damped_spectrum:
            j["map"] = map.to_json();
            j["damping"] = damping->to_json();
            j["N"] = N;
            j["phases"] = ojson::array({phase_a, phase_b});
            break;

        case Command::weyl_fit:
            j["map"] = map.to_json();
            j["N_ladder"] = N_ladder;
            j["r"] = r;
            j["phases"] = ojson::array({phase_a, phase_b});
            break;

        case Command::gap_report:
            j["map"] = map.to_json();
            if (damping) j["damping"] = damping->to_json();
            j["N_ladder"] = N_ladder;
            j["T"] = T;
            j["word_cap"] = word_cap;
            j["phases"] = ojson::array({phase_a, phase_b});
            break;

        case Command::concentration:
            j["map"] = map.to_json();
            j["damping"] = damping->to_json();
            j["N_ladder"] = N_ladder;
            j["eps_grid"] = eps_grid;
            j["phases"] = ojson::array({phase_a, phase_b});
            break;

        case Command::ld_profile:
            j["map"] = map.to_json();
            j["damping"] = damping->to_json();
            j["N_ladder"] = N_ladder;
            j["alpha_grid"] = alpha_grid;
            j["tail"] = tail_name(tail);
            j["method"] = rate_method_name(rate_method);
            j["T"] = T;
            j["window"] = window;
            j["word_cap"] = word_cap;
            j["phases"] = ojson::array({phase_a, phase_b});
            break;

        case Command::resonance_1d:
            j["potential"] = potential.to_json();
            j["method"] = res1d_method_name(method);
            j["hbar"] = grid.hbar;
            if (method == Res1dMethod::cap || method == Res1dMethod::scaling) {
                j["L"] = grid.L;
                j["n"] = grid.n;
                if (method == Res1dMethod::cap) {
                    j["eta"] = eta;
                    j["r0"] = r0;
                } else {
                    j["theta"] = theta;
                }
                j["window"] = ojson::array({e_lo, e_hi});
                j["max_width"] = max_width;
                j["count"] = count;
                j["stability"] = stability;
                j["stability_rel_tol"] = stability_rel_tol;
            } else {
                j["box"] = box_json(box);
                j["sheet"] = sheet_name(sheet);
                j["count"] = count;
            }
            break;

        case Command::sweep: {
            ojson arr = ojson::array();
            for (const ExperimentConfig& t : tasks) arr.push_back(t.to_json());
            j["tasks"] = std::move(arr);
            break;
        }
    }

    j["threads"] = threads;
    if (!output.empty()) j["output"] = output;
    return j;
}

ojson ExperimentConfig::to_json_core() const {
    ojson j = to_json();
    j.erase("threads");
    j.erase("output");
    return j;
}

// ---- parsing -------------------------------------------------------------

ExperimentConfig config_from_json(const ojson& j) {
    if (!j.is_object()) bad("config: expected a JSON object");
    const std::string schema = as_string(need(j, "config", "schema"), "config", "schema");
    if (schema != "wcl-config-v1")
        bad("config: unsupported schema \"" + schema + "\"");

    ExperimentConfig c;
    c.command = command_from_name(
        as_string(need(j, "config", "command"), "config", "command"));
    const std::string where = command_name(c.command);
    const char* w = where.c_str();

    auto get_common = [&](const ojson& v, const std::string& key) -> bool {
        if (key == "threads") { c.threads = as_int(v, w, "threads"); return true; }
        if (key == "output") { c.output = as_string(v, w, "output"); return true; }
        return false;
    };
    auto get_phases = [&](const ojson& v) {
        auto [a, b] = parse_pair(v, w, "phases");
        c.phase_a = a;
        c.phase_b = b;
    };

    switch (c.command) {
        case Command::classical_dim:
            check_fields(j, w, {"schema", "command", "map", "direction", "depth_min",
                                "depth_max", "cell_cap", "threads", "output"});
            c.map = parse_map(need(j, w, "map"));
            c.direction = direction_from_name(
                as_string(need(j, w, "direction"), w, "direction"));
            c.depth_min = as_int(need(j, w, "depth_min"), w, "depth_min");
            c.depth_max = as_int(need(j, w, "depth_max"), w, "depth_max");
            if (j.contains("cell_cap")) c.cell_cap = as_u64(j["cell_cap"], w, "cell_cap");
            break;

        case Command::pressure:
            check_fields(j, w, {"schema", "command", "map", "s", "damping", "beta",
                                "T", "word_cap", "threads", "output"});
            c.map = parse_map(need(j, w, "map"));
            c.s = as_double(need(j, w, "s"), w, "s");
            if (j.contains("damping")) {
                c.damping = parse_damping(j["damping"]);
                c.beta = as_double(need(j, w, "beta"), w, "beta");
            } else if (j.contains("beta")) {
                bad("pressure: beta without a damping field");
            }
            if (j.contains("T")) c.T = as_int(j["T"], w, "T");
            if (j.contains("word_cap")) c.word_cap = as_u64(j["word_cap"], w, "word_cap");
            break;

        case Command::rate_function:
            check_fields(j, w, {"schema", "command", "map", "damping", "alpha_grid",
                                "method", "T", "window", "word_cap", "threads", "output"});
            c.map = parse_map(need(j, w, "map"));
            c.damping = parse_damping(need(j, w, "damping"));
            c.alpha_grid = as_double_list(need(j, w, "alpha_grid"), w, "alpha_grid");
            if (j.contains("method"))
                c.rate_method = rate_method_from_name(as_string(j["method"], w, "method"));
            c.T = 16;
            if (j.contains("T")) c.T = as_int(j["T"], w, "T");
            if (j.contains("window")) c.window = as_double(j["window"], w, "window");
            if (j.contains("word_cap")) c.word_cap = as_u64(j["word_cap"], w, "word_cap");
            break;

        case Command::baker_spectrum:
            check_fields(j, w, {"schema", "command", "map", "N", "phases",
                                "threads", "output"});
            c.map = parse_map(need(j, w, "map"));
            c.N = as_size(need(j, w, "N"), w, "N");
            if (j.contains("phases")) get_phases(j["phases"]);
            break;

        case Command::damped_spectrum:
            check_fields(j, w, {"schema", "command", "map", "damping", "N", "phases",
                                "threads", "output"});
            c.map = parse_map(need(j, w, "map"));
            c.damping = parse_damping(need(j, w, "damping"));
            c.N = as_size(need(j, w, "N"), w, "N");
            if (j.contains("phases")) get_phases(j["phases"]);
            break;

        case Command::weyl_fit:
            check_fields(j, w, {"schema", "command", "map", "N_ladder", "r", "phases",
                                "threads", "output"});
            c.map = parse_map(need(j, w, "map"));
            c.N_ladder = as_size_list(need(j, w, "N_ladder"), w, "N_ladder");
            c.r = as_double(need(j, w, "r"), w, "r");
            if (j.contains("phases")) get_phases(j["phases"]);
            break;

        case Command::gap_report:
            check_fields(j, w, {"schema", "command", "map", "damping", "N_ladder",
                                "T", "word_cap", "phases", "threads", "output"});
            c.map = parse_map(need(j, w, "map"));
            if (j.contains("damping")) c.damping = parse_damping(j["damping"]);
            c.N_ladder = as_size_list(need(j, w, "N_ladder"), w, "N_ladder");
            if (j.contains("T")) c.T = as_int(j["T"], w, "T");
            if (j.contains("word_cap")) c.word_cap = as_u64(j["word_cap"], w, "word_cap");
            if (j.contains("phases")) get_phases(j["phases"]);
            break;

        case Command::concentration:
            check_fields(j, w, {"schema", "command", "map", "damping", "N_ladder",
                                "eps_grid", "phases", "threads", "output"});
            c.map = parse_map(need(j, w, "map"));
            c.damping = parse_damping(need(j, w, "damping"));
            c.N_ladder = as_size_list(need(j, w, "N_ladder"), w, "N_ladder");
            c.eps_grid = as_double_list(need(j, w, "eps_grid"), w, "eps_grid");
            if (j.contains("phases")) get_phases(j["phases"]);
            break;

        case Command::ld_profile:
            check_fields(j, w, {"schema", "command", "map", "damping", "N_ladder",
                                "alpha_grid", "tail", "method", "T", "window",
                                "word_cap", "phases", "threads", "output"});
            c.map = parse_map(need(j, w, "map"));
            c.damping = parse_damping(need(j, w, "damping"));
            c.N_ladder = as_size_list(need(j, w, "N_ladder"), w, "N_ladder");
            c.alpha_grid = as_double_list(need(j, w, "alpha_grid"), w, "alpha_grid");
            if (j.contains("tail")) c.tail = tail_from_name(as_string(j["tail"], w, "tail"));
            if (j.contains("method"))
                c.rate_method = rate_method_from_name(as_string(j["method"], w, "method"));
            c.T = 16;
            if (j.contains("T")) c.T = as_int(j["T"], w, "T");
            if (j.contains("window")) c.window = as_double(j["window"], w, "window");
            if (j.contains("word_cap")) c.word_cap = as_u64(j["word_cap"], w, "word_cap");
            if (j.contains("phases")) get_phases(j["phases"]);
            break;

        case Command::resonance_1d: {
            c.potential = parse_potential(need(j, w, "potential"));
            c.method = res1d_method_from_name(
                as_string(need(j, w, "method"), w, "method"));
            c.grid.hbar = as_double(need(j, w, "hbar"), w, "hbar");
            if (c.method == Res1dMethod::oracle) {
                check_fields(j, w, {"schema", "command", "potential", "method", "hbar",
                                    "box", "sheet", "count", "threads", "output"});
                c.box = parse_box(need(j, w, "box"));
                if (j.contains("sheet"))
                    c.sheet = sheet_from_name(as_string(j["sheet"], w, "sheet"));
                if (j.contains("count")) c.count = as_size(j["count"], w, "count");
            } else {
                check_fields(j, w, {"schema", "command", "potential", "method", "hbar",
                                    "L", "n", "eta", "r0", "theta", "window",
                                    "max_width", "count", "stability",
                                    "stability_rel_tol", "threads", "output"});
                c.grid.L = as_double(need(j, w, "L"), w, "L");
                c.grid.n = as_size(need(j, w, "n"), w, "n");
                if (c.method == Res1dMethod::cap) {
                    if (j.contains("theta")) bad("cap: theta is a scaling parameter");
                    c.eta = as_double(need(j, w, "eta"), w, "eta");
                    c.r0 = as_double(need(j, w, "r0"), w, "r0");
                } else {
                    if (j.contains("eta") || j.contains("r0"))
                        bad("scaling: eta and r0 are absorber parameters");
                    c.theta = as_double(need(j, w, "theta"), w, "theta");
                }
                if (j.contains("window")) {
                    auto [lo, hi] = parse_pair(j["window"], w, "window");
                    c.e_lo = lo;
                    c.e_hi = hi;
                }
                if (j.contains("max_width"))
                    c.max_width = as_double(j["max_width"], w, "max_width");
                if (j.contains("count")) c.count = as_size(j["count"], w, "count");
                if (j.contains("stability"))
                    c.stability = as_bool(j["stability"], w, "stability");
                if (j.contains("stability_rel_tol"))
                    c.stability_rel_tol =
                        as_double(j["stability_rel_tol"], w, "stability_rel_tol");
            }
            break;
        }

        case Command::sweep: {
            check_fields(j, w, {"schema", "command", "tasks", "threads", "output"});
            const ojson& arr = need(j, w, "tasks");
            if (!arr.is_array()) bad("sweep: tasks must be an array");
            for (const ojson& t : arr) c.tasks.push_back(config_from_json(t));
            break;
        }
    }

    for (auto it = j.begin(); it != j.end(); ++it)
        get_common(*it, it.key());

    c.validate();
    return c;
}

ExperimentConfig config_from_json_text(const std::string& text) {
    ojson j;
    try {
        j = ojson::parse(text);
    } catch (const std::exception& e) {
        bad(std::string("config: JSON parse error: ") + e.what());
    }
    return config_from_json(j);
}

// ---- task pool -----------------------------------------------------------

int task_pool_threads(int requested, std::size_t task_count) {
    int cap = 0;
    if (const char* env = std::getenv("WCL_THREADS")) {
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0 && v < 1 << 16) cap = int(v);
    }
    if (cap <= 0) {
        cap = int(std::thread::hardware_concurrency());
        if (cap <= 0) cap = 1;
    }
    int t = requested > 0 ? std::min(requested, cap) : cap;
    if (std::size_t(t) > task_count) t = int(task_count);
    return std::max(t, 1);
}

namespace {

// Indexed pool: results land in caller-owned slots by index, and the first
// failure in index order is rethrown, so the outcome is identical to the
// serial loop no matter how many workers run.
void run_pool(std::size_t count, int threads,
              const std::function<void(std::size_t)>& fn) {
    if (count == 0) return;
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(count);
    auto work = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    const int nw = std::min<std::size_t>(std::size_t(threads), count);
    pool.reserve(std::size_t(nw));
    for (int t = 0; t < nw; ++t) pool.emplace_back(work);
    for (std::thread& t : pool) t.join();
    for (std::exception_ptr& e : errors)
        if (e) std::rethrow_exception(e);
}

// ---- report builders -----------------------------------------------------

ojson envelope(const char* kind, const ExperimentConfig& cfg) {
    ojson j;
    j["schema"] = "wcl-report-v1";
    j["kind"] = kind;
    j["config"] = cfg.to_json_core();
    return j;
}

// Splices an analysis emitter's payload into an envelope, dropping the
// duplicate schema/kind header.
void merge_payload(ojson& dst, const ojson& src) {
    for (auto it = src.begin(); it != src.end(); ++it)
        if (it.key() != "schema" && it.key() != "kind") dst[it.key()] = *it;
}

ojson fit_json(const LineFit& f) {
    ojson j;
    j["slope"] = f.slope;
    j["intercept"] = f.intercept;
    j["residual_rms"] = f.residual_rms;
    j["slope_stderr"] = f.slope_stderr;
    return j;
}

std::vector<SpectrumRecord> ladder_records(const ExperimentConfig& cfg,
                                           BakerKind kind) {
    std::vector<SpectrumRecord> records(cfg.N_ladder.size());
    const int threads = task_pool_threads(cfg.threads, cfg.N_ladder.size());
    run_pool(cfg.N_ladder.size(), threads, [&](std::size_t i) {
        QuantumMapSpec qs;
        qs.map = cfg.map;
        qs.N = cfg.N_ladder[i];
        qs.kind = kind;
        if (kind == BakerKind::damped) qs.damping = cfg.damping;
        qs.phase_a = cfg.phase_a;
        qs.phase_b = cfg.phase_b;
        qs.validate();
        const ComplexMatrix m = kind == BakerKind::open
                                    ? quantize_open_baker(qs)
                                    : quantize_damped_baker(qs);
        records[i] = make_record(qs.N, qs.to_json(), eigenvalues(m));
    });
    return records;
}

TaskOutcome run_classical_dim(const ExperimentConfig& cfg) {
    const TrappedSetSample sample =
        trapped_set_sample(cfg.map, cfg.depth_max, cfg.direction, cfg.cell_cap);
    const DimensionEstimate est =
        box_dimension(sample, cfg.depth_min, cfg.depth_max);

    TaskOutcome out;
    out.report = envelope("dimension_estimate", cfg);
    out.report["dimension"] = est.dimension;
    out.report["fit"] = fit_json(est.fit);
    ojson pts = ojson::array();
    std::vector<std::vector<std::string>> rows;
    for (const auto& p : est.points) {
        ojson e;
        e["log_cell_size"] = p[0];
        e["log_count"] = p[1];
        pts.push_back(std::move(e));
        rows.push_back({format_double(p[0]), format_double(p[1])});
    }
    out.report["points"] = std::move(pts);
    out.csv = csv_table({"log_cell_size", "log_count"}, rows);
    return out;
}

TaskOutcome run_pressure(const ExperimentConfig& cfg) {
    const DampingField* d = cfg.damping ? &*cfg.damping : nullptr;
    const PressureEstimate est =
        pressure(cfg.map, cfg.s, d, cfg.beta, cfg.T, cfg.word_cap);

    TaskOutcome out;
    out.report = envelope("pressure_estimate", cfg);
    out.report["weight"] = est.weight;
    out.report["T"] = est.T;
    out.report["estimate"] = est.estimate;
    if (est.has_closed_form) {
        out.report["closed_form"] = est.closed_form;
        out.report["abs_difference"] = std::abs(est.estimate - est.closed_form);
    } else {
        out.report["closed_form"] = nullptr;
        out.report["abs_difference"] = nullptr;
    }
    return out;
}

TaskOutcome run_rate_function(const ExperimentConfig& cfg) {
    const RateFunction rf =
        rate_function(cfg.map, *cfg.damping, cfg.alpha_grid, cfg.rate_method,
                      cfg.T, cfg.window, cfg.word_cap);

    TaskOutcome out;
    out.report = envelope("rate_function", cfg);
    out.report["method"] = rf.method;
    out.report["T"] = rf.T;
    out.report["b_min"] = rf.b_min;
    out.report["b_max"] = rf.b_max;
    ojson pts = ojson::array();
    std::vector<std::vector<std::string>> rows;
    for (std::size_t i = 0; i < rf.alpha.size(); ++i) {
        ojson e;
        e["alpha"] = rf.alpha[i];
        e["H"] = rf.H[i];
        pts.push_back(std::move(e));
        rows.push_back({format_double(rf.alpha[i]), format_double(rf.H[i])});
    }
    out.report["points"] = std::move(pts);
    out.csv = csv_table({"alpha", "H"}, rows);
    return out;
}

TaskOutcome run_spectrum(const ExperimentConfig& cfg, BakerKind kind) {
    QuantumMapSpec qs;
    qs.map = cfg.map;
    qs.N = cfg.N;
    qs.kind = kind;
    if (kind == BakerKind::damped) qs.damping = cfg.damping;
    qs.phase_a = cfg.phase_a;
    qs.phase_b = cfg.phase_b;
    qs.validate();
    const ComplexMatrix m = kind == BakerKind::open ? quantize_open_baker(qs)
                                                    : quantize_damped_baker(qs);
    const SpectrumRecord rec = make_record(qs.N, qs.to_json(), eigenvalues(m));

    TaskOutcome out;
    out.report = envelope("spectrum_record", cfg);
    out.report["record"] = ojson::parse(record_to_json_text(rec));
    std::vector<std::vector<std::string>> rows;
    for (std::size_t i = 0; i < rec.eigenvalues.size(); ++i) {
        const cplx& z = rec.eigenvalues[i];
        rows.push_back({std::to_string(i), format_double(z.real()),
                        format_double(z.imag()), format_double(std::abs(z))});
    }
    out.csv = csv_table({"index", "re", "im", "modulus"}, rows);
    return out;
}

TaskOutcome run_weyl_fit(const ExperimentConfig& cfg) {
    const std::vector<SpectrumRecord> records = ladder_records(cfg, BakerKind::open);
    const CountProfile profile = weyl_fit(records, cfg.r);

    TaskOutcome out;
    out.report = envelope("count_profile", cfg);
    merge_payload(out.report, count_profile_json(profile));
    out.csv = count_profile_csv(profile);
    return out;
}

TaskOutcome run_gap_report(const ExperimentConfig& cfg) {
    const DampingField* d = cfg.damping ? &*cfg.damping : nullptr;
    const PressureEstimate est =
        pressure(cfg.map, 0.5, d, 1.0, cfg.T, cfg.word_cap);
    const std::vector<SpectrumRecord> records =
        ladder_records(cfg, d ? BakerKind::damped : BakerKind::open);
    const GapReport report = gap_report(records, est);

    TaskOutcome out;
    out.report = envelope("gap_report", cfg);
    merge_payload(out.report, gap_report_json(report));
    out.csv = gap_report_csv(report);
    return out;
}

TaskOutcome run_concentration(const ExperimentConfig& cfg) {
    const std::vector<SpectrumRecord> records =
        ladder_records(cfg, BakerKind::damped);
    const ConcentrationReport report =
        concentration_report(records, *cfg.damping, cfg.eps_grid);

    TaskOutcome out;
    out.report = envelope("concentration_report", cfg);
    merge_payload(out.report, concentration_report_json(report));
    out.csv = concentration_report_csv(report);
    return out;
}

TaskOutcome run_ld_profile(const ExperimentConfig& cfg) {
    const std::vector<SpectrumRecord> records =
        ladder_records(cfg, BakerKind::damped);
    const RateFunction rf =
        rate_function(cfg.map, *cfg.damping, cfg.alpha_grid, cfg.rate_method,
                      cfg.T, cfg.window, cfg.word_cap);
    const LdProfile profile = ld_profile(records, rf, cfg.tail);

    TaskOutcome out;
    out.report = envelope("ld_profile", cfg);
    merge_payload(out.report, ld_profile_json(profile));
    out.csv = ld_profile_csv(profile);
    return out;
}

std::vector<Resonance> grid_resonances(const ExperimentConfig& cfg, double eta,
                                       double theta,
                                       std::vector<std::string>& warnings) {
    BuildResult built =
        cfg.method == Res1dMethod::cap
            ? build_hamiltonian_cap(cfg.grid, cfg.potential, CapSpec{eta, cfg.r0})
            : build_hamiltonian_scaled(cfg.grid, cfg.potential, theta);
    for (std::string& msg : built.warnings) warnings.push_back(std::move(msg));
    const std::vector<cplx> eig = eigenvalues(built.H);
    double lo = cfg.e_lo, hi = cfg.e_hi;
    if (lo == 0.0 && hi == 0.0) hi = cfg.potential.max_height();
    return resonances_from_eigenvalues(eig, lo, hi, cfg.max_width, cfg.grid.hbar);
}

TaskOutcome run_resonance_1d(const ExperimentConfig& cfg) {
    TaskOutcome out;
    out.report = envelope("resonance_list", cfg);

    std::vector<Resonance> found;
    if (cfg.method == Res1dMethod::oracle) {
        found = transfer_matrix_resonances(cfg.potential, cfg.grid.hbar, cfg.box,
                                           cfg.sheet);
    } else {
        found = grid_resonances(cfg, cfg.eta, cfg.theta, out.warnings);
        if (cfg.stability) {
            // artifacts move under a perturbed absorber/angle; resonances stay
            std::vector<std::string> ignored;
            const std::vector<Resonance> perturbed =
                cfg.method == Res1dMethod::cap
                    ? grid_resonances(cfg, 2.0 * cfg.eta, cfg.theta, ignored)
                    : grid_resonances(cfg, cfg.eta, cfg.theta + 0.02, ignored);
            found = stable_resonances(found, perturbed, cfg.stability_rel_tol);
        }
    }
    if (cfg.count > 0) found = narrowest_resonances(std::move(found), cfg.count);

    ojson arr = ojson::array();
    std::vector<std::vector<std::string>> rows;
    for (const Resonance& r : found) {
        ojson e;
        e["re"] = r.z.real();
        e["im"] = r.z.imag();
        e["lifetime"] = r.lifetime;
        arr.push_back(std::move(e));
        rows.push_back({format_double(r.z.real()), format_double(r.z.imag()),
                        format_double(r.lifetime)});
    }
    out.report["resonances"] = std::move(arr);
    out.csv = csv_table({"re", "im", "lifetime"}, rows);
    return out;
}

// ---- metadata sidecar ----------------------------------------------------

std::string utc_timestamp() {
    const std::time_t now =
        std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string sibling_path(const std::string& path, const std::string& tail) {
    const std::string json_ext = ".json";
    if (path.size() > json_ext.size() &&
        path.compare(path.size() - json_ext.size(), json_ext.size(), json_ext) == 0)
        return path.substr(0, path.size() - json_ext.size()) + tail;
    return path + tail;
}

} // namespace

// ---- public entry points -------------------------------------------------

TaskOutcome run_task(const ExperimentConfig& config) {
    config.validate();
    switch (config.command) {
        case Command::classical_dim: return run_classical_dim(config);
        case Command::pressure: return run_pressure(config);
        case Command::rate_function: return run_rate_function(config);
        case Command::baker_spectrum: return run_spectrum(config, BakerKind::open);
        case Command::damped_spectrum: return run_spectrum(config, BakerKind::damped);
        case Command::weyl_fit: return run_weyl_fit(config);
        case Command::gap_report: return run_gap_report(config);
        case Command::concentration: return run_concentration(config);
        case Command::ld_profile: return run_ld_profile(config);
        case Command::resonance_1d: return run_resonance_1d(config);
        case Command::sweep: break;
    }
    bad("run_task does not take sweep configs; use run_sweep");
}

std::vector<std::string> write_outputs(const ExperimentConfig& config,
                                       const TaskOutcome& outcome,
                                       double elapsed_seconds,
                                       std::string* stdout_text) {
    const std::string report_text = json_emit(outcome.report);
    if (config.output.empty()) {
        if (stdout_text) *stdout_text = report_text;
        return {};
    }
    std::vector<std::string> written;
    write_file_atomic(config.output, report_text);
    written.push_back(config.output);
    if (!outcome.csv.empty()) {
        const std::string csv_path = sibling_path(config.output, ".csv");
        write_file_atomic(csv_path, outcome.csv);
        written.push_back(csv_path);
    }
    ojson meta;
    meta["schema"] = "wcl-meta-v1";
    meta["command"] = command_name(config.command);
    meta["created_utc"] = utc_timestamp();
    meta["elapsed_seconds"] = elapsed_seconds;
    meta["kernel_threads"] = kernel_threads();
    meta["warnings"] = outcome.warnings;
    const std::string meta_path = sibling_path(config.output, ".meta.json");
    write_file_atomic(meta_path, json_emit(meta));
    written.push_back(meta_path);
    return written;
}

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const capacity_error*>(&e)) return 4;
    if (dynamic_cast<const numerical_error*>(&e)) return 3;
    if (dynamic_cast<const std::bad_alloc*>(&e)) return 4;
    if (dynamic_cast<const std::invalid_argument*>(&e) ||
        dynamic_cast<const std::domain_error*>(&e))
        return 2;
    return 3;
}

SweepResult run_sweep(const ExperimentConfig& config) {
    config.validate();
    if (config.command != Command::sweep)
        bad("run_sweep takes a sweep config");

    struct Status {
        int code = 0;
        std::string what;
        double elapsed = 0.0;
    };
    std::vector<Status> status(config.tasks.size());
    const int threads = task_pool_threads(config.threads, config.tasks.size());
    run_pool(config.tasks.size(), threads, [&](std::size_t i) {
        const auto t0 = std::chrono::steady_clock::now();
        try {
            const TaskOutcome outcome = run_task(config.tasks[i]);
            status[i].elapsed =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                    .count();
            write_outputs(config.tasks[i], outcome, status[i].elapsed, nullptr);
        } catch (const std::exception& e) {
            status[i].code = exit_code_for(e);
            status[i].what = e.what();
        }
    });

    SweepResult result;
    result.summary["schema"] = "wcl-report-v1";
    result.summary["kind"] = "sweep_summary";
    ojson arr = ojson::array();
    std::vector<std::vector<std::string>> rows;
    for (std::size_t i = 0; i < config.tasks.size(); ++i) {
        ojson e;
        e["command"] = command_name(config.tasks[i].command);
        e["output"] = config.tasks[i].output;
        e["status"] = status[i].code == 0 ? "ok" : "error";
        if (status[i].code != 0) {
            e["exit_code"] = status[i].code;
            e["what"] = status[i].what;
            if (result.exit_code == 0) result.exit_code = status[i].code;
        }
        arr.push_back(std::move(e));
        rows.push_back({command_name(config.tasks[i].command),
                        config.tasks[i].output,
                        status[i].code == 0 ? "ok" : "error",
                        std::to_string(status[i].code)});
    }
    result.summary["tasks"] = std::move(arr);
    result.summary_csv = csv_table({"command", "output", "status", "exit_code"}, rows);
    return result;
}

} // namespace wcl
