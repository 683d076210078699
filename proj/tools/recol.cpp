// Command-line driver: convergence studies, spectral-element study, branch
// continuation, Floquet spectra and single orbit solves.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "recol/collocation.hpp"
#include "recol/continuation.hpp"
#include "recol/experiments.hpp"
#include "recol/floquet.hpp"

using namespace recol;

namespace {

enum ExitCode { ok = 0, usage = 1, solve_failure = 2, parse_failure = 3, stalled = 4 };

struct MPolicy {
    int fixed = 0;
    int per_node = 0;

    [[nodiscard]] int level(const Mesh& mesh) const {
        if (fixed > 0) return fixed;
        if (per_node > 0) return std::max(1, per_node * mesh.intervals() * mesh.degree());
        return 0;
    }
};

MPolicy parse_m_policy(const std::string& text) {
    MPolicy p;
    const auto value = [&](std::string_view prefix) {
        const std::string rest = text.substr(prefix.size());
        std::size_t used = 0;
        int v = 0;
        try {
            v = std::stoi(rest, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != rest.size() || v < 1) throw InvalidArgument("--M-policy: bad value in '" + text + "'");
        return v;
    };
    if (text == "auto") return p;
    if (text.rfind("fixed:", 0) == 0) {
        p.fixed = value("fixed:");
    } else if (text.rfind("per-node:", 0) == 0) {
        p.per_node = value("per-node:");
    } else {
        throw InvalidArgument("--M-policy must be auto, fixed:<M> or per-node:<k> (got '" + text + "')");
    }
    return p;
}

struct PhaseSpec {
    PhaseKind kind = PhaseKind::trivial;
    std::optional<double> anchor;
    std::string reference_file;
};

PhaseSpec parse_phase(const std::string& text) {
    PhaseSpec p;
    if (text.empty() || text == "trivial") return p;
    if (text.rfind("trivial:", 0) == 0) {
        const std::string rest = text.substr(8);
        std::size_t used = 0;
        try {
            p.anchor = std::stod(rest, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != rest.size()) throw InvalidArgument("--phase: bad anchor in '" + text + "'");
        return p;
    }
    if (text == "integral") {
        p.kind = PhaseKind::integral;
        return p;
    }
    if (text.rfind("integral:", 0) == 0) {
        p.kind = PhaseKind::integral;
        p.reference_file = text.substr(9);
        return p;
    }
    throw InvalidArgument("--phase must be trivial:<x>, integral or integral:<file> (got '" + text + "')");
}

class Output {
public:
    explicit Output(const std::string& path) {
        if (!path.empty()) {
            file_ = std::make_unique<std::ofstream>(path);
            if (!*file_) throw InvalidArgument("cannot open output file " + path);
        }
    }
    std::ostream& stream() { return file_ ? *file_ : std::cout; }

private:
    std::unique_ptr<std::ofstream> file_;
};

struct Common {
    std::string model;
    double param = 0.0;
    std::string family = "chebyshev";
    std::string m_policy = "auto";
    std::string phase;
    std::string out;
    std::string orbit;
};

struct ReferenceFlags {
    int L = 1000;
    int m = 4;
    std::string cache = "reference_cache";
};

void add_common(CLI::App* cmd, Common& c, bool needs_param = true) {
    cmd->add_option("--model", c.model, "quadratic | exponential | sirs")->required();
    auto* p = cmd->add_option("--param", c.param, "gamma (quadratic) or log gamma (exponential, sirs)");
    if (needs_param) p->required();
    cmd->add_option("--family", c.family, "chebyshev | legendre")->check(CLI::IsMember({"chebyshev", "legendre"}));
    cmd->add_option("--M-policy", c.m_policy, "auto | fixed:<M> | per-node:<k>");
    cmd->add_option("--phase", c.phase, "trivial:<x> | integral | integral:<orbit.json>");
    cmd->add_option("--out", c.out, "output path (default: stdout)");
}

void add_reference(CLI::App* cmd, ReferenceFlags& r) {
    cmd->add_option("--ref-L", r.L, "intervals of the computed reference");
    cmd->add_option("--ref-m", r.m, "degree of the computed reference");
    cmd->add_option("--cache", r.cache, "directory for cached reference orbits (empty: none)");
}

Reference study_reference(const Benchmark& b, double param, const Mesh& probe, const ReferenceFlags& r) {
    if (auto exact = exact_reference(b, param, probe)) return *exact;
    const std::string key = reference_cache_key(b.name, param, r.L, r.m, default_quadrature_level(r.L, r.m),
                                                AbscissaeFamily::chebyshev);
    if (r.cache.empty() || !std::filesystem::exists(std::filesystem::path(r.cache) / (key + ".json"))) {
        std::cerr << "computing reference orbit (L=" << r.L << ", m=" << r.m << ")\n";
    }
    return orbit_reference(computed_reference(b, param, r.L, r.m, AbscissaeFamily::chebyshev, r.cache));
}

PhaseCondition phase_condition(const PhaseSpec& phase_spec, const Benchmark& b, double param, const Mesh& mesh,
                               const PeriodicOrbit& guess) {
    if (phase_spec.kind == PhaseKind::trivial) return PhaseCondition::trivial(phase_spec.anchor ? *phase_spec.anchor : b.anchor(param));
    if (phase_spec.reference_file.empty()) return PhaseCondition::integral(resample(guess, mesh).u);
    return PhaseCondition::integral(resample(load_orbit(phase_spec.reference_file), mesh).u);
}

PhasePolicy phase_policy(const PhaseSpec& phase_spec, const Benchmark& b) {
    if (phase_spec.kind == PhaseKind::integral) {
        if (!phase_spec.reference_file.empty()) {
            throw InvalidArgument("branch: --phase integral takes no file; the previous orbit is the reference");
        }
        return PhasePolicy::integral();
    }
    if (phase_spec.anchor) {
        const double x = *phase_spec.anchor;
        return PhasePolicy::trivial([x](double) { return x; });
    }
    return PhasePolicy::trivial(b.anchor);
}

PeriodicOrbit initial_orbit(const Benchmark& b, double param, const Mesh& mesh, const std::string& orbit_file) {
    if (!orbit_file.empty()) return resample(load_orbit(orbit_file), mesh);
    return start_orbit(b, param, mesh);
}

int cmd_converge(const Common& c, const std::vector<int>& intervals, int m, const ReferenceFlags& r) {
    const Benchmark b = benchmark(c.model);
    const AbscissaeFamily family = parse_family(c.family);
    const MPolicy policy = parse_m_policy(c.m_policy);
    StudyOptions opts;
    opts.level = policy.fixed;
    opts.level_per_node = policy.per_node;
    const Reference ref = study_reference(b, c.param, Mesh(intervals.front(), m, family), r);

    std::vector<std::future<ConvergenceRow>> jobs;
    for (const int L : intervals) {
        jobs.push_back(std::async(std::launch::async, [&, L] {
            return convergence_point(b, c.param, Mesh(L, m, family), ref, opts);
        }));
    }
    std::vector<ConvergenceRow> rows;
    std::vector<double> hs;
    std::vector<double> errors;
    for (auto& job : jobs) {
        rows.push_back(job.get());
        hs.push_back(rows.back().h);
        errors.push_back(rows.back().error);
    }
    Output out(c.out);
    write_convergence_csv(out.stream(), rows);
    std::cout << "slope " << fitted_slope(hs, errors) << '\n';
    return ok;
}

int cmd_sem(const Common& c, const std::vector<int>& degrees, const ReferenceFlags& r) {
    const Benchmark b = benchmark(c.model);
    const MPolicy policy = parse_m_policy(c.m_policy);
    StudyOptions opts;
    opts.level = policy.fixed;
    opts.level_per_node = policy.per_node;
    const Reference ref = study_reference(b, c.param, Mesh(1, std::max(degrees.front(), 1), AbscissaeFamily::chebyshev), r);
    const auto rows = sem(b, c.param, degrees, ref, opts);
    Output out(c.out);
    write_convergence_csv(out.stream(), rows);
    return ok;
}

int cmd_solve(const Common& c, int L, int m) {
    const Benchmark b = benchmark(c.model);
    const Mesh mesh(L, m, parse_family(c.family));
    const PeriodicOrbit guess = initial_orbit(b, c.param, mesh, c.orbit);
    CollocationOptions co;
    co.level = parse_m_policy(c.m_policy).level(mesh);
    const CollocationSystem sys(b.model(c.param), mesh,
                                phase_condition(parse_phase(c.phase), b, c.param, mesh, guess), co);
    const OrbitSolution sol = solve_orbit(sys, guess);
    Output out(c.out);
    out.stream() << orbit_to_json(sol.orbit);
    std::cerr.precision(12);
    std::cerr << "omega " << sol.orbit.omega << " amplitude " << sol.diagnostics.amplitude << " newton_iters "
              << sol.diagnostics.iterations << (sol.diagnostics.zero_amplitude ? " (zero amplitude)" : "") << '\n';
    return ok;
}

int cmd_floquet(const Common& c, std::optional<int> L, std::optional<int> m, bool family_set) {
    if (c.orbit.empty()) throw InvalidArgument("floquet: --orbit is required");
    const Benchmark b = benchmark(c.model);
    const PeriodicOrbit orbit = load_orbit(c.orbit);
    const Mesh& mesh = orbit.mesh();
    if ((L && *L != mesh.intervals()) || (m && *m != mesh.degree()) ||
        (family_set && parse_family(c.family) != mesh.family())) {
        throw InvalidArgument("floquet: orbit mesh (L=" + std::to_string(mesh.intervals()) +
                              ", m=" + std::to_string(mesh.degree()) + ", " + to_string(mesh.family()) +
                              ") does not match the requested mesh");
    }
    const REModel model = b.model(c.param);
    const FloquetSpectrum s = floquet_spectrum(orbit, model, parse_m_policy(c.m_policy).level(mesh));
    Output out(c.out);
    write_spectrum_csv(out.stream(), s);
    std::cout.precision(12);
    std::cout << "verdict: " << to_string(s.stability) << " (trivial multiplier " << s.trivial().real()
              << (s.trivial().imag() < 0 ? "" : "+") << s.trivial().imag() << "i)\n";
    if (s.trivial_far) std::cerr << "warning: trivial multiplier farther than 1e-3 from 1\n";
    return ok;
}

struct BranchFlags {
    int L = 20;
    int m = 5;
    double to = 0.0;
    double step = 0.01;
    bool floquet = false;
    bool doubled = false;
    std::vector<double> snapshots;
    std::string snapshot_dir = ".";
};

int cmd_branch(const Common& c, const BranchFlags& f) {
    const Benchmark b = benchmark(c.model);
    const Mesh mesh(f.L, f.m, parse_family(c.family));
    const PhasePolicy policy = phase_policy(parse_phase(c.phase), b);
    ContinuationOptions opts;
    opts.floquet = f.floquet;
    opts.collocation.level = parse_m_policy(c.m_policy).level(mesh);
    opts.floquet_level = opts.collocation.level;

    PeriodicOrbit start = initial_orbit(b, c.param, mesh, c.orbit);
    if (f.doubled) {
        start = switch_to_doubled(b.model, c.param, start, mesh, policy, opts).orbit;
        std::cerr << "switched to the doubled branch, omega " << start.omega << '\n';
    }
    const double step = f.to >= c.param ? std::abs(f.step) : -std::abs(f.step);
    Branch branch;
    int code = ok;
    try {
        branch = continue_branch(b.model, c.param, f.to, step, start, policy, opts);
    } catch (const BranchStalled& e) {
        branch = e.partial();
        std::cerr << "error: " << e.what() << '\n';
        code = stalled;
    }
    Output out(c.out);
    write_branch_csv(out.stream(), branch);
    for (const double p : f.snapshots) {
        for (const auto& point : branch.points) {
            if (std::abs(point.param - p) > 1e-9) continue;
            std::ostringstream name;
            name.precision(10);
            name << f.snapshot_dir << '/' << c.model << "_orbit_" << p << ".json";
            save_orbit(point.orbit, name.str());
        }
    }
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Periodic orbits of renewal equations by piecewise collocation"};
    app.require_subcommand(1);

    Common c;
    std::vector<int> conv_L{5, 10, 20, 40, 80};
    int conv_m = 3;
    ReferenceFlags ref;
    auto* converge = app.add_subcommand("converge", "error versus h for a list of L at fixed m");
    add_common(converge, c);
    converge->add_option("--L", conv_L, "comma-separated list of L")->delimiter(',');
    converge->add_option("--m", conv_m, "degree");
    add_reference(converge, ref);

    std::vector<int> sem_m{5, 10, 15, 20, 25, 30, 35, 40};
    auto* sem_cmd = app.add_subcommand("sem", "error versus m with a single interval");
    add_common(sem_cmd, c);
    sem_cmd->add_option("--m", sem_m, "comma-separated list of m")->delimiter(',');
    add_reference(sem_cmd, ref);

    BranchFlags bf;
    auto* branch = app.add_subcommand("branch", "natural-parameter continuation from --param to --to");
    add_common(branch, c);
    branch->add_option("--L", bf.L, "intervals");
    branch->add_option("--m", bf.m, "degree");
    branch->add_option("--to", bf.to, "final parameter")->required();
    branch->add_option("--step", bf.step, "nominal parameter step");
    branch->add_flag("--floquet", bf.floquet, "compute the spectrum at every point");
    branch->add_flag("--doubled", bf.doubled, "switch to the period-doubled branch before continuing");
    branch->add_option("--orbit", c.orbit, "starting orbit JSON (default: built-in start)");
    branch->add_option("--snapshot", bf.snapshots, "parameters whose orbits are saved as JSON")->delimiter(',');
    branch->add_option("--snapshot-dir", bf.snapshot_dir, "directory for orbit snapshots");

    std::optional<int> fl_L;
    std::optional<int> fl_m;
    auto* floquet = app.add_subcommand("floquet", "Floquet multipliers of a stored orbit");
    add_common(floquet, c);
    floquet->add_option("--orbit", c.orbit, "orbit JSON")->required();
    floquet->add_option("--L", fl_L, "expected intervals of the orbit mesh");
    floquet->add_option("--m", fl_m, "expected degree of the orbit mesh");

    int solve_L = 20;
    int solve_m = 5;
    auto* solve = app.add_subcommand("solve", "one periodic orbit, written as JSON");
    add_common(solve, c);
    solve->add_option("--L", solve_L, "intervals");
    solve->add_option("--m", solve_m, "degree");
    solve->add_option("--orbit", c.orbit, "initial guess JSON (default: built-in start)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ok : usage;
    }

    try {
        if (*converge) {
            if (conv_L.empty()) throw InvalidArgument("converge: --L list is empty");
            return cmd_converge(c, conv_L, conv_m, ref);
        }
        if (*sem_cmd) {
            if (sem_m.empty()) throw InvalidArgument("sem: --m list is empty");
            return cmd_sem(c, sem_m, ref);
        }
        if (*branch) return cmd_branch(c, bf);
        if (*floquet) return cmd_floquet(c, fl_L, fl_m, floquet->count("--family") > 0);
        if (*solve) return cmd_solve(c, solve_L, solve_m);
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << '\n';
        return parse_failure;
    } catch (const BranchStalled& e) {
        std::cerr << "error: " << e.what() << '\n';
        return stalled;
    } catch (const InvalidArgument& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return usage;
    } catch (const Error& e) {
        std::cerr << "solve failure: " << e.what() << '\n';
        return solve_failure;
    }
    return usage;
}
