// Command-line front end: solve one operating point, sweep a delay-power
// curve over a pmax grid, or run the self-validation suite.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ehsched/policy.hpp"
#include "ehsched/simulator.hpp"
#include "ehsched/solver.hpp"
#include "ehsched/sweep.hpp"
#include "ehsched/validation.hpp"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitInfeasible = 2;
constexpr int kExitValidation = 3;

// RFC-4180 field quoting: quote when the field contains comma, quote or CR/LF.
std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(12);
    os << v;
    return os.str();
}

std::string i_star_text(int i_star) {
    return i_star == ehsched::kThresholdInfinity ? "inf" : std::to_string(i_star);
}

void write_out(const std::string& path, const std::string& body) {
    if (path.empty()) {
        std::cout << body;
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open output file: " + path);
    f << body;
}

struct CommonFlags {
    ehsched::SystemParams p;
    std::string format = "json";
    std::string output;
};

void add_param_flags(CLI::App* cmd, CommonFlags& c, bool with_pmax) {
    cmd->add_option("--eta1", c.p.eta1, "Data-batch arrival probability per slot")->required();
    cmd->add_option("--eta2", c.p.eta2, "Energy-batch arrival probability per slot")->required();
    cmd->add_option("--k1", c.p.k1, "Data packets per arrival")->capture_default_str();
    cmd->add_option("--k2", c.p.k2, "Energy packets per harvest")->capture_default_str();
    cmd->add_option("--q1", c.p.q1, "Data-queue capacity")->capture_default_str();
    cmd->add_option("--q2", c.p.q2, "Battery capacity in energy packets")->capture_default_str();
    if (with_pmax)
        cmd->add_option("--pmax", c.p.pmax, "Average RES power budget (fraction of slots)")
            ->required();
    cmd->add_option("--format", c.format, "Output format: json or csv")
        ->check(CLI::IsMember({"json", "csv"}))
        ->capture_default_str();
    cmd->add_option("--output", c.output, "Write the report to a file instead of stdout");
}

json params_json(const ehsched::SystemParams& p) {
    return json{{"eta1", p.eta1}, {"eta2", p.eta2}, {"k1", p.k1},  {"k2", p.k2},
                {"q1", p.q1},     {"q2", p.q2},     {"pmax", p.pmax}};
}

int default_jobs() {
    if (const char* env = std::getenv("EH_SCHED_JOBS")) {
        const int j = std::atoi(env);
        if (j >= 1) return j;
    }
    return 1;
}

int run_solve(const CommonFlags& c, bool simulate, const ehsched::SimConfig& sim_cfg) {
    const ehsched::OptimalSolution sol = ehsched::solve(c.p);

    json doc;
    doc["params"] = params_json(c.p);
    doc["case"] = ehsched::to_string(c.p.kind());
    doc["i_star"] =
        sol.i_star == ehsched::kThresholdInfinity ? json(nullptr) : json(sol.i_star);
    doc["i_star_infinite"] = sol.i_star == ehsched::kThresholdInfinity;
    doc["delay"] = sol.delay;
    doc["power"] = sol.power;
    doc["thresholds"] = sol.thresholds.values;
    doc["g"] = sol.policy.g;
    doc["f"] = sol.policy.f;
    json pi = json::array();
    for (int s = 0; s < c.p.states(); ++s) {
        if (sol.pi_star.pi[s] == 0.0) continue;
        const auto [i, j] = c.p.state_of(s);
        pi.push_back(json{{"i", i}, {"j", j}, {"p", sol.pi_star.pi[s]}});
    }
    doc["pi"] = pi;
    if (simulate) {
        const ehsched::SimResult sim = ehsched::run(c.p, sol.policy, sim_cfg);
        doc["simulation"] = json{{"delay", sim.empirical_delay},
                                 {"delay_stderr", sim.delay_stderr},
                                 {"power", sim.empirical_power},
                                 {"power_stderr", sim.power_stderr},
                                 {"max_q1", sim.max_q1},
                                 {"drops", sim.drops},
                                 {"seed", sim_cfg.seed},
                                 {"slots", sim_cfg.horizon}};
    }

    if (c.format == "json") {
        write_out(c.output, doc.dump(2) + "\n");
    } else {
        // Flat key,value table; vector-valued keys are JSON-encoded in one field.
        std::ostringstream os;
        os << "key,value\r\n";
        for (const std::string key : {"case", "i_star", "delay", "power"}) {
            const json& v = doc[key];
            os << key << ','
               << csv_field(v.is_string() ? v.get<std::string>()
                                          : (v.is_null() ? "inf" : v.dump()))
               << "\r\n";
        }
        for (const std::string key : {"thresholds", "g", "f", "pi"})
            os << key << ',' << csv_field(doc[key].dump()) << "\r\n";
        if (doc.contains("simulation"))
            os << "simulation," << csv_field(doc["simulation"].dump()) << "\r\n";
        write_out(c.output, os.str());
    }
    return kExitOk;
}

int run_sweep(const CommonFlags& c, const std::vector<double>& grid,
              const ehsched::SweepOptions& opts) {
    const std::vector<ehsched::SweepPoint> rows = ehsched::sweep_curve(c.p, grid, opts);

    if (c.format == "json") {
        json doc;
        doc["params"] = params_json(c.p);
        doc["params"].erase("pmax");
        json arr = json::array();
        for (size_t idx = 0; idx < rows.size(); ++idx) {
            const auto& r = rows[idx];
            json row{{"index", idx}, {"pmax", r.pmax}, {"status", r.ok ? "ok" : "error"}};
            if (r.ok) {
                row["i_star"] =
                    r.i_star == ehsched::kThresholdInfinity ? json(nullptr) : json(r.i_star);
                row["delay"] = r.delay;
                row["power"] = r.power;
                if (r.simulated) {
                    row["sim_delay"] = r.sim_delay;
                    row["sim_delay_stderr"] = r.sim_delay_stderr;
                    row["sim_power"] = r.sim_power;
                    row["sim_power_stderr"] = r.sim_power_stderr;
                }
            } else {
                row["error"] = r.error;
            }
            arr.push_back(row);
        }
        doc["points"] = arr;
        write_out(c.output, doc.dump(2) + "\n");
    } else {
        std::ostringstream os;
        os << "index,pmax,status,i_star,delay,power,sim_delay,sim_delay_stderr,"
              "sim_power,sim_power_stderr,error\r\n";
        for (size_t idx = 0; idx < rows.size(); ++idx) {
            const auto& r = rows[idx];
            os << idx << ',' << fmt(r.pmax) << ',' << (r.ok ? "ok" : "error") << ',';
            if (r.ok) os << i_star_text(r.i_star);
            os << ',';
            if (r.ok) os << fmt(r.delay);
            os << ',';
            if (r.ok) os << fmt(r.power);
            os << ',';
            if (r.simulated)
                os << fmt(r.sim_delay) << ',' << fmt(r.sim_delay_stderr) << ','
                   << fmt(r.sim_power) << ',' << fmt(r.sim_power_stderr) << ',';
            else
                os << ",,,,";
            os << csv_field(r.error) << "\r\n";
        }
        write_out(c.output, os.str());
    }
    return kExitOk;
}

int run_validate(const ehsched::ValidationOptions& opts) {
    bool all_ok = true;
    for (const ehsched::CheckResult& r : ehsched::run_validation(opts)) {
        all_ok = all_ok && r.passed;
        std::cout << (r.passed ? "PASS" : "FAIL") << "  " << r.name << "  residual="
                  << r.residual << "  " << r.detail << "\n";
    }
    std::cout << (all_ok ? "validation passed" : "validation FAILED") << "\n";
    return all_ok ? kExitOk : kExitValidation;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Delay-optimal scheduling for an energy-harvesting link with a "
                 "rate-constrained reliable energy source"};
    app.require_subcommand(1);

    CommonFlags solve_flags;
    bool solve_simulate = false;
    ehsched::SimConfig solve_sim;
    CLI::App* solve_cmd =
        app.add_subcommand("solve", "Compute the optimal threshold, delay, power and policy");
    add_param_flags(solve_cmd, solve_flags, /*with_pmax=*/true);
    solve_cmd->add_flag("--simulate", solve_simulate, "Also run a Monte Carlo check");
    solve_cmd->add_option("--seed", solve_sim.seed, "Simulation seed")->capture_default_str();
    solve_cmd->add_option("--slots", solve_sim.horizon, "Simulation horizon in slots")
        ->capture_default_str();
    solve_cmd->add_option("--burnin", solve_sim.burn_in, "Slots excluded from statistics")
        ->capture_default_str();

    CommonFlags sweep_flags;
    sweep_flags.format = "csv";
    std::vector<double> grid_list;
    double grid_min = 0.0, grid_max = 0.0;
    int grid_steps = 20;
    ehsched::SweepOptions sweep_opts;
    sweep_opts.jobs = default_jobs();
    CLI::App* sweep_cmd =
        app.add_subcommand("sweep", "Trace the delay-power tradeoff over a pmax grid");
    add_param_flags(sweep_cmd, sweep_flags, /*with_pmax=*/false);
    auto* opt_list = sweep_cmd->add_option("--pmax-grid", grid_list,
                                           "Explicit comma-separated pmax grid")
                         ->delimiter(',');
    auto* opt_min = sweep_cmd->add_option("--pmax-min", grid_min, "Grid lower endpoint");
    auto* opt_max = sweep_cmd->add_option("--pmax-max", grid_max, "Grid upper endpoint");
    sweep_cmd->add_option("--pmax-steps", grid_steps, "Number of evenly spaced grid points")
        ->capture_default_str();
    opt_min->needs(opt_max)->excludes(opt_list);
    opt_max->needs(opt_min);
    sweep_cmd->add_flag("--simulate", sweep_opts.simulate,
                        "Simulate each grid point as well");
    sweep_cmd->add_option("--seed", sweep_opts.sim.seed, "Base simulation seed")
        ->capture_default_str();
    sweep_cmd->add_option("--slots", sweep_opts.sim.horizon, "Simulation horizon in slots")
        ->capture_default_str();
    sweep_cmd->add_option("--burnin", sweep_opts.sim.burn_in, "Slots excluded from statistics")
        ->capture_default_str();
    sweep_cmd->add_option("--jobs", sweep_opts.jobs,
                          "Concurrent grid points (default: EH_SCHED_JOBS or 1)");

    ehsched::ValidationOptions val_opts;
    bool mutate_zeta = false;
    CLI::App* val_cmd = app.add_subcommand("validate", "Run the self-validation suite");
    val_cmd->add_option("--grid", val_opts.case1_grid, "Closed-form agreement grid size")
        ->capture_default_str();
    val_cmd->add_option("--policies", val_opts.policies_per_case,
                        "Random policies per parameter family")
        ->capture_default_str();
    val_cmd->add_option("--slots", val_opts.sim_slots, "Simulation horizon in slots")
        ->capture_default_str();
    val_cmd->add_option("--seed", val_opts.seed, "Validation RNG seed")->capture_default_str();
    val_cmd
        ->add_flag("--mutate-zeta", mutate_zeta,
                   "Fault injection: flip the zeta signs (the identity check must then fail)")
        ->group(""); // hidden

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (solve_cmd->parsed()) return run_solve(solve_flags, solve_simulate, solve_sim);
        if (sweep_cmd->parsed()) {
            std::vector<double> grid = grid_list;
            if (grid.empty()) {
                if (opt_min->count() == 0)
                    throw CLI::ValidationError("sweep", "provide --pmax-grid or --pmax-min/--pmax-max");
                grid = ehsched::linear_grid(grid_min, grid_max, grid_steps);
            }
            return run_sweep(sweep_flags, grid, sweep_opts);
        }
        val_opts.mutate_zeta_sign = mutate_zeta;
        return run_validate(val_opts);
    } catch (const ehsched::InfeasibleError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInfeasible;
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
}
