#pragma once

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "polystab/casestudy.hpp"
#include "polystab/chain.hpp"
#include "polystab/io.hpp"
#include "polystab/mean_payoff.hpp"
#include "polystab/simulate.hpp"

namespace polystab {

namespace clid {

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

inline int env_threads() {
    const char* v = std::getenv("POLYSTAB_THREADS");
    if (!v) return 1;
    const int t = std::atoi(v);
    return t >= 1 ? t : 1;
}

inline Json payoff_json(const MeanPayoffValue& v) {
    return v.is_infinite() ? Json("+inf") : Json(v.value);
}

inline void print_report(const Json& report, bool as_json, std::ostream& out) {
    if (as_json) {
        out << report.dump(2) << "\n";
        return;
    }
    for (auto it = report.begin(); it != report.end(); ++it) {
        if (it.key() == "format_version") continue;
        out << it.key() << ": " << (it.value().is_string() ? it.value().get<std::string>() : it.value().dump())
            << "\n";
    }
}

inline Json abstraction_diagnostics(const AbstractWmdp& abs) {
    Json diags = Json::array();
    for (int q : abs.divergent_locations)
        diags.push_back(Json{{"kind", "divergent_location"}, {"loc", q}});
    for (const auto& st : abs.pruned)
        diags.push_back(Json{{"kind", "dead_end_facet"}, {"loc", st.loc}, {"facet", st.facet}});
    if (abs.init_surrogate)
        diags.push_back(Json{{"kind", "init_dead_end"},
                             {"note", "execution cannot continue from init; absorbed as convergent"}});
    return diags;
}

inline Json abstract_model_json(const AbstractWmdp& abs) {
    Json j = wmdp_to_json(abs.wmdp);
    Json states = Json::array();
    for (const auto& st : abs.states) states.push_back(Json{{"loc", st.loc}, {"facet", st.facet}});
    Json meta;
    meta["states"] = std::move(states);
    meta["diagnostics"] = abstraction_diagnostics(abs);
    j["meta"] = std::move(meta);
    return j;
}

inline Json simulation_json(const SimulationReport& rep) {
    Json j;
    j["runs"] = rep.runs;
    j["horizon"] = rep.horizon;
    j["estimate"] = std::isinf(rep.estimate) ? Json("+inf") : Json(rep.estimate);
    j["negative_fraction"] = rep.negative_fraction;
    j["stuck_runs"] = rep.stuck_runs;
    Json pm = Json::array();
    for (double v : rep.partial_means) pm.push_back(std::isinf(v) ? Json("+inf") : Json(v));
    j["partial_means"] = std::move(pm);
    return j;
}

}  // namespace clid

/// Command-line front end; returns the process exit code.
/// Exit codes: 0 verdict produced, 2 validation/parse failure, 3 resource
/// cap exceeded, 1 unexpected error.
inline int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"stability analysis of polyhedral probabilistic hybrid systems"};
    app.require_subcommand(1);

    bool as_json = false;
    double lp_tolerance = 1e-8;
    std::uint64_t policy_cap = kDefaultPolicyCap;
    app.add_flag("--json", as_json, "emit the report as JSON");
    app.add_option("--lp-tolerance", lp_tolerance, "LP feasibility/optimality tolerance");
    app.add_option("--policy-cap", policy_cap, "max number of enumerated policies");

    std::string path, out_path;
    long long horizon = 10000;
    int runs = 20;
    std::uint64_t seed = 1;
    int sectors = 8;

    auto* analyze = app.add_subcommand("analyze", "maximum expected mean payoff and verdict of a WMDP");
    analyze->add_option("model", path)->required();
    auto* as_check = app.add_subcommand("as-check", "exact almost-sure-convergence decision for a WMDP");
    as_check->add_option("model", path)->required();
    auto* abstract_cmd = app.add_subcommand("abstract", "abstract a PPHS to a finite WMDP");
    abstract_cmd->add_option("model", path)->required();
    abstract_cmd->add_option("-o,--output", out_path, "write the abstract WMDP here");
    auto* verify = app.add_subcommand("verify", "abstract a PPHS and decide stability");
    verify->add_option("model", path)->required();
    auto* simulate = app.add_subcommand("simulate", "Monte-Carlo partial mean payoffs");
    simulate->add_option("model", path)->required();
    simulate->add_option("--horizon", horizon, "steps (chain) or switches (PPHS) per run");
    simulate->add_option("--runs", runs, "number of runs");
    simulate->add_option("--seed", seed, "RNG seed");
    auto* oracle = app.add_subcommand("oracle", "brute-force maximum expected mean payoff");
    oracle->add_option("model", path)->required();
    auto* casestudy = app.add_subcommand("casestudy", "regenerate a case-study model");
    std::string which = "switched";
    casestudy->add_option("name", which, "case study name (switched)");
    casestudy->add_option("--sectors", sectors, "number of angular sectors (4, 8 or 16)");
    casestudy->add_option("-o,--output", out_path, "write the PPHS here");

    std::reverse(args.begin(), args.end());
    try {
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << app.help();
            return 0;
        }
        err << "error: " << e.what() << "\n";
        return 2;
    }

    const SolverOptions opt{lp_tolerance, 50000};
    const int threads = clid::env_threads();

    try {
        Json report;
        report["format_version"] = "1";

        if (analyze->parsed()) {
            auto model = parse_model(path);
            if (!std::holds_alternative<Wmdp>(model)) throw ValidationError("analyze expects a wmdp model");
            const Wmdp& m = std::get<Wmdp>(model);
            const auto t0 = std::chrono::steady_clock::now();
            StabilityResult r = wmdp_stability_verdict(m, opt, threads);
            report["command"] = "analyze";
            report["verdict"] = (r.verdict == Verdict::Stable) ? "Stable" : "Unknown";
            report["max_mean_payoff"] = clid::payoff_json(r.payoff);
            Json diags = Json::array();
            if (r.infinite_edge)
                diags.push_back(Json{{"kind", "infinite_edge"},
                                     {"note", "reachable +inf weight; LP pipeline skipped"}});
            report["diagnostics"] = std::move(diags);
            report["timings"] = Json{{"verification_sec", clid::seconds_since(t0)}};
        } else if (as_check->parsed()) {
            auto model = parse_model(path);
            if (!std::holds_alternative<Wmdp>(model)) throw ValidationError("as-check expects a wmdp model");
            AsConvergenceResult r = decide_as_convergence(std::get<Wmdp>(model), policy_cap);
            report["command"] = "as-check";
            report["verdict"] = r.convergent ? "Yes" : "No";
            if (r.witness) {
                Json w;
                w["policy"] = r.witness->policy.choice;
                w["bscc"] = r.witness->bscc;
                w["effective_weight"] =
                    std::isinf(r.witness->weight) ? Json("+inf") : Json(r.witness->weight);
                report["witness"] = std::move(w);
            }
        } else if (abstract_cmd->parsed()) {
            auto model = parse_model(path);
            if (!std::holds_alternative<Pphs>(model)) throw ValidationError("abstract expects a pphs model");
            const auto t0 = std::chrono::steady_clock::now();
            AbstractWmdp abs = abstract_pphs(std::get<Pphs>(model), opt);
            const double t_red = clid::seconds_since(t0);
            const Json model_json = clid::abstract_model_json(abs);
            if (!out_path.empty()) {
                std::ofstream f(out_path);
                if (!f) throw ParseError("cannot write file: " + out_path);
                f << model_json.dump(2) << "\n";
            } else {
                out << model_json.dump(2) << "\n";
            }
            report["command"] = "abstract";
            report["states"] = abs.wmdp.state_count;
            int action_count = 0;
            for (const auto& a : abs.wmdp.actions) action_count += static_cast<int>(a.size());
            report["actions"] = action_count;
            report["diagnostics"] = clid::abstraction_diagnostics(abs);
            report["timings"] = Json{{"abstraction_sec", t_red}};
            if (out_path.empty()) {
                // Model already went to stdout; keep the report on stderr.
                clid::print_report(report, as_json, err);
                return 0;
            }
        } else if (verify->parsed()) {
            auto model = parse_model(path);
            if (!std::holds_alternative<Pphs>(model)) throw ValidationError("verify expects a pphs model");
            const auto t0 = std::chrono::steady_clock::now();
            AbstractWmdp abs = abstract_pphs(std::get<Pphs>(model), opt);
            const double t_red = clid::seconds_since(t0);
            const auto t1 = std::chrono::steady_clock::now();
            StabilityResult r = wmdp_stability_verdict(abs.wmdp, opt, threads);
            const double t_stab = clid::seconds_since(t1);
            report["command"] = "verify";
            report["verdict"] = (r.verdict == Verdict::Stable) ? "Stable" : "Unknown";
            report["max_mean_payoff"] = clid::payoff_json(r.payoff);
            Json diags = clid::abstraction_diagnostics(abs);
            if (r.infinite_edge)
                diags.push_back(Json{{"kind", "infinite_edge"},
                                     {"note", "reachable +inf weight; LP pipeline skipped"}});
            report["diagnostics"] = std::move(diags);
            report["abstract_states"] = abs.wmdp.state_count;
            report["timings"] = Json{{"abstraction_sec", t_red}, {"verification_sec", t_stab}};
        } else if (simulate->parsed()) {
            auto model = parse_model(path);
            report["command"] = "simulate";
            if (std::holds_alternative<Wmdp>(model)) {
                const Wmdp& m = std::get<Wmdp>(model);
                for (const auto& acts : m.actions)
                    if (acts.size() != 1)
                        throw ValidationError(
                            "simulate expects a single-action wmdp (a chain) or a pphs model");
                MemorylessPolicy rho;
                rho.choice.assign(m.state_count, 0);
                report["report"] = clid::simulation_json(simulate_chain(induce(m, rho), horizon,
                                                                        runs, seed));
            } else {
                report["report"] =
                    clid::simulation_json(simulate_pphs(std::get<Pphs>(model), horizon, runs, seed,
                                                        nullptr, opt));
            }
        } else if (oracle->parsed()) {
            auto model = parse_model(path);
            if (!std::holds_alternative<Wmdp>(model)) throw ValidationError("oracle expects a wmdp model");
            const double v = oracle_max_mean_payoff(std::get<Wmdp>(model), policy_cap);
            report["command"] = "oracle";
            report["value"] = std::isinf(v) ? Json("+inf") : Json(v);
        } else if (casestudy->parsed()) {
            if (which != "switched") throw ValidationError("unknown case study \"" + which + "\"");
            Pphs h = switched_system_pphs(sectors);
            const Json j = pphs_to_json(h);
            if (!out_path.empty()) {
                std::ofstream f(out_path);
                if (!f) throw ParseError("cannot write file: " + out_path);
                f << j.dump(2) << "\n";
                report["command"] = "casestudy";
                report["written"] = out_path;
                report["locations"] = static_cast<int>(h.locations.size());
            } else {
                out << j.dump(2) << "\n";
                return 0;
            }
        }

        clid::print_report(report, as_json, out);
        return 0;
    } catch (const EnumerationTooLarge& e) {
        err << "error: " << e.what() << "\n";
        return 3;
    } catch (const ParseError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const SchemaError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const InitNotOnFacet& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace polystab
