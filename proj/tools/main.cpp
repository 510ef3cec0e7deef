// Command-line driver: single runs, gamma sweeps, threshold bisection,
// parameter validation, and oracle cross-checks.

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "ischemic/diagnostics.hpp"
#include "ischemic/integrator.hpp"
#include "ischemic/io.hpp"
#include "ischemic/params.hpp"

namespace fs = std::filesystem;
using namespace ischemic;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitStepFailure = 2;

struct CommonOpts {
    std::string config_path;
    std::string out_dir = ".";
    std::optional<double> gamma;
    std::optional<double> horizon;
    std::optional<int> cells;
};

Parameters resolve_params(const CommonOpts& o)
{
    Parameters prm = o.config_path.empty() ? Parameters{} : load_params(o.config_path);
    if (o.gamma) prm.gamma = *o.gamma;
    if (o.cells) prm.N = *o.cells;
    if (o.horizon) prm.T_max = *o.horizon;
    prm.validate();
    return prm;
}

int effective_workers(int requested)
{
    int cap = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("ISCHEMIC_FBP_THREADS")) {
        try {
            cap = std::min(cap, std::max(1, std::stoi(env)));
        } catch (...) {
            // ignore malformed env values
        }
    }
    return std::clamp(requested, 1, cap);
}

int cmd_run(const CommonOpts& opts, bool svg)
{
    Parameters prm;
    try {
        prm = resolve_params(opts);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    }

    fs::create_directories(opts.out_dir);
    RunResult res = run(prm);
    write_run_csv((fs::path(opts.out_dir) / "run.csv").string(), res.series);
    nlohmann::json meta = run_metadata(prm, res.outcome);
    if (res.step_failed) meta["step_failure"] = res.failure;
    std::ofstream((fs::path(opts.out_dir) / "meta.json").string()) << meta.dump(2) << "\n";
    if (svg)
        write_radius_svg((fs::path(opts.out_dir) / "curve.svg").string(), res.series);

    if (res.step_failed) {
        std::cerr << "step failure: " << res.failure << "\n";
        return kExitStepFailure;
    }
    std::cout << "outcome: " << res.outcome.name() << "  t_end: " << res.final_state.t
              << "  R_end: " << res.final_state.R << "\n";
    return kExitOk;
}

struct SweepRow {
    double gamma = 0.0;
    Outcome outcome;
    bool failed = false;
};

int cmd_sweep(const CommonOpts& opts, std::vector<double> gammas, int workers)
{
    if (gammas.empty()) {
        std::cerr << "sweep needs at least one gamma\n";
        return kExitConfig;
    }
    Parameters base;
    try {
        base = resolve_params(opts);
        for (double gm : gammas)
            if (gm < 0.0 || gm > 1.0) throw ConfigError("gamma values must be in [0,1]");
        std::vector<double> sorted = gammas;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
            throw ConfigError("gamma values must be unique");
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    }
    std::sort(gammas.begin(), gammas.end());

    fs::create_directories(opts.out_dir);
    std::vector<SweepRow> rows(gammas.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= gammas.size()) return;
            Parameters prm = base;
            prm.gamma = gammas[i];
            RunResult res = run(prm);
            std::ostringstream dir;
            dir << "gamma_" << gammas[i];
            const fs::path sub = fs::path(opts.out_dir) / dir.str();
            fs::create_directories(sub);
            write_run_csv((sub / "run.csv").string(), res.series);
            std::ofstream((sub / "meta.json").string())
                << run_metadata(prm, res.outcome).dump(2) << "\n";
            rows[i] = {gammas[i], res.outcome, res.step_failed};
        }
    };
    std::vector<std::thread> pool;
    const int nw = effective_workers(workers);
    for (int k = 0; k < nw; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();

    std::ofstream csv((fs::path(opts.out_dir) / "sweep.csv").string());
    csv << "gamma,outcome,t_heal,R_inf\n";
    for (const auto& r : rows) {
        csv << format_double(r.gamma) << "," << r.outcome.name() << ",";
        if (r.outcome.kind == Outcome::Kind::Healed)
            csv << format_double(r.outcome.t_heal) << ",";
        else if (r.outcome.kind == Outcome::Kind::Stalled)
            csv << "," << format_double(r.outcome.R_inf);
        else
            csv << ",";
        csv << "\n";
    }

    // monotonicity verdict: no healed gamma above the smallest stalled one
    double min_stalled = 2.0;
    for (const auto& r : rows)
        if (r.outcome.kind == Outcome::Kind::Stalled)
            min_stalled = std::min(min_stalled, r.gamma);
    bool monotone = true;
    for (const auto& r : rows)
        if (r.outcome.kind == Outcome::Kind::Healed && r.gamma > min_stalled)
            monotone = false;
    std::cout << (monotone ? "classification monotone in gamma\n"
                           : "Warn: healed outcome above a stalled gamma\n");

    // bracket for the healing threshold
    double lo = -1.0, hi = 2.0;
    for (const auto& r : rows) {
        if (r.outcome.kind == Outcome::Kind::Healed) lo = std::max(lo, r.gamma);
        if (r.outcome.kind == Outcome::Kind::Stalled) hi = std::min(hi, r.gamma);
    }
    if (lo >= 0.0 && hi <= 1.0 && lo < hi)
        std::cout << "gamma* bracket: (" << lo << ", " << hi << ")\n";

    for (const auto& r : rows)
        std::cout << "gamma=" << r.gamma << " -> " << r.outcome.name() << "\n";
    return kExitOk;
}

int cmd_find_gamma_star(const CommonOpts& opts, std::vector<double> bracket, int iters)
{
    Parameters base;
    try {
        base = resolve_params(opts);
        if (bracket.size() != 2) throw ConfigError("--bracket needs two gamma values");
        for (double gm : bracket)
            if (gm < 0.0 || gm > 1.0) throw ConfigError("bracket must lie in [0,1]");
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    }

    auto healed = [&](double gm) {
        Parameters prm = base;
        prm.gamma = gm;
        const RunResult res = run(prm);
        if (res.step_failed) throw StepFailure(res.failure);
        return res.outcome.kind == Outcome::Kind::Healed;
    };

    double lo = std::min(bracket[0], bracket[1]);
    double hi = std::max(bracket[0], bracket[1]);
    try {
        const bool lo_heals = healed(lo);
        const bool hi_heals = healed(hi);
        if (lo_heals == hi_heals) {
            std::cerr << "NoBracket: both endpoints classify as "
                      << (lo_heals ? "Healed" : "not Healed") << "\n";
            return kExitConfig;
        }
        std::cout << "iter,lo,hi,mid,mid_healed\n";
        for (int k = 0; k < iters; ++k) {
            const double mid = 0.5 * (lo + hi);
            const bool mid_heals = healed(mid);
            std::cout << k << "," << lo << "," << hi << "," << mid << ","
                      << (mid_heals ? 1 : 0) << "\n";
            if (mid_heals == lo_heals)
                lo = mid;
            else
                hi = mid;
        }
    } catch (const StepFailure& e) {
        std::cerr << "step failure during bisection: " << e.what() << "\n";
        return kExitStepFailure;
    }
    std::cout << "gamma* = " << 0.5 * (lo + hi) << " +/- " << 0.5 * (hi - lo) << "\n";
    return kExitOk;
}

int cmd_validate_params(const CommonOpts& opts)
{
    Parameters prm;
    try {
        prm = resolve_params(opts);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    }
    std::cout << "homeostasis constraints:\n";
    for (const auto& c : validate_homeostasis(prm)) {
        std::cout << "  " << c.constraint << ": listed " << c.listed << ", implied "
                  << c.implied << ", residual " << 100.0 * c.residual << "% -> "
                  << (c.pass ? "Pass" : "Warn") << "\n";
    }
    if (prm.enforce_homeostasis)
        std::cout << "enforce_homeostasis on: listed values already replaced\n";
    std::cout << "reconstructed default kinetics: ";
    const auto origin = kinetics_provenance();
    for (FieldId id : all_fields())
        if (origin[static_cast<int>(id)] == KineticOrigin::ReconstructedDefault)
            std::cout << field_name(id) << " ";
    std::cout << "\nreconstructed rate constants: ";
    for (const auto& k : reconstructed_rate_keys()) std::cout << k << " ";
    std::cout << "\n";
    return kExitOk;
}

int cmd_oracle_compare(const CommonOpts& opts, double horizon)
{
    Parameters prm;
    try {
        prm = resolve_params(opts);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    }
    RunResult main_res = run(prm, horizon);
    if (main_res.step_failed) {
        std::cerr << "step failure: " << main_res.failure << "\n";
        return kExitStepFailure;
    }
    OracleSeries oracle = oracle_solve(prm, horizon, 4 * prm.N);

    std::vector<double> tA, rA;
    for (const auto& r : main_res.series) {
        tA.push_back(r.t);
        rA.push_back(r.R);
    }
    const double dR = compare_radius_series(tA, rA, oracle.times, oracle.radius);
    const auto dF =
        compare_fields(main_res.final_state.fields, oracle.snapshots.back().fields);
    std::cout << "R discrepancy: " << 100.0 * dR << "%\n";
    for (FieldId id : all_fields())
        std::cout << "field " << field_name(id) << " discrepancy: "
                  << 100.0 * dF[static_cast<int>(id)] << "%\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"ischemic wound free-boundary simulator"};
    app.require_subcommand(1);

    CommonOpts opts;
    bool svg = false;
    std::vector<double> gammas;
    std::vector<double> bracket;
    int iters = 10;
    int workers = 1;
    double horizon = 0.5;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", opts.config_path, "JSON config file");
        sub->add_option("--out", opts.out_dir, "output directory");
        sub->add_option("--gamma", opts.gamma, "override ischemia level");
        sub->add_option("--horizon", opts.horizon, "override T_max");
        sub->add_option("--cells", opts.cells, "override grid cell count");
    };

    CLI::App* run_cmd = app.add_subcommand("run", "single simulation");
    add_common(run_cmd);
    run_cmd->add_flag("--svg", svg, "also emit curve.svg of R(t)");

    CLI::App* sweep_cmd = app.add_subcommand("sweep", "independent runs over gamma values");
    add_common(sweep_cmd);
    sweep_cmd->add_option("--gammas", gammas, "gamma values to sweep");
    sweep_cmd->add_option("--workers", workers, "parallel workers");

    CLI::App* star_cmd =
        app.add_subcommand("find-gamma-star", "bisection on the healing threshold");
    add_common(star_cmd);
    star_cmd->add_option("--bracket", bracket, "two gammas classifying differently")
        ->expected(2);
    star_cmd->add_option("--iters", iters, "bisection iterations");

    CLI::App* val_cmd = app.add_subcommand("validate-params", "homeostasis checks");
    add_common(val_cmd);

    CLI::App* oc_cmd =
        app.add_subcommand("oracle-compare", "IMEX path vs explicit fine-grid oracle");
    add_common(oc_cmd);

    CLI11_PARSE(app, argc, argv);

    try {
        if (run_cmd->parsed()) return cmd_run(opts, svg);
        if (sweep_cmd->parsed()) return cmd_sweep(opts, gammas, workers);
        if (star_cmd->parsed()) return cmd_find_gamma_star(opts, bracket, iters);
        if (val_cmd->parsed()) return cmd_validate_params(opts);
        if (oc_cmd->parsed()) return cmd_oracle_compare(opts, opts.horizon.value_or(horizon));
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitStepFailure;
    }
    return kExitConfig;
}
