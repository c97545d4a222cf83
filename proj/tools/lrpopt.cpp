// Command-line front end: optimize, evaluate and simulate reflector placements.

#include "lrpopt/io.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <optional>

namespace fs = std::filesystem;
using namespace lrpopt;

namespace {

enum ExitCode : int { kOk = 0, kFailure = 1, kInputError = 2, kInitFailure = 3, kInfeasible = 4 };

struct Options {
    std::string config;
    std::string placement;
    std::string compare;
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
    std::optional<std::size_t> iterations;
    std::optional<std::size_t> particles;
};

Config load(const Options& opt)
{
    Config cfg = load_config(opt.config);
    if (opt.seed) {
        cfg.optimizer.seed = *opt.seed;
        // Keep the seed count, shift the block to start at --seed.
        for (std::size_t i = 0; i < cfg.simulation.seeds.size(); ++i) {
            cfg.simulation.seeds[i] = *opt.seed + i;
        }
    }
    if (opt.threads) {
        cfg.optimizer.threads = *opt.threads;
        cfg.simulation.threads = *opt.threads;
    }
    if (opt.iterations) cfg.optimizer.iterations = *opt.iterations;
    if (opt.particles) cfg.optimizer.swarm_size = *opt.particles;
    return cfg;
}

PlacementFile load_placement(const std::string& path, const Config& cfg)
{
    PlacementFile file = read_placement(path);
    if (file.z_l != cfg.room.z_l) {
        throw InputError(fmt::format("placement z_l {} differs from room z_l {}", file.z_l, cfg.room.z_l));
    }
    if (file.n_types != cfg.objective.n_types) {
        throw InputError(fmt::format("placement n_types {} differs from objective n_types {}", file.n_types,
                                     cfg.objective.n_types));
    }
    return file;
}

int cmd_optimize(const Options& opt)
{
    const Config cfg = load(opt);
    const Problem problem(cfg.room, cfg.objective, cfg.repair);
    const fs::path out(opt.out_dir);
    const int n_types = cfg.objective.n_types;

    const auto on_iteration = [&](const Optimizer& o) {
        const auto& s = o.history().back();
        fmt::print("iteration {} archive {} best_f1 {} best_f2 {} min_feasible_m {}\n", s.iteration,
                   s.archive_size, s.best_f1, s.best_f2, s.min_feasible_m);
        if (cfg.checkpoint_every > 0 && s.iteration > 0 && s.iteration % cfg.checkpoint_every == 0) {
            write_text_file(out / "checkpoints" / fmt::format("checkpoint_{:05}.txt", s.iteration),
                            format_checkpoint(o.archive(), s.iteration, n_types, cfg.room.z_l));
        }
    };
    const Optimizer result = run(problem, cfg.optimizer, on_iteration);

    write_text_file(out / "front.csv", format_front(result.archive()));
    std::size_t id = 0;
    for (const auto* e : ordered_front(result.archive())) {
        write_text_file(out / "placements" / fmt::format("placement_{}.txt", id++),
                        format_placement(e->placement, n_types, cfg.room.z_l));
    }
    write_text_file(out / "iterations.csv", format_iteration_log(result.history()));
    fmt::print("front: {} entries written to {}\n", result.archive().size(), out.string());
    return kOk;
}

std::string join_indices(const std::vector<std::size_t>& v)
{
    return v.empty() ? "none" : fmt::format("{}", fmt::join(v, " "));
}

int cmd_evaluate(const Options& opt)
{
    const Config cfg = load(opt);
    const PlacementFile file = load_placement(opt.placement, cfg);
    const Grid grid = Grid::build(cfg.room);
    const auto& pl = file.placement;
    const auto masks = compute_masks(pl, grid, cfg.room);
    const auto report = check_constraints(pl, cfg.room, grid, masks, cfg.objective.limits);
    const Evaluation ev = evaluate(pl, cfg.room, grid, masks, cfg.objective);

    std::vector<std::pair<std::string, std::string>> lines{
        {"feasible", report.feasible ? "true" : "false"},
        {"M", fmt::format("{}", pl.size())},
        {"grid_elements", fmt::format("{}", grid.size())},
        {"f1", format_number(ev.objectives.f1)},
        {"f2", format_number(ev.objectives.f2)},
        {"count_ok", report.m_ok ? "true" : "false"},
        {"coverage_ok", report.coverage_ok ? "true" : "false"},
        {"coverage_violations", fmt::format("{}", report.coverage_violations.size())},
        {"spacing_ok", report.spacing_ok ? "true" : "false"},
        {"margin_ok", report.margin_ok ? "true" : "false"},
        {"margin_violations", join_indices(report.margin_violations)},
    };
    std::string spacing;
    for (const auto& [a, b] : report.spacing_violations) {
        spacing += fmt::format("{}{}-{}", spacing.empty() ? "" : " ", a, b);
    }
    lines.emplace_back("spacing_violations", spacing.empty() ? "none" : spacing);

    const fs::path out(opt.out_dir);
    if (ev.feasible) {
        const auto amb = ambiguity(pl, grid, masks, cfg.objective.fingerprint_size, cfg.room.r_res);
        const auto gd = gdop_objective(pl, grid, masks, cfg.objective.sigma_r, cfg.objective.gdop_sqrt);
        lines.emplace_back("unique_elements", fmt::format("{}", amb.map.unique_count));
        lines.emplace_back("local_ambiguous_elements", fmt::format("{}", amb.map.local_count));
        lines.emplace_back("global_ambiguous_elements", fmt::format("{}", amb.map.global_count));
        std::vector<double> amb_values(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i) {
            amb_values[i] = static_cast<double>(amb.map.classes[i]);
        }
        write_text_file(out / "ambiguity.csv", format_map_csv(grid, amb_values));
        write_text_file(out / "ambiguity.pgm", format_map_pgm(grid, amb_values));
        write_text_file(out / "gdop.csv", format_map_csv(grid, gd.map));
        write_text_file(out / "gdop.pgm", format_map_pgm(grid, gd.map));
    }
    std::vector<double> counts;
    for (const int c : visible_counts(grid, masks)) {
        counts.push_back(c);
    }
    write_text_file(out / "visible_counts.csv", format_map_csv(grid, counts));
    const std::string text = format_report(lines);
    write_text_file(out / "report.txt", text);
    std::fputs(text.c_str(), stdout);
    return kOk;
}

void write_experiment(const fs::path& dir, const ExperimentReport& rep, const ExperimentConfig& sim)
{
    std::vector<std::pair<std::string, std::string>> lines{
        {"seeds", fmt::format("{}", rep.runs.size())},
        {"steps", fmt::format("{}", rep.steps)},
        {"burn_in", fmt::format("{}", sim.burn_in)},
        {"median_rmse", format_number(rep.median_rmse)},
        {"median_rmse_after_burn_in", format_number(rep.median_rmse_after_burn_in)},
        {"p10_rmse_after_burn_in", format_number(rep.p10_rmse_after_burn_in)},
        {"p90_rmse_after_burn_in", format_number(rep.p90_rmse_after_burn_in)},
    };
    for (const auto& run : rep.runs) {
        lines.emplace_back(fmt::format("seed_{}_rmse", run.seed), format_number(run.rmse));
        lines.emplace_back(fmt::format("seed_{}_rmse_after_burn_in", run.seed), format_number(run.rmse_after_burn_in));
        std::string trace = "step,truth_x,truth_y,truth_heading,est_x,est_y,est_heading,error\n";
        for (std::size_t i = 0; i < run.trace.size(); ++i) {
            const auto& t = run.trace[i];
            trace += fmt::format("{},{},{},{},{},{},{},{}\n", i, t.truth.x, t.truth.y, t.truth.heading, t.estimate.x,
                                 t.estimate.y, t.estimate.heading, t.error);
        }
        write_text_file(dir / fmt::format("trace_seed_{}.csv", run.seed), trace);
    }
    std::string hist = "bin_lo,bin_hi,count\n";
    for (std::size_t b = 0; b < rep.histogram.size(); ++b) {
        const double lo = static_cast<double>(b) * sim.histogram_bin;
        const bool last = b + 1 == rep.histogram.size();
        hist += fmt::format("{},{},{}\n", lo, last ? std::string("inf") : format_number(lo + sim.histogram_bin),
                            rep.histogram[b]);
    }
    write_text_file(dir / "histogram.csv", hist);
    write_text_file(dir / "report.txt", format_report(lines));
}

int cmd_simulate(const Options& opt)
{
    const Config cfg = load(opt);
    const Grid grid = Grid::build(cfg.room);
    if (cfg.simulation.waypoints.size() < 2) {
        throw InputError("simulation.waypoints needs at least two points");
    }

    auto prepare = [&](const std::string& path) -> std::optional<PlacementFile> {
        PlacementFile file = load_placement(path, cfg);
        const auto masks = compute_masks(file.placement, grid, cfg.room);
        if (!check_constraints(file.placement, cfg.room, grid, masks, cfg.objective.limits).feasible) {
            std::fprintf(stderr, "error: placement '%s' is infeasible\n", path.c_str());
            return std::nullopt;
        }
        return file;
    };
    const auto primary = prepare(opt.placement);
    if (!primary) return kInfeasible;
    std::optional<PlacementFile> other;
    if (!opt.compare.empty()) {
        other = prepare(opt.compare);
        if (!other) return kInfeasible;
    }

    const fs::path out(opt.out_dir);
    const auto n = cfg.objective.fingerprint_size;
    const auto rep = run_experiment(cfg.room, grid, primary->placement, n, cfg.simulation);
    write_experiment(other ? out / "placement" : out, rep, cfg.simulation);
    fmt::print("median_rmse_after_burn_in: {}\n", rep.median_rmse_after_burn_in);

    if (other) {
        const auto rep2 = run_experiment(cfg.room, grid, other->placement, n, cfg.simulation);
        write_experiment(out / "compare", rep2, cfg.simulation);
        std::vector<std::pair<std::string, std::string>> lines{
            {"placement", opt.placement},
            {"compare", opt.compare},
            {"placement_median_rmse_after_burn_in", format_number(rep.median_rmse_after_burn_in)},
            {"compare_median_rmse_after_burn_in", format_number(rep2.median_rmse_after_burn_in)},
        };
        std::size_t wins = 0;
        for (std::size_t i = 0; i < rep.runs.size(); ++i) {
            const auto& a = rep.runs[i];
            const auto& b = rep2.runs[i];
            lines.emplace_back(fmt::format("seed_{}", a.seed), fmt::format("{} {}", format_number(a.rmse_after_burn_in),
                                                                           format_number(b.rmse_after_burn_in)));
            if (a.rmse_after_burn_in < b.rmse_after_burn_in) ++wins;
        }
        lines.emplace_back("placement_better_seeds", fmt::format("{}", wins));
        const std::string text = format_report(lines);
        write_text_file(out / "paired_report.txt", text);
        std::fputs(text.c_str(), stdout);
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Reflector placement optimization and localization simulation"};
    app.require_subcommand(1);
    Options opt;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", opt.config, "YAML configuration")->required();
        sub->add_option("--out-dir", opt.out_dir, "output directory");
        sub->add_option("--seed", opt.seed, "random seed override");
        sub->add_option("--threads", opt.threads, "worker thread count")->check(CLI::PositiveNumber);
    };
    auto* optimize = app.add_subcommand("optimize", "run the swarm optimizer");
    add_common(optimize);
    optimize->add_option("--iterations", opt.iterations, "iteration count override");
    optimize->add_option("--particles", opt.particles, "swarm size override")->check(CLI::PositiveNumber);

    auto* eval = app.add_subcommand("evaluate", "constraints, objectives and maps of one placement");
    add_common(eval);
    eval->add_option("--placement", opt.placement, "placement file")->required();

    auto* simulate = app.add_subcommand("simulate", "track a simulated robot with the particle filter");
    add_common(simulate);
    simulate->add_option("--placement", opt.placement, "placement file")->required();
    simulate->add_option("--compare", opt.compare, "second placement for a matched-seed comparison");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kInputError;
    }

    try {
        if (optimize->parsed()) return cmd_optimize(opt);
        if (eval->parsed()) return cmd_evaluate(opt);
        return cmd_simulate(opt);
    } catch (const InputError& e) {
        std::fprintf(stderr, "input error: %s\n", e.what());
        return kInputError;
    } catch (const InitializationError& e) {
        std::fprintf(stderr, "initialization failed: %s\n", e.what());
        return kInitFailure;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kFailure;
    }
}
