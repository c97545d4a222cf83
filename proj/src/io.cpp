#include "lrpopt/io.hpp"

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>

namespace lrpopt {

namespace {

constexpr double kDegree = std::numbers::pi / 180.0;

void check_keys(const YAML::Node& node, const std::string& section, const std::set<std::string>& allowed)
{
    if (!node.IsMap()) {
        throw InputError("config section '" + section + "' must be a mapping");
    }
    for (const auto& kv : node) {
        const auto key = kv.first.as<std::string>();
        if (!allowed.contains(key)) {
            throw InputError("unknown key '" + key + "' in config section '" + section + "'");
        }
    }
}

template <typename T>
void read(const YAML::Node& node, const char* key, T& out)
{
    if (const auto v = node[key]) {
        out = v.as<T>();
    }
}

void read_range(const YAML::Node& node, const char* key, Range& out)
{
    if (const auto v = node[key]) {
        const auto pair = v.as<std::vector<double>>();
        if (pair.size() != 2) {
            throw InputError(std::string("'") + key + "' must be a [lo, hi] pair");
        }
        out = {pair[0], pair[1]};
    }
}

std::vector<Vec2> read_points(const YAML::Node& node, const char* what)
{
    std::vector<Vec2> pts;
    for (const auto& p : node.as<std::vector<std::vector<double>>>()) {
        if (p.size() != 2) {
            throw InputError(std::string(what) + " entries must be [x, y] pairs");
        }
        pts.push_back({p[0], p[1]});
    }
    return pts;
}

double parse_double(std::string_view token, const std::string& what)
{
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
    if (ec != std::errc{} || ptr != token.data() + token.size() || !std::isfinite(v)) {
        throw InputError("cannot read " + what + " from '" + std::string(token) + "'");
    }
    return v;
}

long long parse_int(std::string_view token, const std::string& what)
{
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
    if (ec != std::errc{} || ptr != token.data() + token.size()) {
        throw InputError("cannot read " + what + " from '" + std::string(token) + "'");
    }
    return v;
}

std::vector<std::string> split_ws(const std::string& line)
{
    std::istringstream in(line);
    std::vector<std::string> out;
    for (std::string tok; in >> tok;) {
        out.push_back(tok);
    }
    return out;
}

std::vector<std::string> split_char(const std::string& line, char sep)
{
    std::vector<std::string> out;
    std::string cur;
    for (const char c : line) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace

std::string format_number(double v)
{
    return fmt::format("{}", v);
}

Config parse_config(const std::string& yaml)
{
    try {
        const YAML::Node root = YAML::Load(yaml);
        if (!root.IsMap()) {
            throw InputError("config must be a YAML mapping");
        }
        check_keys(root, "top level", {"room", "objective", "optimizer", "repair", "simulation"});

        const YAML::Node r = root["room"];
        if (!r || !r["polygon"]) {
            throw InputError("config needs room.polygon");
        }
        check_keys(r, "room",
                   {"polygon", "grid_size", "z_r", "z_l", "r_res", "cone_half_angle_deg", "wall_margin"});
        RoomModel room{Polygon::from_any_orientation(read_points(r["polygon"], "room.polygon"))};
        read(r, "grid_size", room.grid_size);
        read(r, "z_r", room.z_r);
        read(r, "z_l", room.z_l);
        read(r, "r_res", room.r_res);
        if (const auto v = r["cone_half_angle_deg"]) {
            room.cone_half_angle = v.as<double>() * kDegree;
        }
        read(r, "wall_margin", room.wall_margin);
        room.validate();

        ObjectiveConfig objective;
        objective.sigma_r = room.r_res;
        if (const auto o = root["objective"]) {
            check_keys(o, "objective", {"n_types", "fingerprint_size", "m_max", "k_min", "d_min", "sigma_r", "gdop_sqrt"});
            read(o, "n_types", objective.n_types);
            read(o, "fingerprint_size", objective.fingerprint_size);
            read(o, "m_max", objective.limits.m_max);
            read(o, "k_min", objective.limits.k_min);
            read(o, "d_min", objective.limits.d_min);
            read(o, "sigma_r", objective.sigma_r);
            read(o, "gdop_sqrt", objective.gdop_sqrt);
        }
        if (objective.n_types != 1 && objective.n_types != 2) {
            throw InputError("objective.n_types must be 1 or 2");
        }
        if (objective.fingerprint_size == 0 || objective.limits.k_min < objective.fingerprint_size) {
            throw InputError("objective.k_min must be at least fingerprint_size, which must be positive");
        }
        if (!(objective.limits.d_min >= 0.0) || !(objective.sigma_r > 0.0)) {
            throw InputError("objective.d_min must be non-negative and sigma_r positive");
        }

        RepairConfig repair;
        if (const auto p = root["repair"]) {
            check_keys(p, "repair", {"gamma", "step_cap", "delta", "max_iter", "restarts"});
            read(p, "gamma", repair.gamma);
            read(p, "step_cap", repair.step_cap);
            read(p, "delta", repair.delta);
            read(p, "max_iter", repair.max_iter);
            read(p, "restarts", repair.restarts);
        }
        if (!(repair.gamma > 0.0 && repair.gamma <= 1.0) || !(repair.step_cap > 0.0) || repair.delta < 0.0 ||
            repair.max_iter < 0 || repair.restarts < 1) {
            throw InputError("repair settings out of range");
        }

        PsoConfig optimizer;
        optimizer.m_init_max = std::min(optimizer.m_init_max, objective.limits.m_max);
        optimizer.m_init_min = std::min(optimizer.m_init_min, optimizer.m_init_max);
        std::size_t checkpoint_every = 10;
        if (const auto o = root["optimizer"]) {
            check_keys(o, "optimizer",
                       {"particles", "iterations", "w", "c1", "c2", "p_up", "p_down", "m_init", "archive_capacity",
                        "v_max", "seed", "threads", "checkpoint_every"});
            read(o, "particles", optimizer.swarm_size);
            read(o, "iterations", optimizer.iterations);
            read_range(o, "w", optimizer.w);
            read_range(o, "c1", optimizer.c1);
            read_range(o, "c2", optimizer.c2);
            read(o, "p_up", optimizer.p_up);
            read(o, "p_down", optimizer.p_down);
            if (const auto v = o["m_init"]) {
                const auto pair = v.as<std::vector<std::size_t>>();
                if (pair.size() != 2) {
                    throw InputError("optimizer.m_init must be a [lo, hi] pair");
                }
                optimizer.m_init_min = pair[0];
                optimizer.m_init_max = pair[1];
            }
            read(o, "archive_capacity", optimizer.archive_capacity);
            read(o, "v_max", optimizer.v_max);
            read(o, "seed", optimizer.seed);
            read(o, "threads", optimizer.threads);
            read(o, "checkpoint_every", checkpoint_every);
        }
        if (optimizer.m_init_max > objective.limits.m_max) {
            throw InputError("optimizer.m_init exceeds objective.m_max");
        }
        optimizer.validate();

        ExperimentConfig sim;
        if (const auto s = root["simulation"]) {
            check_keys(s, "simulation",
                       {"waypoints", "step", "measurement_sigma", "sigma_d", "sigma_theta_deg", "particles", "burn_in",
                        "seeds", "histogram_bin", "histogram_bins", "resample_threshold"});
            if (const auto w = s["waypoints"]) {
                sim.waypoints = read_points(w, "simulation.waypoints");
            }
            read(s, "step", sim.step);
            read(s, "measurement_sigma", sim.measurement_sigma);
            read(s, "sigma_d", sim.odometry_noise.sigma_d);
            if (const auto v = s["sigma_theta_deg"]) {
                sim.odometry_noise.sigma_theta = v.as<double>() * kDegree;
            }
            read(s, "particles", sim.amcl.particles);
            read(s, "burn_in", sim.burn_in);
            if (const auto v = s["seeds"]) {
                sim.seeds = v.as<std::vector<std::uint64_t>>();
            }
            read(s, "histogram_bin", sim.histogram_bin);
            read(s, "histogram_bins", sim.histogram_bins);
            read(s, "resample_threshold", sim.amcl.resample_threshold);
        }
        // The filter's motion model assumes the odometry noise it is fed.
        sim.amcl.motion = sim.odometry_noise;
        sim.amcl.sigma_r = sim.measurement_sigma < 0.0 ? room.r_res : sim.measurement_sigma;
        if (sim.amcl.sigma_r <= 0.0) {
            sim.amcl.sigma_r = room.r_res;
        }
        sim.amcl.validate();
        if (sim.seeds.empty()) {
            throw InputError("simulation.seeds must not be empty");
        }

        return Config{std::move(room), objective, repair, optimizer, checkpoint_every, std::move(sim)};
    } catch (const InputError&) {
        throw;
    } catch (const YAML::Exception& e) {
        throw InputError(std::string("config: ") + e.what());
    } catch (const Error& e) {
        throw InputError(std::string("config: ") + e.what());
    }
}

Config load_config(const std::filesystem::path& path)
{
    return parse_config(read_text_file(path));
}

std::string format_placement(const Placement& pl, int n_types, double z_l)
{
    std::string out = fmt::format("M {}\nn_types {}\nz_l {}\nindex x y type\n", pl.size(), n_types, z_l);
    for (std::size_t i = 0; i < pl.size(); ++i) {
        out += fmt::format("{} {} {} {}\n", i, pl[i].position.x, pl[i].position.y, pl[i].type.label);
    }
    return out;
}

PlacementFile parse_placement(const std::string& text)
{
    std::istringstream in(text);
    std::vector<std::vector<std::string>> lines;
    for (std::string line; std::getline(in, line);) {
        auto toks = split_ws(line);
        if (!toks.empty() && toks.front().front() != '#') {
            lines.push_back(std::move(toks));
        }
    }
    auto header = [&](std::size_t row, const char* key) -> const std::string& {
        if (row >= lines.size() || lines[row].size() != 2 || lines[row][0] != key) {
            throw InputError(std::string("placement file: expected '") + key + " <value>' on header line " +
                             std::to_string(row + 1));
        }
        return lines[row][1];
    };
    PlacementFile file;
    const long long m = parse_int(header(0, "M"), "M");
    file.n_types = static_cast<int>(parse_int(header(1, "n_types"), "n_types"));
    file.z_l = parse_double(header(2, "z_l"), "z_l");
    if (m < 0) {
        throw InputError("placement file: M must be non-negative");
    }
    if (file.n_types != 1 && file.n_types != 2) {
        throw InputError("placement file: n_types must be 1 or 2");
    }
    if (lines.size() < 4 || lines[3] != std::vector<std::string>{"index", "x", "y", "type"}) {
        throw InputError("placement file: expected column header 'index x y type'");
    }
    if (lines.size() != 4 + static_cast<std::size_t>(m)) {
        throw InputError("placement file: M does not match the number of rows");
    }
    for (std::size_t i = 0; i < static_cast<std::size_t>(m); ++i) {
        const auto& row = lines[4 + i];
        if (row.size() != 4) {
            throw InputError("placement file: row " + std::to_string(i) + " needs 4 columns");
        }
        if (parse_int(row[0], "index") != static_cast<long long>(i)) {
            throw InputError("placement file: indices must run 0..M-1 in order");
        }
        const double x = parse_double(row[1], "x");
        const double y = parse_double(row[2], "y");
        const auto type = static_cast<int>(parse_int(row[3], "type"));
        if (type < 0 || type >= file.n_types) {
            throw InputError("placement file: type out of range in row " + std::to_string(i));
        }
        file.placement.lrps.push_back({{x, y, file.z_l}, {type}, i});
    }
    return file;
}

PlacementFile read_placement(const std::filesystem::path& path)
{
    return parse_placement(read_text_file(path));
}

std::vector<const ArchiveEntry*> ordered_front(const ParetoArchive& archive)
{
    std::vector<const ArchiveEntry*> out;
    for (const auto& e : archive.entries()) {
        out.push_back(&e);
    }
    std::stable_sort(out.begin(), out.end(), [](const ArchiveEntry* a, const ArchiveEntry* b) {
        return a->objectives.f1 != b->objectives.f1 ? a->objectives.f1 < b->objectives.f1
                                                    : a->objectives.f2 < b->objectives.f2;
    });
    return out;
}

std::string format_front(const ParetoArchive& archive)
{
    std::string out = "placement_id,M,f1,f2\n";
    std::size_t id = 0;
    for (const auto* e : ordered_front(archive)) {
        out += fmt::format("{},{},{},{}\n", id++, e->placement.size(), e->objectives.f1, e->objectives.f2);
    }
    return out;
}

std::vector<FrontRow> parse_front(const std::string& csv)
{
    std::istringstream in(csv);
    std::string line;
    if (!std::getline(in, line) || split_char(line, ',') != std::vector<std::string>{"placement_id", "M", "f1", "f2"}) {
        throw InputError("front file: missing header");
    }
    std::vector<FrontRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cols = split_char(line, ',');
        if (cols.size() != 4) {
            throw InputError("front file: expected 4 columns");
        }
        rows.push_back({static_cast<std::size_t>(parse_int(cols[0], "placement_id")),
                        static_cast<std::size_t>(parse_int(cols[1], "M")),
                        {parse_double(cols[2], "f1"), parse_double(cols[3], "f2")}});
    }
    return rows;
}

std::string format_checkpoint(const ParetoArchive& archive, std::size_t iteration, int n_types, double z_l)
{
    std::string out = fmt::format("iteration {}\nentries {}\n", iteration, archive.size());
    std::size_t id = 0;
    for (const auto* e : ordered_front(archive)) {
        out += fmt::format("entry {} f1 {} f2 {}\n", id++, e->objectives.f1, e->objectives.f2);
        out += format_placement(e->placement, n_types, z_l);
    }
    return out;
}

std::string format_iteration_log(const std::vector<IterationStats>& history)
{
    std::string out = "iteration,archive_size,best_f1,best_f2,feasible_particles,min_feasible_m,evaluations\n";
    for (const auto& s : history) {
        out += fmt::format("{},{},{},{},{},{},{}\n", s.iteration, s.archive_size, s.best_f1, s.best_f2,
                           s.feasible_particles, s.min_feasible_m, s.evaluations);
    }
    return out;
}

std::string format_map_csv(const Grid& grid, const std::vector<double>& values)
{
    if (values.size() != grid.size()) {
        throw Error("map values do not match the grid");
    }
    std::string out = "x,y,value\n";
    for (std::size_t i = 0; i < grid.size(); ++i) {
        out += fmt::format("{},{},{}\n", grid.center(i).x, grid.center(i).y, values[i]);
    }
    return out;
}

std::string format_map_pgm(const Grid& grid, const std::vector<double>& values)
{
    if (values.size() != grid.size()) {
        throw Error("map values do not match the grid");
    }
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const double v : values) {
        if (std::isfinite(v)) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    const int w = grid.nx();
    const int h = grid.ny();
    std::string out = fmt::format("P5\n{} {}\n255\n", w, h);
    const std::size_t header = out.size();
    out.resize(header + static_cast<std::size_t>(w) * static_cast<std::size_t>(h), '\0');
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double v = values[i];
        int level = 255;
        if (std::isfinite(v) && hi > lo) {
            level = 1 + static_cast<int>(std::lround(254.0 * (v - lo) / (hi - lo)));
        } else if (std::isfinite(v)) {
            level = 1;
        }
        const int row = h - 1 - grid.cell_y(i);
        out[header + static_cast<std::size_t>(row) * static_cast<std::size_t>(w) +
            static_cast<std::size_t>(grid.cell_x(i))] = static_cast<char>(static_cast<unsigned char>(level));
    }
    return out;
}

std::string format_report(const std::vector<std::pair<std::string, std::string>>& entries)
{
    std::string out;
    for (const auto& [k, v] : entries) {
        out += k + ": " + v + "\n";
    }
    return out;
}

std::string read_text_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InputError("cannot open '" + path.string() + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& content)
{
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary);
    out << content;
    if (!out) {
        throw Error("cannot write '" + path.string() + "'");
    }
}

}  // namespace lrpopt
