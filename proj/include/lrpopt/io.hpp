#pragma once

#include "lrpopt/harness.hpp"
#include "lrpopt/mopso.hpp"

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace lrpopt {

/// Malformed or missing input file.
class InputError : public Error {
public:
    using Error::Error;
};

struct Config {
    RoomModel room;
    ObjectiveConfig objective;
    RepairConfig repair;
    PsoConfig optimizer;
    std::size_t checkpoint_every = 10;  // 0 disables checkpoints
    ExperimentConfig simulation;
};

/// Parses a YAML document with optional sections room, objective, optimizer,
/// repair and simulation. room.polygon is required.
Config parse_config(const std::string& yaml);
Config load_config(const std::filesystem::path& path);

struct PlacementFile {
    Placement placement;
    int n_types = 1;
    double z_l = 0.0;
};

/// Header lines "M", "n_types", "z_l", then "index x y type" rows. Numbers use
/// the shortest representation that reads back to the same double.
std::string format_placement(const Placement& pl, int n_types, double z_l);
PlacementFile parse_placement(const std::string& text);
PlacementFile read_placement(const std::filesystem::path& path);

/// Archive entries ordered by (f1, f2); the position in this order is the
/// placement id used by the front file.
std::vector<const ArchiveEntry*> ordered_front(const ParetoArchive& archive);

/// CSV with header placement_id,M,f1,f2.
std::string format_front(const ParetoArchive& archive);

struct FrontRow {
    std::size_t placement_id = 0;
    std::size_t m = 0;
    Objectives objectives;
};
std::vector<FrontRow> parse_front(const std::string& csv);

std::string format_checkpoint(const ParetoArchive& archive, std::size_t iteration, int n_types, double z_l);

std::string format_iteration_log(const std::vector<IterationStats>& history);

/// CSV rows x,y,value for every grid element.
std::string format_map_csv(const Grid& grid, const std::vector<double>& values);

/// Binary 8-bit PGM over the lattice, north up. Values are scaled linearly to
/// 1..255; lattice cells outside the room are 0.
std::string format_map_pgm(const Grid& grid, const std::vector<double>& values);

/// "key: value" lines in the given order.
std::string format_report(const std::vector<std::pair<std::string, std::string>>& entries);

/// Shortest round-trip text for a double.
std::string format_number(double v);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& content);

}  // namespace lrpopt
