#pragma once

#include "fedmesh/spatial_index.hpp"
#include "fedmesh/workload.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fedmesh {

inline constexpr int kSchemaVersion = 1;
inline constexpr std::uint64_t kMaxCells = 100000;

// Attribute names the federation knows how to fill from a node's profile.
inline constexpr std::string_view kDimServiceType = "service_type";
inline constexpr std::string_view kDimProcessors = "processors";
inline constexpr std::string_view kDimCpuType = "cpu_type";
inline constexpr std::string_view kDimSpeed = "speed_ghz";

enum class Topology { Hub, FullP2P };

std::string_view to_string(Topology t);

struct LatencyConfig {
    std::int64_t intra_cloud_ms = 1;
    std::int64_t inter_cloud_ms = 5;
};

struct CloudConfig {
    std::string cloud_id;
    int node_count = 4;
    double node_speed_ghz = 2.4;
    std::string cpu_type = "Intel";
    std::vector<std::string> service_types;
    std::int64_t update_interval_lo_ms = 5000;
    std::int64_t update_interval_hi_ms = 40000;
    Topology topology = Topology::Hub;
    int processors_per_node = 1;
};

struct Scenario {
    int schema_version = kSchemaVersion;
    std::uint64_t seed = 42;
    bool eager_tickets = true;
    std::size_t inbox_capacity = 1000;
    LatencyConfig latency;
    std::vector<spatial::DimensionSpec> dims;
    int f_min = 3;
    int f_max = 3;
    std::vector<CloudConfig> clouds;
    std::vector<workload::WorkloadSpec> workloads;

    const CloudConfig* find_cloud(std::string_view id) const;
};

struct Diagnostic {
    int line = 0;        // 0 when no source line applies
    std::string field;   // dotted path, e.g. "cloud[2].node_count"
    std::string message;

    std::string to_string() const;
};

/// Semantic checks (cross references, bounds, grid size). Diagnostics carry
/// field paths only; parse_scenario attaches source lines.
std::vector<Diagnostic> validate_scenario(const Scenario& s);

struct ParseResult {
    std::optional<Scenario> scenario;
    std::vector<Diagnostic> diagnostics;  // non-empty means invalid
};

/// Parses the line-oriented scenario format (see README) and validates it.
ParseResult parse_scenario(std::string_view text);

/// Writes a scenario in the same format; parse(serialize(s)) == s.
std::string serialize_scenario(const Scenario& s);

}  // namespace fedmesh
