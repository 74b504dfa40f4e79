#pragma once

#include "fedmesh/scenario.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace fedmesh::fixtures {

inline std::string read_text(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

inline Scenario melbourne5() {
    auto r = parse_scenario(read_text(std::string(FEDMESH_SCENARIO_DIR) + "/melbourne-5.scn"));
    if (!r.scenario) throw std::runtime_error("melbourne-5 does not parse: " + r.diagnostics.front().to_string());
    return *r.scenario;
}

}  // namespace fedmesh::fixtures
