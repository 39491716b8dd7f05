// Doctest-flavored helpers layered on the framework-free oracles.
#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "oracles_plain.hpp"

namespace oracles {

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::string data_path(const std::string& name) {
    return std::string(BTM_DATA_DIR) + "/" + name;
}

}  // namespace oracles
