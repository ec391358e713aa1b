#pragma once

#include "hcm/dsl.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

inline std::string read_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

inline hcm::ParseResult load_fixture(const std::string& name) {
    return hcm::parse_hcm(read_file(std::string(HCM_FIXTURE_DIR) + "/" + name));
}
