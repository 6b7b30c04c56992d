#pragma once

#include <string>
#include <vector>

#include "pairguard/cli.hpp"

namespace testsupport {

inline std::string fixture_path(const std::string& rel) { return std::string(PAIRGUARD_FIXTURES) + "/" + rel; }

inline pairguard::FunctionPair fixture_pair(const std::string& id) {
    return pairguard::build_pair(pairguard::load_pair_file(fixture_path("pairs/" + id + ".json")));
}

inline std::vector<pairguard::PairFile> corpus() {
    std::vector<pairguard::PairFile> out;
    for (const auto& p : pairguard::expand_inputs({fixture_path("pairs")})) out.push_back(pairguard::load_pair_file(p));
    return out;
}

}  // namespace testsupport
