#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pairguard/driver.hpp"
#include "pairguard/frontend.hpp"

namespace pairguard {

struct PairFile {
    std::string id;
    std::string old_source;
    std::string new_source;
    std::map<std::string, std::string> renames;
    std::optional<std::string> entry;  // expected function name on both sides
};

// Throws PairError on malformed JSON or missing fields.
PairFile parse_pair_file(std::string_view json_text);
PairFile load_pair_file(const std::string& path);

// Parses both sources and checks `entry`; throws SyntaxError or PairError.
FunctionPair build_pair(const PairFile& file);

// A directory expands to its *.json files in name order.
std::vector<std::string> expand_inputs(const std::vector<std::string>& paths);

// One JSON object: {id, verdict, iterations, difference?, coverage, wall_time_ms}.
std::string verdict_json(const std::string& id, const Verdict& verdict);
std::string verdict_text(const std::string& id, const Verdict& verdict);

// `pairguard analyze <file-or-dir>... [flags]`. Returns 0 when every pair was
// analyzed and 2 on any input error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace pairguard
