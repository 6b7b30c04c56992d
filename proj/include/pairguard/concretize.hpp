#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pairguard/frontend.hpp"
#include "pairguard/rng.hpp"
#include "pairguard/value.hpp"

namespace pairguard {

struct ConcretizerConfig {
    int max_structure_size = 4;
    double object_bias = 0.5;
    std::vector<std::int64_t> int_pool;
    std::vector<double> float_pool;
    std::vector<std::string> str_pool;
    std::vector<std::string> isinstance_classes;  // sorted
};

// Pools start from the fixed base values and gain every extracted literal,
// duplicates included.
ConcretizerConfig make_concretizer_config(const StaticFacts& facts, int max_structure_size = 4,
                                          double object_bias = 0.5);

// Element kinds a generated container may hold.
inline constexpr AbstractKind kElementKinds[] = {AbstractKind::Integer, AbstractKind::Float, AbstractKind::String,
                                                 AbstractKind::Boolean, AbstractKind::None};

// Abstract kind a concrete value belongs to.
AbstractKind kind_of(const Value& v);

// Builds a concrete value of kind `kind`. `origin` is the injection path,
// recorded on containers and Versatile objects and extended for elements.
Value concretize(AbstractKind kind, const ConcretizerConfig& cfg, Rng& rng, const std::string& origin = {});

// Fresh Versatile with a seed and optional assigned type drawn from `rng`.
Value make_versatile(Flavor flavor, const ConcretizerConfig& cfg, Rng& rng, const std::string& origin);

}  // namespace pairguard
