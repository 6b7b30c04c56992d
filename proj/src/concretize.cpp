#include "pairguard/concretize.hpp"

#include "pairguard/pyfmt.hpp"

namespace pairguard {

ConcretizerConfig make_concretizer_config(const StaticFacts& facts, int max_structure_size, double object_bias) {
    ConcretizerConfig cfg;
    cfg.max_structure_size = max_structure_size;
    cfg.object_bias = object_bias;
    cfg.int_pool = {-100, -10, -1, 0, 1, 10, 100};
    cfg.float_pool = {-100.0, -10.0, -1.0, 0.0, 1.0, 10.0, 100.0};
    cfg.str_pool = {"", "a"};
    cfg.int_pool.insert(cfg.int_pool.end(), facts.literals_int.begin(), facts.literals_int.end());
    cfg.float_pool.insert(cfg.float_pool.end(), facts.literals_float.begin(), facts.literals_float.end());
    cfg.str_pool.insert(cfg.str_pool.end(), facts.literals_str.begin(), facts.literals_str.end());
    cfg.isinstance_classes.assign(facts.isinstance_classes.begin(), facts.isinstance_classes.end());
    return cfg;
}

AbstractKind kind_of(const Value& v) {
    if (is_none(v)) return AbstractKind::None;
    if (std::holds_alternative<bool>(v)) return AbstractKind::Boolean;
    if (std::holds_alternative<std::int64_t>(v)) return AbstractKind::Integer;
    if (std::holds_alternative<double>(v)) return AbstractKind::Float;
    if (std::holds_alternative<std::string>(v)) return AbstractKind::String;
    if (as_obj<ListObj>(v)) return AbstractKind::List;
    if (as_obj<TupleObj>(v)) return AbstractKind::Tuple;
    if (as_obj<DictObj>(v)) return AbstractKind::Dictionary;
    if (as_obj<SetObj>(v)) return AbstractKind::Set;
    if (auto o = as_obj<VersatileObj>(v)) {
        switch ((*o)->flavor) {
            case Flavor::Callable: return AbstractKind::Callable;
            case Flavor::Resource: return AbstractKind::Resource;
            case Flavor::Object: return AbstractKind::Object;
        }
    }
    if (as_obj<FunctionObj>(v) || as_obj<BuiltinObj>(v) || std::holds_alternative<ExcClass>(v)) {
        return AbstractKind::Callable;
    }
    return AbstractKind::Object;
}

Value make_versatile(Flavor flavor, const ConcretizerConfig& cfg, Rng& rng, const std::string& origin) {
    auto o = std::make_shared<VersatileObj>();
    o->seed = rng();
    o->flavor = flavor;
    o->origin = origin;
    if (!cfg.isinstance_classes.empty()) o->assigned_type = cfg.isinstance_classes[rng.below(cfg.isinstance_classes.size())];
    return o;
}

namespace {

template <typename T>
const T& pick(const std::vector<T>& pool, Rng& rng) {
    return pool[rng.below(pool.size())];
}

AbstractKind element_kind(const ConcretizerConfig& cfg, Rng& rng) {
    if (rng.unit() < cfg.object_bias) return AbstractKind::Object;
    return kElementKinds[rng.below(std::size(kElementKinds))];
}

std::size_t structure_size(const ConcretizerConfig& cfg, Rng& rng) {
    return static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(cfg.max_structure_size) + 1));
}

std::string index_path(const std::string& origin, const Value& key) {
    return origin + "[" + serialize(key) + "]";
}

}  // namespace

Value concretize(AbstractKind kind, const ConcretizerConfig& cfg, Rng& rng, const std::string& origin) {
    switch (kind) {
        case AbstractKind::None: return NoneV{};
        case AbstractKind::Boolean: return rng.below(2) == 1;
        case AbstractKind::Integer: return pick(cfg.int_pool, rng);
        case AbstractKind::Float: return pick(cfg.float_pool, rng);
        case AbstractKind::String: return pick(cfg.str_pool, rng);
        case AbstractKind::List:
        case AbstractKind::Tuple: {
            std::size_t n = structure_size(cfg, rng);
            AbstractKind elem = element_kind(cfg, rng);
            std::vector<Value> items;
            items.reserve(n);
            for (std::size_t i = 0; i < n; ++i) {
                items.push_back(concretize(elem, cfg, rng, index_path(origin, static_cast<std::int64_t>(i))));
            }
            return kind == AbstractKind::List ? make_list(std::move(items), origin) : make_tuple(std::move(items), origin);
        }
        case AbstractKind::Dictionary: {
            std::size_t n = structure_size(cfg, rng);
            AbstractKind elem = element_kind(cfg, rng);
            Value d = make_dict(origin);
            auto& dict = **as_obj<DictObj>(d);
            // Keys are distinct pool strings; a small pool can cap the size.
            for (std::size_t i = 0; i < n; ++i) {
                Value key = pick(cfg.str_pool, rng);
                Value value = concretize(elem, cfg, rng, index_path(origin, key));
                if (!dict.find(key)) dict.set(key, std::move(value));
            }
            return d;
        }
        case AbstractKind::Set: {
            std::size_t n = structure_size(cfg, rng);
            AbstractKind elem = element_kind(cfg, rng);
            Value s = make_set(origin);
            auto& set = **as_obj<SetObj>(s);
            for (std::size_t i = 0; i < n; ++i) set.add(concretize(elem, cfg, rng, index_path(origin, static_cast<std::int64_t>(i))));
            return s;
        }
        case AbstractKind::Callable: return make_versatile(Flavor::Callable, cfg, rng, origin);
        case AbstractKind::Resource: return make_versatile(Flavor::Resource, cfg, rng, origin);
        case AbstractKind::Object: return make_versatile(Flavor::Object, cfg, rng, origin);
    }
    return NoneV{};
}

}  // namespace pairguard
