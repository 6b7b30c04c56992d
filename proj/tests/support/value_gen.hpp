#pragma once

#include <random>
#include <vector>

#include "pairguard/value.hpp"

namespace testsupport {

using namespace pairguard;

// Random nested values, occasionally self-referential.
class ValueGen {
public:
    explicit ValueGen(unsigned seed) : rng_(seed) {}

    Value value(int depth = 3) {
        int pick = static_cast<int>(rng_() % (depth <= 0 ? 6 : 11));
        switch (pick) {
            case 0: return NoneV{};
            case 1: return rng_() % 2 == 0;
            case 2: return static_cast<std::int64_t>(rng_() % 200) - 100;
            case 3: return static_cast<double>(rng_() % 1000) / 8.0;
            case 4: return std::string(1 + rng_() % 3, static_cast<char>('a' + rng_() % 5));
            case 5: return versatile(depth);
            case 6: {
                std::vector<Value> items;
                for (int i = 0, n = static_cast<int>(rng_() % 4); i < n; ++i) items.push_back(value(depth - 1));
                Value l = make_list(std::move(items));
                if (rng_() % 6 == 0) (*as_obj<ListObj>(l))->items.push_back(l);
                return l;
            }
            case 7: {
                std::vector<Value> items;
                for (int i = 0, n = static_cast<int>(rng_() % 3); i < n; ++i) items.push_back(value(depth - 1));
                return make_tuple(std::move(items));
            }
            case 8: {
                Value d = make_dict();
                for (int i = 0, n = static_cast<int>(rng_() % 4); i < n; ++i) {
                    (*as_obj<DictObj>(d))->set(std::string(1, static_cast<char>('k' + i)), value(depth - 1));
                }
                if (rng_() % 6 == 0) (*as_obj<DictObj>(d))->set(std::string("self"), d);
                return d;
            }
            case 9: {
                Value s = make_set();
                for (int i = 0, n = static_cast<int>(rng_() % 4); i < n; ++i) {
                    (*as_obj<SetObj>(s))->add(static_cast<std::int64_t>(rng_() % 10));
                }
                return s;
            }
            default: return versatile(depth);
        }
    }

    Value versatile(int depth) {
        auto o = std::make_shared<VersatileObj>();
        o->seed = rng_();
        if (rng_() % 2) o->assigned_type = "ClassA";
        if (depth > 0 && rng_() % 2) o->attrs["field"] = value(depth - 1);
        return o;
    }

    // Applies one random in-place mutation to some mutable part of `v`.
    void mutate(const Value& v) {
        std::vector<Value> mutables;
        collect(v, mutables, 0);
        if (mutables.empty()) return;
        const Value& target = mutables[rng_() % mutables.size()];
        if (auto l = as_obj<ListObj>(target)) {
            auto& items = (*l)->items;
            switch (rng_() % 3) {
                case 0: items.push_back(value(1)); break;
                case 1: if (!items.empty()) items.pop_back(); break;
                default: if (!items.empty()) items[rng_() % items.size()] = value(1); break;
            }
        } else if (auto d = as_obj<DictObj>(target)) {
            if (rng_() % 2 && !(*d)->items.empty()) (*d)->erase(Value((*d)->items.front().first));
            else (*d)->set(std::string("m") + std::to_string(rng_() % 5), value(1));
        } else if (auto s = as_obj<SetObj>(target)) {
            if (rng_() % 2 && !(*s)->items.empty()) (*s)->erase(Value((*s)->items.front()));
            else (*s)->add(static_cast<std::int64_t>(rng_() % 50));
        } else if (auto o = as_obj<VersatileObj>(target)) {
            (*o)->attrs["m" + std::to_string(rng_() % 3)] = value(1);
        }
    }

    std::mt19937& rng() { return rng_; }

private:
    void collect(const Value& v, std::vector<Value>& out, int depth) {
        if (depth > 6) return;
        for (const auto& seen : out) {
            if (values_identical(seen, v)) return;
        }
        if (auto l = as_obj<ListObj>(v)) {
            out.push_back(v);
            for (const auto& x : (*l)->items) collect(x, out, depth + 1);
        } else if (auto t = as_obj<TupleObj>(v)) {
            for (const auto& x : (*t)->items) collect(x, out, depth + 1);
        } else if (auto d = as_obj<DictObj>(v)) {
            out.push_back(v);
            for (const auto& [k, x] : (*d)->items) collect(x, out, depth + 1);
        } else if (as_obj<SetObj>(v)) {
            out.push_back(v);
        } else if (auto o = as_obj<VersatileObj>(v)) {
            out.push_back(v);
            for (const auto& [k, x] : (*o)->attrs) collect(x, out, depth + 1);
        }
    }

    std::mt19937 rng_;
};

}  // namespace testsupport
