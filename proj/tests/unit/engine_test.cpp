#include <gtest/gtest.h>

#include <algorithm>

#include "../support/engine_util.hpp"
#include "pairguard/engine.hpp"

using namespace pairguard;
using testsupport::Harness;

namespace {

std::shared_ptr<const Predictor> table(const std::string& entries) {
    return parse_table_predictor(R"({"entries": [)" + entries + "]}");
}

std::string entry(const char* kind, const char* name, const char* abstract) {
    return std::string(R"({"kind": ")") + kind + R"(", "name": ")" + name + R"(", "weights": {")" + abstract +
           R"(": 1.0}})";
}

bool has_callee(const ExecutionOutcome& o, const std::string& callee) {
    return std::any_of(o.call_log.begin(), o.call_log.end(), [&](const CallLogEntry& e) { return e.callee == callee; });
}

const char* kGuardedParse =
    "def check(code):\n"
    "    try:\n"
    "        parse(code)\n"
    "    except SyntaxError as e:\n"
    "        print(\"Caught exception:\", e)\n";

}  // namespace

TEST(Merge, ParametersBecomeInjectedReads) {
    Harness h("def f(a, b):\n    return a\n", "def f(a):\n    return a\n");
    EXPECT_EQ(h.program.old_name, "f_old");
    EXPECT_EQ(h.program.new_name, "f_new");
    auto r = h.run(1);
    ASSERT_FALSE(r.old_outcome.exception);
    ASSERT_EQ(r.inputs.size(), 1u);
    EXPECT_EQ(r.inputs[0].first, "a");
    EXPECT_EQ(r.old_outcome.return_value, r.new_outcome.return_value);
}

TEST(Merge, MissingFunctionIsRejected) {
    FunctionPair pair = make_function_pair("def f():\n    pass\n", "def f():\n    pass\n");
    pair.new_fn.def.reset();
    EXPECT_THROW(merge_pair(pair), MergeError);
}

TEST(Run, TrivialReturn) {
    Harness h("def f():\n    return 1\n", "def f():\n    return 1\n");
    auto r = h.run(0);
    EXPECT_EQ(r.old_outcome.return_value, "1");
    EXPECT_TRUE(r.old_outcome.call_log.empty());
    EXPECT_FALSE(r.old_outcome.exception);
    EXPECT_EQ(r.old_outcome.covered_lines, (std::set<int>{1, 2}));
}

TEST(Run, AttributeInjectionIsShared) {
    auto pred = table(entry("variable-read", "data", "Object") + "," + entry("attribute-read", "ages", "List"));
    Harness h("def f(data):\n    return data.ages\n", "def f(data):\n    return data.ages\n", {}, pred);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        auto r = h.run(seed);
        ASSERT_EQ(r.inputs.size(), 2u);
        EXPECT_EQ(r.inputs[1].first, "data.ages");
        EXPECT_EQ(*r.old_outcome.return_value, r.inputs[1].second);
        EXPECT_EQ(r.old_outcome.return_value, r.new_outcome.return_value);
    }
}

TEST(Run, CrashingSubscriptIsIntercepted) {
    Harness h("def f():\n    d = {}\n    return d['key']\n", "def f():\n    d = {}\n    return d['key']\n");
    auto r = h.run(3);
    EXPECT_FALSE(r.old_outcome.exception);
    ASSERT_EQ(r.inputs.size(), 1u);
    EXPECT_EQ(r.inputs[0].first, "d['key']");
}

TEST(Run, MethodsOnConcreteValues) {
    const char* src =
        "def f():\n"
        "    d = {'a': 1}\n"
        "    d.update({'b': 2})\n"
        "    xs = [3, 1, 2]\n"
        "    xs.append(d.get('b'))\n"
        "    s = ' x,y '.strip().split(',')\n"
        "    return (sorted(xs), '-'.join(s), d.get('z', 9), 'ab'.upper(), '{}+{k}'.format(1, k=2))\n";
    Harness h(src, src);
    auto r = h.run(0);
    ASSERT_FALSE(r.old_outcome.exception) << r.old_outcome.exception->render();
    EXPECT_EQ(r.old_outcome.return_value, "([1, 2, 2, 3], 'x-y', 9, 'AB', '1+2')");
    EXPECT_TRUE(r.old_outcome.call_log.empty());
}

TEST(Run, ControlFlowAndComprehensions) {
    const char* src =
        "def f():\n"
        "    total = 0\n"
        "    for i in range(10):\n"
        "        if i % 2 == 0:\n"
        "            continue\n"
        "        if i > 7:\n"
        "            break\n"
        "        total += i\n"
        "    sq = [x * x for x in range(4) if x]\n"
        "    k = 0\n"
        "    while k < 3:\n"
        "        k += 1\n"
        "    a, b = (1, 2)\n"
        "    return total, sq, k, a + b, any(x > 5 for x in [1, 7]), all([])\n";
    Harness h(src, src);
    auto r = h.run(0);
    ASSERT_FALSE(r.old_outcome.exception) << r.old_outcome.exception->render();
    EXPECT_EQ(r.old_outcome.return_value, "(16, [1, 4, 9], 3, 3, True, True)");
}

TEST(Run, NestedFunctionsAndClosures) {
    const char* src =
        "def f():\n"
        "    base = 10\n"
        "    def add(x, y=1):\n"
        "        return base + x + y\n"
        "    inc = lambda v: v + 1\n"
        "    return add(1), add(1, y=5), inc(2), max([3, 9, 2], key=lambda v: -v)\n";
    Harness h(src, src);
    auto r = h.run(0);
    ASSERT_FALSE(r.old_outcome.exception) << r.old_outcome.exception->render();
    EXPECT_EQ(r.old_outcome.return_value, "(12, 16, 3, 2)");
}

TEST(Run, TryExceptFinally) {
    const char* src =
        "def f():\n"
        "    out = []\n"
        "    try:\n"
        "        out.append(1)\n"
        "        x = 1 / 0\n"
        "    except ZeroDivisionError as e:\n"
        "        out.append(2)\n"
        "    else:\n"
        "        out.append(3)\n"
        "    finally:\n"
        "        out.append(4)\n"
        "    try:\n"
        "        [][1]\n"
        "    except LookupError:\n"
        "        out.append(5)\n"
        "    return out\n";
    Harness h(src, src);
    auto r = h.run(0);
    ASSERT_FALSE(r.old_outcome.exception) << r.old_outcome.exception->render();
    // A crashing subscript is intercepted rather than raising IndexError.
    EXPECT_EQ(r.old_outcome.return_value, "[1, 2, 4]");
    EXPECT_FALSE(r.old_outcome.covered_lines.count(9));
}

TEST(ExternalCall, ExceptionCoinFiresAndIsCaught) {
    Harness h(kGuardedParse, kGuardedParse);
    h.cfg.exception_probability = 1.0;
    auto r = h.run(5);
    EXPECT_FALSE(r.old_outcome.exception);
    EXPECT_EQ(r.old_outcome.stdout_text, "Caught exception: \n");
    EXPECT_TRUE(has_callee(r.old_outcome, "parse"));
    EXPECT_TRUE(testsupport::same_behavior(r.old_outcome, r.new_outcome));
}

TEST(ExternalCall, NeverRaisesAtZeroProbability) {
    Harness h(kGuardedParse, kGuardedParse);
    h.cfg.exception_probability = 0.0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) EXPECT_EQ(h.run(seed).old_outcome.stdout_text, "");
}

TEST(ExternalCall, CoinIsMirroredAcrossSides) {
    Harness h(kGuardedParse, kGuardedParse);
    h.cfg.exception_probability = 0.5;
    int raised = 0;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        auto r = h.run(seed);
        EXPECT_EQ(r.old_outcome.stdout_text, r.new_outcome.stdout_text);
        raised += !r.old_outcome.stdout_text.empty();
    }
    EXPECT_GT(raised, 60);
    EXPECT_LT(raised, 140);
}

TEST(ExternalCall, UnguardedCallNeverRaises) {
    const char* src = "def f(code):\n    return parse(code)\n";
    Harness h(src, src);
    h.cfg.exception_probability = 1.0;
    for (std::uint64_t seed = 0; seed < 30; ++seed) EXPECT_FALSE(h.run(seed).old_outcome.exception);
}

TEST(ExternalCall, OccurrencesAreCounted) {
    const char* src = "def f(log):\n    log.write(1)\n    log.write(2)\n    return 0\n";
    auto pred = table(entry("variable-read", "log", "Object"));
    Harness h(src, src, {}, pred);
    auto r = h.run(0);
    ASSERT_EQ(r.old_outcome.call_log.size(), 2u);
    EXPECT_EQ(r.old_outcome.call_log[0].callee, "log.write");
    EXPECT_EQ(r.old_outcome.call_log[0].args, std::vector<std::string>{"1"});
    EXPECT_EQ(r.old_outcome.call_log[1].occurrence, 2);
    EXPECT_EQ(r.old_outcome.call_log[1].render(), "log.write(2) #2");
}

TEST(Super, CallsAreLoggedAndSeedsDiffer) {
    const char* src =
        "def f(self):\n"
        "    a = super()\n"
        "    b = super()\n"
        "    super().setup()\n"
        "    return a, b\n";
    Harness h(src, src);
    auto r = h.run(9);
    EXPECT_TRUE(has_callee(r.old_outcome, "super().setup") || has_callee(r.old_outcome, "super()#3.setup"));
    std::map<std::string, std::string> inputs(r.inputs.begin(), r.inputs.end());
    ASSERT_TRUE(inputs.count("super()"));
    ASSERT_TRUE(inputs.count("super()#2"));
    EXPECT_NE(inputs["super()"], inputs["super()#2"]);
    EXPECT_EQ(inputs["super()"].rfind("VersatileObject(", 0), 0u);
    EXPECT_TRUE(testsupport::same_behavior(r.old_outcome, r.new_outcome));
}

TEST(Isinstance, VersatileMatchesOnlyAssignedType) {
    auto o = std::make_shared<VersatileObj>();
    o->assigned_type = "ClassA";
    Value v = o;
    EXPECT_TRUE(builtin_isinstance(v, {"ClassA"}));
    EXPECT_FALSE(builtin_isinstance(v, {"ClassA"}) && builtin_isinstance(v, {"ClassB"}));
    EXPECT_TRUE(builtin_isinstance(v, {"ClassB", "ClassA"}));
    o->assigned_type.clear();
    EXPECT_FALSE(builtin_isinstance(v, {"ClassA"}));
}

TEST(Isinstance, ConcreteKinds) {
    EXPECT_TRUE(builtin_isinstance(std::int64_t{3}, {"int"}));
    EXPECT_TRUE(builtin_isinstance(true, {"int"}));
    EXPECT_FALSE(builtin_isinstance(std::int64_t{3}, {"str"}));
    EXPECT_TRUE(builtin_isinstance(NoneV{}, {"NoneType"}));
    EXPECT_TRUE(builtin_isinstance(make_dict(), {"list", "dict"}));
    EXPECT_TRUE(builtin_isinstance(make_exception("KeyError", {}, false), {"LookupError"}));
}

TEST(Raise, AssertFailureIsIntentional) {
    Harness h("def f():\n    assert False\n", "def f():\n    assert False\n");
    auto r = h.run(0);
    ASSERT_TRUE(r.old_outcome.exception);
    EXPECT_TRUE(r.old_outcome.exception->intentional);
    EXPECT_EQ(r.old_outcome.exception->type_name, "AssertionError");
    EXPECT_FALSE(r.old_outcome.return_value);
}

TEST(Raise, FormattedMessageIsCarried) {
    const char* src = "def f():\n    attr = 'x'\n    raise AssertionError(f\"Unexpected {attr!r} found\") from None\n";
    Harness h(src, src);
    auto r = h.run(0);
    ASSERT_TRUE(r.old_outcome.exception);
    EXPECT_TRUE(r.old_outcome.exception->intentional);
    EXPECT_EQ(r.old_outcome.exception->args, "(\"Unexpected 'x' found\",)");
}

TEST(Raise, TypeFaultIsUnintended) {
    Harness h("def f():\n    return 'a' - set()\n", "def f():\n    return 'a' - set()\n");
    auto r = h.run(0);
    ASSERT_TRUE(r.old_outcome.exception);
    EXPECT_FALSE(r.old_outcome.exception->intentional);
    EXPECT_EQ(r.old_outcome.exception->type_name, "TypeError");
}

TEST(Raise, BareRaiseOutsideHandlerIsUnintended) {
    Harness h("def f():\n    raise\n", "def f():\n    raise\n");
    auto r = h.run(0);
    ASSERT_TRUE(r.old_outcome.exception);
    EXPECT_FALSE(r.old_outcome.exception->intentional);
}

TEST(Raise, BareRaiseKeepsFlag) {
    const char* src =
        "def f():\n"
        "    try:\n"
        "        x = 1 / 0\n"
        "    except ZeroDivisionError:\n"
        "        raise\n";
    Harness h(src, src);
    auto r = h.run(0);
    ASSERT_TRUE(r.old_outcome.exception);
    EXPECT_EQ(r.old_outcome.exception->type_name, "ZeroDivisionError");
    EXPECT_FALSE(r.old_outcome.exception->intentional);
}

TEST(Limits, StepBudgetEndsRun) {
    Harness h("def f():\n    while True:\n        pass\n", "def f():\n    while True:\n        pass\n");
    auto r = h.run(0);
    ASSERT_TRUE(r.old_outcome.exception);
    EXPECT_FALSE(r.old_outcome.exception->intentional);
    EXPECT_EQ(r.old_outcome.exception->type_name, "EngineFault");
}

TEST(Limits, DeepRecursionIsRecursionError) {
    const char* src = "def f():\n    def g(n):\n        return g(n + 1)\n    return g(0)\n";
    Harness h(src, src);
    auto r = h.run(0);
    ASSERT_TRUE(r.old_outcome.exception);
    EXPECT_EQ(r.old_outcome.exception->type_name, "RecursionError");
}

TEST(Generators, UnwrappedToList) {
    const char* src = "def f():\n    yield 1\n    yield 2\n    yield 3\n";
    Harness h(src, src);
    EXPECT_EQ(h.run(0).old_outcome.return_value, "[1, 2, 3]");
}

TEST(Generators, InfiniteGeneratorIsCapped) {
    const char* src = "def f():\n    i = 0\n    while True:\n        yield i\n        i += 1\n";
    Harness h(src, src);
    auto r = h.run(0);
    ASSERT_FALSE(r.old_outcome.exception);
    std::string expected = "[";
    for (int i = 0; i < 100; ++i) expected += (i ? ", " : "") + std::to_string(i);
    EXPECT_EQ(r.old_outcome.return_value, expected + "]");
}

TEST(Generators, NestedGeneratorFunctionAndEarlyStop) {
    const char* src =
        "def f():\n"
        "    def gen(n):\n"
        "        for i in range(n):\n"
        "            print(i)\n"
        "            yield i\n"
        "    g = gen(5)\n"
        "    return any(x == 1 for x in g), list(g)\n";
    Harness h(src, src);
    auto r = h.run(0);
    ASSERT_FALSE(r.old_outcome.exception) << r.old_outcome.exception->render();
    EXPECT_EQ(r.old_outcome.return_value, "(True, [2, 3, 4])");
    EXPECT_EQ(r.old_outcome.stdout_text, "0\n1\n2\n3\n4\n");
}

TEST(Probe, ReturnedFunctionIsCalledOnce) {
    const char* src = "def f():\n    def g(y):\n        return [y]\n    return g\n";
    Harness h(src, src);
    auto r = h.run(0);
    EXPECT_EQ(r.old_outcome.return_value, "<function g>");
    ASSERT_TRUE(r.old_outcome.probe);
    EXPECT_EQ(r.old_outcome.probe, r.new_outcome.probe);
    EXPECT_EQ(r.inputs.at(0).first, "probe.y");
}

TEST(Properties, Determinism) {
    const char* src =
        "def f(request, spider):\n"
        "    items = request.items\n"
        "    out = []\n"
        "    for it in items:\n"
        "        out.append(spider.process(it))\n"
        "    print(len(out))\n"
        "    return out\n";
    Harness h(src, src);
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        auto a = h.run(seed);
        auto b = h.run(seed);
        EXPECT_TRUE(testsupport::identical(a.old_outcome, b.old_outcome));
        EXPECT_TRUE(testsupport::identical(a.new_outcome, b.new_outcome));
        EXPECT_EQ(a.inputs, b.inputs);
    }
}

TEST(Properties, MirroringOnIdenticalFunctions) {
    const char* sources[] = {
        "def f(request, spider):\n"
        "    if request.meta.get('x') or spider.enabled:\n"
        "        return request.copy()\n"
        "    return None\n",
        "def f(items, limit):\n"
        "    out = [i for i in items if i]\n"
        "    while len(out) > limit:\n"
        "        out.pop()\n"
        "    return out\n",
        "def f(cfg):\n"
        "    try:\n"
        "        value = cfg.load()\n"
        "    except (ValueError, KeyError) as e:\n"
        "        print('bad', e)\n"
        "        return None\n"
        "    return value\n",
        "def f(name, count):\n"
        "    msg = f'{name}: {count!r}'\n"
        "    print(msg)\n"
        "    return msg * 2\n",
    };
    for (const char* src : sources) {
        Harness h(src, src);
        for (std::uint64_t seed = 0; seed < 200; ++seed) {
            auto r = h.run(seed);
            ASSERT_TRUE(testsupport::same_behavior(r.old_outcome, r.new_outcome)) << src << " seed " << seed;
        }
    }
}

TEST(Properties, RenameInvariance) {
    const char* old_src =
        "def f(data):\n"
        "    x = data.load()\n"
        "    data.count = 3\n"
        "    return x, data.size\n";
    const char* new_src =
        "def f(store):\n"
        "    x = store.load()\n"
        "    store.count = 3\n"
        "    return x, store.size\n";
    Harness renamed(old_src, new_src, {{"data", "store"}});
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        auto r = renamed.run(seed);
        ASSERT_TRUE(testsupport::same_behavior(r.old_outcome, r.new_outcome)) << "seed " << seed;
        EXPECT_EQ(r.inputs.at(0).first, "data_renamed_store");
    }
}

TEST(Properties, NonInterference) {
    const char* src =
        "def f(items, d):\n"
        "    items.append(1)\n"
        "    d['k'] = 2\n"
        "    return len(items)\n";
    auto pred = table(entry("variable-read", "items", "List") + "," + entry("variable-read", "d", "Dictionary"));
    Harness h(src, src, {}, pred);
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        ConsistencyMap cmap;
        run_one(Side::Old, h.program, cmap, h.facts, h.cfg, *h.predictor, seed);
        std::map<std::string, std::string> before;
        for (const auto& p : cmap.paths()) before[p] = serialize(cmap.find(p)->v_old);
        run_one(Side::New, h.program, cmap, h.facts, h.cfg, *h.predictor, seed);
        for (const auto& p : cmap.paths()) {
            EXPECT_EQ(before[p], serialize(cmap.find(p)->v_old));
            EXPECT_EQ(serialize(cmap.find(p)->v_new), before[p]);  // both sides mutated identically
            EXPECT_NE(serialize(cmap.find(p)->v_new), cmap.find(p)->inserted);
        }
    }
}

TEST(Properties, CoverageSoundness) {
    const char* old_src = "def f(x):\n    if x:\n        return 1\n    y = 2\n    return y\n";
    const char* new_src = "def f(x):\n    if x:\n        return 1\n    y = 3\n    return y\n";
    Harness h(old_src, new_src);
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        auto r = h.run(seed);
        for (int l : r.old_outcome.covered_changed_lines) EXPECT_TRUE(h.program.changed_old.count(l));
        for (int l : r.new_outcome.covered_changed_lines) EXPECT_TRUE(h.program.changed_new.count(l));
    }
}

TEST(Limits, RecursionInsideGeneratorStaysOnItsStack) {
    const char* src =
        "def f():\n"
        "    def g(n):\n"
        "        return [g(n + 1) for _ in range(1)]\n"
        "    def gen():\n"
        "        yield g(0)\n"
        "    return list(x for x in gen())\n";
    Harness h(src, src);
    auto r = h.run(0);
    ASSERT_TRUE(r.old_outcome.exception);
    EXPECT_EQ(r.old_outcome.exception->type_name, "RecursionError");
}
