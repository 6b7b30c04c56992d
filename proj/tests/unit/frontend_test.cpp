#include <gtest/gtest.h>

#include <random>

#include "pairguard/frontend.hpp"
#include "pairguard/printer.hpp"

using namespace pairguard;

namespace {

const char* kRetryOld = R"(def _retry(self, request, reason, spider):
    retries = request.meta.get('retry_times', 0) + 1
    retry_times = self.max_retry_times
    if 'max_retry_times' in request.meta: retry_times = request.meta['max_retry_times']
    stats = spider.crawler.stats
    if retries <= retry_times:
        return retries
)";

const char* kRetryNew = R"(def _retry(self, request, reason, spider):
    retries = request.meta.get('retry_times', 0) + 1
    retry_times = request.meta.get('max_retry_times') or self.max_retry_times
    stats = spider.crawler.stats
    if retries <= retry_times:
        return retries
)";

// Independent quadratic-memory-free reference: classic DP over raw stripped
// lines, then mark lines not on one maximal alignment.
std::pair<std::set<int>, std::set<int>> reference_diff(const std::vector<std::string>& a,
                                                       const std::vector<std::string>& b) {
    std::size_t n = a.size(), m = b.size();
    std::vector<std::vector<int>> dp(n + 1, std::vector<int>(m + 1));
    for (std::size_t i = 1; i <= n; ++i)
        for (std::size_t j = 1; j <= m; ++j)
            dp[i][j] = a[i - 1] == b[j - 1] ? dp[i - 1][j - 1] + 1 : std::max(dp[i - 1][j], dp[i][j - 1]);
    std::set<int> ra, rb;
    for (std::size_t i = 0; i < n; ++i) ra.insert(static_cast<int>(i) + 1);
    for (std::size_t j = 0; j < m; ++j) rb.insert(static_cast<int>(j) + 1);
    std::size_t i = n, j = m;
    while (i > 0 && j > 0) {
        if (a[i - 1] == b[j - 1]) {
            ra.erase(static_cast<int>(i));
            rb.erase(static_cast<int>(j));
            --i;
            --j;
        } else if (dp[i - 1][j] >= dp[i][j - 1]) {
            --i;
        } else {
            --j;
        }
    }
    return {ra, rb};
}

}  // namespace

TEST(ParseFunction, MinimalFunction) {
    auto fn = parse_function("def f():\n    return 1");
    EXPECT_EQ(fn.name, "f");
    EXPECT_TRUE(fn.params.empty());
    EXPECT_EQ(fn.line_count, 2);
}

TEST(ParseFunction, RetryGetIsAttributeCall) {
    auto fn = parse_function(kRetryOld);
    EXPECT_EQ(fn.params, (std::vector<std::string>{"self", "request", "reason", "spider"}));
    const auto& assign = *fn.body()[0]->as<ast::Assign>();
    const auto& add = *assign.value->as<ast::BinOp>();
    const auto* call = add.left->as<ast::Call>();
    ASSERT_NE(call, nullptr);
    const auto* attr = call->func->as<ast::Attribute>();
    ASSERT_NE(attr, nullptr);
    EXPECT_EQ(attr->attr, "get");
    EXPECT_EQ(call->args.size(), 2u);
}

TEST(ParseFunction, MalformedHeader) {
    try {
        parse_function("def f(:");
        FAIL() << "expected SyntaxError";
    } catch (const SyntaxError& e) {
        EXPECT_EQ(e.line(), 1);
    }
}

TEST(ParseFunction, RejectsUnsupportedConstructs) {
    EXPECT_THROW(parse_function("def f():\n    import os"), SyntaxError);
    EXPECT_THROW(parse_function("def f(*args):\n    pass"), SyntaxError);
    EXPECT_THROW(parse_function("@dec\ndef f():\n    pass"), SyntaxError);
    EXPECT_THROW(parse_function("def f(x: int):\n    pass"), SyntaxError);
    EXPECT_THROW(parse_function("def f():\n    return x[1:2:3]"), SyntaxError);
    EXPECT_THROW(parse_function("def f():\n    pass\ndef g():\n    pass"), SyntaxError);
}

TEST(ParseFunction, LinesWithinRange) {
    auto fn = parse_function(kRetryOld);
    for (const auto& s : fn.body()) {
        EXPECT_GE(s->line, 1);
        EXPECT_LE(s->end_line, fn.line_count);
    }
}

TEST(ParseFunction, DedentsMethods) {
    auto fn = parse_function("    def m(self):\n        return self.x\n");
    EXPECT_EQ(fn.name, "m");
}

TEST(Diff, IdenticalIsEmpty) {
    auto [a, b] = diff_changed_lines(kRetryOld, kRetryOld);
    EXPECT_TRUE(a.empty());
    EXPECT_TRUE(b.empty());
}

TEST(Diff, RetryPair) {
    auto [a, b] = diff_changed_lines(kRetryOld, kRetryNew);
    EXPECT_EQ(a, (std::set<int>{3, 4}));
    EXPECT_EQ(b, (std::set<int>{3}));
}

TEST(Diff, AppendedLine) {
    auto [a, b] = diff_changed_lines("def f():\n    x = 1\n", "def f():\n    x = 1\n    return x\n");
    EXPECT_TRUE(a.empty());
    EXPECT_EQ(b, (std::set<int>{3}));
}

TEST(Diff, IgnoresWhitespaceCommentsBlank) {
    auto [a, b] = diff_changed_lines("def f():\n    x  =  1\n    return x\n",
                                     "def f():\n    # note\n\n    x = 1\n    return x\n");
    EXPECT_TRUE(a.empty());
    EXPECT_TRUE(b.empty());
}

TEST(Diff, MatchesReferenceOnRandomTexts) {
    std::mt19937 rng(11);
    const std::vector<std::string> vocab = {"a = 1", "b = 2", "return a", "pass", "x += 1", "if a:"};
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<std::string> la, lb;
        std::string ta, tb;
        for (int i = 0, n = static_cast<int>(rng() % 9); i < n; ++i) {
            la.push_back(vocab[rng() % vocab.size()]);
            ta += la.back() + "\n";
        }
        for (int i = 0, n = static_cast<int>(rng() % 9); i < n; ++i) {
            lb.push_back(vocab[rng() % vocab.size()]);
            tb += lb.back() + "\n";
        }
        auto [ga, gb] = diff_changed_lines(ta, tb);
        auto [ra, rb] = reference_diff(la, lb);
        // Alignments may differ among equal-length LCS choices; sizes may not.
        EXPECT_EQ(ga.size(), ra.size());
        EXPECT_EQ(gb.size(), rb.size());
        EXPECT_EQ(la.size() - ga.size(), lb.size() - gb.size());
    }
}

TEST(Facts, StringLiteralJoinsPool) {
    auto pair = make_function_pair("def f(val):\n    if val == \"new\":\n        return 1\n", "def f(val):\n    return 2\n");
    auto facts = extract_static_facts(pair);
    EXPECT_NE(std::find(facts.literals_str.begin(), facts.literals_str.end(), "new"), facts.literals_str.end());
    EXPECT_EQ(std::count(facts.literals_int.begin(), facts.literals_int.end(), 1), 1);
    EXPECT_EQ(std::count(facts.literals_int.begin(), facts.literals_int.end(), 2), 1);
}

TEST(Facts, DuplicatesKept) {
    auto pair = make_function_pair("def f():\n    return [1, 1, 'a', 2.5]\n", "def f():\n    return 1\n");
    auto facts = extract_static_facts(pair);
    EXPECT_EQ(std::count(facts.literals_int.begin(), facts.literals_int.end(), 1), 3);
    EXPECT_EQ(facts.literals_float, (std::vector<double>{2.5}));
}

TEST(Facts, CaughtExceptionsForCallsInTry) {
    const char* src = "def f(code):\n    try:\n        parse(code)\n    except SyntaxError as e:\n"
                      "        print(\"Caught exception:\", e)\n    helper()\n";
    auto facts = extract_static_facts(make_function_pair(src, src));
    ASSERT_EQ(facts.call_exception_map.count("parse"), 1u);
    EXPECT_EQ(facts.call_exception_map.at("parse"), (std::set<std::string>{"SyntaxError"}));
    EXPECT_EQ(facts.call_exception_map.count("print"), 0u);
    EXPECT_EQ(facts.call_exception_map.count("helper"), 0u);
}

TEST(Facts, BareExceptContributesNothing) {
    const char* src = "def f():\n    try:\n        parse()\n    except:\n        pass\n";
    auto facts = extract_static_facts(make_function_pair(src, src));
    EXPECT_TRUE(facts.call_exception_map.empty());
}

TEST(Facts, IsinstanceClasses) {
    const char* src = "def f(x):\n    return isinstance(x, ClassA) and isinstance(x, (ClassB, mod.C))\n";
    auto facts = extract_static_facts(make_function_pair(src, src));
    EXPECT_EQ(facts.isinstance_classes, (std::set<std::string>{"ClassA", "ClassB", "mod.C"}));
}

TEST(Facts, RenamedCalleePathIsMerged) {
    const char* a = "def f(data):\n    try:\n        data.load()\n    except KeyError:\n        pass\n";
    const char* b = "def f(store):\n    try:\n        store.load()\n    except KeyError:\n        pass\n";
    auto facts = extract_static_facts(make_function_pair(a, b, {{"data", "store"}}));
    EXPECT_EQ(facts.call_exception_map.size(), 1u);
    EXPECT_EQ(facts.call_exception_map.count("data_renamed_store.load"), 1u);
}

TEST(Pair, RejectsBadRenames) {
    EXPECT_THROW(make_function_pair("def f(a):\n    return a", "def f(b):\n    return b", {{"zz", "b"}}), PairError);
    EXPECT_THROW(make_function_pair("def f(a, c):\n    return a", "def f(b):\n    return b", {{"a", "b"}, {"c", "b"}}),
                 PairError);
}

TEST(NameMergerTest, BothSpellingsMerge) {
    NameMerger m(std::map<std::string, std::string>{{"data", "store"}});
    EXPECT_EQ(m.merge("data", Side::Old), "data_renamed_store");
    EXPECT_EQ(m.merge("store", Side::New), "data_renamed_store");
    EXPECT_EQ(m.merge("store", Side::Old), "store");
}

// ---- round-trip property ---------------------------------------------------

namespace {

class SourceGen {
public:
    explicit SourceGen(unsigned seed) : rng_(seed) {}

    // Operands of arithmetic and comparisons must not be bare low-precedence
    // forms, matching the grammar.
    std::string operand(int depth) {
        std::string text = expr(depth);
        bool low = text.rfind("not ", 0) == 0 || text.find(" and ") != std::string::npos ||
                   text.find(" or ") != std::string::npos || text.find(" if ") != std::string::npos;
        return low ? "(" + text + ")" : text;
    }

    std::string expr(int depth) {
        int pick = static_cast<int>(rng_() % (depth <= 0 ? 6 : 22));
        switch (pick) {
            case 0: return std::to_string(rng_() % 50);
            case 1: return names_[rng_() % names_.size()];
            case 2: return "'s" + std::to_string(rng_() % 5) + "'";
            case 3: return "None";
            case 4: return "1.5";
            case 5: return "True";
            case 6: return operand(depth - 1) + " " + binops_[rng_() % binops_.size()] + " " + operand(depth - 1);
            case 7: return "(" + expr(depth - 1) + ")";
            case 8: return "not " + expr(depth - 1);
            case 9: return "-" + operand(depth - 1);
            case 10: return operand(depth - 1) + " " + cmps_[rng_() % cmps_.size()] + " " + operand(depth - 1);
            case 11: return expr(depth - 1) + " and " + expr(depth - 1);
            case 12: return expr(depth - 1) + " or " + expr(depth - 1);
            case 13: return "[" + expr(depth - 1) + ", " + expr(depth - 1) + "]";
            case 14: return "(" + expr(depth - 1) + ",)";
            case 15: return "{'k': " + expr(depth - 1) + "}";
            case 16: return "f(" + expr(depth - 1) + ", key=" + expr(depth - 1) + ")";
            case 17: return "a.attr";
            case 18: return "b[" + expr(depth - 1) + "]";
            case 19: return operand(depth - 1) + " if " + operand(depth - 1) + " else " + expr(depth - 1);
            case 20: return "[x for x in " + operand(depth - 1) + " if x]";
            default: return "(lambda q: " + expr(depth - 1) + ")";
        }
    }

    std::string function() {
        std::string body;
        int n = 1 + static_cast<int>(rng_() % 4);
        for (int i = 0; i < n; ++i) {
            switch (rng_() % 5) {
                case 0: body += "    x = " + expr(3) + "\n"; break;
                case 1: body += "    if " + expr(2) + ":\n        y = " + expr(2) + "\n    else:\n        pass\n"; break;
                case 2: body += "    for i in " + expr(2) + ":\n        x += " + expr(2) + "\n"; break;
                case 3: body += "    print(f\"v={ " + expr(2) + "!r} {{lit}}\")\n"; break;
                default: body += "    try:\n        g()\n    except (KeyError, ValueError) as e:\n        raise\n"; break;
            }
        }
        return "def gen(a, b=2):\n" + body + "    return " + expr(3) + "\n";
    }

private:
    std::mt19937 rng_;
    std::vector<std::string> names_ = {"a", "b", "c", "x"};
    std::vector<std::string> binops_ = {"+", "-", "*", "/", "//", "%", "**"};
    std::vector<std::string> cmps_ = {"==", "!=", "<", "<=", ">", ">=", "in", "not in", "is", "is not"};
};

}  // namespace

TEST(RoundTrip, PrintedSourceReparsesToSameTree) {
    SourceGen gen(2024);
    for (int i = 0; i < 500; ++i) {
        std::string src = gen.function();
        SourceFunction first;
        ASSERT_NO_THROW(first = parse_function(src)) << src;
        std::string printed = to_source(first);
        SourceFunction second;
        ASSERT_NO_THROW(second = parse_function(printed)) << printed;
        EXPECT_EQ(dump(*first.def), dump(*second.def)) << src << "\n---\n" << printed;
        EXPECT_EQ(to_source(second), printed);
    }
}

TEST(RoundTrip, FixedCorpus) {
    for (const char* src : {kRetryOld, kRetryNew}) {
        auto a = parse_function(src);
        auto b = parse_function(to_source(a));
        EXPECT_EQ(dump(*a.def), dump(*b.def));
    }
}

TEST(Literals, ExtractedLiteralsOccurInSource) {
    std::mt19937 rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        std::string body;
        for (int i = 0; i < 4; ++i) {
            switch (rng() % 3) {
                case 0: body += "    x = " + std::to_string(rng() % 1000) + "\n"; break;
                case 1: body += "    y = 'w" + std::to_string(rng() % 1000) + "'\n"; break;
                default: body += "    z = " + std::to_string(rng() % 100) + ".25\n"; break;
            }
        }
        std::string a = "def f():\n" + body;
        std::string b = "def f():\n    return 7\n";
        auto facts = extract_static_facts(make_function_pair(a, b));
        for (auto v : facts.literals_int) {
            EXPECT_TRUE(a.find(std::to_string(v)) != std::string::npos || b.find(std::to_string(v)) != std::string::npos);
        }
        for (const auto& s : facts.literals_str) EXPECT_NE(a.find("'" + s + "'"), std::string::npos);
        for (auto d : facts.literals_float) {
            std::string text = std::to_string(d);
            text = text.substr(0, text.find('.') + 3);
            EXPECT_NE(a.find(text), std::string::npos);
        }
    }
}
