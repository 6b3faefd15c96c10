#include <doctest.h>

#include <algorithm>
#include <random>

#include "vsrg/segmenter.hpp"
#include "vsrg/vocab.hpp"

#include "../testutil.hpp"

using namespace vsrg;
using testutil::TempDir;

TEST_CASE("select_top_k with ties and small tables") {
    FrequencyTable t;
    t.add("a", 5);
    t.add("b", 5);
    t.add("c", 1);
    CHECK(select_top_k(t, 2) == std::vector<std::string>{"a", "b"});
    CHECK(select_top_k(t, 0).empty());
    CHECK(select_top_k(t, 99).size() == 3);
}

TEST_CASE("select_top_k matches a full-sort oracle") {
    std::mt19937_64 gen(3);
    FrequencyTable t;
    std::vector<std::pair<std::string, uint64_t>> rows;
    for (int i = 0; i < 10; ++i) {
        std::string token = "t" + std::to_string(i);
        uint64_t count = 1 + gen() % 5;
        t.add(token, count);
        rows.emplace_back(token, count);
    }
    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    std::vector<std::string> expected;
    for (int i = 0; i < 4; ++i) expected.push_back(rows[i].first);
    CHECK(select_top_k(t, 4) == expected);
}

TEST_CASE("prune_teacher") {
    SUBCASE("resolvable token is pruned") {
        Vocabulary teacher = testutil::make_vocab({"ev", "ler", "evler"});
        std::vector<std::string> survivors = prune_teacher(teacher, {"ev", "ler"});
        // "ev"/"ler" are themselves retained, "evler" resolves to ev+ler
        CHECK(survivors.empty());
    }
    SUBCASE("empty retained set keeps everything") {
        Vocabulary teacher = testutil::make_vocab({"ev", "ler", "evler"});
        std::vector<std::string> survivors = prune_teacher(teacher, {});
        CHECK(survivors == std::vector<std::string>{"ev", "ler", "evler"});
    }
    SUBCASE("uncovered token survives") {
        Vocabulary teacher = testutil::make_vocab({"xyz", "ab"});
        std::vector<std::string> survivors = prune_teacher(teacher, {"a", "b"});
        CHECK(survivors == std::vector<std::string>{"xyz"});
    }
    SUBCASE("greedy, not optimal, cover decides") {
        // greedy longest-match on "aab" over {aa, ab, a} eats "aa" then "b" fails,
        // so "aab" survives even though a+ab would cover it
        Vocabulary teacher = testutil::make_vocab({"aab"});
        std::vector<std::string> survivors = prune_teacher(teacher, {"aa", "ab", "a"});
        CHECK(survivors == std::vector<std::string>{"aab"});
    }
}

TEST_CASE("prune soundness: pruned tokens decode back exactly") {
    std::mt19937_64 gen(17);
    std::vector<std::string> retained;
    for (char a = 'a'; a <= 'f'; ++a) {
        retained.push_back(std::string(1, a));
        for (char b = 'a'; b <= 'f'; ++b) retained.push_back(std::string{a, b});
    }
    std::vector<std::string> teacher_lexical;
    for (int i = 0; i < 200; ++i) {
        std::string s;
        for (int k = 0; k < 1 + int(gen() % 5); ++k) s.push_back('a' + char(gen() % 8));
        if (std::find(teacher_lexical.begin(), teacher_lexical.end(), s) ==
            teacher_lexical.end()) {
            teacher_lexical.push_back(s);
        }
    }
    Vocabulary teacher = testutil::make_vocab(teacher_lexical);
    std::vector<std::string> survivors = prune_teacher(teacher, retained);

    ByteTrie trie;
    for (std::size_t i = 0; i < retained.size(); ++i) {
        trie.insert(retained[i], static_cast<int32_t>(i));
    }
    for (const std::string& token : teacher_lexical) {
        bool survived =
            std::find(survivors.begin(), survivors.end(), token) != survivors.end();
        bool in_retained =
            std::find(retained.begin(), retained.end(), token) != retained.end();
        if (survived) continue;
        if (in_retained) continue;
        // pruned by coverage: greedy segments must concatenate back to the surface
        std::string rebuilt;
        std::size_t pos = 0;
        while (pos < token.size()) {
            auto [value, len] = trie.longest(token, pos);
            REQUIRE(value >= 0);
            rebuilt += retained[static_cast<std::size_t>(value)];
            pos += len;
        }
        CHECK(rebuilt == token);
    }
}

TEST_CASE("fill_multilingual round-robin") {
    FrequencyTable multi;
    multi.add("a", 9);
    multi.add("b", 8);
    multi.add("ab", 7);
    Vocabulary teacher = testutil::make_vocab({});
    FrequencyTable mono;

    BuildPlan plan;
    plan.lengths = {1, 2};
    plan.teacher_vocab = &teacher;
    plan.mono_freq = &mono;
    plan.multi_freq = &multi;

    SUBCASE("two free slots alternate buckets") {
        plan.target_size = 2;
        std::vector<std::string> fill = fill_multilingual(plan, {});
        CHECK(fill == std::vector<std::string>{"a", "ab"});
    }
    SUBCASE("zero free slots") {
        plan.target_size = 3;
        CHECK(fill_multilingual(plan, {"x", "y", "z"}).empty());
    }
    SUBCASE("already-chosen candidates are skipped") {
        plan.target_size = 2;
        std::vector<std::string> fill = fill_multilingual(plan, {"a"});
        CHECK(fill == std::vector<std::string>{"b"});
    }
    SUBCASE("underfull names the shortfall") {
        plan.target_size = 10;
        CHECK_THROWS_WITH_AS(fill_multilingual(plan, {}),
                             doctest::Contains("vocabulary underfull"), ValidationError);
    }
}

namespace {

// Straightforward relayout: an independent recomputation of the build order.
std::vector<std::string> expected_layout(const BuildPlan& plan) {
    std::vector<std::string> out;
    out.push_back("<pad>");
    out.push_back("<unk>");
    out.push_back("<bos>");
    out.push_back("<eos>");
    for (unsigned b = 0; b < 256; ++b) {
        char buf[8];
        std::snprintf(buf, sizeof(buf), "<0x%02X>", b);
        out.emplace_back(buf);
    }
    auto contains = [&](const std::string& s) {
        return std::find(out.begin(), out.end(), s) != out.end();
    };
    for (const std::string& s : select_top_k(*plan.mono_freq, plan.monolingual_top_k)) {
        if (!contains(s)) out.push_back(s);
    }
    std::vector<std::string> survivors =
        prune_teacher(*plan.teacher_vocab,
                      select_top_k(*plan.mono_freq, plan.monolingual_top_k));
    for (const std::string& s : survivors) {
        if (out.size() >= plan.target_size) break;
        if (!contains(s)) out.push_back(s);
    }
    // round-robin fill
    std::vector<std::vector<std::pair<std::string, uint64_t>>> buckets(plan.lengths.size());
    for (const auto& [token, count] : plan.multi_freq->entries) {
        for (std::size_t b = 0; b < plan.lengths.size(); ++b) {
            if (utf8_count(token) == plan.lengths[b]) buckets[b].emplace_back(token, count);
        }
    }
    for (auto& bucket : buckets) {
        std::sort(bucket.begin(), bucket.end(), [](const auto& x, const auto& y) {
            if (x.second != y.second) return x.second > y.second;
            return x.first < y.first;
        });
    }
    std::vector<std::size_t> cursor(buckets.size(), 0);
    while (out.size() < plan.target_size) {
        bool any = false;
        for (std::size_t b = 0; b < buckets.size() && out.size() < plan.target_size; ++b) {
            while (cursor[b] < buckets[b].size() && contains(buckets[b][cursor[b]].first)) {
                ++cursor[b];
            }
            if (cursor[b] >= buckets[b].size()) continue;
            out.push_back(buckets[b][cursor[b]].first);
            ++cursor[b];
            any = true;
        }
        if (!any) break;
    }
    return out;
}

}  // namespace

TEST_CASE("build_vocabulary desk plan: exact size and layout") {
    std::mt19937_64 gen(23);
    FrequencyTable mono, multi;
    for (int i = 0; i < 400; ++i) mono.add("m" + std::to_string(i), 1 + gen() % 100);
    for (int i = 0; i < 500; ++i) multi.add("w" + std::to_string(i), 1 + gen() % 100);
    for (int i = 0; i < 300; ++i) multi.add("xx" + std::to_string(i), 1 + gen() % 100);

    std::vector<std::string> teacher_lexical;
    for (int i = 0; i < 120; ++i) teacher_lexical.push_back("T" + std::to_string(i));
    teacher_lexical.push_back("m1");  // retained duplicate, must be pruned
    Vocabulary teacher = testutil::make_vocab(teacher_lexical);

    BuildPlan plan;
    plan.monolingual_top_k = 300;
    plan.target_size = 1024;
    plan.lengths = {2, 3, 4, 5};
    plan.teacher_vocab = &teacher;
    plan.mono_freq = &mono;
    plan.multi_freq = &multi;

    Vocabulary vocab = build_vocabulary(plan);
    CHECK(vocab.size() == 1024);

    // layout against the independent recomputation
    std::vector<std::string> expected = expected_layout(plan);
    REQUIRE(expected.size() == 1024);
    CHECK(vocab.tokens == expected);

    // subset property: every monolingual top-k token is present
    for (const std::string& s : select_top_k(mono, plan.monolingual_top_k)) {
        CHECK(vocab.id_of.count(s) == 1);
    }
}

TEST_CASE("build_vocabulary validations") {
    FrequencyTable mono, multi;
    Vocabulary teacher = testutil::make_vocab({});
    BuildPlan plan;
    plan.teacher_vocab = &teacher;
    plan.mono_freq = &mono;
    plan.multi_freq = &multi;
    plan.lengths = {1};

    SUBCASE("target below the reserved block") {
        plan.target_size = 100;
        CHECK_THROWS_AS(build_vocabulary(plan), ValidationError);
    }
    SUBCASE("top-k cannot fit") {
        plan.target_size = 300;
        plan.monolingual_top_k = 200;
        CHECK_THROWS_AS(build_vocabulary(plan), ValidationError);
    }
    SUBCASE("reserved-only vocabulary builds") {
        plan.target_size = 260;
        plan.monolingual_top_k = 0;
        Vocabulary v = build_vocabulary(plan);
        CHECK(v.size() == 260);
    }
}

TEST_CASE("vocabulary file round-trip with escapes") {
    TempDir dir("vocabio");
    Vocabulary vocab = testutil::make_vocab(
        {"plain", "with\ttab", "with\nnewline", "back\\slash", "#hashstart", "\xE2\x96\x81tr"});
    save_vocabulary(vocab, dir.file("v.txt"));
    Vocabulary back = load_vocabulary(dir.file("v.txt"));
    CHECK(back.tokens == vocab.tokens);
    CHECK(back.size() == vocab.size());
    CHECK(back.id_of.at("with\ttab") == vocab.id_of.at("with\ttab"));

    std::string text = testutil::read_file(dir.file("v.txt"));
    CHECK(text.rfind("#size 266", 0) == 0);
    CHECK(text.find("#specials pad=0 unk=1 bos=2 eos=3") != std::string::npos);
    CHECK(text.find("#bytes base=4") != std::string::npos);
    CHECK(text.find("with\\ttab") != std::string::npos);
}

TEST_CASE("vocabulary rejects duplicates and bad headers") {
    CHECK_THROWS_AS(testutil::make_vocab({"dup", "dup"}), ValidationError);
    CHECK_THROWS_AS(testutil::make_vocab({"<pad>"}), ValidationError);
    CHECK_THROWS_AS(parse_vocabulary("#size 3\nonly\ntwo\n"), ValidationError);
}
