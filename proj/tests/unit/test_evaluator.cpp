#include <doctest.h>

#include <cmath>
#include <random>

#include "vsrg/evaluator.hpp"

#include "../testutil.hpp"

using namespace vsrg;

namespace {

// Direct-formula oracle: r = (n*sum_xy - sum_x*sum_y) /
// sqrt((n*sum_xx - sum_x^2) (n*sum_yy - sum_y^2))
double pearson_oracle(const std::vector<double>& x, const std::vector<double>& y) {
    double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        syy += y[i] * y[i];
        sxy += x[i] * y[i];
    }
    return (n * sxy - sx * sy) / std::sqrt((n * sxx - sx * sx) * (n * syy - sy * sy));
}

}  // namespace

TEST_CASE("pearson basics") {
    std::vector<double> x = {1, 2, 3, 4, 5};
    std::vector<double> y;
    for (double v : x) y.push_back(2 * v + 1);
    CHECK(pearson(x, y) == doctest::Approx(1.0).epsilon(1e-12));
    std::vector<double> neg;
    for (double v : x) neg.push_back(-v);
    CHECK(pearson(x, neg) == doctest::Approx(-1.0).epsilon(1e-12));

    CHECK_THROWS_WITH_AS(pearson({1, 1, 1}, {1, 2, 3}), doctest::Contains("zero variance"),
                         ValidationError);
    CHECK_THROWS_AS(pearson({1}, {2}), ValidationError);
    CHECK_THROWS_AS(pearson({1, 2}, {1, 2, 3}), ValidationError);
}

TEST_CASE("pearson and spearman match the oracle on random data") {
    std::mt19937_64 gen(19);
    std::vector<double> x(50), y(50);
    for (std::size_t i = 0; i < 50; ++i) {
        x[i] = gaussian(gen) * 3 + 1;
        y[i] = 0.7 * x[i] + gaussian(gen);
    }
    CHECK(std::abs(pearson(x, y) - pearson_oracle(x, y)) < 1e-10);
    // spearman oracle: pearson of rank vectors computed independently
    CHECK(std::abs(spearman(x, y) - pearson_oracle(average_ranks(x), average_ranks(y))) < 1e-10);
}

TEST_CASE("spearman rank behavior") {
    SUBCASE("strictly monotone map gives 1") {
        std::vector<double> x = {-2, -1, 0, 1.5, 3};
        std::vector<double> y;
        for (double v : x) y.push_back(v * v * v);
        CHECK(spearman(x, y) == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("tie ranks are averaged") {
        std::vector<double> ranks = average_ranks({1, 2, 2, 3});
        CHECK(ranks == std::vector<double>{1.0, 2.5, 2.5, 4.0});
    }
    SUBCASE("invariance under a strictly monotone transform") {
        std::mt19937_64 gen(23);
        std::vector<double> x(30), y(30), warped(30);
        for (std::size_t i = 0; i < 30; ++i) {
            x[i] = gaussian(gen);
            y[i] = gaussian(gen) + 0.5 * x[i];
            warped[i] = std::exp(y[i]);  // strictly increasing
        }
        CHECK(spearman(x, y) == doctest::Approx(spearman(x, warped)).epsilon(1e-12));
    }
}

TEST_CASE("correlation invariances") {
    std::mt19937_64 gen(29);
    std::vector<double> x(40), y(40);
    for (std::size_t i = 0; i < 40; ++i) {
        x[i] = gaussian(gen);
        y[i] = gaussian(gen) + x[i];
    }
    double base = pearson(x, y);
    std::vector<double> ax(40);

    // scale invariance for a > 0, sign flip for a < 0
    for (std::size_t i = 0; i < 40; ++i) ax[i] = 3.5 * x[i] + 2.0;
    CHECK(pearson(ax, y) == doctest::Approx(base).epsilon(1e-12));
    for (std::size_t i = 0; i < 40; ++i) ax[i] = -2.0 * x[i] + 1.0;
    CHECK(pearson(ax, y) == doctest::Approx(-base).epsilon(1e-12));

    // symmetry
    CHECK(pearson(x, y) == doctest::Approx(pearson(y, x)).epsilon(1e-12));
    CHECK(spearman(x, y) == doctest::Approx(spearman(y, x)).epsilon(1e-12));
}

namespace {

// Model whose trained embeddings produce cosines equal to gold/5: token "ti"
// sits at angle acos(gold_i/5) from the probe token "u".
struct ConstructedEval {
    Vocabulary vocab;
    ModelBundle model;
    std::vector<StsPair> pairs;
};

ConstructedEval build_constructed(const std::vector<double>& golds) {
    std::vector<std::string> lexical = {std::string(kBoundaryMarker) + "u"};
    for (std::size_t i = 0; i < golds.size(); ++i) {
        lexical.push_back(std::string(kBoundaryMarker) + "t" + std::to_string(i));
    }
    ConstructedEval out;
    out.vocab = Vocabulary::with_reserved(lexical);
    out.model = testutil::identity_bundle(out.vocab, 2, 64, 37);
    std::fill(out.model.embedding.data.begin(), out.model.embedding.data.end(), 0.0f);
    TokenId u = out.vocab.lookup(std::string(kBoundaryMarker) + "u");
    out.model.embedding.at(u, 0) = 1.0f;
    for (std::size_t i = 0; i < golds.size(); ++i) {
        double angle = std::acos(golds[i] / 5.0);
        TokenId t = out.vocab.lookup(std::string(kBoundaryMarker) + "t" + std::to_string(i));
        out.model.embedding.at(t, 0) = static_cast<float>(std::cos(angle));
        out.model.embedding.at(t, 1) = static_cast<float>(std::sin(angle));
        out.pairs.push_back({"u", "t" + std::to_string(i), golds[i]});
    }
    return out;
}

}  // namespace

TEST_CASE("evaluate_sts on a gold-constructed model reaches 100.00") {
    ConstructedEval fixture = build_constructed({0.5, 1.0, 2.0, 3.5, 4.0, 5.0});
    StsReport report = evaluate_sts(fixture.model, fixture.vocab, fixture.pairs);
    CHECK(report.n_pairs == 6);
    CHECK(report.n_skipped == 0);
    CHECK(report.pearson_pct == doctest::Approx(100.0));
}

TEST_CASE("evaluate_sts matches a cosine oracle on synthetic pairs") {
    std::mt19937_64 gen(41);
    // distinct golds keep the rank order unambiguous for the spearman check
    std::vector<double> all;
    for (int i = 0; i <= 50; ++i) all.push_back(i / 10.0);
    seeded_shuffle(all, gen);
    std::vector<double> golds(all.begin(), all.begin() + 20);
    ConstructedEval fixture = build_constructed(golds);
    StsReport report = evaluate_sts(fixture.model, fixture.vocab, fixture.pairs);

    // oracle: cosines are golds/5 exactly (up to f32), correlations recomputed
    std::vector<double> pred, gold;
    for (double g : golds) {
        pred.push_back(g / 5.0);
        gold.push_back(g);
    }
    double expect_p = std::round(pearson_oracle(pred, gold) * 10000.0) / 100.0;
    CHECK(report.pearson_pct == doctest::Approx(expect_p).epsilon(1e-6));
    double expect_s =
        std::round(pearson_oracle(average_ranks(pred), average_ranks(gold)) * 10000.0) / 100.0;
    CHECK(report.spearman_pct == doctest::Approx(expect_s).epsilon(1e-6));
}

TEST_CASE("evaluate_sts skips degenerate pairs and counts them") {
    ConstructedEval fixture = build_constructed({1.0, 2.0, 3.0});
    // a sentence with opposite embeddings pools to zero: degenerate
    std::vector<std::string> lexical;
    for (TokenId id = fixture.vocab.first_lexical(); id < fixture.vocab.size(); ++id) {
        lexical.push_back(fixture.vocab.tokens[id]);
    }
    lexical.push_back(std::string(kBoundaryMarker) + "neg");
    Vocabulary vocab = Vocabulary::with_reserved(lexical);
    ModelBundle model = testutil::identity_bundle(vocab, 2, 64, 43);
    std::fill(model.embedding.data.begin(), model.embedding.data.end(), 0.0f);
    for (TokenId id = fixture.vocab.first_lexical(); id < fixture.vocab.size(); ++id) {
        TokenId nid = vocab.lookup(fixture.vocab.tokens[id]);
        model.embedding.at(nid, 0) = fixture.model.embedding.at(id, 0);
        model.embedding.at(nid, 1) = fixture.model.embedding.at(id, 1);
    }
    TokenId u = vocab.lookup(std::string(kBoundaryMarker) + "u");
    TokenId neg = vocab.lookup(std::string(kBoundaryMarker) + "neg");
    model.embedding.at(neg, 0) = -model.embedding.at(u, 0);
    model.embedding.at(neg, 1) = -model.embedding.at(u, 1);

    std::vector<StsPair> pairs = fixture.pairs;
    pairs.push_back({"u neg", "t0", 2.5});  // pooled mean is exactly zero
    StsReport report = evaluate_sts(model, vocab, pairs);
    CHECK(report.n_skipped == 1);
    CHECK(report.n_pairs == 3);
}

TEST_CASE("evaluate_sts is deterministic across thread counts") {
    ConstructedEval fixture = build_constructed({0.5, 1.5, 2.5, 3.5, 4.5});
    StsReport a = evaluate_sts(fixture.model, fixture.vocab, fixture.pairs, 1);
    StsReport b = evaluate_sts(fixture.model, fixture.vocab, fixture.pairs, 4);
    CHECK(sts_report_json(a) == sts_report_json(b));
}

TEST_CASE("sts pair loading validates") {
    testutil::TempDir dir("sts");
    testutil::write_file(dir.file("p.tsv"), "2.5\thello there\tmerhaba\n0\ta\tb\n5\tx\ty\n");
    std::vector<StsPair> pairs = load_sts_pairs(dir.file("p.tsv"));
    REQUIRE(pairs.size() == 3);
    CHECK(pairs[0].gold == 2.5);
    CHECK(pairs[0].sentence2 == "merhaba");

    testutil::write_file(dir.file("bad.tsv"), "9.9\ta\tb\n");
    CHECK_THROWS_AS(load_sts_pairs(dir.file("bad.tsv")), ValidationError);
    testutil::write_file(dir.file("bad2.tsv"), "1.0\tonly-one-field\n");
    CHECK_THROWS_AS(load_sts_pairs(dir.file("bad2.tsv")), ValidationError);
}

TEST_CASE("aggregate_report macro math") {
    SUBCASE("one task per category: macro is the plain mean") {
        std::map<std::string, std::pair<std::string, double>> tasks = {
            {"t1", {"retrieval", 70.0}},
            {"t2", {"classification", 60.0}},
            {"t3", {"sts", 80.0}},
        };
        CategoryReport rep = aggregate_report(tasks);
        CHECK(rep.macro_average == doctest::Approx(70.0));
    }
    SUBCASE("published six-category fixture") {
        std::map<std::string, std::pair<std::string, double>> tasks = {
            {"retrieval", {"retrieval", 72.2}}, {"classification", {"classification", 68.5}},
            {"clustering", {"clustering", 61.4}}, {"sts", {"sts", 77.5}},
            {"nli", {"nli", 67.9}}, {"bitext", {"bitext", 97.0}},
        };
        CategoryReport rep = aggregate_report(tasks);
        // arithmetic: (72.2+68.5+61.4+77.5+67.9+97.0)/6
        CHECK(rep.macro_average == doctest::Approx(74.08).epsilon(1e-3));
    }
    SUBCASE("two tasks in one category average first") {
        std::map<std::string, std::pair<std::string, double>> tasks = {
            {"a", {"c1", 60.0}},
            {"b", {"c1", 80.0}},
            {"c", {"c2", 70.0}},
        };
        CategoryReport rep = aggregate_report(tasks);
        CHECK(rep.category_means.at("c1") == doctest::Approx(70.0));
        CHECK(rep.category_means.at("c2") == doctest::Approx(70.0));
        CHECK(rep.macro_average == doctest::Approx(70.0));
    }
    SUBCASE("empty input rejected") {
        CHECK_THROWS_AS(aggregate_report({}), ValidationError);
    }
}

TEST_CASE("task score TSV loader") {
    testutil::TempDir dir("scores");
    testutil::write_file(dir.file("s.tsv"),
                         "taskA\tretrieval\t71.5\ntaskB\tsts\t80.25\n# comment\n");
    auto scores = load_task_scores(dir.file("s.tsv"));
    REQUIRE(scores.size() == 2);
    CHECK(scores.at("taskA").first == "retrieval");
    CHECK(scores.at("taskB").second == doctest::Approx(80.25));
}
