#include "vsrg/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "vsrg/distiller.hpp"

namespace vsrg {

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw ValidationError("pearson: length mismatch");
    if (x.size() < 2) throw ValidationError("pearson: need at least two points");
    const double n = static_cast<double>(x.size());
    double mean_x = std::accumulate(x.begin(), x.end(), 0.0) / n;
    double mean_y = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double dx = x[i] - mean_x;
        double dy = y[i] - mean_y;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (sxx == 0.0 || syy == 0.0) throw ValidationError("pearson: zero variance input");
    return sxy / std::sqrt(sxx * syy);
}

std::vector<double> average_ranks(const std::vector<double>& values) {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(values.size(), 0.0);
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
        // 1-based ranks; ties share the average of their positions
        double rank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
        i = j + 1;
    }
    return ranks;
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw ValidationError("spearman: length mismatch");
    if (x.size() < 2) throw ValidationError("spearman: need at least two points");
    return pearson(average_ranks(x), average_ranks(y));
}

std::vector<StsPair> load_sts_pairs(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open STS pairs: " + path);
    std::vector<StsPair> pairs;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::size_t tab1 = line.find('\t');
        std::size_t tab2 = tab1 == std::string::npos ? std::string::npos : line.find('\t', tab1 + 1);
        if (tab2 == std::string::npos) {
            throw ValidationError("malformed STS line " + std::to_string(line_no) + " in " + path);
        }
        StsPair pair;
        try {
            pair.gold = std::stod(line.substr(0, tab1));
        } catch (const std::exception&) {
            throw ValidationError("malformed STS score on line " + std::to_string(line_no));
        }
        pair.sentence1 = line.substr(tab1 + 1, tab2 - tab1 - 1);
        pair.sentence2 = line.substr(tab2 + 1);
        if (pair.gold < 0.0 || pair.gold > 5.0) {
            throw ValidationError("STS score out of [0,5] on line " + std::to_string(line_no));
        }
        if (trim(pair.sentence1).empty() || trim(pair.sentence2).empty()) {
            throw ValidationError("empty STS sentence on line " + std::to_string(line_no));
        }
        pairs.push_back(std::move(pair));
    }
    return pairs;
}

namespace {

double round2(double v) { return std::round(v * 100.0) / 100.0; }

}  // namespace

StsReport evaluate_sts(const ModelBundle& model, const Vocabulary& vocab,
                       const std::vector<StsPair>& pairs, unsigned threads) {
    if (pairs.empty()) throw ValidationError("evaluate_sts: no pairs");
    Net<float> net = Net<float>::from_bundle(model);
    Segmenter segmenter(vocab);
    std::size_t max_len = model.config.max_len ? model.config.max_len : 8192;

    // encode all sentences up front; deterministic ordered gather
    const std::size_t n = pairs.size();
    std::vector<double> predicted(n, 0.0);
    std::vector<uint8_t> ok(n, 0);
    parallel_for(n, threads, [&](std::size_t begin, std::size_t end) {
        ForwardCache<float> cache;
        for (std::size_t i = begin; i < end; ++i) {
            auto embed = [&](const std::string& text, std::vector<float>& out) {
                TokenIdSequence seq = segmenter.encode(text, max_len);
                std::vector<uint8_t> mask(seq.ids.size(), 1);
                net_forward(net, seq.ids, mask, 1, seq.ids.size(), TargetKind::Final, cache);
                out = cache.unit;
            };
            std::vector<float> a, b;
            try {
                embed(pairs[i].sentence1, a);
                embed(pairs[i].sentence2, b);
            } catch (const NumericError&) {
                continue;  // degenerate embedding: skip, count
            } catch (const ValidationError&) {
                continue;  // all-masked / empty encoding
            }
            double dot = 0.0;
            for (std::size_t k = 0; k < a.size(); ++k) {
                dot += static_cast<double>(a[k]) * static_cast<double>(b[k]);
            }
            predicted[i] = dot;
            ok[i] = 1;
        }
    });

    std::vector<double> pred, gold;
    pred.reserve(n);
    gold.reserve(n);
    StsReport report;
    for (std::size_t i = 0; i < n; ++i) {
        if (!ok[i]) {
            ++report.n_skipped;
            continue;
        }
        pred.push_back(predicted[i]);
        gold.push_back(pairs[i].gold);
    }
    report.n_pairs = pred.size();
    report.pearson_pct = round2(pearson(pred, gold) * 100.0);
    report.spearman_pct = round2(spearman(pred, gold) * 100.0);
    return report;
}

std::string sts_report_json(const StsReport& report) {
    nlohmann::ordered_json j;
    j["pearson"] = report.pearson_pct;
    j["spearman"] = report.spearman_pct;
    j["n_pairs"] = report.n_pairs;
    j["n_skipped"] = report.n_skipped;
    return j.dump(2) + "\n";
}

CategoryReport aggregate_report(
    const std::map<std::string, std::pair<std::string, double>>& task_scores) {
    if (task_scores.empty()) throw ValidationError("aggregate_report: no task scores");
    CategoryReport report;
    std::map<std::string, std::pair<double, std::size_t>> sums;
    for (const auto& [task, cat_score] : task_scores) {
        const auto& [category, score] = cat_score;
        if (category.empty()) throw ValidationError("task " + task + " has no category");
        sums[category].first += score;
        sums[category].second += 1;
        report.task_scores[task] = score;
    }
    double total = 0.0;
    for (const auto& [category, sum_count] : sums) {
        double mean = sum_count.first / static_cast<double>(sum_count.second);
        report.category_means[category] = mean;
        total += mean;
    }
    report.macro_average = total / static_cast<double>(sums.size());
    return report;
}

std::string category_report_json(const CategoryReport& report) {
    nlohmann::ordered_json j;
    j["macro_average"] = report.macro_average;
    j["categories"] = nlohmann::ordered_json::object();
    for (const auto& [category, mean] : report.category_means) j["categories"][category] = mean;
    j["tasks"] = nlohmann::ordered_json::object();
    for (const auto& [task, score] : report.task_scores) j["tasks"][task] = score;
    return j.dump(2) + "\n";
}

std::map<std::string, std::pair<std::string, double>> load_task_scores(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open task scores: " + path);
    std::map<std::string, std::pair<std::string, double>> scores;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        std::string task, category, score_text;
        if (!std::getline(ss, task, '\t') || !std::getline(ss, category, '\t') ||
            !std::getline(ss, score_text, '\t')) {
            throw ValidationError("malformed task score line " + std::to_string(line_no));
        }
        try {
            scores[task] = {category, std::stod(score_text)};
        } catch (const std::exception&) {
            throw ValidationError("malformed score on line " + std::to_string(line_no));
        }
    }
    return scores;
}

}  // namespace vsrg
