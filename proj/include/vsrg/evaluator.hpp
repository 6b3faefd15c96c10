#pragma once

#include <map>
#include <string>
#include <vector>

#include "vsrg/cloner.hpp"
#include "vsrg/segmenter.hpp"

namespace vsrg {

// Product-moment correlation. Throws on fewer than two points or a constant
// input ("zero variance").
double pearson(const std::vector<double>& x, const std::vector<double>& y);

// Pearson of the rank vectors; ties receive average ranks.
double spearman(const std::vector<double>& x, const std::vector<double>& y);

std::vector<double> average_ranks(const std::vector<double>& values);

struct StsPair {
    std::string sentence1;
    std::string sentence2;
    double gold = 0.0;  // [0, 5]
};

// TSV `score<TAB>sentence1<TAB>sentence2`, UTF-8, no header.
std::vector<StsPair> load_sts_pairs(const std::string& path);

struct StsReport {
    double pearson_pct = 0.0;   // percentages, 2 decimals
    double spearman_pct = 0.0;
    std::size_t n_pairs = 0;
    std::size_t n_skipped = 0;  // degenerate-embedding pairs
};

// Cosine similarity of the two sentence embeddings against the gold scores.
StsReport evaluate_sts(const ModelBundle& model, const Vocabulary& vocab,
                       const std::vector<StsPair>& pairs, unsigned threads = 1);

std::string sts_report_json(const StsReport& report);

struct CategoryReport {
    std::map<std::string, double> category_means;
    double macro_average = 0.0;
    std::map<std::string, double> task_scores;
};

// Category mean = mean of its task scores; macro = mean of category means.
CategoryReport aggregate_report(
    const std::map<std::string, std::pair<std::string, double>>& task_scores);

std::string category_report_json(const CategoryReport& report);

// TSV `task<TAB>category<TAB>score`.
std::map<std::string, std::pair<std::string, double>> load_task_scores(const std::string& path);

}  // namespace vsrg
