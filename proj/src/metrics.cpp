#include "eenr/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace eenr {

namespace {

bool degenerate(const std::vector<int>& labels) {
    bool pos = false, neg = false;
    for (int l : labels) (l ? pos : neg) = true;
    return !(pos && neg);
}

void check_aligned(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size()) {
        throw std::invalid_argument("metrics: " + std::to_string(scores.size()) + " scores vs " +
                                    std::to_string(labels.size()) + " labels");
    }
}

// candidate order breaks ties, so the ranking is deterministic
std::vector<size_t> rank_order(const std::vector<double>& scores) {
    std::vector<size_t> order(scores.size());
    std::iota(order.begin(), order.end(), size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](size_t a, size_t b) { return scores[a] > scores[b]; });
    return order;
}

}  // namespace

double impression_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
    check_aligned(scores, labels);
    if (degenerate(labels)) return -1.0;
    double wins = 0.0;
    int64_t pairs = 0;
    for (size_t p = 0; p < scores.size(); ++p) {
        if (!labels[p]) continue;
        for (size_t n = 0; n < scores.size(); ++n) {
            if (labels[n]) continue;
            ++pairs;
            if (scores[p] > scores[n])
                wins += 1.0;
            else if (scores[p] == scores[n])
                wins += 0.5;
        }
    }
    return wins / static_cast<double>(pairs);
}

double impression_mrr(const std::vector<double>& scores, const std::vector<int>& labels) {
    check_aligned(scores, labels);
    if (degenerate(labels)) return -1.0;
    auto order = rank_order(scores);
    double total = 0.0;
    int n_pos = 0;
    for (size_t r = 0; r < order.size(); ++r) {
        if (labels[order[r]]) {
            total += 1.0 / static_cast<double>(r + 1);
            ++n_pos;
        }
    }
    return total / static_cast<double>(n_pos);
}

double impression_ndcg(const std::vector<double>& scores, const std::vector<int>& labels, int k) {
    check_aligned(scores, labels);
    if (degenerate(labels)) return -1.0;
    auto order = rank_order(scores);
    int n_pos = 0;
    for (int l : labels) n_pos += l ? 1 : 0;
    double dcg = 0.0;
    for (size_t r = 0; r < order.size() && r < static_cast<size_t>(k); ++r) {
        if (labels[order[r]]) dcg += 1.0 / std::log2(static_cast<double>(r + 2));
    }
    double idcg = 0.0;
    for (int r = 0; r < std::min(n_pos, k); ++r) {
        idcg += 1.0 / std::log2(static_cast<double>(r + 2));
    }
    return dcg / idcg;
}

MetricReport evaluate_rankings(const std::vector<ImpressionScores>& impressions) {
    MetricReport report;
    double auc = 0.0, mrr = 0.0, ndcg5 = 0.0, ndcg10 = 0.0;
    for (const auto& imp : impressions) {
        double a = impression_auc(imp.scores, imp.labels);
        if (a < 0.0) {
            ++report.n_excluded;
            continue;
        }
        auc += a;
        mrr += impression_mrr(imp.scores, imp.labels);
        ndcg5 += impression_ndcg(imp.scores, imp.labels, 5);
        ndcg10 += impression_ndcg(imp.scores, imp.labels, 10);
        ++report.n_impressions;
    }
    if (report.n_impressions > 0) {
        double n = static_cast<double>(report.n_impressions);
        report.auc = auc / n;
        report.mrr = mrr / n;
        report.ndcg5 = ndcg5 / n;
        report.ndcg10 = ndcg10 / n;
    }
    return report;
}

double global_auc(const std::vector<ImpressionScores>& impressions) {
    std::vector<double> scores;
    std::vector<int> labels;
    for (const auto& imp : impressions) {
        check_aligned(imp.scores, imp.labels);
        scores.insert(scores.end(), imp.scores.begin(), imp.scores.end());
        labels.insert(labels.end(), imp.labels.begin(), imp.labels.end());
    }
    double a = impression_auc(scores, labels);
    return a < 0.0 ? 0.5 : a;
}

}  // namespace eenr
