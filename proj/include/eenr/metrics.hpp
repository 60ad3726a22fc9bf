#pragma once

#include <string>
#include <vector>

namespace eenr {

/// Scores and binary click labels for one impression, candidate-aligned.
struct ImpressionScores {
    std::vector<double> scores;
    std::vector<int> labels;
};

struct MetricReport {
    double auc = 0.0;
    double mrr = 0.0;
    double ndcg5 = 0.0;
    double ndcg10 = 0.0;
    int n_impressions = 0;  // impressions that contributed
    int n_excluded = 0;     // impressions lacking a positive or a negative
};

/// Pairwise AUC of one impression: P(score_pos > score_neg) + 0.5 P(tie).
/// Returns -1 when the impression lacks one of the classes.
double impression_auc(const std::vector<double>& scores, const std::vector<int>& labels);

/// Mean over clicked items of 1/rank; ranking is by score descending, ties
/// kept in candidate order. Returns -1 on degenerate impressions.
double impression_mrr(const std::vector<double>& scores, const std::vector<int>& labels);

/// Binary-relevance NDCG at cutoff k. Returns -1 on degenerate impressions.
double impression_ndcg(const std::vector<double>& scores, const std::vector<int>& labels, int k);

/// Macro average over impressions. Impressions without both a positive and a
/// negative are excluded and counted.
MetricReport evaluate_rankings(const std::vector<ImpressionScores>& impressions);

/// Single AUC over the pooled (score, label) pairs of every impression.
double global_auc(const std::vector<ImpressionScores>& impressions);

}  // namespace eenr
