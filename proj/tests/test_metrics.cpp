#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "eenr/metrics.hpp"
#include "eenr/rng.hpp"

using namespace eenr;

namespace {

// independent O(n^2) oracles
double auc_oracle(const std::vector<double>& s, const std::vector<int>& l) {
    double wins = 0;
    int64_t pairs = 0;
    for (size_t i = 0; i < s.size(); ++i) {
        for (size_t j = 0; j < s.size(); ++j) {
            if (l[i] == 1 && l[j] == 0) {
                ++pairs;
                wins += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
            }
        }
    }
    return wins / static_cast<double>(pairs);
}

std::vector<size_t> order_desc(const std::vector<double>& s) {
    std::vector<size_t> idx(s.size());
    for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::stable_sort(idx.begin(), idx.end(), [&](size_t a, size_t b) { return s[a] > s[b]; });
    return idx;
}

double mrr_oracle(const std::vector<double>& s, const std::vector<int>& l) {
    auto idx = order_desc(s);
    double total = 0;
    int pos = 0;
    for (size_t r = 0; r < idx.size(); ++r) {
        if (l[idx[r]]) {
            total += 1.0 / static_cast<double>(r + 1);
            ++pos;
        }
    }
    return total / pos;
}

double ndcg_oracle(const std::vector<double>& s, const std::vector<int>& l, int k) {
    auto idx = order_desc(s);
    double dcg = 0;
    for (size_t r = 0; r < idx.size() && r < static_cast<size_t>(k); ++r) {
        if (l[idx[r]]) dcg += 1.0 / std::log2(static_cast<double>(r + 2));
    }
    int pos = 0;
    for (int x : l) pos += x;
    double idcg = 0;
    for (int r = 0; r < std::min(pos, k); ++r) idcg += 1.0 / std::log2(static_cast<double>(r + 2));
    return dcg / idcg;
}

ImpressionScores random_impression(Rng& rng, int max_candidates = 8) {
    int n = 2 + static_cast<int>(rng.below(max_candidates - 1));
    ImpressionScores imp;
    for (int i = 0; i < n; ++i) {
        // coarse scores so ties actually occur
        imp.scores.push_back(static_cast<double>(rng.below(6)) / 2.0);
        imp.labels.push_back(rng.uniform() < 0.4 ? 1 : 0);
    }
    // force both classes
    imp.labels[0] = 1;
    imp.labels[static_cast<size_t>(n - 1)] = 0;
    return imp;
}

}  // namespace

TEST_CASE("auc hand examples") {
    CHECK(impression_auc({0.9, 0.1}, {1, 0}) == 1.0);
    CHECK(impression_auc({0.5, 0.5}, {1, 0}) == 0.5);
    CHECK(impression_auc({0.1, 0.9}, {1, 0}) == 0.0);
}

TEST_CASE("mrr hand examples") {
    CHECK(impression_mrr({0.9, 0.2, 0.1}, {1, 0, 0}) == 1.0);
    // single positive ranked 4th of 5
    CHECK(impression_mrr({5, 4, 3, 2, 1}, {0, 0, 0, 1, 0}) == doctest::Approx(0.25));
    // positives at ranks 1 and 3 -> (1 + 1/3) / 2
    CHECK(impression_mrr({5, 4, 3, 2, 1}, {1, 0, 1, 0, 0}) == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("ndcg hand examples") {
    CHECK(impression_ndcg({5, 4, 3}, {1, 1, 0}, 5) == doctest::Approx(1.0));
    // one positive at rank 2, k = 5 -> 1/log2(3)
    CHECK(impression_ndcg({5, 4, 3}, {0, 1, 0}, 5) ==
          doctest::Approx(1.0 / std::log2(3.0)).epsilon(1e-12));
    CHECK(impression_ndcg({5, 4, 3}, {0, 1, 0}, 5) == doctest::Approx(0.6309).epsilon(1e-4));
    // positive below the cutoff
    CHECK(impression_ndcg({5, 4, 3, 2, 1, 0}, {0, 0, 0, 0, 0, 1}, 5) == 0.0);
}

TEST_CASE("metrics match brute-force oracles on 1000 random impressions") {
    Rng rng(1234);
    for (int trial = 0; trial < 1000; ++trial) {
        auto imp = random_impression(rng);
        CHECK(std::fabs(impression_auc(imp.scores, imp.labels) -
                        auc_oracle(imp.scores, imp.labels)) <= 1e-12);
        CHECK(std::fabs(impression_mrr(imp.scores, imp.labels) -
                        mrr_oracle(imp.scores, imp.labels)) <= 1e-12);
        CHECK(std::fabs(impression_ndcg(imp.scores, imp.labels, 5) -
                        ndcg_oracle(imp.scores, imp.labels, 5)) <= 1e-12);
        CHECK(std::fabs(impression_ndcg(imp.scores, imp.labels, 10) -
                        ndcg_oracle(imp.scores, imp.labels, 10)) <= 1e-12);
    }
}

TEST_CASE("all metrics live in the unit interval") {
    Rng rng(99);
    for (int trial = 0; trial < 200; ++trial) {
        auto imp = random_impression(rng);
        for (double m : {impression_auc(imp.scores, imp.labels),
                         impression_mrr(imp.scores, imp.labels),
                         impression_ndcg(imp.scores, imp.labels, 5),
                         impression_ndcg(imp.scores, imp.labels, 10)}) {
            CHECK(m >= 0.0);
            CHECK(m <= 1.0);
        }
    }
}

TEST_CASE("reversing a tie-free ranking flips the auc") {
    Rng rng(7);
    for (int trial = 0; trial < 100; ++trial) {
        int n = 3 + static_cast<int>(rng.below(5));
        std::vector<double> scores;
        std::vector<int> labels;
        for (int i = 0; i < n; ++i) {
            scores.push_back(rng.uniform());  // distinct with probability 1
            labels.push_back(rng.uniform() < 0.5 ? 1 : 0);
        }
        labels[0] = 1;
        labels[static_cast<size_t>(n - 1)] = 0;
        std::vector<double> reversed;
        for (double s : scores) reversed.push_back(-s);
        CHECK(impression_auc(scores, labels) ==
              doctest::Approx(1.0 - impression_auc(reversed, labels)).epsilon(1e-12));
    }
}

TEST_CASE("ranking is invariant under strictly monotone score transforms") {
    Rng rng(8);
    for (int trial = 0; trial < 100; ++trial) {
        int n = 3 + static_cast<int>(rng.below(5));
        std::vector<double> scores;
        std::vector<int> labels;
        for (int i = 0; i < n; ++i) {
            scores.push_back(rng.uniform(-3, 3));
            labels.push_back(static_cast<int>(rng.below(2)));
        }
        labels[0] = 1;
        labels[static_cast<size_t>(n - 1)] = 0;
        std::vector<double> transformed;
        for (double s : scores) transformed.push_back(std::exp(0.5 * s) + 7.0);
        CHECK(impression_auc(scores, labels) == impression_auc(transformed, labels));
        CHECK(impression_mrr(scores, labels) == impression_mrr(transformed, labels));
        CHECK(impression_ndcg(scores, labels, 5) == impression_ndcg(transformed, labels, 5));
    }
}

TEST_CASE("ndcg hits 1 exactly when all positives rank first") {
    std::vector<double> scores = {9, 8, 7, 1, 0};
    std::vector<int> labels = {1, 1, 1, 0, 0};
    CHECK(impression_ndcg(scores, labels, 5) == 1.0);
    std::vector<int> swapped = {1, 1, 0, 1, 0};
    CHECK(impression_ndcg(scores, swapped, 5) < 1.0);
}

TEST_CASE("mrr hits 1 exactly when the positive ranks first") {
    // with several positives the clicked-item mean stays below 1 even for a
    // perfect ranking, so the iff statement applies per positive
    std::vector<double> scores = {9, 8, 7};
    CHECK(impression_mrr(scores, {1, 0, 0}) == 1.0);
    CHECK(impression_mrr(scores, {0, 1, 0}) < 1.0);
    CHECK(impression_mrr(scores, {1, 1, 0}) < 1.0);
}

TEST_CASE("degenerate impressions are excluded and counted") {
    std::vector<ImpressionScores> imps;
    imps.push_back({{1.0, 0.5}, {1, 0}});
    imps.push_back({{1.0, 0.5}, {1, 1}});  // no negative
    imps.push_back({{1.0, 0.5}, {0, 0}});  // no positive
    MetricReport report = evaluate_rankings(imps);
    CHECK(report.n_impressions == 1);
    CHECK(report.n_excluded == 2);
    CHECK(report.auc == 1.0);
}

TEST_CASE("global auc pools pairs across impressions") {
    std::vector<ImpressionScores> imps;
    imps.push_back({{0.9}, {1}});
    imps.push_back({{0.1}, {0}});
    CHECK(global_auc(imps) == 1.0);
}
