#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "eenr/corpus.hpp"

namespace eenr {

struct SynthConfig {
    int n_users = 200;
    int n_news = 500;
    int n_impressions = 5000;
    int n_event_types = 12;  // capped by the template bank
    int n_categories = 8;
    double sharpness = 4.0;  // 0 = clicks independent of content
    int candidates_per_impression = 5;
    int ee_sentences = 500;
    double title_category_prob = 0.35;  // chance the title names the category
    double extra_same_type_prob = 0.6;  // chance an extra body sentence repeats the lead type
    double w_etype = 2.2;
    double w_category = 1.2;
    double click_bias = -1.0;
    int64_t t0 = 1600000000;  // first impression timestamp (epoch seconds)
};

/// Everything the generator planted, sufficient to rank optimally.
struct GroundTruth {
    std::vector<std::string> event_types;
    std::vector<std::string> categories;
    // user_id -> distribution over event types / categories
    std::map<std::string, std::vector<double>> etype_weights;
    std::map<std::string, std::vector<double>> category_weights;
    // news_id -> (lead event type index, category index)
    std::map<std::string, std::pair<int, int>> news_latents;
    double w_etype = 0, w_category = 0, click_bias = 0, sharpness = 0;

    /// Monotone in the planted click probability.
    double oracle_score(const std::string& user_id, const std::string& news_id) const;
};

struct SynthResult {
    std::vector<AnnotatedSentence> ee_corpus;
    std::vector<NewsItem> news;
    std::vector<ImpressionLog> impressions;
    GroundTruth truth;
    EventSchema schema;
};

/// Generates the annotated EE corpus, the news pool, the impression logs and
/// the planted latents behind them. Deterministic in (config, seed).
SynthResult generate_synthetic(const SynthConfig& config, uint64_t seed);

/// Standalone template-sentence sampler (same bank as generate_synthetic),
/// e.g. for held-out EE evaluation sets.
std::vector<AnnotatedSentence> synth_ee_sentences(int n_sentences, int n_event_types,
                                                  uint64_t seed);

/// {user_id -> {etype_weights, category_weights}}, weights keyed by name.
void save_ground_truth(const std::string& path, const GroundTruth& truth);
GroundTruth load_ground_truth(const std::string& path);

}  // namespace eenr
