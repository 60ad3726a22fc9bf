#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "eenr/corpus.hpp"
#include "eenr/encoders.hpp"
#include "eenr/metrics.hpp"
#include "eenr/predictor.hpp"
#include "eenr/synthetic.hpp"
#include "eenr/tagger.hpp"

namespace eenr {

struct GraphConfig {
    double p = 1.0;
    double q = 1.0;
    int walk_len = 10;
    int walks_per_node = 20;
    int window = 3;
    int epochs = 5;
    int n_negatives = 5;
    int dim = 50;
    int cooccur_window = 1;
};

struct EvalConfig {
    std::string auc_mode = "impression";  // or "global"
    int seeds = 3;
    std::vector<double> fractions = {0.2, 0.4, 0.6, 0.8, 1.0};
};

struct Config {
    SynthConfig data;
    TaggerConfig ee;
    GraphConfig graph;
    EncoderConfig encoder;
    RecTrainConfig trainer;
    EvalConfig eval;
    SplitSpec split;
    uint64_t seed = 1;

    static Config from_json(const nlohmann::json& j);
    /// Reads the file (all sections optional) and applies the EENR_SEED
    /// environment override.
    static Config from_file(const std::string& path);
    nlohmann::json to_json() const;
};

struct VariantSpec {
    std::string name;
    ChannelSwitches switches;
};

const std::vector<VariantSpec>& all_variants();
VariantSpec variant_by_name(const std::string& name);

struct VariantResult {
    std::string variant;
    double fraction = 1.0;
    uint64_t seed = 0;
    MetricReport report;
    std::vector<RecEpochStats> history;
};

/// Trains and evaluates one variant on already-extracted news + logs:
/// time split, event-type graph from the training split, walk embeddings,
/// encoder/predictor training, test-split metrics.
VariantResult run_variant(const VariantSpec& variant, const std::vector<NewsItem>& news,
                          const std::vector<ImpressionLog>& logs, const Config& config,
                          uint64_t seed);

std::vector<VariantResult> run_ablation(const std::vector<NewsItem>& news,
                                        const std::vector<ImpressionLog>& logs,
                                        const Config& config,
                                        const std::vector<std::string>& variant_names,
                                        const std::vector<uint64_t>& seeds);

/// Per (fraction, variant, seed) cell; every variant within one (fraction,
/// seed) cell sees the same subsampled logs.
std::vector<VariantResult> run_fraction_study(const std::vector<NewsItem>& news,
                                              const std::vector<ImpressionLog>& logs,
                                              const Config& config,
                                              const std::vector<double>& fractions,
                                              const std::vector<std::string>& variant_names,
                                              const std::vector<uint64_t>& seeds);

struct CellSummary {
    std::string variant;
    double fraction = 1.0;
    int n_seeds = 0;
    MetricReport mean;
    MetricReport stdev;
};

std::vector<CellSummary> summarize(const std::vector<VariantResult>& results);

void write_results_csv(const std::string& path, const std::vector<VariantResult>& results);
void write_summary_csv(const std::string& path, const std::vector<CellSummary>& summaries);
nlohmann::json results_json(const std::vector<VariantResult>& results);
nlohmann::json summary_json(const std::vector<CellSummary>& summaries);

/// Event-type and category click sequences per user (training split),
/// time-ordered; feeds graph construction and the user matrix initializers.
struct TrainHistories {
    std::vector<std::vector<std::string>> etype_sequences;
    std::map<std::string, UserHistorySummary> summaries;
    std::vector<std::string> user_ids;  // first-seen over the full log set
};

TrainHistories collect_histories(const std::vector<NewsItem>& news,
                                 const std::vector<ImpressionLog>& train_logs,
                                 const std::vector<ImpressionLog>& all_logs);

}  // namespace eenr
