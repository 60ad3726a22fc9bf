#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "eenr/corpus.hpp"
#include "eenr/encoders.hpp"
#include "eenr/metrics.hpp"
#include "eenr/param_store.hpp"

namespace eenr {

/// Dense scoring head over the Hadamard product of news and user vectors.
class Predictor {
public:
    Predictor(ParamStore& store, const std::string& prefix, int in_dim, int hidden, Rng& rng);

    Tensor score(const Tensor& e_news, const Tensor& e_user) const;
    int in_dim() const { return in_dim_; }

private:
    Tensor w1_, b1_, w2_, b2_;
    int in_dim_ = 0;
};

struct TrainInstance {
    std::string user_id;
    std::string positive;
    std::vector<std::string> negatives;
    int64_t ts = 0;
};

struct SampleStats {
    int skipped_impressions = 0;  // impressions with no non-clicked candidate
};

/// One instance per (impression, clicked item). Negatives come uniformly
/// without replacement from the impression's non-clicked candidates, falling
/// back to sampling with replacement when fewer than neg_ratio exist.
std::vector<TrainInstance> sample_instances(const std::vector<ImpressionLog>& impressions,
                                            int neg_ratio, uint64_t seed,
                                            SampleStats* stats = nullptr);

/// -log softmax(scores)[0]; the positive score comes first.
Tensor group_loss(const std::vector<Tensor>& scores);

/// Per-user click sequences ordered by impression timestamp.
class HistoryIndex {
public:
    static HistoryIndex from_logs(const std::vector<ImpressionLog>& logs);
    /// Most recent clicks strictly before `ts`, oldest first, at most max_len.
    std::vector<std::string> before(const std::string& user_id, int64_t ts, int max_len) const;

private:
    std::map<std::string, std::vector<std::pair<int64_t, std::string>>> clicks_;
};

struct RecTrainConfig {
    int epochs = 8;
    int batch_size = 128;
    int neg_ratio = 4;
    double learning_rate = 1e-3;
    int patience = 3;  // early stopping on validation AUC
    int predictor_hidden = 64;
};

struct RecEpochStats {
    int epoch = 0;
    double train_loss = 0.0;
    double val_auc = 0.0;
    int skipped_instances = 0;  // instances whose user had no prior clicks
};

/// Frozen-parameter scorer. News encodings are cached once; user vectors are
/// rebuilt per impression from the history index. Users with no prior clicks
/// fall back to the mean semantic vector over the news pool.
class RecScorer {
public:
    RecScorer(const EncoderModel& encoder, const Predictor& predictor,
              const std::vector<NewsItem>& news, HistoryIndex history);

    std::vector<double> score_impression(const ImpressionLog& impression) const;
    /// Softmax-normalized ranking, descending; ties broken by news id.
    std::vector<std::pair<std::string, double>> rank(const std::string& user_id, int64_t ts,
                                                     const std::vector<std::string>& candidates)
        const;
    std::vector<ImpressionScores> score_all(const std::vector<ImpressionLog>& impressions) const;

private:
    Tensor user_vector(const std::string& user_id, int64_t ts) const;

    const EncoderModel& encoder_;
    const Predictor& predictor_;
    HistoryIndex history_;
    std::map<std::string, NewsVecParts> cache_;
    Tensor mean_sem_;
};

/// End-to-end training of encoders + predictor with impression-grouped
/// softmax loss. Keeps the best-validation-AUC parameters.
std::vector<RecEpochStats> train_rec(EncoderModel& encoder, Predictor& predictor,
                                     ParamStore& store, const std::vector<NewsItem>& news,
                                     const std::vector<ImpressionLog>& train_logs,
                                     const std::vector<ImpressionLog>& val_logs,
                                     const RecTrainConfig& config, uint64_t seed);

MetricReport evaluate_model(const EncoderModel& encoder, const Predictor& predictor,
                            const std::vector<NewsItem>& news,
                            const std::vector<ImpressionLog>& eval_logs,
                            const HistoryIndex& history);

}  // namespace eenr
