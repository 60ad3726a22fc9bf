#include "eenr/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

namespace eenr {

Predictor::Predictor(ParamStore& store, const std::string& prefix, int in_dim, int hidden,
                     Rng& rng)
    : in_dim_(in_dim) {
    w1_ = store.param(prefix + ".w1", {in_dim, hidden}, rng);
    b1_ = store.param_const(prefix + ".b1", {hidden}, 0.0);
    w2_ = store.param(prefix + ".w2", {hidden}, rng);
    b2_ = store.param_const(prefix + ".b2", {}, 0.0);
}

Tensor Predictor::score(const Tensor& e_news, const Tensor& e_user) const {
    Tensor combined = mul(e_news, e_user);  // Hadamard
    Tensor hidden = tanh(add(matmul(combined, w1_), b1_));
    return add(dot(hidden, w2_), b2_);
}

std::vector<TrainInstance> sample_instances(const std::vector<ImpressionLog>& impressions,
                                            int neg_ratio, uint64_t seed, SampleStats* stats) {
    if (neg_ratio <= 0) throw std::invalid_argument("sample_instances: neg_ratio must be > 0");
    Rng rng(seed);
    SampleStats local;
    std::vector<TrainInstance> out;
    for (const auto& imp : impressions) {
        if (imp.clicked.empty()) continue;
        std::vector<std::string> pool;
        for (const auto& c : imp.candidates) {
            if (std::find(imp.clicked.begin(), imp.clicked.end(), c) == imp.clicked.end()) {
                pool.push_back(c);
            }
        }
        if (pool.empty()) {
            ++local.skipped_impressions;
            continue;
        }
        for (const auto& pos : imp.clicked) {
            TrainInstance inst;
            inst.user_id = imp.user_id;
            inst.positive = pos;
            inst.ts = imp.ts;
            if (static_cast<int>(pool.size()) >= neg_ratio) {
                std::vector<std::string> shuffled = pool;
                rng.shuffle(shuffled);
                inst.negatives.assign(shuffled.begin(), shuffled.begin() + neg_ratio);
            } else {
                for (int k = 0; k < neg_ratio; ++k) {
                    inst.negatives.push_back(
                        pool[static_cast<size_t>(rng.below(static_cast<int64_t>(pool.size())))]);
                }
            }
            out.push_back(std::move(inst));
        }
    }
    if (stats) *stats = local;
    return out;
}

Tensor group_loss(const std::vector<Tensor>& scores) {
    if (scores.empty()) throw std::invalid_argument("group_loss: no scores");
    Tensor stacked = concat(scores);
    return sub(logsumexp(stacked, 0), scores[0]);
}

HistoryIndex HistoryIndex::from_logs(const std::vector<ImpressionLog>& logs) {
    HistoryIndex index;
    for (const auto& log : logs) {
        auto& seq = index.clicks_[log.user_id];
        for (const auto& c : log.clicked) seq.emplace_back(log.ts, c);
    }
    for (auto& [user, seq] : index.clicks_) {
        std::stable_sort(seq.begin(), seq.end(),
                         [](const auto& a, const auto& b) { return a.first < b.first; });
    }
    return index;
}

std::vector<std::string> HistoryIndex::before(const std::string& user_id, int64_t ts,
                                              int max_len) const {
    auto it = clicks_.find(user_id);
    if (it == clicks_.end()) return {};
    const auto& seq = it->second;
    auto end = std::lower_bound(seq.begin(), seq.end(), ts,
                                [](const auto& entry, int64_t key) { return entry.first < key; });
    auto count = static_cast<size_t>(end - seq.begin());
    auto take = std::min(count, static_cast<size_t>(max_len));
    std::vector<std::string> out;
    out.reserve(take);
    for (auto i = count - take; i < count; ++i) out.push_back(seq[i].second);
    return out;
}

// ---- scorer -----------------------------------------------------------------

RecScorer::RecScorer(const EncoderModel& encoder, const Predictor& predictor,
                     const std::vector<NewsItem>& news, HistoryIndex history)
    : encoder_(encoder), predictor_(predictor), history_(std::move(history)) {
    NoGradGuard no_grad;
    std::vector<double> mean(static_cast<size_t>(encoder_.config().d_sem), 0.0);
    for (const auto& item : news) {
        auto parts = encoder_.encode_news(item);
        for (size_t k = 0; k < mean.size(); ++k) mean[k] += parts.sem.values()[k];
        cache_.emplace(item.news_id, std::move(parts));
    }
    if (!news.empty()) {
        for (auto& v : mean) v /= static_cast<double>(news.size());
    }
    mean_sem_ = Tensor::from(std::move(mean), {encoder_.config().d_sem});
}

Tensor RecScorer::user_vector(const std::string& user_id, int64_t ts) const {
    auto ids = history_.before(user_id, ts, encoder_.config().history_len);
    std::vector<Tensor> history_sem;
    for (const auto& id : ids) {
        auto it = cache_.find(id);
        if (it != cache_.end()) history_sem.push_back(it->second.sem);
    }
    if (history_sem.empty()) {
        // cold user: global mean semantic vector stands in for the history
        return encoder_.encode_user_semantic(user_id, mean_sem_);
    }
    return encoder_.encode_user(user_id, history_sem);
}

std::vector<double> RecScorer::score_impression(const ImpressionLog& impression) const {
    NoGradGuard no_grad;
    Tensor user = user_vector(impression.user_id, impression.ts);
    std::vector<double> out;
    out.reserve(impression.candidates.size());
    for (const auto& id : impression.candidates) {
        auto it = cache_.find(id);
        if (it == cache_.end()) {
            throw std::invalid_argument("RecScorer: unknown news id '" + id + "'");
        }
        out.push_back(predictor_.score(it->second.full, user).item());
    }
    return out;
}

std::vector<std::pair<std::string, double>> RecScorer::rank(
    const std::string& user_id, int64_t ts, const std::vector<std::string>& candidates) const {
    if (candidates.empty()) throw std::invalid_argument("rank: empty candidate list");
    ImpressionLog imp;
    imp.user_id = user_id;
    imp.ts = ts;
    imp.candidates = candidates;
    auto scores = score_impression(imp);

    // softmax over the impression group
    double m = *std::max_element(scores.begin(), scores.end());
    double z = 0.0;
    for (double s : scores) z += std::exp(s - m);
    std::vector<std::pair<std::string, double>> ranked;
    ranked.reserve(candidates.size());
    for (size_t i = 0; i < candidates.size(); ++i) {
        ranked.emplace_back(candidates[i], std::exp(scores[i] - m) / z);
    }
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    return ranked;
}

std::vector<ImpressionScores> RecScorer::score_all(
    const std::vector<ImpressionLog>& impressions) const {
    std::vector<ImpressionScores> out;
    out.reserve(impressions.size());
    for (const auto& imp : impressions) {
        ImpressionScores scores;
        scores.scores = score_impression(imp);
        scores.labels.assign(imp.candidates.size(), 0);
        for (size_t i = 0; i < imp.candidates.size(); ++i) {
            if (std::find(imp.clicked.begin(), imp.clicked.end(), imp.candidates[i]) !=
                imp.clicked.end()) {
                scores.labels[i] = 1;
            }
        }
        out.push_back(std::move(scores));
    }
    return out;
}

// ---- training -----------------------------------------------------------------

MetricReport evaluate_model(const EncoderModel& encoder, const Predictor& predictor,
                            const std::vector<NewsItem>& news,
                            const std::vector<ImpressionLog>& eval_logs,
                            const HistoryIndex& history) {
    RecScorer scorer(encoder, predictor, news, history);
    return evaluate_rankings(scorer.score_all(eval_logs));
}

std::vector<RecEpochStats> train_rec(EncoderModel& encoder, Predictor& predictor,
                                     ParamStore& store, const std::vector<NewsItem>& news,
                                     const std::vector<ImpressionLog>& train_logs,
                                     const std::vector<ImpressionLog>& val_logs,
                                     const RecTrainConfig& config, uint64_t seed) {
    if (train_logs.empty()) throw std::invalid_argument("train_rec: empty training set");
    Rng rng(seed);

    std::unordered_map<std::string, const NewsItem*> news_by_id;
    for (const auto& item : news) news_by_id[item.news_id] = &item;

    HistoryIndex train_history = HistoryIndex::from_logs(train_logs);
    std::vector<ImpressionLog> train_val = train_logs;
    train_val.insert(train_val.end(), val_logs.begin(), val_logs.end());
    HistoryIndex val_history = HistoryIndex::from_logs(train_val);

    std::vector<RecEpochStats> history;
    ParamStore best;
    double best_auc = -1.0;
    int stale = 0;

    {
        // pre-training baseline; also seeds the best-checkpoint tracking
        RecEpochStats stats;
        stats.epoch = -1;
        stats.val_auc = evaluate_model(encoder, predictor, news, val_logs, val_history).auc;
        best_auc = stats.val_auc;
        best = store.clone_values();
        history.push_back(stats);
    }

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        auto instances = sample_instances(train_logs, config.neg_ratio,
                                          rng.fork(static_cast<uint64_t>(epoch)).next_u64());
        RecEpochStats stats;
        stats.epoch = epoch;

        double loss_total = 0.0;
        int64_t loss_count = 0;
        size_t pos = 0;
        while (pos < instances.size()) {
            size_t end = std::min(instances.size(), pos + static_cast<size_t>(config.batch_size));
            std::unordered_map<std::string, NewsVecParts> cache;
            auto encode_cached = [&](const std::string& id) -> const NewsVecParts& {
                auto it = cache.find(id);
                if (it != cache.end()) return it->second;
                auto nit = news_by_id.find(id);
                if (nit == news_by_id.end()) {
                    throw std::invalid_argument("train_rec: impression references unknown news '" +
                                                id + "'");
                }
                return cache.emplace(id, encoder.encode_news(*nit->second)).first->second;
            };

            std::vector<Tensor> losses;
            for (size_t i = pos; i < end; ++i) {
                const auto& inst = instances[i];
                auto hist_ids =
                    train_history.before(inst.user_id, inst.ts, encoder.config().history_len);
                if (hist_ids.empty()) {
                    ++stats.skipped_instances;
                    continue;
                }
                std::vector<Tensor> hist_sem;
                hist_sem.reserve(hist_ids.size());
                for (const auto& id : hist_ids) hist_sem.push_back(encode_cached(id).sem);
                Tensor user = encoder.encode_user(inst.user_id, hist_sem);

                std::vector<Tensor> scores;
                scores.reserve(1 + inst.negatives.size());
                scores.push_back(predictor.score(encode_cached(inst.positive).full, user));
                for (const auto& neg : inst.negatives) {
                    scores.push_back(predictor.score(encode_cached(neg).full, user));
                }
                losses.push_back(group_loss(scores));
            }
            if (!losses.empty()) {
                Tensor batch_loss = mean(concat(losses));
                loss_total += batch_loss.item() * static_cast<double>(losses.size());
                loss_count += static_cast<int64_t>(losses.size());
                backward(batch_loss);
                store.step(config.learning_rate);
            }
            pos = end;
        }
        stats.train_loss = loss_count > 0 ? loss_total / static_cast<double>(loss_count) : 0.0;

        MetricReport val = evaluate_model(encoder, predictor, news, val_logs, val_history);
        stats.val_auc = val.auc;
        history.push_back(stats);

        if (val.auc > best_auc) {
            best_auc = val.auc;
            best = store.clone_values();
            stale = 0;
        } else if (++stale >= config.patience) {
            break;
        }
    }
    if (best.size() > 0) store.load_values_from(best);
    return history;
}

}  // namespace eenr
