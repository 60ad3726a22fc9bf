#include "eenr/encoders.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace eenr {

std::vector<double> category_projection(int word_dim, int category_dim) {
    Rng rng(0x9e3779b97f4a7c15ULL);  // fixed: the projection is part of the format
    std::vector<double> proj(static_cast<size_t>(word_dim) * category_dim);
    double scale = 1.0 / std::sqrt(static_cast<double>(word_dim));
    for (auto& v : proj) v = scale * rng.normal();
    return proj;
}

EncoderModel::EncoderModel(const EncoderConfig& config, const ChannelSwitches& switches,
                           const std::vector<NewsItem>& news,
                           const std::map<std::string, std::vector<double>>& etype_embeddings,
                           const std::vector<std::string>& user_ids,
                           const std::map<std::string, UserHistorySummary>& train_histories,
                           ParamStore& store, Rng& rng)
    : config_(config), switches_(switches) {
    // vocabulary: titles, then argument tokens, then role tokens, first-seen order
    auto add_token = [&](const std::string& token) {
        if (!token.empty()) vocab_.try_emplace(token, static_cast<int>(vocab_.size()) + 1);
    };
    for (const auto& item : news) {
        for (const auto& tok : item.title) add_token(tok);
        for (const auto& ev : item.events) {
            for (const auto& arg : ev.arguments) {
                for (const auto& tok : tokenize(arg.argument)) add_token(tok);
                for (const auto& tok : tokenize(arg.role)) add_token(tok);
            }
        }
        if (!item.category.empty() && !category_index_.count(item.category)) {
            category_index_[item.category] = static_cast<int>(categories_.size());
            categories_.push_back(item.category);
        }
    }

    // event-type universe: embedding table keys first, then extracted extras
    for (const auto& [name, vec] : etype_embeddings) {
        if (!etype_index_.count(name)) {
            etype_index_[name] = static_cast<int>(etypes_.size());
            etypes_.push_back(name);
        }
    }
    for (const auto& item : news) {
        for (const auto& ev : item.events) {
            if (!etype_index_.count(ev.event_type)) {
                etype_index_[ev.event_type] = static_cast<int>(etypes_.size());
                etypes_.push_back(ev.event_type);
            }
        }
    }

    for (const auto& uid : user_ids) {
        if (!user_index_.count(uid)) {
            user_index_[uid] = static_cast<int>(users_.size());
            users_.push_back(uid);
        }
    }

    const int d = config_.d_sem;
    word_emb_ = store.param("enc.word_emb", {vocab_size(), config_.word_dim}, rng);
    gru_fwd_ = make_gru(store, "enc.gru_fwd", config_.word_dim, d, rng);
    gru_bwd_ = make_gru(store, "enc.gru_bwd", config_.word_dim, d, rng);
    alpha_mix_ = store.param_const("enc.alpha_mix", {}, 0.0);  // sigmoid(0) = 0.5
    att_w_ = store.param("enc.att.w", {d, d}, rng);
    att_q_ = store.param("enc.att.q", {d}, rng);
    att_b_ = store.param_const("enc.att.b", {d}, 0.0);

    // event-type table: walk-trained vectors where available, cold types random
    {
        int n = static_cast<int>(etypes_.size());
        std::vector<double> vals(static_cast<size_t>(std::max(n, 1)) * config_.etype_dim, 0.0);
        double cold = 0.5 / static_cast<double>(config_.etype_dim);
        for (int t = 0; t < n; ++t) {
            auto it = etype_embeddings.find(etypes_[static_cast<size_t>(t)]);
            double* dst = vals.data() + static_cast<size_t>(t) * config_.etype_dim;
            if (it != etype_embeddings.end()) {
                if (static_cast<int>(it->second.size()) != config_.etype_dim) {
                    throw std::invalid_argument(
                        "EncoderModel: event-type embedding dim " +
                        std::to_string(it->second.size()) + " != configured " +
                        std::to_string(config_.etype_dim));
                }
                std::copy(it->second.begin(), it->second.end(), dst);
            } else {
                for (int k = 0; k < config_.etype_dim; ++k) dst[k] = rng.uniform(-cold, cold);
            }
        }
        etype_emb_ = store.param_values("enc.etype_emb", {std::max(n, 1), config_.etype_dim},
                                        std::move(vals));
    }

    // category table: semantic initialization through the fixed projection
    {
        int n = static_cast<int>(categories_.size());
        std::vector<double> vals(static_cast<size_t>(n + 1) * config_.category_dim, 0.0);
        auto proj = category_projection(config_.word_dim, config_.category_dim);
        for (int c = 0; c < n; ++c) {
            auto tokens = tokenize(categories_[static_cast<size_t>(c)]);
            std::vector<double> mean(static_cast<size_t>(config_.word_dim), 0.0);
            int hits = 0;
            for (const auto& tok : tokens) {
                int id = vocab_id(tok);
                if (id < 0) continue;
                const double* row =
                    word_emb_.values().data() + static_cast<size_t>(id) * config_.word_dim;
                for (int k = 0; k < config_.word_dim; ++k) mean[static_cast<size_t>(k)] += row[k];
                ++hits;
            }
            double* dst = vals.data() + static_cast<size_t>(c) * config_.category_dim;
            if (hits > 0) {
                for (auto& v : mean) v /= static_cast<double>(hits);
                for (int j = 0; j < config_.category_dim; ++j) {
                    double s = 0.0;
                    for (int k = 0; k < config_.word_dim; ++k) {
                        s += mean[static_cast<size_t>(k)] *
                             proj[static_cast<size_t>(k) * config_.category_dim + j];
                    }
                    dst[j] = s;
                }
            } else {
                double bound = 0.5 / static_cast<double>(config_.category_dim);
                for (int j = 0; j < config_.category_dim; ++j) dst[j] = rng.uniform(-bound, bound);
            }
        }
        category_emb_ = store.param_values("enc.category_emb", {n + 1, config_.category_dim},
                                           std::move(vals));
    }

    // user distribution matrices, initialized by averaging history embeddings
    {
        int n = static_cast<int>(users_.size());
        std::vector<double> etd(static_cast<size_t>(n + 1) * config_.etype_dim, 0.0);
        std::vector<double> ucd(static_cast<size_t>(n + 1) * config_.category_dim, 0.0);
        for (int u = 0; u < n; ++u) {
            auto it = train_histories.find(users_[static_cast<size_t>(u)]);
            if (it == train_histories.end()) continue;
            const auto& hist = it->second;
            double* et_row = etd.data() + static_cast<size_t>(u) * config_.etype_dim;
            int et_hits = 0;
            for (const auto& type : hist.event_types) {
                int id = etype_id(type);
                if (id < 0) continue;
                const double* src =
                    etype_emb_.values().data() + static_cast<size_t>(id) * config_.etype_dim;
                for (int k = 0; k < config_.etype_dim; ++k) et_row[k] += src[k];
                ++et_hits;
            }
            if (et_hits > 0) {
                for (int k = 0; k < config_.etype_dim; ++k)
                    et_row[k] /= static_cast<double>(et_hits);
            }
            double* cd_row = ucd.data() + static_cast<size_t>(u) * config_.category_dim;
            int cd_hits = 0;
            for (const auto& cat : hist.categories) {
                auto cit = category_index_.find(cat);
                if (cit == category_index_.end()) continue;
                const double* src = category_emb_.values().data() +
                                    static_cast<size_t>(cit->second) * config_.category_dim;
                for (int k = 0; k < config_.category_dim; ++k) cd_row[k] += src[k];
                ++cd_hits;
            }
            if (cd_hits > 0) {
                for (int k = 0; k < config_.category_dim; ++k)
                    cd_row[k] /= static_cast<double>(cd_hits);
            }
        }
        w_uetd_ = store.param_values("enc.w_uetd", {n + 1, config_.etype_dim}, std::move(etd));
        w_ucd_ = store.param_values("enc.w_ucd", {n + 1, config_.category_dim}, std::move(ucd));
    }
}

int EncoderModel::vocab_id(const std::string& token) const {
    auto it = vocab_.find(token);
    return it == vocab_.end() ? -1 : it->second;
}

int EncoderModel::category_id(const std::string& category) const {
    auto it = category_index_.find(category);
    return it == category_index_.end() ? static_cast<int>(categories_.size()) : it->second;
}

int EncoderModel::etype_id(const std::string& event_type) const {
    auto it = etype_index_.find(event_type);
    return it == etype_index_.end() ? -1 : it->second;
}

int EncoderModel::user_index(const std::string& user_id) const {
    auto it = user_index_.find(user_id);
    return it == user_index_.end() ? static_cast<int>(users_.size()) : it->second;
}

std::vector<int> EncoderModel::input_sequence(const NewsItem& news) const {
    std::vector<int> ids;
    auto push = [&](const std::string& token) {
        int id = vocab_id(token);
        if (id >= 0) ids.push_back(id);
    };
    for (const auto& tok : news.title) push(tok);
    if (switches_.roles_args) {
        for (const auto& ev : news.events) {
            for (const auto& arg : ev.arguments) {
                for (const auto& tok : tokenize(arg.argument)) push(tok);
            }
        }
        for (const auto& ev : news.events) {
            for (const auto& arg : ev.arguments) {
                for (const auto& tok : tokenize(arg.role)) push(tok);
            }
        }
    }
    if (static_cast<int>(ids.size()) > config_.max_seq_len) {
        ids.resize(static_cast<size_t>(config_.max_seq_len));
    }
    if (ids.empty()) ids.push_back(0);  // reserved empty token
    return ids;
}

Tensor EncoderModel::news_semantic(const std::vector<int>& token_ids) const {
    if (token_ids.empty()) throw std::invalid_argument("news_semantic: empty token sequence");
    Tensor embedded = rows(word_emb_, token_ids);
    auto fwd = gru_run(gru_fwd_, embedded, false);
    auto bwd = gru_run(gru_bwd_, embedded, true);
    Tensor mix = sigmoid(alpha_mix_);
    return add(mul(mix, fwd.back()), mul(affine(mix, -1.0, 1.0), bwd.front()));
}

NewsVecParts EncoderModel::encode_news(const NewsItem& news) const {
    NewsVecParts parts;
    parts.sem = news_semantic(input_sequence(news));

    if (switches_.etype) {
        std::vector<int> type_ids;
        for (const auto& ev : news.events) {
            int id = etype_id(ev.event_type);
            if (id >= 0 && std::find(type_ids.begin(), type_ids.end(), id) == type_ids.end()) {
                type_ids.push_back(id);
            }
        }
        if (type_ids.empty()) {
            parts.etype = Tensor::zeros({config_.etype_dim});
        } else {
            Tensor gathered = rows(etype_emb_, type_ids);
            Tensor ones = Tensor::full({static_cast<int>(type_ids.size())}, 1.0);
            parts.etype =
                affine(matmul(ones, gathered), 1.0 / static_cast<double>(type_ids.size()), 0.0);
        }
    } else {
        parts.etype = Tensor::zeros({config_.etype_dim});
    }

    if (switches_.category) {
        parts.category = row(category_emb_, category_id(news.category));
    } else {
        parts.category = Tensor::zeros({config_.category_dim});
    }

    parts.full = concat({parts.sem, parts.etype, parts.category});
    return parts;
}

std::pair<Tensor, Tensor> EncoderModel::user_attention(
    const std::vector<Tensor>& history_sem) const {
    if (history_sem.empty()) {
        throw std::invalid_argument("user_attention: empty browsing history");
    }
    std::vector<Tensor> rows_vec = history_sem;
    if (static_cast<int>(rows_vec.size()) > config_.history_len) {
        rows_vec.assign(history_sem.end() - config_.history_len, history_sem.end());
    }
    Tensor h = stack_rows(rows_vec);
    Tensor scores = matmul(tanh(add(matmul(h, att_w_), att_b_)), att_q_);
    Tensor weights = softmax(scores, 0);
    Tensor pooled = matmul(weights, h);
    return {weights, pooled};
}

Tensor EncoderModel::encode_user_semantic(const std::string& user_id,
                                          const Tensor& e_usem) const {
    int uid = user_index(user_id);
    Tensor etd = switches_.etype ? row(w_uetd_, uid) : Tensor::zeros({config_.etype_dim});
    Tensor ucd = switches_.category ? row(w_ucd_, uid) : Tensor::zeros({config_.category_dim});
    return concat({e_usem, etd, ucd});
}

Tensor EncoderModel::encode_user(const std::string& user_id,
                                 const std::vector<Tensor>& history_sem) const {
    auto [weights, pooled] = user_attention(history_sem);
    return encode_user_semantic(user_id, pooled);
}

}  // namespace eenr
