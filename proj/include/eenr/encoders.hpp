#pragma once

#include <map>
#include <string>
#include <vector>

#include "eenr/corpus.hpp"
#include "eenr/nn.hpp"
#include "eenr/param_store.hpp"

namespace eenr {

struct EncoderConfig {
    int word_dim = 300;
    int d_sem = 128;  // recurrent hidden size per direction
    int etype_dim = 50;
    int category_dim = 50;
    int history_len = 15;
    int max_seq_len = 64;
};

/// Information channels a variant may switch off. A disabled channel is
/// replaced by a zero vector of the same width on both the news and the user
/// side, so representation shapes never change across variants.
struct ChannelSwitches {
    bool roles_args = true;
    bool etype = true;
    bool category = true;
};

struct NewsVecParts {
    Tensor sem;       // (d_sem)
    Tensor etype;     // (etype_dim)
    Tensor category;  // (category_dim)
    Tensor full;      // concat of the three, in that order
};

/// What each user clicked during training, used to initialize the user
/// distribution matrices.
struct UserHistorySummary {
    std::vector<std::string> event_types;
    std::vector<std::string> categories;
};

/// Fixed seeded random projection used for the semantic initialization of
/// category embeddings (word_dim -> category_dim).
std::vector<double> category_projection(int word_dim, int category_dim);

/// News and user representation parameters plus the encoding passes.
class EncoderModel {
public:
    EncoderModel(const EncoderConfig& config, const ChannelSwitches& switches,
                 const std::vector<NewsItem>& news,
                 const std::map<std::string, std::vector<double>>& etype_embeddings,
                 const std::vector<std::string>& user_ids,
                 const std::map<std::string, UserHistorySummary>& train_histories,
                 ParamStore& store, Rng& rng);

    const EncoderConfig& config() const { return config_; }
    const ChannelSwitches& switches() const { return switches_; }
    int news_dim() const {
        return config_.d_sem + config_.etype_dim + config_.category_dim;
    }

    /// Token ids of [title; argument; role], unknown words dropped, truncated
    /// to max_seq_len; a drained sequence maps to the reserved empty token.
    std::vector<int> input_sequence(const NewsItem& news) const;

    Tensor news_semantic(const std::vector<int>& token_ids) const;
    NewsVecParts encode_news(const NewsItem& news) const;

    /// a_i = q^T tanh(W e_i + b); weights = softmax(a); e_usem = sum w_i e_i.
    std::pair<Tensor, Tensor> user_attention(const std::vector<Tensor>& history_sem) const;

    /// concat [e_usem, W_uetd[user], W_ucd[user]]; unknown users hit the
    /// reserved zero row. History must be non-empty (callers handle cold
    /// users with a fallback semantic vector).
    Tensor encode_user(const std::string& user_id, const std::vector<Tensor>& history_sem) const;
    Tensor encode_user_semantic(const std::string& user_id, const Tensor& e_usem) const;

    int vocab_id(const std::string& token) const;  // -1 when unknown
    int vocab_size() const { return static_cast<int>(vocab_.size()) + 1; }
    int category_id(const std::string& category) const;  // UNK row when unknown
    int etype_id(const std::string& event_type) const;   // -1 when unknown
    int user_index(const std::string& user_id) const;    // cold row when unknown

    Tensor word_embeddings() const { return word_emb_; }
    Tensor etype_embeddings() const { return etype_emb_; }
    Tensor category_embeddings() const { return category_emb_; }
    Tensor user_etype_matrix() const { return w_uetd_; }
    Tensor user_category_matrix() const { return w_ucd_; }
    Tensor mix_parameter() const { return alpha_mix_; }

private:
    EncoderConfig config_;
    ChannelSwitches switches_;

    std::map<std::string, int> vocab_;  // ids start at 1; 0 = reserved empty token
    std::vector<std::string> categories_;
    std::map<std::string, int> category_index_;
    std::vector<std::string> etypes_;
    std::map<std::string, int> etype_index_;
    std::vector<std::string> users_;
    std::map<std::string, int> user_index_;

    Tensor word_emb_;    // (vocab_size x word_dim)
    GruParams gru_fwd_;
    GruParams gru_bwd_;
    Tensor alpha_mix_;   // scalar, used through a sigmoid
    Tensor etype_emb_;   // (n_etypes x etype_dim)
    Tensor category_emb_;  // ((n_categories + 1) x category_dim), last row = UNK
    Tensor att_w_;       // (d_sem x d_sem)
    Tensor att_q_;       // (d_sem)
    Tensor att_b_;       // (d_sem)
    Tensor w_uetd_;      // ((n_users + 1) x etype_dim), last row = cold users
    Tensor w_ucd_;       // ((n_users + 1) x category_dim)
};

}  // namespace eenr
