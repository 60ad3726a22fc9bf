#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "eenr/corpus.hpp"
#include "eenr/crf.hpp"
#include "eenr/nn.hpp"
#include "eenr/param_store.hpp"

namespace eenr {

struct TaggerConfig {
    int char_dim = 64;
    int hidden = 64;  // per direction
    double learning_rate = 1e-3;
    int epochs = 12;
    int batch_size = 16;
};

struct TaggerEpochStats {
    int epoch = 0;
    double mean_nll = 0.0;
};

struct EeMetrics {
    double macro_precision = 0.0;
    double span_f1 = 0.0;
    double type_auc = 0.0;  // mean per-type balanced detection accuracy
    int n_types_scored = 0;
};

/// Character-level sequence tagger: embedding -> bidirectional recurrent
/// layer -> per-character log-softmax emissions -> linear-chain CRF with the
/// BIO structural mask.
class Tagger {
public:
    Tagger(EventSchema schema, const TaggerConfig& config, uint64_t seed);

    const EventSchema& schema() const { return schema_; }
    const TagSpace& tag_space() const { return tag_space_; }
    const CrfMask& mask() const { return mask_; }
    ParamStore& params() { return params_; }
    const TaggerConfig& config() const { return config_; }

    /// (n_chars x n_tags) log-probability rows.
    Tensor emissions(const std::string& text) const;
    Tensor transitions() const { return crf_transitions_; }

    /// BIO tags of the annotated spans; unresolved/overlapping spans are ignored.
    std::vector<int> gold_tags(const AnnotatedSentence& sentence) const;

    Tensor sentence_nll(const AnnotatedSentence& sentence) const;

    std::vector<TaggerEpochStats> train(const std::vector<AnnotatedSentence>& corpus, int epochs,
                                        int batch_size, uint64_t seed);

    /// Viterbi path for a sentence (no tape).
    std::vector<int> decode(const std::string& text) const;

    std::vector<EventRecord> extract_sentence(const std::string& text) const;

    /// Splits the body into sentences, decodes each and writes filtered
    /// records back; argument spans are body-relative.
    void extract_into(NewsItem& news) const;
    void extract_corpus(std::vector<NewsItem>& news) const;

    void save(const std::string& path_prefix) const;
    static Tagger load(const std::string& path_prefix);

private:
    void build_charset(const std::string& chars);

    EventSchema schema_;
    TaggerConfig config_;
    TagSpace tag_space_;
    CrfMask mask_;
    ParamStore params_;
    std::map<char, int> char_index_;  // 0 reserved for unknown characters
    int n_chars_ = 1;

    Tensor char_emb_;
    GruParams gru_fwd_;
    GruParams gru_bwd_;
    Tensor emit_w_;
    Tensor emit_b_;
    Tensor crf_transitions_;
};

/// Maximal B-I runs become role arguments; spans of the same event type in
/// one sentence group into a single record.
std::vector<EventRecord> assemble_events(const std::string& text, const std::vector<int>& tags,
                                         const TagSpace& tag_space, const EventSchema& schema);

/// Drops whitespace/punctuation-only arguments, trims argument whitespace,
/// deduplicates (type, role, argument) triples and removes argument-less
/// records.
std::vector<EventRecord> filter_rules(std::vector<EventRecord> records);

/// Sentence boundaries at . ! ? and their CJK fullwidth forms.
std::vector<std::pair<size_t, std::string>> split_sentences(const std::string& body);

/// Macro precision (type match per sentence), span F1 over (type, role,
/// argument) triples, and a per-type detection score. Sentence ids must align.
EeMetrics eval_ee(const std::vector<AnnotatedSentence>& predicted,
                  const std::vector<AnnotatedSentence>& gold);

}  // namespace eenr
