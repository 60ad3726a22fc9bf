#include "eenr/tagger.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <stdexcept>

#include <json.hpp>

namespace eenr {

using nlohmann::json;

namespace {

// printable ASCII + reserved unknown row 0
constexpr int kUnknownChar = 0;
constexpr int kCharsetSize = 96;

int char_id(char c) {
    auto u = static_cast<unsigned char>(c);
    if (u >= 32 && u <= 126) return static_cast<int>(u) - 31;
    return kUnknownChar;
}

}  // namespace

Tagger::Tagger(EventSchema schema, const TaggerConfig& config, uint64_t seed)
    : schema_(std::move(schema)),
      config_(config),
      tag_space_(TagSpace::from_schema(schema_)),
      mask_(tag_space_.mask()) {
    Rng rng(seed);
    n_chars_ = kCharsetSize;
    int h = config_.hidden;
    char_emb_ = params_.param("char_emb", {n_chars_, config_.char_dim}, rng);
    gru_fwd_ = make_gru(params_, "gru_fwd", config_.char_dim, h, rng);
    gru_bwd_ = make_gru(params_, "gru_bwd", config_.char_dim, h, rng);
    emit_w_ = params_.param("emit.w", {2 * h, tag_space_.n_tags()}, rng);
    emit_b_ = params_.param_const("emit.b", {tag_space_.n_tags()}, 0.0);
    crf_transitions_ = params_.param_const("crf.transitions",
                                           {tag_space_.n_tags(), tag_space_.n_tags()}, 0.0);
}

Tensor Tagger::emissions(const std::string& text) const {
    if (text.empty()) throw std::invalid_argument("emissions: empty character sequence");
    std::vector<int> ids;
    ids.reserve(text.size());
    for (char c : text) ids.push_back(char_id(c));
    Tensor embedded = rows(char_emb_, ids);
    auto fwd = gru_run(gru_fwd_, embedded, false);
    auto bwd = gru_run(gru_bwd_, embedded, true);
    std::vector<Tensor> per_char;
    per_char.reserve(ids.size());
    for (size_t t = 0; t < ids.size(); ++t) {
        per_char.push_back(concat({fwd[t], bwd[t]}));
    }
    Tensor hidden = stack_rows(per_char);
    Tensor scores = add(matmul(hidden, emit_w_), emit_b_);
    return log_softmax(scores, 1);
}

std::vector<int> Tagger::gold_tags(const AnnotatedSentence& sentence) const {
    std::vector<int> tags(sentence.text.size(), 0);
    for (const auto& event : sentence.events) {
        int type_index = -1;
        for (size_t t = 0; t < tag_space_.event_types.size(); ++t) {
            if (tag_space_.event_types[t] == event.event_type) {
                type_index = static_cast<int>(t);
                break;
            }
        }
        if (type_index < 0) continue;
        const auto& roles = tag_space_.roles_by_type[static_cast<size_t>(type_index)];
        for (const auto& arg : event.arguments) {
            if (arg.start < 0 || arg.len <= 0 ||
                arg.start + arg.len > static_cast<int>(sentence.text.size())) {
                continue;
            }
            auto role_it = std::find(roles.begin(), roles.end(), arg.role);
            if (role_it == roles.end()) continue;
            int role_index = static_cast<int>(role_it - roles.begin());
            bool free = true;
            for (int i = arg.start; i < arg.start + arg.len; ++i) {
                free &= tags[static_cast<size_t>(i)] == 0;
            }
            if (!free) continue;  // overlapping annotation, first one wins
            tags[static_cast<size_t>(arg.start)] = tag_space_.b_tag(type_index, role_index);
            for (int i = arg.start + 1; i < arg.start + arg.len; ++i) {
                tags[static_cast<size_t>(i)] = tag_space_.i_tag(type_index, role_index);
            }
        }
    }
    return tags;
}

Tensor Tagger::sentence_nll(const AnnotatedSentence& sentence) const {
    return crf_nll(emissions(sentence.text), crf_transitions_, mask_, gold_tags(sentence));
}

std::vector<TaggerEpochStats> Tagger::train(const std::vector<AnnotatedSentence>& corpus,
                                            int epochs, int batch_size, uint64_t seed) {
    if (corpus.empty()) throw std::invalid_argument("train: empty corpus");
    if (batch_size <= 0) throw std::invalid_argument("train: batch_size must be positive");
    Rng rng(seed);
    std::vector<size_t> order(corpus.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;

    std::vector<TaggerEpochStats> history;
    for (int epoch = 0; epoch < epochs; ++epoch) {
        rng.shuffle(order);
        double epoch_nll = 0.0;
        size_t pos = 0;
        while (pos < order.size()) {
            size_t end = std::min(order.size(), pos + static_cast<size_t>(batch_size));
            std::vector<Tensor> losses;
            losses.reserve(end - pos);
            for (size_t i = pos; i < end; ++i) {
                losses.push_back(sentence_nll(corpus[order[i]]));
            }
            Tensor batch_loss = mean(concat(losses));
            epoch_nll += batch_loss.item() * static_cast<double>(end - pos);
            backward(batch_loss);
            params_.step(config_.learning_rate);
            pos = end;
        }
        history.push_back({epoch, epoch_nll / static_cast<double>(corpus.size())});
    }
    return history;
}

std::vector<int> Tagger::decode(const std::string& text) const {
    NoGradGuard no_grad;
    return viterbi(emissions(text), crf_transitions_, mask_);
}

std::vector<EventRecord> Tagger::extract_sentence(const std::string& text) const {
    if (text.empty()) return {};
    return filter_rules(assemble_events(text, decode(text), tag_space_, schema_));
}

void Tagger::extract_into(NewsItem& news) const {
    news.events.clear();
    for (const auto& [offset, sentence] : split_sentences(news.body)) {
        auto records = extract_sentence(sentence);
        for (auto& rec : records) {
            for (auto& arg : rec.arguments) {
                if (arg.start >= 0) arg.start += static_cast<int>(offset);
            }
            news.events.push_back(std::move(rec));
        }
    }
}

void Tagger::extract_corpus(std::vector<NewsItem>& news) const {
    for (auto& item : news) extract_into(item);
}

void Tagger::save(const std::string& path_prefix) const {
    params_.save(path_prefix + ".params.json");
    json meta;
    meta["magic"] = "EENR-TAGGER";
    meta["version"] = 1;
    meta["event_types"] = schema_.event_types;
    json roles = json::object();
    for (const auto& [type, role_list] : schema_.roles_by_type) roles[type] = role_list;
    meta["roles_by_type"] = std::move(roles);
    meta["config"] = {{"char_dim", config_.char_dim},
                      {"hidden", config_.hidden},
                      {"learning_rate", config_.learning_rate},
                      {"epochs", config_.epochs},
                      {"batch_size", config_.batch_size}};
    std::ofstream out(path_prefix + ".meta.json");
    if (!out) throw std::runtime_error("cannot open " + path_prefix + ".meta.json for writing");
    out << meta.dump(2) << "\n";
}

Tagger Tagger::load(const std::string& path_prefix) {
    std::ifstream in(path_prefix + ".meta.json");
    if (!in) throw std::runtime_error("cannot open " + path_prefix + ".meta.json");
    json meta;
    in >> meta;
    if (meta.value("magic", "") != std::string("EENR-TAGGER")) {
        throw std::runtime_error(path_prefix + ".meta.json: not a tagger checkpoint");
    }
    EventSchema schema;
    schema.event_types = meta["event_types"].get<std::vector<std::string>>();
    for (auto& [type, role_list] : meta["roles_by_type"].items()) {
        schema.roles_by_type[type] = role_list.get<std::vector<std::string>>();
    }
    TaggerConfig config;
    config.char_dim = meta["config"]["char_dim"];
    config.hidden = meta["config"]["hidden"];
    config.learning_rate = meta["config"]["learning_rate"];
    config.epochs = meta["config"]["epochs"];
    config.batch_size = meta["config"]["batch_size"];
    Tagger tagger(std::move(schema), config, /*seed=*/0);
    tagger.params_.load_values_from(ParamStore::load(path_prefix + ".params.json"));
    return tagger;
}

// ---- span assembly ------------------------------------------------------------

std::vector<EventRecord> assemble_events(const std::string& text, const std::vector<int>& tags,
                                         const TagSpace& tag_space, const EventSchema& schema) {
    std::vector<EventRecord> records;
    std::vector<int> record_of_type(tag_space.event_types.size(), -1);
    size_t pos = 0;
    while (pos < tags.size()) {
        const auto& info = tag_space.tags[static_cast<size_t>(tags[pos])];
        if (info.kind != 'B') {
            ++pos;
            continue;
        }
        int i_tag = tag_space.i_tag(info.type_index, info.role_index);
        size_t end = pos + 1;
        while (end < tags.size() && tags[end] == i_tag) ++end;

        ArgumentSpan span;
        span.role =
            tag_space.roles_by_type[static_cast<size_t>(info.type_index)][static_cast<size_t>(
                info.role_index)];
        span.start = static_cast<int>(pos);
        span.len = static_cast<int>(end - pos);
        span.argument = text.substr(pos, end - pos);

        int& slot = record_of_type[static_cast<size_t>(info.type_index)];
        if (slot < 0) {
            EventRecord rec;
            rec.event_type = tag_space.event_types[static_cast<size_t>(info.type_index)];
            rec.event_class = EventSchema::class_of(rec.event_type);
            slot = static_cast<int>(records.size());
            records.push_back(std::move(rec));
        }
        records[static_cast<size_t>(slot)].arguments.push_back(std::move(span));
        pos = end;
    }
    (void)schema;
    return records;
}

namespace {

bool is_noise_char(char c) {
    auto u = static_cast<unsigned char>(c);
    return std::isspace(u) || std::ispunct(u);
}

}  // namespace

std::vector<EventRecord> filter_rules(std::vector<EventRecord> records) {
    std::vector<EventRecord> out;
    for (auto& rec : records) {
        std::vector<ArgumentSpan> kept;
        std::set<std::tuple<std::string, std::string>> seen;  // (role, argument)
        for (auto& arg : rec.arguments) {
            // trim whitespace, keeping the span aligned
            size_t begin = 0, end = arg.argument.size();
            while (begin < end && std::isspace(static_cast<unsigned char>(arg.argument[begin])))
                ++begin;
            while (end > begin && std::isspace(static_cast<unsigned char>(arg.argument[end - 1])))
                --end;
            if (begin == end) continue;
            std::string trimmed = arg.argument.substr(begin, end - begin);
            if (std::all_of(trimmed.begin(), trimmed.end(), is_noise_char)) continue;
            if (!seen.insert({arg.role, trimmed}).second) continue;
            ArgumentSpan cleaned = arg;
            cleaned.argument = trimmed;
            if (cleaned.start >= 0) {
                cleaned.start += static_cast<int>(begin);
                cleaned.len = static_cast<int>(end - begin);
            }
            kept.push_back(std::move(cleaned));
        }
        if (kept.empty()) continue;
        rec.arguments = std::move(kept);
        out.push_back(std::move(rec));
    }
    return out;
}

std::vector<std::pair<size_t, std::string>> split_sentences(const std::string& body) {
    std::vector<std::pair<size_t, std::string>> out;
    auto flush = [&](size_t begin, size_t end) {
        while (begin < end && std::isspace(static_cast<unsigned char>(body[begin]))) ++begin;
        size_t stop = end;
        while (stop > begin && std::isspace(static_cast<unsigned char>(body[stop - 1]))) --stop;
        if (stop > begin) out.emplace_back(begin, body.substr(begin, stop - begin));
    };
    size_t start = 0, i = 0;
    while (i < body.size()) {
        char c = body[i];
        size_t advance = 1;
        bool boundary = c == '.' || c == '!' || c == '?';
        if (!boundary && i + 2 < body.size()) {
            // UTF-8 fullwidth 。 ！ ？
            const auto b0 = static_cast<unsigned char>(body[i]);
            const auto b1 = static_cast<unsigned char>(body[i + 1]);
            const auto b2 = static_cast<unsigned char>(body[i + 2]);
            if ((b0 == 0xE3 && b1 == 0x80 && b2 == 0x82) ||
                (b0 == 0xEF && b1 == 0xBC && (b2 == 0x81 || b2 == 0x9F))) {
                boundary = true;
                advance = 3;
            }
        }
        i += advance;
        if (boundary) {
            flush(start, i);
            start = i;
        }
    }
    flush(start, body.size());
    return out;
}

// ---- evaluation ----------------------------------------------------------------

EeMetrics eval_ee(const std::vector<AnnotatedSentence>& predicted,
                  const std::vector<AnnotatedSentence>& gold) {
    if (predicted.size() != gold.size()) {
        throw std::invalid_argument("eval_ee: " + std::to_string(predicted.size()) +
                                    " predicted vs " + std::to_string(gold.size()) +
                                    " gold sentences");
    }
    for (size_t i = 0; i < predicted.size(); ++i) {
        if (predicted[i].id != gold[i].id) {
            throw std::invalid_argument("eval_ee: sentence id mismatch at index " +
                                        std::to_string(i) + " ('" + predicted[i].id + "' vs '" +
                                        gold[i].id + "')");
        }
    }

    std::set<std::string> all_types;
    for (size_t i = 0; i < predicted.size(); ++i) {
        for (const auto& ev : gold[i].events) all_types.insert(ev.event_type);
        for (const auto& ev : predicted[i].events) all_types.insert(ev.event_type);
    }

    // macro precision over predicted types: a predicted record counts as
    // correct when the gold sentence has an event of that type
    std::map<std::string, std::pair<int, int>> per_type;  // type -> (correct, total)
    int64_t tp = 0, fp = 0, fn = 0;
    std::map<std::string, std::array<int64_t, 4>> detect;  // type -> tp, fn, fp, tn

    for (size_t i = 0; i < predicted.size(); ++i) {
        std::set<std::string> gold_types;
        std::set<std::tuple<std::string, std::string, std::string>> gold_triples;
        for (const auto& ev : gold[i].events) {
            gold_types.insert(ev.event_type);
            for (const auto& a : ev.arguments) {
                gold_triples.insert({ev.event_type, a.role, a.argument});
            }
        }
        std::set<std::string> pred_types;
        std::set<std::tuple<std::string, std::string, std::string>> pred_triples;
        for (const auto& ev : predicted[i].events) {
            pred_types.insert(ev.event_type);
            auto& [correct, total] = per_type[ev.event_type];
            ++total;
            if (gold_types.count(ev.event_type)) ++correct;
            for (const auto& a : ev.arguments) {
                pred_triples.insert({ev.event_type, a.role, a.argument});
            }
        }
        for (const auto& t : pred_triples) {
            if (gold_triples.count(t))
                ++tp;
            else
                ++fp;
        }
        for (const auto& t : gold_triples) {
            if (!pred_triples.count(t)) ++fn;
        }
        for (const auto& type : all_types) {
            bool g = gold_types.count(type) > 0;
            bool p = pred_types.count(type) > 0;
            auto& d = detect[type];
            if (g && p)
                ++d[0];
            else if (g && !p)
                ++d[1];
            else if (!g && p)
                ++d[2];
            else
                ++d[3];
        }
    }

    EeMetrics metrics;
    if (!per_type.empty()) {
        double total = 0.0;
        for (const auto& [type, counts] : per_type) {
            total += static_cast<double>(counts.first) / static_cast<double>(counts.second);
        }
        metrics.macro_precision = total / static_cast<double>(per_type.size());
        metrics.n_types_scored = static_cast<int>(per_type.size());
    }
    double denom = static_cast<double>(2 * tp + fp + fn);
    metrics.span_f1 = denom > 0.0 ? 2.0 * static_cast<double>(tp) / denom : 0.0;

    if (!detect.empty()) {
        double total = 0.0;
        for (const auto& [type, d] : detect) {
            double pos = static_cast<double>(d[0] + d[1]);
            double neg = static_cast<double>(d[2] + d[3]);
            double tpr = pos > 0 ? static_cast<double>(d[0]) / pos : 1.0;
            double tnr = neg > 0 ? static_cast<double>(d[3]) / neg : 1.0;
            total += 0.5 * (tpr + tnr);
        }
        metrics.type_auc = total / static_cast<double>(detect.size());
    }
    return metrics;
}

}  // namespace eenr
