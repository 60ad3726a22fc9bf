#include "eenr/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <stdexcept>
#include <unordered_map>

#include "eenr/etype_graph.hpp"

namespace eenr {

using nlohmann::json;

namespace {

template <typename T>
void read_into(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

Config Config::from_json(const json& j) {
    Config c;
    if (j.contains("data")) {
        const auto& d = j.at("data");
        read_into(d, "n_users", c.data.n_users);
        read_into(d, "n_news", c.data.n_news);
        read_into(d, "n_impressions", c.data.n_impressions);
        read_into(d, "n_event_types", c.data.n_event_types);
        read_into(d, "n_categories", c.data.n_categories);
        read_into(d, "sharpness", c.data.sharpness);
        read_into(d, "candidates_per_impression", c.data.candidates_per_impression);
        read_into(d, "ee_sentences", c.data.ee_sentences);
        read_into(d, "title_category_prob", c.data.title_category_prob);
        read_into(d, "extra_same_type_prob", c.data.extra_same_type_prob);
        read_into(d, "w_etype", c.data.w_etype);
        read_into(d, "w_category", c.data.w_category);
        read_into(d, "click_bias", c.data.click_bias);
        read_into(d, "t0", c.data.t0);
    }
    if (j.contains("ee")) {
        const auto& d = j.at("ee");
        read_into(d, "char_dim", c.ee.char_dim);
        read_into(d, "hidden", c.ee.hidden);
        read_into(d, "learning_rate", c.ee.learning_rate);
        read_into(d, "epochs", c.ee.epochs);
        read_into(d, "batch_size", c.ee.batch_size);
    }
    if (j.contains("graph")) {
        const auto& d = j.at("graph");
        read_into(d, "p", c.graph.p);
        read_into(d, "q", c.graph.q);
        read_into(d, "walk_len", c.graph.walk_len);
        read_into(d, "walks_per_node", c.graph.walks_per_node);
        read_into(d, "window", c.graph.window);
        read_into(d, "epochs", c.graph.epochs);
        read_into(d, "n_negatives", c.graph.n_negatives);
        read_into(d, "dim", c.graph.dim);
        read_into(d, "cooccur_window", c.graph.cooccur_window);
    }
    if (j.contains("encoder")) {
        const auto& d = j.at("encoder");
        read_into(d, "word_dim", c.encoder.word_dim);
        read_into(d, "d_sem", c.encoder.d_sem);
        read_into(d, "etype_dim", c.encoder.etype_dim);
        read_into(d, "category_dim", c.encoder.category_dim);
        read_into(d, "history_len", c.encoder.history_len);
        read_into(d, "max_seq_len", c.encoder.max_seq_len);
    }
    if (j.contains("trainer")) {
        const auto& d = j.at("trainer");
        read_into(d, "epochs", c.trainer.epochs);
        read_into(d, "batch_size", c.trainer.batch_size);
        read_into(d, "neg_ratio", c.trainer.neg_ratio);
        read_into(d, "learning_rate", c.trainer.learning_rate);
        read_into(d, "patience", c.trainer.patience);
        read_into(d, "predictor_hidden", c.trainer.predictor_hidden);
    }
    if (j.contains("eval")) {
        const auto& d = j.at("eval");
        read_into(d, "auc_mode", c.eval.auc_mode);
        read_into(d, "seeds", c.eval.seeds);
        read_into(d, "fractions", c.eval.fractions);
    }
    if (j.contains("split")) {
        const auto& d = j.at("split");
        read_into(d, "train", c.split.train);
        read_into(d, "val", c.split.val);
        read_into(d, "test", c.split.test);
    }
    read_into(j, "seed", c.seed);
    if (c.eval.auc_mode != "impression" && c.eval.auc_mode != "global") {
        throw std::invalid_argument("config: eval.auc_mode must be 'impression' or 'global'");
    }
    return c;
}

Config Config::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw std::runtime_error(path + ": invalid JSON: " + e.what());
    }
    Config c = from_json(j);
    if (const char* env = std::getenv("EENR_SEED")) {
        c.seed = std::strtoull(env, nullptr, 10);
    }
    return c;
}

json Config::to_json() const {
    return json{
        {"data",
         {{"n_users", data.n_users},
          {"n_news", data.n_news},
          {"n_impressions", data.n_impressions},
          {"n_event_types", data.n_event_types},
          {"n_categories", data.n_categories},
          {"sharpness", data.sharpness},
          {"candidates_per_impression", data.candidates_per_impression},
          {"ee_sentences", data.ee_sentences},
          {"title_category_prob", data.title_category_prob},
          {"extra_same_type_prob", data.extra_same_type_prob},
          {"w_etype", data.w_etype},
          {"w_category", data.w_category},
          {"click_bias", data.click_bias},
          {"t0", data.t0}}},
        {"ee",
         {{"char_dim", ee.char_dim},
          {"hidden", ee.hidden},
          {"learning_rate", ee.learning_rate},
          {"epochs", ee.epochs},
          {"batch_size", ee.batch_size}}},
        {"graph",
         {{"p", graph.p},
          {"q", graph.q},
          {"walk_len", graph.walk_len},
          {"walks_per_node", graph.walks_per_node},
          {"window", graph.window},
          {"epochs", graph.epochs},
          {"n_negatives", graph.n_negatives},
          {"dim", graph.dim},
          {"cooccur_window", graph.cooccur_window}}},
        {"encoder",
         {{"word_dim", encoder.word_dim},
          {"d_sem", encoder.d_sem},
          {"etype_dim", encoder.etype_dim},
          {"category_dim", encoder.category_dim},
          {"history_len", encoder.history_len},
          {"max_seq_len", encoder.max_seq_len}}},
        {"trainer",
         {{"epochs", trainer.epochs},
          {"batch_size", trainer.batch_size},
          {"neg_ratio", trainer.neg_ratio},
          {"learning_rate", trainer.learning_rate},
          {"patience", trainer.patience},
          {"predictor_hidden", trainer.predictor_hidden}}},
        {"eval",
         {{"auc_mode", eval.auc_mode}, {"seeds", eval.seeds}, {"fractions", eval.fractions}}},
        {"split", {{"train", split.train}, {"val", split.val}, {"test", split.test}}},
        {"seed", seed}};
}

const std::vector<VariantSpec>& all_variants() {
    static const std::vector<VariantSpec> variants = {
        {"TITLE", {false, false, false}},
        {"TITLE+RA", {true, false, false}},
        {"TITLE+ET+RA", {true, true, false}},
        {"TITLE+NT+RA", {true, false, true}},
        {"EENR", {true, true, true}},
    };
    return variants;
}

VariantSpec variant_by_name(const std::string& name) {
    std::string valid;
    for (const auto& v : all_variants()) {
        if (v.name == name) return v;
        if (!valid.empty()) valid += ", ";
        valid += v.name;
    }
    throw std::invalid_argument("unknown variant '" + name + "' (valid: " + valid + ")");
}

TrainHistories collect_histories(const std::vector<NewsItem>& news,
                                 const std::vector<ImpressionLog>& train_logs,
                                 const std::vector<ImpressionLog>& all_logs) {
    std::unordered_map<std::string, const NewsItem*> news_by_id;
    for (const auto& item : news) news_by_id[item.news_id] = &item;

    TrainHistories out;
    std::map<std::string, int> seen_users;
    for (const auto& log : all_logs) {
        if (seen_users.try_emplace(log.user_id, 1).second) out.user_ids.push_back(log.user_id);
    }

    // training-split clicks in time order per user
    std::map<std::string, std::vector<std::pair<int64_t, const NewsItem*>>> clicks;
    for (const auto& log : train_logs) {
        for (const auto& id : log.clicked) {
            auto it = news_by_id.find(id);
            if (it != news_by_id.end()) clicks[log.user_id].emplace_back(log.ts, it->second);
        }
    }
    for (auto& [user, seq] : clicks) {
        std::stable_sort(seq.begin(), seq.end(),
                         [](const auto& a, const auto& b) { return a.first < b.first; });
        std::vector<std::string> etypes;
        UserHistorySummary summary;
        for (const auto& [ts, item] : seq) {
            for (const auto& ev : item->events) {
                etypes.push_back(ev.event_type);
                summary.event_types.push_back(ev.event_type);
            }
            summary.categories.push_back(item->category);
        }
        if (!etypes.empty()) out.etype_sequences.push_back(std::move(etypes));
        out.summaries[user] = std::move(summary);
    }
    return out;
}

VariantResult run_variant(const VariantSpec& variant, const std::vector<NewsItem>& news,
                          const std::vector<ImpressionLog>& logs, const Config& config,
                          uint64_t seed) {
    if (config.graph.dim != config.encoder.etype_dim) {
        throw std::invalid_argument("config: graph.dim must equal encoder.etype_dim");
    }
    Rng rng(seed);
    auto [train_logs, val_logs, test_logs] = time_split(logs, config.split);

    TrainHistories histories = collect_histories(news, train_logs, logs);

    ETypeGraph graph = build_graph(histories.etype_sequences, config.graph.cooccur_window);
    std::map<std::string, std::vector<double>> embeddings;
    if (graph.n_nodes() > 0) {
        auto walks = node2vec_walks(graph, config.graph.p, config.graph.q, config.graph.walk_len,
                                    config.graph.walks_per_node, rng.fork(11).next_u64());
        embeddings = skipgram_train(graph, walks, config.graph.dim, config.graph.window,
                                    config.graph.epochs, config.graph.n_negatives,
                                    rng.fork(12).next_u64())
                         .embeddings;
    }

    ParamStore store;
    Rng init_rng = rng.fork(13);
    EncoderModel encoder(config.encoder, variant.switches, news, embeddings, histories.user_ids,
                         histories.summaries, store, init_rng);
    Predictor predictor(store, "pred", encoder.news_dim(), config.trainer.predictor_hidden,
                        init_rng);

    VariantResult result;
    result.variant = variant.name;
    result.seed = seed;
    result.history = train_rec(encoder, predictor, store, news, train_logs, val_logs,
                               config.trainer, rng.fork(14).next_u64());

    HistoryIndex test_history = HistoryIndex::from_logs(logs);
    if (config.eval.auc_mode == "global") {
        RecScorer scorer(encoder, predictor, news, test_history);
        auto scored = scorer.score_all(test_logs);
        result.report = evaluate_rankings(scored);
        result.report.auc = global_auc(scored);
    } else {
        result.report = evaluate_model(encoder, predictor, news, test_logs, test_history);
    }
    return result;
}

std::vector<VariantResult> run_ablation(const std::vector<NewsItem>& news,
                                        const std::vector<ImpressionLog>& logs,
                                        const Config& config,
                                        const std::vector<std::string>& variant_names,
                                        const std::vector<uint64_t>& seeds) {
    std::vector<VariantResult> results;
    for (const auto& name : variant_names) {
        VariantSpec variant = variant_by_name(name);
        for (uint64_t seed : seeds) {
            results.push_back(run_variant(variant, news, logs, config, seed));
        }
    }
    return results;
}

std::vector<VariantResult> run_fraction_study(const std::vector<NewsItem>& news,
                                              const std::vector<ImpressionLog>& logs,
                                              const Config& config,
                                              const std::vector<double>& fractions,
                                              const std::vector<std::string>& variant_names,
                                              const std::vector<uint64_t>& seeds) {
    std::vector<VariantResult> results;
    for (double fraction : fractions) {
        for (uint64_t seed : seeds) {
            // one subsample per (fraction, seed) cell, shared by all variants
            auto logs_f = subsample(logs, fraction, seed ^ 0x5bd1e995u);
            for (const auto& name : variant_names) {
                VariantSpec variant = variant_by_name(name);
                VariantResult r = run_variant(variant, news, logs_f, config, seed);
                r.fraction = fraction;
                results.push_back(std::move(r));
            }
        }
    }
    return results;
}

std::vector<CellSummary> summarize(const std::vector<VariantResult>& results) {
    std::vector<CellSummary> out;
    auto find_cell = [&](const std::string& variant, double fraction) -> CellSummary& {
        for (auto& c : out) {
            if (c.variant == variant && c.fraction == fraction) return c;
        }
        out.push_back({variant, fraction, 0, {}, {}});
        return out.back();
    };
    // mean
    for (const auto& r : results) {
        auto& cell = find_cell(r.variant, r.fraction);
        cell.n_seeds += 1;
        cell.mean.auc += r.report.auc;
        cell.mean.mrr += r.report.mrr;
        cell.mean.ndcg5 += r.report.ndcg5;
        cell.mean.ndcg10 += r.report.ndcg10;
        cell.mean.n_impressions += r.report.n_impressions;
    }
    for (auto& c : out) {
        double n = static_cast<double>(c.n_seeds);
        c.mean.auc /= n;
        c.mean.mrr /= n;
        c.mean.ndcg5 /= n;
        c.mean.ndcg10 /= n;
    }
    // stdev (population)
    for (const auto& r : results) {
        auto& cell = find_cell(r.variant, r.fraction);
        auto sq = [](double x) { return x * x; };
        cell.stdev.auc += sq(r.report.auc - cell.mean.auc);
        cell.stdev.mrr += sq(r.report.mrr - cell.mean.mrr);
        cell.stdev.ndcg5 += sq(r.report.ndcg5 - cell.mean.ndcg5);
        cell.stdev.ndcg10 += sq(r.report.ndcg10 - cell.mean.ndcg10);
    }
    for (auto& c : out) {
        double n = static_cast<double>(c.n_seeds);
        c.stdev.auc = std::sqrt(c.stdev.auc / n);
        c.stdev.mrr = std::sqrt(c.stdev.mrr / n);
        c.stdev.ndcg5 = std::sqrt(c.stdev.ndcg5 / n);
        c.stdev.ndcg10 = std::sqrt(c.stdev.ndcg10 / n);
    }
    return out;
}

void write_results_csv(const std::string& path, const std::vector<VariantResult>& results) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << "fraction,variant,seed,auc,mrr,ndcg5,ndcg10,n_impressions\n";
    for (const auto& r : results) {
        out << r.fraction << "," << r.variant << "," << r.seed << "," << r.report.auc << ","
            << r.report.mrr << "," << r.report.ndcg5 << "," << r.report.ndcg10 << ","
            << r.report.n_impressions << "\n";
    }
}

void write_summary_csv(const std::string& path, const std::vector<CellSummary>& summaries) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << "fraction,variant,n_seeds,auc_mean,auc_std,mrr_mean,mrr_std,ndcg5_mean,ndcg5_std,"
           "ndcg10_mean,ndcg10_std\n";
    for (const auto& c : summaries) {
        out << c.fraction << "," << c.variant << "," << c.n_seeds << "," << c.mean.auc << ","
            << c.stdev.auc << "," << c.mean.mrr << "," << c.stdev.mrr << "," << c.mean.ndcg5 << ","
            << c.stdev.ndcg5 << "," << c.mean.ndcg10 << "," << c.stdev.ndcg10 << "\n";
    }
}

json results_json(const std::vector<VariantResult>& results) {
    json arr = json::array();
    for (const auto& r : results) {
        arr.push_back({{"variant", r.variant},
                       {"fraction", r.fraction},
                       {"seed", r.seed},
                       {"auc", r.report.auc},
                       {"mrr", r.report.mrr},
                       {"ndcg5", r.report.ndcg5},
                       {"ndcg10", r.report.ndcg10},
                       {"n_impressions", r.report.n_impressions},
                       {"n_excluded", r.report.n_excluded}});
    }
    return arr;
}

json summary_json(const std::vector<CellSummary>& summaries) {
    json arr = json::array();
    for (const auto& c : summaries) {
        arr.push_back({{"variant", c.variant},
                       {"fraction", c.fraction},
                       {"n_seeds", c.n_seeds},
                       {"auc", {{"mean", c.mean.auc}, {"std", c.stdev.auc}}},
                       {"mrr", {{"mean", c.mean.mrr}, {"std", c.stdev.mrr}}},
                       {"ndcg5", {{"mean", c.mean.ndcg5}, {"std", c.stdev.ndcg5}}},
                       {"ndcg10", {{"mean", c.mean.ndcg10}, {"std", c.stdev.ndcg10}}}});
    }
    return arr;
}

}  // namespace eenr
