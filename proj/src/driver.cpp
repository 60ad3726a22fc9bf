#include "eenr/driver.hpp"

#include <filesystem>
#include <fstream>
#include <optional>
#include <stdexcept>

#include "eenr/etype_graph.hpp"
#include "eenr/synthetic.hpp"
#include "eenr/tagger.hpp"

namespace eenr::driver {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::vector<uint64_t> seed_list(uint64_t base, int count) {
    std::vector<uint64_t> seeds;
    for (int i = 0; i < count; ++i) seeds.push_back(base + static_cast<uint64_t>(i));
    return seeds;
}

struct RebuiltModel {
    ParamStore store;
    std::optional<EncoderModel> encoder;
    std::optional<Predictor> predictor;
    std::vector<ImpressionLog> train, val, test;
};

// Deterministic reconstruction shared by training and evaluation: identical
// inputs rebuild identical vocabularies and parameter layouts.
RebuiltModel rebuild_model(const Config& config, const VariantSpec& variant,
                           const std::vector<NewsItem>& news,
                           const std::vector<ImpressionLog>& logs,
                           const std::map<std::string, std::vector<double>>& embeddings,
                           uint64_t seed) {
    RebuiltModel out;
    std::tie(out.train, out.val, out.test) = time_split(logs, config.split);
    TrainHistories histories = collect_histories(news, out.train, logs);
    Rng rng(seed);
    out.encoder.emplace(config.encoder, variant.switches, news, embeddings, histories.user_ids,
                        histories.summaries, out.store, rng);
    out.predictor.emplace(out.store, "pred", out.encoder->news_dim(),
                          config.trainer.predictor_hidden, rng);
    return out;
}

json metrics_json(const MetricReport& report) {
    return {{"auc", report.auc},
            {"mrr", report.mrr},
            {"ndcg5", report.ndcg5},
            {"ndcg10", report.ndcg10},
            {"n_impressions", report.n_impressions},
            {"n_excluded", report.n_excluded}};
}

}  // namespace

json gen_data(const Config& config, const std::string& out_dir) {
    fs::create_directories(out_dir);
    SynthResult data = generate_synthetic(config.data, config.seed);

    std::string corpus_path = (fs::path(out_dir) / "ee_corpus.jsonl").string();
    std::string news_path = (fs::path(out_dir) / "news.jsonl").string();
    std::string imp_path = (fs::path(out_dir) / "impressions.jsonl").string();
    std::string truth_path = (fs::path(out_dir) / "ground_truth.json").string();
    save_ee_corpus(corpus_path, data.ee_corpus);
    save_news(news_path, data.news);
    save_impressions(imp_path, data.impressions);
    save_ground_truth(truth_path, data.truth);

    return {{"command", "gen-data"},
            {"seed", config.seed},
            {"ee_sentences", data.ee_corpus.size()},
            {"news", data.news.size()},
            {"impressions", data.impressions.size()},
            {"event_types", data.schema.event_types.size()},
            {"files",
             {{"ee_corpus", corpus_path},
              {"news", news_path},
              {"impressions", imp_path},
              {"ground_truth", truth_path}}}};
}

json train_ee(const Config& config, const std::string& corpus_path,
              const std::string& out_prefix) {
    LoadStats stats;
    auto corpus = load_ee_corpus(corpus_path, &stats);
    EventSchema schema = EventSchema::from_sentences(corpus);
    Tagger tagger(schema, config.ee, config.seed);
    auto history = tagger.train(corpus, config.ee.epochs, config.ee.batch_size, config.seed);
    tagger.save(out_prefix);

    json nll = json::array();
    for (const auto& h : history) nll.push_back(h.mean_nll);
    return {{"command", "train-ee"},
            {"sentences", corpus.size()},
            {"skipped_events", stats.skipped_events},
            {"event_types", schema.event_types.size()},
            {"tags", tagger.tag_space().n_tags()},
            {"epochs", history.size()},
            {"nll_per_epoch", nll},
            {"model", {out_prefix + ".params.json", out_prefix + ".meta.json"}}};
}

json eval_ee(const std::string& model_prefix, const std::string& corpus_path) {
    Tagger tagger = Tagger::load(model_prefix);
    auto gold = load_ee_corpus(corpus_path);
    std::vector<AnnotatedSentence> predicted;
    predicted.reserve(gold.size());
    for (const auto& s : gold) {
        AnnotatedSentence p;
        p.id = s.id;
        p.text = s.text;
        for (const auto& rec : tagger.extract_sentence(s.text)) {
            EventAnnotation ev;
            ev.event_type = rec.event_type;
            ev.arguments = rec.arguments;
            p.events.push_back(std::move(ev));
        }
        predicted.push_back(std::move(p));
    }
    EeMetrics metrics = ::eenr::eval_ee(predicted, gold);
    return {{"command", "eval-ee"},
            {"sentences", gold.size()},
            {"macro_precision", metrics.macro_precision},
            {"span_f1", metrics.span_f1},
            {"type_auc", metrics.type_auc},
            {"types_scored", metrics.n_types_scored}};
}

json extract(const std::string& model_prefix, const std::string& news_path,
             const std::string& out_path) {
    Tagger tagger = Tagger::load(model_prefix);
    auto news = load_news(news_path);
    tagger.extract_corpus(news);
    save_news(out_path, news);
    size_t with_events = 0, records = 0;
    for (const auto& n : news) {
        with_events += n.events.empty() ? 0 : 1;
        records += n.events.size();
    }
    return {{"command", "extract"},
            {"news", news.size()},
            {"news_with_events", with_events},
            {"event_records", records},
            {"out", out_path}};
}

json build_graph_stage(const Config& config, const std::string& news_path,
                       const std::string& impressions_path, const std::string& out_path) {
    auto [news, logs] = load_logs(news_path, impressions_path);
    auto [train, val, test] = time_split(logs, config.split);
    TrainHistories histories = collect_histories(news, train, logs);
    ETypeGraph graph = build_graph(histories.etype_sequences, config.graph.cooccur_window);
    save_graph(out_path, graph);
    size_t edges = 0;
    for (const auto& adj : graph.adj) edges += adj.size();
    return {{"command", "build-graph"},
            {"nodes", graph.n_nodes()},
            {"edges", edges / 2},
            {"out", out_path}};
}

json embed_graph(const Config& config, const std::string& graph_path,
                 const std::string& out_path) {
    ETypeGraph graph = load_graph(graph_path);
    if (graph.n_nodes() == 0) {
        save_embeddings(out_path, {});
        return {{"command", "embed-graph"},
                {"nodes", 0},
                {"walks", 0},
                {"dim", config.graph.dim},
                {"out", out_path}};
    }
    auto walks = node2vec_walks(graph, config.graph.p, config.graph.q, config.graph.walk_len,
                                config.graph.walks_per_node, config.seed);
    auto result = skipgram_train(graph, walks, config.graph.dim, config.graph.window,
                                 config.graph.epochs, config.graph.n_negatives, config.seed);
    save_embeddings(out_path, result.embeddings);
    return {{"command", "embed-graph"},
            {"nodes", graph.n_nodes()},
            {"walks", walks.size()},
            {"dim", config.graph.dim},
            {"skipgram_loss", result.loss_per_epoch},
            {"out", out_path}};
}

json train_rec_stage(const Config& config, const std::string& news_path,
                     const std::string& impressions_path, const std::string& emb_path,
                     const std::string& variant_name, const std::string& out_prefix) {
    VariantSpec variant = variant_by_name(variant_name);
    auto [news, logs] = load_logs(news_path, impressions_path);
    auto embeddings = load_embeddings(emb_path);

    RebuiltModel model = rebuild_model(config, variant, news, logs, embeddings, config.seed);
    auto history = train_rec(*model.encoder, *model.predictor, model.store, news, model.train,
                             model.val, config.trainer, config.seed);
    model.store.save(out_prefix + ".params.json");
    {
        json meta = {{"magic", "EENR-REC"},
                     {"version", 1},
                     {"variant", variant.name},
                     {"seed", config.seed},
                     {"news_dim", model.encoder->news_dim()}};
        std::ofstream out(out_prefix + ".meta.json");
        if (!out) throw std::runtime_error("cannot open " + out_prefix + ".meta.json");
        out << meta.dump(2) << "\n";
    }

    json epochs = json::array();
    for (const auto& h : history) {
        epochs.push_back(
            {{"epoch", h.epoch}, {"train_loss", h.train_loss}, {"val_auc", h.val_auc}});
    }
    return {{"command", "train-rec"},
            {"variant", variant.name},
            {"train_impressions", model.train.size()},
            {"val_impressions", model.val.size()},
            {"epochs", epochs},
            {"model", {out_prefix + ".params.json", out_prefix + ".meta.json"}}};
}

json evaluate_stage(const Config& base_config, const std::string& model_prefix,
                    const std::string& news_path, const std::string& impressions_path,
                    const std::string& emb_path, const std::string& predictions_path,
                    const std::string& auc_mode) {
    Config config = base_config;
    if (!auc_mode.empty()) {
        if (auc_mode != "impression" && auc_mode != "global") {
            throw std::invalid_argument("auc mode must be 'impression' or 'global'");
        }
        config.eval.auc_mode = auc_mode;
    }

    std::ifstream meta_in(model_prefix + ".meta.json");
    if (!meta_in) {
        throw std::runtime_error("checkpoint not found: " + model_prefix + ".meta.json");
    }
    json meta;
    meta_in >> meta;
    if (meta.value("magic", "") != std::string("EENR-REC")) {
        throw std::runtime_error(model_prefix + ".meta.json is not a recommender checkpoint");
    }
    VariantSpec variant = variant_by_name(meta.value("variant", "EENR"));
    uint64_t seed = meta.value("seed", uint64_t{1});

    auto [news, logs] = load_logs(news_path, impressions_path);
    auto embeddings = load_embeddings(emb_path);
    RebuiltModel model = rebuild_model(config, variant, news, logs, embeddings, seed);
    model.store.load_values_from(ParamStore::load(model_prefix + ".params.json"));

    HistoryIndex history = HistoryIndex::from_logs(logs);
    RecScorer scorer(*model.encoder, *model.predictor, news, history);
    auto scored = scorer.score_all(model.test);
    MetricReport report = evaluate_rankings(scored);
    if (config.eval.auc_mode == "global") report.auc = global_auc(scored);

    if (!predictions_path.empty()) {
        std::ofstream out(predictions_path);
        if (!out) throw std::runtime_error("cannot open " + predictions_path);
        for (const auto& imp : model.test) {
            json ranked = json::array();
            for (const auto& [id, prob] : scorer.rank(imp.user_id, imp.ts, imp.candidates)) {
                ranked.push_back({{"news_id", id}, {"prob", prob}});
            }
            out << json{{"user_id", imp.user_id}, {"ts", imp.ts}, {"ranked", ranked}}.dump()
                << "\n";
        }
    }

    json summary = {{"command", "evaluate"},
                    {"variant", variant.name},
                    {"auc_mode", config.eval.auc_mode},
                    {"test_impressions", model.test.size()},
                    {"metrics", metrics_json(report)}};
    if (!predictions_path.empty()) summary["predictions"] = predictions_path;
    return summary;
}

json ablate(const Config& config, const std::string& news_path,
            const std::string& impressions_path, int n_seeds, const std::string& out_dir,
            std::vector<std::string> variant_names) {
    if (variant_names.empty()) {
        for (const auto& v : all_variants()) variant_names.push_back(v.name);
    }
    auto [news, logs] = load_logs(news_path, impressions_path);
    int count = n_seeds > 0 ? n_seeds : config.eval.seeds;
    auto results = run_ablation(news, logs, config, variant_names, seed_list(config.seed, count));
    auto cells = summarize(results);

    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        write_results_csv((fs::path(out_dir) / "ablation_results.csv").string(), results);
        write_summary_csv((fs::path(out_dir) / "ablation_summary.csv").string(), cells);
    }
    return {{"command", "ablate"},
            {"seeds", count},
            {"results", results_json(results)},
            {"summary", summary_json(cells)}};
}

json fraction_study(const Config& config, const std::string& news_path,
                    const std::string& impressions_path, int n_seeds, const std::string& out_dir,
                    std::vector<double> fractions, std::vector<std::string> variant_names) {
    if (fractions.empty()) fractions = config.eval.fractions;
    if (variant_names.empty()) {
        for (const auto& v : all_variants()) variant_names.push_back(v.name);
    }
    auto [news, logs] = load_logs(news_path, impressions_path);
    int count = n_seeds > 0 ? n_seeds : config.eval.seeds;
    auto results = run_fraction_study(news, logs, config, fractions, variant_names,
                                      seed_list(config.seed, count));
    auto cells = summarize(results);

    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        write_results_csv((fs::path(out_dir) / "fraction_results.csv").string(), results);
        write_summary_csv((fs::path(out_dir) / "fraction_summary.csv").string(), cells);
    }
    return {{"command", "fraction-study"},
            {"seeds", count},
            {"fractions", fractions},
            {"results", results_json(results)},
            {"summary", summary_json(cells)}};
}

}  // namespace eenr::driver
