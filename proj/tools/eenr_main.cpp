// eenr: end-to-end news recommendation pipeline driver.
//
// Stages are wired through documented JSON-lines files so each subcommand can
// run standalone: gen-data -> train-ee -> extract -> build-graph ->
// embed-graph -> train-rec -> evaluate, plus the ablate and fraction-study
// harnesses that orchestrate many training runs.

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>

#include "eenr/driver.hpp"

using namespace eenr;

namespace {

Config load_config(const std::string& path, uint64_t seed_override) {
    Config config;
    if (!path.empty()) {
        config = Config::from_file(path);
    } else if (const char* env = std::getenv("EENR_SEED")) {
        config.seed = std::strtoull(env, nullptr, 10);
    }
    if (seed_override != 0) config.seed = seed_override;
    return config;
}

void emit(const nlohmann::json& summary) { std::cout << summary.dump(2) << std::endl; }

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"EENR news recommendation pipeline"};
    app.require_subcommand(1);

    std::string config_path, out_dir, corpus_path, model_prefix, news_path, imp_path;
    std::string graph_path, emb_path, out_path, variant = "EENR", predictions_path, auc_mode;
    uint64_t seed = 0;
    int n_seeds = 0;
    std::vector<double> fractions;
    std::vector<std::string> variant_names;

    auto* gen = app.add_subcommand("gen-data", "Generate a synthetic corpus with ground truth");
    gen->add_option("--config", config_path, "Config JSON");
    gen->add_option("--out-dir", out_dir, "Output directory")->required();
    gen->add_option("--seed", seed, "Seed override");

    auto* tee = app.add_subcommand("train-ee", "Train the event extractor");
    tee->add_option("--config", config_path, "Config JSON");
    tee->add_option("--corpus", corpus_path, "Annotated corpus (JSON-lines)")->required();
    tee->add_option("--out", model_prefix, "Checkpoint path prefix")->required();
    tee->add_option("--seed", seed, "Seed override");

    auto* eee = app.add_subcommand("eval-ee", "Score the extractor against gold annotations");
    eee->add_option("--model", model_prefix, "Checkpoint path prefix")->required();
    eee->add_option("--corpus", corpus_path, "Gold corpus (JSON-lines)")->required();

    auto* ext = app.add_subcommand("extract", "Run extraction over a news file");
    ext->add_option("--model", model_prefix, "Checkpoint path prefix")->required();
    ext->add_option("--news", news_path, "News JSON-lines")->required();
    ext->add_option("--out", out_path, "Extracted news output")->required();

    auto* bg = app.add_subcommand("build-graph", "Event-type co-occurrence graph (train split)");
    bg->add_option("--config", config_path, "Config JSON");
    bg->add_option("--news", news_path, "Extracted news JSON-lines")->required();
    bg->add_option("--impressions", imp_path, "Impression JSON-lines")->required();
    bg->add_option("--out", out_path, "Edge list output (TSV)")->required();

    auto* eg = app.add_subcommand("embed-graph", "node2vec walks + skip-gram embeddings");
    eg->add_option("--config", config_path, "Config JSON");
    eg->add_option("--graph", graph_path, "Edge list TSV")->required();
    eg->add_option("--out", out_path, "Embedding JSON output")->required();
    eg->add_option("--seed", seed, "Seed override");

    auto* trc = app.add_subcommand("train-rec", "Train the click predictor end to end");
    trc->add_option("--config", config_path, "Config JSON");
    trc->add_option("--news", news_path, "Extracted news JSON-lines")->required();
    trc->add_option("--impressions", imp_path, "Impression JSON-lines")->required();
    trc->add_option("--etype-emb", emb_path, "Event-type embedding JSON")->required();
    trc->add_option("--variant", variant, "Channel variant (default EENR)");
    trc->add_option("--out", model_prefix, "Checkpoint path prefix")->required();
    trc->add_option("--seed", seed, "Seed override");

    auto* ev = app.add_subcommand("evaluate", "Evaluate a trained recommender on the test split");
    ev->add_option("--config", config_path, "Config JSON");
    ev->add_option("--model", model_prefix, "Checkpoint path prefix")->required();
    ev->add_option("--news", news_path, "Extracted news JSON-lines")->required();
    ev->add_option("--impressions", imp_path, "Impression JSON-lines")->required();
    ev->add_option("--etype-emb", emb_path, "Event-type embedding JSON")->required();
    ev->add_option("--predictions", predictions_path, "Optional ranked-output JSON-lines");
    ev->add_option("--auc-mode", auc_mode, "impression (default) or global");

    auto* ab = app.add_subcommand("ablate", "Train and compare the five channel variants");
    ab->add_option("--config", config_path, "Config JSON");
    ab->add_option("--news", news_path, "Extracted news JSON-lines")->required();
    ab->add_option("--impressions", imp_path, "Impression JSON-lines")->required();
    ab->add_option("--seeds", n_seeds, "Number of seeds (default config eval.seeds)");
    ab->add_option("--out-dir", out_dir, "Directory for CSV tables");
    ab->add_option("--variants", variant_names, "Subset of variants");
    ab->add_option("--seed", seed, "Base seed override");

    auto* fr = app.add_subcommand("fraction-study", "Small-data study over log fractions");
    fr->add_option("--config", config_path, "Config JSON");
    fr->add_option("--news", news_path, "Extracted news JSON-lines")->required();
    fr->add_option("--impressions", imp_path, "Impression JSON-lines")->required();
    fr->add_option("--seeds", n_seeds, "Number of seeds (default config eval.seeds)");
    fr->add_option("--fractions", fractions, "Fractions (default config eval.fractions)");
    fr->add_option("--variants", variant_names, "Subset of variants");
    fr->add_option("--out-dir", out_dir, "Directory for CSV tables");
    fr->add_option("--seed", seed, "Base seed override");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << app.help() << "\n";
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    try {
        Config config = load_config(config_path, seed);
        if (gen->parsed()) {
            emit(driver::gen_data(config, out_dir));
        } else if (tee->parsed()) {
            emit(driver::train_ee(config, corpus_path, model_prefix));
        } else if (eee->parsed()) {
            emit(driver::eval_ee(model_prefix, corpus_path));
        } else if (ext->parsed()) {
            emit(driver::extract(model_prefix, news_path, out_path));
        } else if (bg->parsed()) {
            emit(driver::build_graph_stage(config, news_path, imp_path, out_path));
        } else if (eg->parsed()) {
            emit(driver::embed_graph(config, graph_path, out_path));
        } else if (trc->parsed()) {
            emit(driver::train_rec_stage(config, news_path, imp_path, emb_path, variant,
                                         model_prefix));
        } else if (ev->parsed()) {
            emit(driver::evaluate_stage(config, model_prefix, news_path, imp_path, emb_path,
                                        predictions_path, auc_mode));
        } else if (ab->parsed()) {
            emit(driver::ablate(config, news_path, imp_path, n_seeds, out_dir, variant_names));
        } else if (fr->parsed()) {
            emit(driver::fraction_study(config, news_path, imp_path, n_seeds, out_dir, fractions,
                                        variant_names));
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
