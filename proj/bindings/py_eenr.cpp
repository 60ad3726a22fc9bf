#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <vector>

#include "eenr/crf.hpp"
#include "eenr/driver.hpp"
#include "eenr/metrics.hpp"
#include "eenr/pipeline.hpp"

namespace py = pybind11;
using namespace eenr;

namespace {

Config config_from_json_str(const std::string& text) {
    if (text.empty()) return Config{};
    return Config::from_json(nlohmann::json::parse(text));
}

// flatten a row-major matrix given as list-of-lists
std::pair<std::vector<double>, std::pair<int, int>> flatten(
    const std::vector<std::vector<double>>& m, const char* what) {
    if (m.empty() || m[0].empty()) throw std::invalid_argument(std::string(what) + ": empty");
    std::vector<double> flat;
    int cols = static_cast<int>(m[0].size());
    for (const auto& row : m) {
        if (static_cast<int>(row.size()) != cols) {
            throw std::invalid_argument(std::string(what) + ": ragged rows");
        }
        flat.insert(flat.end(), row.begin(), row.end());
    }
    return {std::move(flat), {static_cast<int>(m.size()), cols}};
}

std::string run_json(nlohmann::json j) { return j.dump(); }

}  // namespace

PYBIND11_MODULE(_eenr, m) {
    m.doc() = "Event-extraction news recommendation pipeline (C++ core)";

    // ---- sequence model primitives ----
    m.def(
        "viterbi",
        [](const std::vector<std::vector<double>>& emissions,
           const std::vector<std::vector<double>>& transitions) {
            auto [em, em_shape] = flatten(emissions, "emissions");
            auto [tr, tr_shape] = flatten(transitions, "transitions");
            if (tr_shape.first != em_shape.second || tr_shape.second != em_shape.second) {
                throw std::invalid_argument("transitions must be n_tags x n_tags");
            }
            return viterbi(em, em_shape.first, em_shape.second, tr,
                           CrfMask::open(em_shape.second));
        },
        py::arg("emissions"), py::arg("transitions"),
        "Best unconstrained tag path for (tokens x tags) scores");

    m.def(
        "crf_log_partition",
        [](const std::vector<std::vector<double>>& emissions,
           const std::vector<std::vector<double>>& transitions) {
            auto [em, em_shape] = flatten(emissions, "emissions");
            auto [tr, tr_shape] = flatten(transitions, "transitions");
            Tensor e = Tensor::from(em, {em_shape.first, em_shape.second});
            Tensor t = Tensor::from(tr, {tr_shape.first, tr_shape.second});
            return crf_log_partition(e, t, CrfMask::open(em_shape.second)).item();
        },
        py::arg("emissions"), py::arg("transitions"),
        "log sum over all tag paths of exp(path score)");

    // ---- ranking metrics ----
    m.def(
        "auc",
        [](const std::vector<double>& scores, const std::vector<int>& labels) {
            return impression_auc(scores, labels);
        },
        py::arg("scores"), py::arg("labels"));
    m.def(
        "mrr",
        [](const std::vector<double>& scores, const std::vector<int>& labels) {
            return impression_mrr(scores, labels);
        },
        py::arg("scores"), py::arg("labels"));
    m.def(
        "ndcg",
        [](const std::vector<double>& scores, const std::vector<int>& labels, int k) {
            return impression_ndcg(scores, labels, k);
        },
        py::arg("scores"), py::arg("labels"), py::arg("k"));

    // ---- data plumbing ----
    m.def("default_config", []() { return Config{}.to_json().dump(); },
          "Default configuration as a JSON string");

    m.def(
        "time_split_sizes",
        [](const std::vector<int64_t>& timestamps, double train, double val, double test) {
            std::vector<ImpressionLog> logs;
            for (size_t i = 0; i < timestamps.size(); ++i) {
                ImpressionLog log;
                log.user_id = "u";
                log.ts = timestamps[i];
                log.candidates = {"n"};
                logs.push_back(std::move(log));
            }
            auto [a, b, c] = time_split(logs, SplitSpec{train, val, test});
            return std::make_tuple(a.size(), b.size(), c.size());
        },
        py::arg("timestamps"), py::arg("train") = 0.7, py::arg("val") = 0.1,
        py::arg("test") = 0.2);

    // ---- pipeline stages (JSON-summary strings, mirroring the CLI) ----
    m.def(
        "gen_data",
        [](const std::string& config_json, const std::string& out_dir, uint64_t seed) {
            Config c = config_from_json_str(config_json);
            if (seed != 0) c.seed = seed;
            return run_json(driver::gen_data(c, out_dir));
        },
        py::arg("config_json") = "", py::arg("out_dir") = "data", py::arg("seed") = 0);
    m.def(
        "train_ee",
        [](const std::string& config_json, const std::string& corpus, const std::string& out) {
            return run_json(driver::train_ee(config_from_json_str(config_json), corpus, out));
        },
        py::arg("config_json") = "", py::arg("corpus") = "", py::arg("out") = "ee_model");
    m.def(
        "eval_ee",
        [](const std::string& model, const std::string& corpus) {
            return run_json(driver::eval_ee(model, corpus));
        },
        py::arg("model"), py::arg("corpus"));
    m.def(
        "extract",
        [](const std::string& model, const std::string& news, const std::string& out) {
            return run_json(driver::extract(model, news, out));
        },
        py::arg("model"), py::arg("news"), py::arg("out"));
    m.def(
        "build_graph",
        [](const std::string& config_json, const std::string& news, const std::string& imps,
           const std::string& out) {
            return run_json(
                driver::build_graph_stage(config_from_json_str(config_json), news, imps, out));
        },
        py::arg("config_json") = "", py::arg("news") = "", py::arg("impressions") = "",
        py::arg("out") = "etype_graph.tsv");
    m.def(
        "embed_graph",
        [](const std::string& config_json, const std::string& graph, const std::string& out) {
            return run_json(driver::embed_graph(config_from_json_str(config_json), graph, out));
        },
        py::arg("config_json") = "", py::arg("graph") = "", py::arg("out") = "etype_emb.json");
    m.def(
        "train_rec",
        [](const std::string& config_json, const std::string& news, const std::string& imps,
           const std::string& emb, const std::string& variant, const std::string& out) {
            return run_json(driver::train_rec_stage(config_from_json_str(config_json), news, imps,
                                                    emb, variant, out));
        },
        py::arg("config_json") = "", py::arg("news") = "", py::arg("impressions") = "",
        py::arg("etype_emb") = "", py::arg("variant") = "EENR", py::arg("out") = "rec_model");
    m.def(
        "evaluate",
        [](const std::string& config_json, const std::string& model, const std::string& news,
           const std::string& imps, const std::string& emb, const std::string& predictions,
           const std::string& auc_mode) {
            return run_json(driver::evaluate_stage(config_from_json_str(config_json), model, news,
                                                   imps, emb, predictions, auc_mode));
        },
        py::arg("config_json") = "", py::arg("model") = "", py::arg("news") = "",
        py::arg("impressions") = "", py::arg("etype_emb") = "", py::arg("predictions") = "",
        py::arg("auc_mode") = "");
    m.def(
        "ablate",
        [](const std::string& config_json, const std::string& news, const std::string& imps,
           int seeds, const std::string& out_dir, const std::vector<std::string>& variants) {
            return run_json(driver::ablate(config_from_json_str(config_json), news, imps, seeds,
                                           out_dir, variants));
        },
        py::arg("config_json") = "", py::arg("news") = "", py::arg("impressions") = "",
        py::arg("seeds") = 0, py::arg("out_dir") = "", py::arg("variants") = std::vector<std::string>{});
    m.def(
        "fraction_study",
        [](const std::string& config_json, const std::string& news, const std::string& imps,
           int seeds, const std::string& out_dir, const std::vector<double>& fractions,
           const std::vector<std::string>& variants) {
            return run_json(driver::fraction_study(config_from_json_str(config_json), news, imps,
                                                   seeds, out_dir, fractions, variants));
        },
        py::arg("config_json") = "", py::arg("news") = "", py::arg("impressions") = "",
        py::arg("seeds") = 0, py::arg("out_dir") = "",
        py::arg("fractions") = std::vector<double>{},
        py::arg("variants") = std::vector<std::string>{});

    m.def("variant_names", []() {
        std::vector<std::string> names;
        for (const auto& v : all_variants()) names.push_back(v.name);
        return names;
    });
}
