#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <set>

#include "eenr/corpus.hpp"
#include "eenr/metrics.hpp"
#include "eenr/rng.hpp"
#include "eenr/synthetic.hpp"

using namespace eenr;

namespace {

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& name, const std::string& content = "") : path(name) {
        if (!content.empty()) {
            std::ofstream out(path);
            out << content;
        }
    }
    ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("the layoff record round-trips through the DuEE-shaped loader") {
    std::string line =
        R"({"id": "d1", "text": "Charles Schwab to lay off 600 workers this fall", "event_list": )"
        R"([{"event_type": "Organizational-Relations/Layoff", "arguments": )"
        R"([{"role": "number of job cut", "argument": "600"}, )"
        R"({"role": "layoff executor", "argument": "Charles Schwab"}]}]})";
    TempFile file("corpus_layoff.jsonl", line + "\n");

    auto sentences = load_ee_corpus(file.path);
    REQUIRE(sentences.size() == 1);
    REQUIRE(sentences[0].events.size() == 1);
    const auto& ev = sentences[0].events[0];
    CHECK(ev.event_type == "Organizational-Relations/Layoff");
    CHECK(EventSchema::class_of(ev.event_type) == "Organizational-Relations");
    REQUIRE(ev.arguments.size() == 2);
    CHECK(ev.arguments[0].role == "number of job cut");
    CHECK(ev.arguments[0].argument == "600");
    CHECK(ev.arguments[1].role == "layoff executor");
    CHECK(ev.arguments[1].argument == "Charles Schwab");
    // spans resolved by first occurrence
    CHECK(sentences[0].text.substr(static_cast<size_t>(ev.arguments[0].start),
                                   static_cast<size_t>(ev.arguments[0].len)) == "600");
    CHECK(ev.arguments[1].start == 0);

    // write-then-read equality
    TempFile out("corpus_layoff_out.jsonl");
    save_ee_corpus(out.path, sentences);
    CHECK(load_ee_corpus(out.path) == sentences);
}

TEST_CASE("empty corpus file loads as an empty list") {
    TempFile file("corpus_empty.jsonl", "");
    std::ofstream(file.path).close();
    CHECK(load_ee_corpus(file.path).empty());
}

TEST_CASE("malformed JSON reports the line number") {
    TempFile file("corpus_bad.jsonl", "{\"id\": \"a\", \"text\": \"x\", \"event_list\": []}\n{oops\n");
    CHECK_THROWS_WITH_AS(load_ee_corpus(file.path), doctest::Contains(":2"), std::runtime_error);
}

TEST_CASE("an argument absent from the text drops the event and counts a warning") {
    std::string line =
        R"({"id": "d1", "text": "nothing to see", "event_list": [{"event_type": "A/B", )"
        R"("arguments": [{"role": "r", "argument": "missing-string"}]}]})";
    TempFile file("corpus_skip.jsonl", line + "\n");
    LoadStats stats;
    auto sentences = load_ee_corpus(file.path, &stats);
    REQUIRE(sentences.size() == 1);
    CHECK(sentences[0].events.empty());
    CHECK(stats.skipped_events == 1);
}

TEST_CASE("log loading enforces referential integrity") {
    TempFile news("news_ok.jsonl",
                  R"({"news_id": "n1", "title": ["hello"], "category": "markets", "body": "x."})"
                  "\n");
    TempFile imp_ok("imp_ok.jsonl",
                    R"({"user_id": "u1", "ts": 10, "candidates": ["n1"], "clicked": ["n1"]})"
                    "\n");
    auto [news_items, impressions] = load_logs(news.path, imp_ok.path);
    CHECK(news_items.size() == 1);
    CHECK(impressions.size() == 1);

    TempFile imp_bad("imp_bad.jsonl",
                     R"({"user_id": "u1", "ts": 10, "candidates": ["n1", "ghost"], "clicked": []})"
                     "\n");
    CHECK_THROWS_WITH_AS(load_logs(news.path, imp_bad.path), doctest::Contains("ghost"),
                         std::runtime_error);

    TempFile imp_click("imp_click.jsonl",
                       R"({"user_id": "u1", "ts": 10, "candidates": ["n1"], "clicked": ["n2"]})"
                       "\n");
    CHECK_THROWS_AS(load_impressions(imp_click.path), std::runtime_error);
}

namespace {

std::vector<ImpressionLog> make_logs(const std::vector<int64_t>& timestamps) {
    std::vector<ImpressionLog> logs;
    int i = 0;
    for (int64_t ts : timestamps) {
        ImpressionLog log;
        log.user_id = "u" + std::to_string(i % 3);
        log.ts = ts;
        log.candidates = {"n0"};
        ++i;
        logs.push_back(std::move(log));
    }
    return logs;
}

}  // namespace

TEST_CASE("time_split honours the 7:1:2 proportions") {
    auto logs = make_logs({10, 9, 8, 7, 6, 5, 4, 3, 2, 1});
    auto [train, val, test] = time_split(logs, SplitSpec{});
    CHECK(train.size() == 7);
    CHECK(val.size() == 1);
    CHECK(test.size() == 2);
    CHECK(train.back().ts <= val.front().ts);
    CHECK(val.back().ts <= test.front().ts);
}

TEST_CASE("equal timestamps keep input order and the split sizes") {
    auto logs = make_logs(std::vector<int64_t>(10, 5));
    for (size_t i = 0; i < logs.size(); ++i) logs[i].user_id = "u" + std::to_string(i);
    auto [train, val, test] = time_split(logs, SplitSpec{});
    CHECK(train.size() == 7);
    CHECK(val.size() == 1);
    CHECK(test.size() == 2);
    for (size_t i = 0; i < 7; ++i) CHECK(train[i].user_id == "u" + std::to_string(i));
    CHECK(val[0].user_id == "u7");
    CHECK(test[0].user_id == "u8");
    CHECK(test[1].user_id == "u9");
}

TEST_CASE("shuffling the input does not change the split") {
    Rng rng(4);
    std::vector<int64_t> stamps;
    for (int i = 0; i < 50; ++i) stamps.push_back(1000 + i * 3);  // distinct
    auto sorted_logs = make_logs(stamps);
    auto shuffled = sorted_logs;
    rng.shuffle(shuffled);
    auto [a_train, a_val, a_test] = time_split(sorted_logs, SplitSpec{});
    auto [b_train, b_val, b_test] = time_split(shuffled, SplitSpec{});
    CHECK(a_train == b_train);
    CHECK(a_val == b_val);
    CHECK(a_test == b_test);
}

TEST_CASE("time_split ordering invariant holds for arbitrary timestamp multisets") {
    Rng rng(6);
    for (int trial = 0; trial < 100; ++trial) {
        int n = 3 + static_cast<int>(rng.below(40));
        std::vector<int64_t> stamps;
        for (int i = 0; i < n; ++i) stamps.push_back(rng.below(8));  // heavy ties
        auto logs = make_logs(stamps);
        auto [train, val, test] = time_split(logs, SplitSpec{});
        CHECK(train.size() + val.size() + test.size() == logs.size());
        auto max_ts = [](const std::vector<ImpressionLog>& v) {
            int64_t m = INT64_MIN;
            for (const auto& l : v) m = std::max(m, l.ts);
            return m;
        };
        auto min_ts = [](const std::vector<ImpressionLog>& v) {
            int64_t m = INT64_MAX;
            for (const auto& l : v) m = std::min(m, l.ts);
            return m;
        };
        if (!train.empty() && !val.empty()) CHECK(max_ts(train) <= min_ts(val));
        if (!val.empty() && !test.empty()) CHECK(max_ts(val) <= min_ts(test));
        if (!train.empty() && !test.empty()) CHECK(max_ts(train) <= min_ts(test));
    }
}

TEST_CASE("time_split rejects tiny or inconsistent inputs") {
    CHECK_THROWS_AS(time_split(make_logs({1, 2}), SplitSpec{}), std::invalid_argument);
    CHECK_THROWS_AS(time_split(make_logs({1, 2, 3}), SplitSpec{0.5, 0.1, 0.1}),
                    std::invalid_argument);
}

TEST_CASE("subsample is user-stratified") {
    SUBCASE("fraction one is the identity") {
        auto logs = make_logs({1, 2, 3, 4, 5});
        CHECK(subsample(logs, 1.0, 7) == logs);
    }
    SUBCASE("20 percent of one user's 100 logs is exactly 20") {
        std::vector<ImpressionLog> logs;
        for (int i = 0; i < 100; ++i) {
            ImpressionLog log;
            log.user_id = "solo";
            log.ts = i;
            log.candidates = {"n0"};
            logs.push_back(log);
        }
        auto out = subsample(logs, 0.2, 3);
        CHECK(out.size() == 20);
        for (size_t i = 1; i < out.size(); ++i) CHECK(out[i - 1].ts < out[i].ts);  // input order
    }
    SUBCASE("per-user sizes stay within one of the target") {
        Rng rng(5);
        std::vector<ImpressionLog> logs;
        for (int i = 0; i < 300; ++i) {
            ImpressionLog log;
            log.user_id = "u" + std::to_string(rng.below(7));
            log.ts = i;
            log.candidates = {"n0"};
            logs.push_back(log);
        }
        double fraction = 0.4;
        auto out = subsample(logs, fraction, 11);
        std::map<std::string, int> before, after;
        for (const auto& l : logs) before[l.user_id]++;
        for (const auto& l : out) after[l.user_id]++;
        for (const auto& [user, count] : before) {
            CHECK(std::fabs(after[user] - fraction * count) <= 1.0);
        }
    }
    SUBCASE("different seeds give different subsets of the same size") {
        std::vector<ImpressionLog> logs;
        for (int i = 0; i < 60; ++i) {
            ImpressionLog log;
            log.user_id = "solo";
            log.ts = i;
            log.candidates = {"n0"};
            logs.push_back(log);
        }
        auto a = subsample(logs, 0.5, 1);
        auto b = subsample(logs, 0.5, 2);
        CHECK(a.size() == b.size());
        CHECK(a != b);
    }
    SUBCASE("fraction bounds are enforced") {
        auto logs = make_logs({1, 2, 3});
        CHECK_THROWS_AS(subsample(logs, 0.0, 1), std::invalid_argument);
        CHECK_THROWS_AS(subsample(logs, 1.5, 1), std::invalid_argument);
    }
}

TEST_CASE("synthetic generation is deterministic and validated") {
    SynthConfig cfg;
    cfg.n_users = 10;
    cfg.n_news = 30;
    cfg.n_impressions = 50;
    cfg.ee_sentences = 20;
    auto a = generate_synthetic(cfg, 77);
    auto b = generate_synthetic(cfg, 77);
    CHECK(a.ee_corpus == b.ee_corpus);
    CHECK(a.news == b.news);
    CHECK(a.impressions == b.impressions);
    CHECK(a.truth.etype_weights == b.truth.etype_weights);

    auto c = generate_synthetic(cfg, 78);
    CHECK(a.impressions != c.impressions);

    SynthConfig bad = cfg;
    bad.n_users = 0;
    CHECK_THROWS_AS(generate_synthetic(bad, 1), std::invalid_argument);
}

TEST_CASE("synthetic corpus round-trips losslessly through the writers") {
    SynthConfig cfg;
    cfg.n_users = 8;
    cfg.n_news = 20;
    cfg.n_impressions = 40;
    cfg.ee_sentences = 10;
    auto result = generate_synthetic(cfg, 5);

    TempFile news("synth_news.jsonl"), imps("synth_imps.jsonl"), corpus("synth_ee.jsonl"),
        truth("synth_truth.json");
    save_news(news.path, result.news);
    save_impressions(imps.path, result.impressions);
    save_ee_corpus(corpus.path, result.ee_corpus);
    save_ground_truth(truth.path, result.truth);

    auto [news2, imps2] = load_logs(news.path, imps.path);
    CHECK(news2 == result.news);
    CHECK(imps2 == result.impressions);
    CHECK(load_ee_corpus(corpus.path) == result.ee_corpus);

    // the ground-truth file keys weights by name; compare per name since the
    // loader's name order follows the JSON (sorted) ordering
    auto truth2 = load_ground_truth(truth.path);
    REQUIRE(truth2.etype_weights.size() == result.truth.etype_weights.size());
    for (const auto& [uid, weights] : result.truth.etype_weights) {
        for (size_t t = 0; t < result.truth.event_types.size(); ++t) {
            const auto& name = result.truth.event_types[t];
            auto it = std::find(truth2.event_types.begin(), truth2.event_types.end(), name);
            REQUIRE(it != truth2.event_types.end());
            auto idx = static_cast<size_t>(it - truth2.event_types.begin());
            CHECK(truth2.etype_weights.at(uid)[idx] == weights[t]);
        }
    }
}

TEST_CASE("annotation spans always match the sentence text") {
    auto sentences = synth_ee_sentences(200, 12, 9);
    for (const auto& s : sentences) {
        CHECK_FALSE(s.events.empty());
        for (const auto& ev : s.events) {
            for (const auto& arg : ev.arguments) {
                REQUIRE(arg.start >= 0);
                CHECK(s.text.substr(static_cast<size_t>(arg.start),
                                    static_cast<size_t>(arg.len)) == arg.argument);
            }
        }
    }
}

TEST_CASE("extreme sharpness: the ground-truth oracle ranks perfectly") {
    SynthConfig cfg;
    cfg.n_users = 20;
    cfg.n_news = 120;
    cfg.n_impressions = 300;
    cfg.ee_sentences = 5;
    cfg.sharpness = 1e6;
    auto result = generate_synthetic(cfg, 21);

    std::vector<ImpressionScores> scored;
    for (const auto& imp : result.impressions) {
        ImpressionScores s;
        for (const auto& id : imp.candidates) {
            s.scores.push_back(result.truth.oracle_score(imp.user_id, id));
            bool clicked =
                std::find(imp.clicked.begin(), imp.clicked.end(), id) != imp.clicked.end();
            s.labels.push_back(clicked ? 1 : 0);
        }
        scored.push_back(std::move(s));
    }
    MetricReport report = evaluate_rankings(scored);
    CHECK(report.auc == 1.0);
}

TEST_CASE("zero sharpness: clicks carry no content signal") {
    SynthConfig cfg;
    cfg.n_users = 30;
    cfg.n_news = 100;
    cfg.n_impressions = 3000;  // ~10k+ pooled pairs
    cfg.ee_sentences = 5;
    cfg.sharpness = 0.0;
    auto result = generate_synthetic(cfg, 22);

    // arbitrary content-based ranker: hash of the news id
    std::vector<ImpressionScores> scored;
    int64_t pairs = 0;
    for (const auto& imp : result.impressions) {
        ImpressionScores s;
        int pos = 0, neg = 0;
        for (const auto& id : imp.candidates) {
            uint64_t h = 1469598103934665603ULL;
            for (char c : id) h = (h ^ static_cast<unsigned char>(c)) * 1099511628211ULL;
            s.scores.push_back(static_cast<double>(h % 1000));
            bool clicked =
                std::find(imp.clicked.begin(), imp.clicked.end(), id) != imp.clicked.end();
            s.labels.push_back(clicked ? 1 : 0);
            (clicked ? pos : neg)++;
        }
        pairs += static_cast<int64_t>(pos) * neg;
        scored.push_back(std::move(s));
    }
    REQUIRE(pairs >= 10000);
    CHECK(std::fabs(global_auc(scored) - 0.5) <= 0.03);
}

TEST_CASE("planted signal: the oracle beats any content-blind ranker") {
    SynthConfig cfg;
    cfg.n_users = 25;
    cfg.n_news = 80;
    cfg.n_impressions = 800;
    cfg.ee_sentences = 5;
    cfg.sharpness = 4.0;
    auto result = generate_synthetic(cfg, 23);

    std::vector<ImpressionScores> oracle_scored, blind_scored;
    for (const auto& imp : result.impressions) {
        ImpressionScores o, b;
        for (size_t i = 0; i < imp.candidates.size(); ++i) {
            const auto& id = imp.candidates[i];
            o.scores.push_back(result.truth.oracle_score(imp.user_id, id));
            b.scores.push_back(static_cast<double>(i));  // position-based, content-blind
            bool clicked =
                std::find(imp.clicked.begin(), imp.clicked.end(), id) != imp.clicked.end();
            o.labels.push_back(clicked ? 1 : 0);
            b.labels.push_back(clicked ? 1 : 0);
        }
        oracle_scored.push_back(std::move(o));
        blind_scored.push_back(std::move(b));
    }
    double oracle_auc = evaluate_rankings(oracle_scored).auc;
    double blind_auc = evaluate_rankings(blind_scored).auc;
    CHECK(oracle_auc > 0.8);
    CHECK(oracle_auc > blind_auc + 0.2);
}

TEST_CASE("schema bookkeeping") {
    SynthConfig cfg;
    cfg.n_users = 2;
    cfg.n_news = 6;
    cfg.n_impressions = 5;
    cfg.ee_sentences = 30;
    auto result = generate_synthetic(cfg, 3);
    const auto& schema = result.schema;
    CHECK(schema.event_types.size() == 12);
    for (const auto& type : schema.event_types) {
        CHECK_FALSE(schema.roles_by_type.at(type).empty());
        CHECK(EventSchema::class_of(type) == type.substr(0, type.find('/')));
    }
    auto derived = EventSchema::from_sentences(result.ee_corpus);
    for (const auto& type : derived.event_types) CHECK(schema.has_type(type));
}
