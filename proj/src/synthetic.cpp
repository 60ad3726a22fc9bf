#include "eenr/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <unordered_set>

#include <json.hpp>

#include "eenr/rng.hpp"

namespace eenr {

using nlohmann::json;

namespace {

// ---- template bank ----------------------------------------------------------
// Slot fillers never contain sentence-final punctuation, so character spans
// survive body assembly and sentence splitting.

struct TypeSpec {
    const char* name;
    std::vector<std::pair<const char*, const char*>> roles;  // role -> filler kind
    std::vector<const char*> templates;                      // every template uses all roles
};

const std::vector<TypeSpec>& type_bank() {
    static const std::vector<TypeSpec> bank = {
        {"Corporate/Merger",
         {{"acquirer", "company"}, {"target", "company"}, {"deal value", "money"}},
         {"{acquirer} agreed to acquire {target} for {deal value}.",
          "{acquirer} will buy {target} in a {deal value} deal."}},
        {"Corporate/Layoff",
         {{"employer", "company"}, {"headcount", "number"}},
         {"{employer} plans to cut {headcount} jobs this quarter.",
          "{employer} said it will lay off {headcount} workers."}},
        {"Market/Rally",
         {{"index", "index"}, {"gain", "percent"}},
         {"The {index} climbed {gain} in early trading.",
          "The {index} rallied {gain} after the announcement."}},
        {"Market/Selloff",
         {{"index", "index"}, {"drop", "percent"}},
         {"The {index} slid {drop} amid heavy selling.",
          "The {index} dropped {drop} before the close."}},
        {"Product/Launch",
         {{"maker", "company"}, {"product", "product"}},
         {"{maker} unveiled the {product} at its annual event.",
          "{maker} launched the {product} on Monday."}},
        {"Product/Recall",
         {{"maker", "company"}, {"product", "product"}},
         {"{maker} recalled the {product} over safety concerns.",
          "{maker} pulled the {product} from store shelves."}},
        {"Legal/Lawsuit",
         {{"plaintiff", "company"}, {"defendant", "company"}},
         {"{plaintiff} filed a lawsuit against {defendant}.",
          "{plaintiff} is suing {defendant} over the contract."}},
        {"Legal/Settlement",
         {{"payer", "company"}, {"amount", "money"}},
         {"{payer} agreed to pay {amount} to settle the case.",
          "{payer} reached a {amount} settlement with regulators."}},
        {"Disaster/Earthquake",
         {{"location", "place"}, {"magnitude", "number"}},
         {"A magnitude {magnitude} earthquake struck {location}.",
          "An earthquake of magnitude {magnitude} hit {location} overnight."}},
        {"Disaster/Flood",
         {{"location", "place"}, {"displaced", "number"}},
         {"Floods in {location} displaced {displaced} residents.",
          "Heavy rain flooded {location} and forced {displaced} people to evacuate."}},
        {"Sports/Victory",
         {{"winner", "team"}, {"loser", "team"}},
         {"{winner} defeated {loser} in the final.",
          "{winner} beat {loser} to take the title."}},
        {"Sports/Transfer",
         {{"player", "person"}, {"club", "team"}},
         {"{player} signed with {club} on a long-term deal.",
          "{club} announced the signing of {player}."}},
    };
    return bank;
}

const std::map<std::string, std::vector<const char*>>& filler_bank() {
    static const std::map<std::string, std::vector<const char*>> bank = {
        {"company",
         {"Acme Corp", "Zenith Ltd", "Nova Systems", "Orbit Labs", "Pinnacle Group",
          "Vertex Holdings", "Quantum Works", "Stellar Inc", "Apex Media", "Crown Industries"}},
        {"index", {"Dow", "Nasdaq", "Global 500", "FTSE", "DAX", "Nikkei"}},
        {"percent", {"2 percent", "5 percent", "1 percent", "8 percent", "3 percent", "11 percent"}},
        {"money",
         {"300 million dollars", "2 billion dollars", "45 million dollars",
          "120 million dollars", "5 billion dollars", "760 million dollars"}},
        {"number", {"600", "1200", "75", "3400", "210", "58"}},
        {"product",
         {"Falcon phone", "Atlas drone", "Nimbus laptop", "Pulse watch", "Echo speaker",
          "Vertex router"}},
        {"place", {"Oakdale", "Riverton", "Mill Valley", "Port Hansen", "Kingsford", "Lakewood"}},
        {"person",
         {"Alex Moreno", "Jamie Chen", "Sam Okafor", "Riley Novak", "Casey Brandt",
          "Jordan Hale"}},
        {"team",
         {"Falcons United", "Harbor City", "Redwood FC", "Summit Rovers", "Northgate",
          "Silver Peak"}},
    };
    return bank;
}

const std::vector<const char*>& category_bank() {
    static const std::vector<const char*> bank = {"markets",  "technology", "sports",
                                                  "politics", "health",     "energy",
                                                  "travel",   "culture"};
    return bank;
}

const std::vector<const char*>& title_word_bank() {
    static const std::vector<const char*> bank = {
        "daily",  "update",   "report", "briefing", "morning", "evening",  "weekly",
        "wrap",   "analysis", "outlook", "notes",   "digest",  "live",     "special",
        "review", "focus",    "spotlight", "recap", "brief",   "pulse"};
    return bank;
}

// Expand a template into text plus exact argument spans.
std::pair<std::string, std::vector<ArgumentSpan>> expand_template(const TypeSpec& type,
                                                                  const char* pattern, Rng& rng) {
    std::string text;
    std::vector<ArgumentSpan> spans;
    const std::string pat(pattern);
    size_t pos = 0;
    while (pos < pat.size()) {
        auto open = pat.find('{', pos);
        if (open == std::string::npos) {
            text += pat.substr(pos);
            break;
        }
        text += pat.substr(pos, open - pos);
        auto close = pat.find('}', open);
        std::string role = pat.substr(open + 1, close - open - 1);
        const char* kind = nullptr;
        for (const auto& [r, k] : type.roles) {
            if (role == r) kind = k;
        }
        if (!kind) throw std::logic_error("template slot '" + role + "' missing from role list");
        const auto& pool = filler_bank().at(kind);
        const char* filler = pool[static_cast<size_t>(rng.below(static_cast<int64_t>(pool.size())))];
        ArgumentSpan span;
        span.role = role;
        span.argument = filler;
        span.start = static_cast<int>(text.size());
        span.len = static_cast<int>(span.argument.size());
        spans.push_back(std::move(span));
        text += filler;
        pos = close + 1;
    }
    return {std::move(text), std::move(spans)};
}

AnnotatedSentence make_sentence(int type_index, const std::string& id, Rng& rng) {
    const TypeSpec& type = type_bank()[static_cast<size_t>(type_index)];
    const char* pattern =
        type.templates[static_cast<size_t>(rng.below(static_cast<int64_t>(type.templates.size())))];
    auto [text, spans] = expand_template(type, pattern, rng);
    AnnotatedSentence sent;
    sent.id = id;
    sent.text = std::move(text);
    EventAnnotation ann;
    ann.event_type = type.name;
    ann.arguments = std::move(spans);
    sent.events.push_back(std::move(ann));
    return sent;
}

std::vector<double> sample_interest(int n, double sharpness, Rng& rng) {
    std::vector<double> z(static_cast<size_t>(n));
    for (auto& v : z) v = sharpness * rng.normal();
    double m = *std::max_element(z.begin(), z.end());
    double total = 0.0;
    for (auto& v : z) {
        v = std::exp(v - m);
        total += v;
    }
    for (auto& v : z) v /= total;
    return z;
}

}  // namespace

double GroundTruth::oracle_score(const std::string& user_id, const std::string& news_id) const {
    const auto& iet = etype_weights.at(user_id);
    const auto& icat = category_weights.at(user_id);
    auto [t, c] = news_latents.at(news_id);
    double tn = static_cast<double>(event_types.size());
    double cn = static_cast<double>(categories.size());
    double score = w_etype * (iet[static_cast<size_t>(t)] - 1.0 / tn) +
                   w_category * (icat[static_cast<size_t>(c)] - 1.0 / cn);
    return sharpness * score + click_bias;
}

std::vector<AnnotatedSentence> synth_ee_sentences(int n_sentences, int n_event_types,
                                                  uint64_t seed) {
    if (n_event_types <= 0 || n_event_types > static_cast<int>(type_bank().size())) {
        throw std::invalid_argument("synth_ee_sentences: n_event_types must be in [1, " +
                                    std::to_string(type_bank().size()) + "]");
    }
    Rng rng(seed);
    std::vector<AnnotatedSentence> out;
    out.reserve(static_cast<size_t>(n_sentences));
    for (int i = 0; i < n_sentences; ++i) {
        int t = static_cast<int>(rng.below(n_event_types));
        out.push_back(make_sentence(t, "s" + std::to_string(i), rng));
    }
    return out;
}

SynthResult generate_synthetic(const SynthConfig& config, uint64_t seed) {
    if (config.n_users <= 0 || config.n_news <= 0 || config.n_impressions <= 0) {
        throw std::invalid_argument("generate_synthetic: users, news and impressions must be > 0");
    }
    if (config.n_event_types <= 0 ||
        config.n_event_types > static_cast<int>(type_bank().size())) {
        throw std::invalid_argument("generate_synthetic: n_event_types must be in [1, " +
                                    std::to_string(type_bank().size()) + "]");
    }
    if (config.n_categories <= 0 ||
        config.n_categories > static_cast<int>(category_bank().size())) {
        throw std::invalid_argument("generate_synthetic: n_categories must be in [1, " +
                                    std::to_string(category_bank().size()) + "]");
    }
    if (config.candidates_per_impression < 2 ||
        config.candidates_per_impression > config.n_news) {
        throw std::invalid_argument(
            "generate_synthetic: candidates_per_impression must be in [2, n_news]");
    }

    SynthResult result;
    Rng rng(seed);

    // schema
    for (int t = 0; t < config.n_event_types; ++t) {
        const TypeSpec& spec = type_bank()[static_cast<size_t>(t)];
        result.schema.event_types.push_back(spec.name);
        auto& roles = result.schema.roles_by_type[spec.name];
        for (const auto& [role, kind] : spec.roles) roles.push_back(role);
    }
    result.truth.event_types = result.schema.event_types;
    for (int c = 0; c < config.n_categories; ++c) {
        result.truth.categories.push_back(category_bank()[static_cast<size_t>(c)]);
    }
    result.truth.w_etype = config.w_etype;
    result.truth.w_category = config.w_category;
    result.truth.click_bias = config.click_bias;
    result.truth.sharpness = config.sharpness;

    // EE training corpus
    {
        Rng ee_rng = rng.fork(1);
        for (int i = 0; i < config.ee_sentences; ++i) {
            int t = static_cast<int>(ee_rng.below(config.n_event_types));
            result.ee_corpus.push_back(make_sentence(t, "s" + std::to_string(i), ee_rng));
        }
    }

    // users
    std::vector<std::string> user_ids;
    {
        Rng user_rng = rng.fork(2);
        for (int u = 0; u < config.n_users; ++u) {
            std::string uid = "u" + std::to_string(u);
            user_ids.push_back(uid);
            result.truth.etype_weights[uid] =
                sample_interest(config.n_event_types, config.sharpness, user_rng);
            result.truth.category_weights[uid] =
                sample_interest(config.n_categories, config.sharpness, user_rng);
        }
    }

    // news
    std::vector<int> news_type(static_cast<size_t>(config.n_news));
    std::vector<int> news_cat(static_cast<size_t>(config.n_news));
    {
        Rng news_rng = rng.fork(3);
        for (int i = 0; i < config.n_news; ++i) {
            NewsItem item;
            item.news_id = "n" + std::to_string(i);
            int lead_type = static_cast<int>(news_rng.below(config.n_event_types));
            int cat = static_cast<int>(news_rng.below(config.n_categories));
            news_type[static_cast<size_t>(i)] = lead_type;
            news_cat[static_cast<size_t>(i)] = cat;
            item.category = category_bank()[static_cast<size_t>(cat)];

            int n_title = 3 + static_cast<int>(news_rng.below(4));
            const auto& words = title_word_bank();
            for (int w = 0; w < n_title; ++w) {
                item.title.push_back(
                    words[static_cast<size_t>(news_rng.below(static_cast<int64_t>(words.size())))]);
            }
            if (news_rng.uniform() < config.title_category_prob) {
                auto at = static_cast<size_t>(news_rng.below(static_cast<int64_t>(item.title.size()) + 1));
                item.title.insert(item.title.begin() + static_cast<long>(at), item.category);
            }

            int n_sent = 1 + static_cast<int>(news_rng.below(3));
            std::string body;
            for (int s = 0; s < n_sent; ++s) {
                int t = lead_type;
                if (s > 0 && news_rng.uniform() >= config.extra_same_type_prob) {
                    t = static_cast<int>(news_rng.below(config.n_event_types));
                }
                AnnotatedSentence sent = make_sentence(t, "", news_rng);
                if (!body.empty()) body += " ";
                body += sent.text;
            }
            item.body = std::move(body);
            result.truth.news_latents[item.news_id] = {lead_type, cat};
            result.news.push_back(std::move(item));
        }
    }

    // impressions
    {
        Rng imp_rng = rng.fork(4);
        const int n_cand = config.candidates_per_impression;
        for (int i = 0; i < config.n_impressions; ++i) {
            ImpressionLog log;
            log.user_id = user_ids[static_cast<size_t>(imp_rng.below(config.n_users))];
            log.ts = config.t0 + static_cast<int64_t>(i) * 60;

            const auto& iet = result.truth.etype_weights[log.user_id];
            const auto& icat = result.truth.category_weights[log.user_id];
            auto click_logit = [&](int news_index) {
                double tn = static_cast<double>(config.n_event_types);
                double cn = static_cast<double>(config.n_categories);
                double score =
                    config.w_etype *
                        (iet[static_cast<size_t>(news_type[static_cast<size_t>(news_index)])] -
                         1.0 / tn) +
                    config.w_category *
                        (icat[static_cast<size_t>(news_cat[static_cast<size_t>(news_index)])] -
                         1.0 / cn);
                return config.sharpness * score + config.click_bias;
            };

            std::vector<int> cand;
            std::vector<char> clicked;
            bool ok = false;
            for (int attempt = 0; attempt < 20 && !ok; ++attempt) {
                cand.clear();
                std::unordered_set<int> seen;
                while (static_cast<int>(cand.size()) < n_cand) {
                    int n = static_cast<int>(imp_rng.below(config.n_news));
                    if (seen.insert(n).second) cand.push_back(n);
                }
                clicked.assign(cand.size(), 0);
                int n_clicked = 0;
                for (size_t c = 0; c < cand.size(); ++c) {
                    double p = 1.0 / (1.0 + std::exp(-click_logit(cand[c])));
                    if (imp_rng.uniform() < p) {
                        clicked[c] = 1;
                        ++n_clicked;
                    }
                }
                ok = n_clicked >= 1 && n_clicked < static_cast<int>(cand.size());
            }
            if (!ok) {
                // plant one clearly-best candidate and keep the rest below it
                int best = 0;
                double best_score = click_logit(0);
                for (int n = 1; n < config.n_news; ++n) {
                    double s = click_logit(n);
                    if (s > best_score) {
                        best = n;
                        best_score = s;
                    }
                }
                cand[0] = best;
                for (size_t c = 1; c < cand.size(); ++c) {
                    for (int attempt = 0; attempt < 50; ++attempt) {
                        bool dup = false;
                        for (size_t d = 0; d < c; ++d) dup |= cand[d] == cand[c];
                        if (!dup && click_logit(cand[c]) < best_score) break;
                        cand[c] = static_cast<int>(imp_rng.below(config.n_news));
                    }
                }
                clicked.assign(cand.size(), 0);
                clicked[0] = 1;
            }

            for (size_t c = 0; c < cand.size(); ++c) {
                log.candidates.push_back(result.news[static_cast<size_t>(cand[c])].news_id);
                if (clicked[c]) log.clicked.push_back(log.candidates.back());
            }
            result.impressions.push_back(std::move(log));
        }
    }

    return result;
}

void save_ground_truth(const std::string& path, const GroundTruth& truth) {
    json j = json::object();
    for (const auto& [uid, weights] : truth.etype_weights) {
        json et = json::object();
        for (size_t t = 0; t < truth.event_types.size(); ++t) et[truth.event_types[t]] = weights[t];
        json cat = json::object();
        const auto& cw = truth.category_weights.at(uid);
        for (size_t c = 0; c < truth.categories.size(); ++c) cat[truth.categories[c]] = cw[c];
        j[uid] = {{"etype_weights", std::move(et)}, {"category_weights", std::move(cat)}};
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << j.dump(2) << "\n";
}

GroundTruth load_ground_truth(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    json j;
    in >> j;
    GroundTruth truth;
    bool first = true;
    for (auto& [uid, entry] : j.items()) {
        if (first) {
            for (auto& [name, w] : entry["etype_weights"].items()) {
                truth.event_types.push_back(name);
            }
            for (auto& [name, w] : entry["category_weights"].items()) {
                truth.categories.push_back(name);
            }
            first = false;
        }
        std::vector<double> et;
        for (const auto& name : truth.event_types) et.push_back(entry["etype_weights"][name]);
        std::vector<double> cat;
        for (const auto& name : truth.categories) cat.push_back(entry["category_weights"][name]);
        truth.etype_weights[uid] = std::move(et);
        truth.category_weights[uid] = std::move(cat);
    }
    return truth;
}

}  // namespace eenr
