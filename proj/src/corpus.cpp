#include "eenr/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "eenr/rng.hpp"

namespace eenr {

using nlohmann::json;

std::string EventSchema::class_of(const std::string& event_type) {
    auto pos = event_type.find('/');
    return pos == std::string::npos ? event_type : event_type.substr(0, pos);
}

bool EventSchema::has_type(const std::string& event_type) const {
    return roles_by_type.count(event_type) > 0;
}

bool EventSchema::has_role(const std::string& event_type, const std::string& role) const {
    auto it = roles_by_type.find(event_type);
    if (it == roles_by_type.end()) return false;
    return std::find(it->second.begin(), it->second.end(), role) != it->second.end();
}

const std::vector<std::string>& EventSchema::roles(const std::string& event_type) const {
    auto it = roles_by_type.find(event_type);
    if (it == roles_by_type.end()) {
        throw std::invalid_argument("EventSchema: unknown event type '" + event_type + "'");
    }
    return it->second;
}

int EventSchema::type_index(const std::string& event_type) const {
    for (size_t i = 0; i < event_types.size(); ++i) {
        if (event_types[i] == event_type) return static_cast<int>(i);
    }
    return -1;
}

EventSchema EventSchema::from_sentences(const std::vector<AnnotatedSentence>& sentences) {
    EventSchema schema;
    for (const auto& s : sentences) {
        for (const auto& ev : s.events) {
            if (!schema.has_type(ev.event_type)) {
                schema.event_types.push_back(ev.event_type);
                schema.roles_by_type[ev.event_type] = {};
            }
            auto& roles = schema.roles_by_type[ev.event_type];
            for (const auto& arg : ev.arguments) {
                if (std::find(roles.begin(), roles.end(), arg.role) == roles.end()) {
                    roles.push_back(arg.role);
                }
            }
        }
    }
    return schema;
}

std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

// ---- EE corpus --------------------------------------------------------------

namespace {

json parse_line(const std::string& line, const std::string& path, int line_no) {
    try {
        return json::parse(line);
    } catch (const json::parse_error& e) {
        throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                 ": malformed JSON: " + e.what());
    }
}

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

bool is_blank(const std::string& s) {
    return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

}  // namespace

std::vector<AnnotatedSentence> load_ee_corpus(const std::string& path, LoadStats* stats) {
    std::vector<AnnotatedSentence> out;
    LoadStats local;
    int line_no = 0;
    for (const auto& line : read_lines(path)) {
        ++line_no;
        if (is_blank(line)) continue;
        json j = parse_line(line, path, line_no);
        AnnotatedSentence sent;
        sent.id = j.value("id", "");
        sent.text = j.value("text", "");
        for (const auto& ev : j.value("event_list", json::array())) {
            EventAnnotation ann;
            ann.event_type = ev.value("event_type", "");
            bool ok = true;
            for (const auto& arg : ev.value("arguments", json::array())) {
                ArgumentSpan span;
                span.role = arg.value("role", "");
                span.argument = arg.value("argument", "");
                if (arg.contains("argument_start_index")) {
                    span.start = arg["argument_start_index"].get<int>();
                    span.len = static_cast<int>(span.argument.size());
                    if (span.start < 0 ||
                        sent.text.compare(static_cast<size_t>(span.start), span.argument.size(),
                                          span.argument) != 0) {
                        ok = false;
                        break;
                    }
                } else {
                    auto pos = sent.text.find(span.argument);
                    if (span.argument.empty() || pos == std::string::npos) {
                        ok = false;
                        break;
                    }
                    span.start = static_cast<int>(pos);
                    span.len = static_cast<int>(span.argument.size());
                }
                ann.arguments.push_back(std::move(span));
            }
            if (ok) {
                sent.events.push_back(std::move(ann));
            } else {
                ++local.skipped_events;
            }
        }
        out.push_back(std::move(sent));
    }
    if (stats) *stats = local;
    return out;
}

void save_ee_corpus(const std::string& path, const std::vector<AnnotatedSentence>& sentences) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    for (const auto& s : sentences) {
        json events = json::array();
        for (const auto& ev : s.events) {
            json args = json::array();
            for (const auto& a : ev.arguments) {
                json ja = {{"role", a.role}, {"argument", a.argument}};
                if (a.start >= 0) ja["argument_start_index"] = a.start;
                args.push_back(std::move(ja));
            }
            events.push_back({{"event_type", ev.event_type}, {"arguments", std::move(args)}});
        }
        json j = {{"id", s.id}, {"text", s.text}, {"event_list", std::move(events)}};
        out << j.dump() << "\n";
    }
}

// ---- news and impressions ---------------------------------------------------

std::vector<NewsItem> load_news(const std::string& path) {
    std::vector<NewsItem> out;
    int line_no = 0;
    for (const auto& line : read_lines(path)) {
        ++line_no;
        if (is_blank(line)) continue;
        json j = parse_line(line, path, line_no);
        NewsItem item;
        item.news_id = j.value("news_id", "");
        item.title = j.value("title", std::vector<std::string>{});
        item.category = j.value("category", "");
        item.body = j.value("body", "");
        for (const auto& ev : j.value("events", json::array())) {
            EventRecord rec;
            rec.event_type = ev.value("event_type", "");
            rec.event_class = ev.value("class", EventSchema::class_of(rec.event_type));
            for (const auto& arg : ev.value("arguments", json::array())) {
                ArgumentSpan span;
                span.role = arg.value("role", "");
                span.argument = arg.value("argument", "");
                auto pos = item.body.find(span.argument);
                if (pos != std::string::npos) {
                    span.start = static_cast<int>(pos);
                    span.len = static_cast<int>(span.argument.size());
                }
                rec.arguments.push_back(std::move(span));
            }
            item.events.push_back(std::move(rec));
        }
        if (item.news_id.empty()) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": missing news_id");
        }
        out.push_back(std::move(item));
    }
    return out;
}

std::vector<ImpressionLog> load_impressions(const std::string& path) {
    std::vector<ImpressionLog> out;
    int line_no = 0;
    for (const auto& line : read_lines(path)) {
        ++line_no;
        if (is_blank(line)) continue;
        json j = parse_line(line, path, line_no);
        ImpressionLog log;
        log.user_id = j.value("user_id", "");
        log.ts = j.value("ts", int64_t{0});
        log.candidates = j.value("candidates", std::vector<std::string>{});
        log.clicked = j.value("clicked", std::vector<std::string>{});
        if (log.candidates.empty()) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                     ": impression has no candidates");
        }
        std::set<std::string> cand(log.candidates.begin(), log.candidates.end());
        for (const auto& c : log.clicked) {
            if (!cand.count(c)) {
                throw std::runtime_error(path + ":" + std::to_string(line_no) + ": clicked id '" +
                                         c + "' is not among the candidates");
            }
        }
        out.push_back(std::move(log));
    }
    return out;
}

std::pair<std::vector<NewsItem>, std::vector<ImpressionLog>> load_logs(
    const std::string& news_path, const std::string& impressions_path) {
    auto news = load_news(news_path);
    auto impressions = load_impressions(impressions_path);

    std::unordered_set<std::string> ids;
    for (const auto& n : news) {
        if (!ids.insert(n.news_id).second) {
            throw std::runtime_error(news_path + ": duplicate news_id '" + n.news_id + "'");
        }
    }
    std::set<std::string> dangling;
    for (const auto& log : impressions) {
        for (const auto& c : log.candidates) {
            if (!ids.count(c)) dangling.insert(c);
        }
    }
    if (!dangling.empty()) {
        std::string msg = impressions_path + ": candidates reference unknown news ids:";
        int shown = 0;
        for (const auto& id : dangling) {
            msg += " " + id;
            if (++shown == 10) {
                msg += " ...";
                break;
            }
        }
        throw std::runtime_error(msg);
    }
    return {std::move(news), std::move(impressions)};
}

void save_news(const std::string& path, const std::vector<NewsItem>& news) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    for (const auto& n : news) {
        json j = {{"news_id", n.news_id},
                  {"title", n.title},
                  {"category", n.category},
                  {"body", n.body}};
        if (!n.events.empty()) {
            json events = json::array();
            for (const auto& ev : n.events) {
                json args = json::array();
                for (const auto& a : ev.arguments) {
                    args.push_back({{"role", a.role}, {"argument", a.argument}});
                }
                events.push_back({{"event_type", ev.event_type},
                                  {"arguments", std::move(args)},
                                  {"class", ev.event_class}});
            }
            j["events"] = std::move(events);
        }
        out << j.dump() << "\n";
    }
}

void save_impressions(const std::string& path, const std::vector<ImpressionLog>& impressions) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    for (const auto& log : impressions) {
        json j = {{"user_id", log.user_id},
                  {"ts", log.ts},
                  {"candidates", log.candidates},
                  {"clicked", log.clicked}};
        out << j.dump() << "\n";
    }
}

// ---- split and subsample ------------------------------------------------------

std::tuple<std::vector<ImpressionLog>, std::vector<ImpressionLog>, std::vector<ImpressionLog>>
time_split(const std::vector<ImpressionLog>& logs, const SplitSpec& spec) {
    if (logs.size() < 3) {
        throw std::invalid_argument("time_split: need at least 3 logs, got " +
                                    std::to_string(logs.size()));
    }
    double total = spec.train + spec.val + spec.test;
    if (std::fabs(total - 1.0) > 1e-9) {
        throw std::invalid_argument("time_split: fractions must sum to 1, got " +
                                    std::to_string(total));
    }
    std::vector<size_t> order(logs.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](size_t a, size_t b) { return logs[a].ts < logs[b].ts; });

    auto n = static_cast<int64_t>(logs.size());
    auto n_train = static_cast<int64_t>(std::llround(spec.train * static_cast<double>(n)));
    auto n_train_val =
        static_cast<int64_t>(std::llround((spec.train + spec.val) * static_cast<double>(n)));
    n_train = std::clamp<int64_t>(n_train, 0, n);
    n_train_val = std::clamp<int64_t>(n_train_val, n_train, n);

    std::vector<ImpressionLog> train, val, test;
    for (int64_t i = 0; i < n; ++i) {
        const auto& log = logs[order[static_cast<size_t>(i)]];
        if (i < n_train)
            train.push_back(log);
        else if (i < n_train_val)
            val.push_back(log);
        else
            test.push_back(log);
    }
    return {std::move(train), std::move(val), std::move(test)};
}

std::vector<ImpressionLog> subsample(const std::vector<ImpressionLog>& logs, double fraction,
                                     uint64_t seed) {
    if (!(fraction > 0.0 && fraction <= 1.0)) {
        throw std::invalid_argument("subsample: fraction must be in (0, 1], got " +
                                    std::to_string(fraction));
    }
    if (fraction == 1.0) return logs;

    std::unordered_map<std::string, std::vector<size_t>> by_user;
    std::vector<std::string> user_order;
    for (size_t i = 0; i < logs.size(); ++i) {
        auto [it, inserted] = by_user.try_emplace(logs[i].user_id);
        if (inserted) user_order.push_back(logs[i].user_id);
        it->second.push_back(i);
    }

    Rng rng(seed);
    std::vector<char> keep(logs.size(), 0);
    for (const auto& user : user_order) {
        auto indices = by_user[user];
        auto k = static_cast<size_t>(
            std::llround(fraction * static_cast<double>(indices.size())));
        rng.shuffle(indices);
        for (size_t i = 0; i < k && i < indices.size(); ++i) keep[indices[i]] = 1;
    }
    std::vector<ImpressionLog> out;
    for (size_t i = 0; i < logs.size(); ++i) {
        if (keep[i]) out.push_back(logs[i]);
    }
    return out;
}

}  // namespace eenr
