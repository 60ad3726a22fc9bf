#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace eenr {

/// Tag space of the annotation schema: qualified event types ("Class/Type"),
/// their ordered role lists, and the coarse class (the prefix before '/').
struct EventSchema {
    std::vector<std::string> event_types;
    std::map<std::string, std::vector<std::string>> roles_by_type;

    static std::string class_of(const std::string& event_type);
    bool has_type(const std::string& event_type) const;
    bool has_role(const std::string& event_type, const std::string& role) const;
    const std::vector<std::string>& roles(const std::string& event_type) const;
    int type_index(const std::string& event_type) const;

    /// Collects types and roles (in first-seen order) from annotated data.
    static EventSchema from_sentences(const std::vector<struct AnnotatedSentence>& sentences);
};

struct ArgumentSpan {
    std::string role;
    std::string argument;
    int start = -1;  // character offset into the sentence text, -1 = unresolved
    int len = 0;

    bool operator==(const ArgumentSpan&) const = default;
};

struct EventAnnotation {
    std::string event_type;
    std::vector<ArgumentSpan> arguments;

    bool operator==(const EventAnnotation&) const = default;
};

struct AnnotatedSentence {
    std::string id;
    std::string text;
    std::vector<EventAnnotation> events;

    bool operator==(const AnnotatedSentence&) const = default;
};

/// One extracted event: type, role-filling argument spans, coarse class.
struct EventRecord {
    std::string event_type;
    std::vector<ArgumentSpan> arguments;
    std::string event_class;

    bool operator==(const EventRecord&) const = default;
};

struct NewsItem {
    std::string news_id;
    std::vector<std::string> title;
    std::string category;
    std::string body;
    std::vector<EventRecord> events;

    bool operator==(const NewsItem&) const = default;
};

struct ImpressionLog {
    std::string user_id;
    int64_t ts = 0;
    std::vector<std::string> candidates;
    std::vector<std::string> clicked;

    bool operator==(const ImpressionLog&) const = default;
};

struct SplitSpec {
    double train = 0.7;
    double val = 0.1;
    double test = 0.2;
};

struct LoadStats {
    int skipped_events = 0;  // annotations whose argument was not found in the text
};

// ---- JSON-lines IO ---------------------------------------------------------
// EE corpus lines use the DuEE field names verbatim: "id", "text",
// "event_list", "event_type", "arguments", "role", "argument" (plus
// "argument_start_index" when spans are known). News lines are
// {news_id, title, category, body[, events]}; impression lines are
// {user_id, ts, candidates, clicked}.

std::vector<AnnotatedSentence> load_ee_corpus(const std::string& path,
                                              LoadStats* stats = nullptr);
void save_ee_corpus(const std::string& path, const std::vector<AnnotatedSentence>& sentences);

std::pair<std::vector<NewsItem>, std::vector<ImpressionLog>> load_logs(
    const std::string& news_path, const std::string& impressions_path);
std::vector<NewsItem> load_news(const std::string& path);
std::vector<ImpressionLog> load_impressions(const std::string& path);
void save_news(const std::string& path, const std::vector<NewsItem>& news);
void save_impressions(const std::string& path, const std::vector<ImpressionLog>& impressions);

/// Chronological split. Ties keep input order; sizes land within one log of
/// the requested fractions.
std::tuple<std::vector<ImpressionLog>, std::vector<ImpressionLog>, std::vector<ImpressionLog>>
time_split(const std::vector<ImpressionLog>& logs, const SplitSpec& spec);

/// User-stratified random subset; per user the kept count is
/// round(fraction * count). Output preserves input order.
std::vector<ImpressionLog> subsample(const std::vector<ImpressionLog>& logs, double fraction,
                                     uint64_t seed);

// whitespace tokenizer used for titles, argument strings and role names
std::vector<std::string> tokenize(const std::string& text);

}  // namespace eenr
