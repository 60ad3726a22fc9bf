#include "eenr/crf.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace eenr {

CrfMask CrfMask::open(int n_tags) {
    CrfMask m;
    m.n_tags = n_tags;
    m.start.assign(static_cast<size_t>(n_tags), 1);
    m.trans.assign(static_cast<size_t>(n_tags) * n_tags, 1);
    return m;
}

Tensor CrfMask::transition_penalty() const {
    std::vector<double> vals(trans.size());
    for (size_t i = 0; i < trans.size(); ++i) vals[i] = trans[i] ? 0.0 : kForbiddenScore;
    return Tensor::from(std::move(vals), {n_tags, n_tags});
}

Tensor CrfMask::start_penalty() const {
    std::vector<double> vals(start.size());
    for (size_t i = 0; i < start.size(); ++i) vals[i] = start[i] ? 0.0 : kForbiddenScore;
    return Tensor::from(std::move(vals), {n_tags});
}

TagSpace TagSpace::from_schema(const EventSchema& schema) {
    TagSpace ts;
    ts.tags.push_back({'O', -1, -1});
    ts.names.push_back("O");
    for (size_t t = 0; t < schema.event_types.size(); ++t) {
        const auto& type = schema.event_types[t];
        ts.event_types.push_back(type);
        ts.roles_by_type.push_back(schema.roles_by_type.at(type));
        const auto& roles = ts.roles_by_type.back();
        for (size_t r = 0; r < roles.size(); ++r) {
            ts.tags.push_back({'B', static_cast<int>(t), static_cast<int>(r)});
            ts.names.push_back("B-" + type + "#" + roles[r]);
            ts.tags.push_back({'I', static_cast<int>(t), static_cast<int>(r)});
            ts.names.push_back("I-" + type + "#" + roles[r]);
        }
    }
    return ts;
}

int TagSpace::b_tag(int type_index, int role_index) const {
    for (size_t i = 0; i < tags.size(); ++i) {
        if (tags[i].kind == 'B' && tags[i].type_index == type_index &&
            tags[i].role_index == role_index) {
            return static_cast<int>(i);
        }
    }
    return -1;
}

int TagSpace::i_tag(int type_index, int role_index) const {
    int b = b_tag(type_index, role_index);
    return b < 0 ? -1 : b + 1;
}

CrfMask TagSpace::mask() const {
    CrfMask m = CrfMask::open(n_tags());
    for (int j = 0; j < n_tags(); ++j) {
        if (tags[static_cast<size_t>(j)].kind == 'I') m.start[static_cast<size_t>(j)] = 0;
    }
    for (int i = 0; i < n_tags(); ++i) {
        const TagInfo& from = tags[static_cast<size_t>(i)];
        for (int j = 0; j < n_tags(); ++j) {
            const TagInfo& to = tags[static_cast<size_t>(j)];
            if (to.kind != 'I') continue;  // O and B are reachable from anywhere
            bool same_pair =
                from.type_index == to.type_index && from.role_index == to.role_index;
            bool legal = (from.kind == 'B' || from.kind == 'I') && same_pair;
            if (!legal) m.trans[static_cast<size_t>(i) * n_tags() + j] = 0;
        }
    }
    return m;
}

namespace {

void check_crf_shapes(const Tensor& emissions, const Tensor& transitions, const CrfMask& mask) {
    if (emissions.ndim() != 2) {
        throw std::invalid_argument("crf: emissions must be (tokens x tags), got " +
                                    shape_str(emissions.shape()));
    }
    int n_tags = emissions.dim(1);
    if (transitions.ndim() != 2 || transitions.dim(0) != n_tags || transitions.dim(1) != n_tags) {
        throw std::invalid_argument("crf: transitions must be " + std::to_string(n_tags) + "x" +
                                    std::to_string(n_tags) + ", got " +
                                    shape_str(transitions.shape()));
    }
    if (mask.n_tags != n_tags) {
        throw std::invalid_argument("crf: mask covers " + std::to_string(mask.n_tags) +
                                    " tags, emissions have " + std::to_string(n_tags));
    }
}

}  // namespace

Tensor crf_log_partition(const Tensor& emissions, const Tensor& transitions, const CrfMask& mask) {
    check_crf_shapes(emissions, transitions, mask);
    int n = emissions.dim(0);
    Tensor masked = add(transitions, mask.transition_penalty());
    Tensor alpha = add(row(emissions, 0), mask.start_penalty());
    for (int t = 1; t < n; ++t) {
        Tensor scores = add_cols(masked, alpha);           // [i][j] = alpha[i] + T[i][j]
        alpha = add(logsumexp(scores, 0), row(emissions, t));
    }
    return logsumexp(alpha, 0);
}

Tensor crf_nll(const Tensor& emissions, const Tensor& transitions, const CrfMask& mask,
               const std::vector<int>& gold_tags) {
    check_crf_shapes(emissions, transitions, mask);
    int n = emissions.dim(0);
    int n_tags = emissions.dim(1);
    if (static_cast<int>(gold_tags.size()) != n) {
        throw std::invalid_argument("crf_nll: gold path length " +
                                    std::to_string(gold_tags.size()) + " != " + std::to_string(n) +
                                    " tokens");
    }
    for (int tag : gold_tags) {
        if (tag < 0 || tag >= n_tags) {
            throw std::invalid_argument("crf_nll: gold tag " + std::to_string(tag) +
                                        " out of range");
        }
    }
    if (!mask.start_ok(gold_tags[0])) {
        throw std::invalid_argument("crf_nll: illegal gold path, tag " +
                                    std::to_string(gold_tags[0]) + " cannot start a sequence");
    }
    std::vector<int> emission_idx, transition_idx;
    emission_idx.reserve(gold_tags.size());
    for (int t = 0; t < n; ++t) {
        emission_idx.push_back(t * n_tags + gold_tags[static_cast<size_t>(t)]);
        if (t > 0) {
            int i = gold_tags[static_cast<size_t>(t - 1)];
            int j = gold_tags[static_cast<size_t>(t)];
            if (!mask.ok(i, j)) {
                throw std::invalid_argument("crf_nll: illegal gold transition " +
                                            std::to_string(i) + " -> " + std::to_string(j) +
                                            " at position " + std::to_string(t));
            }
            transition_idx.push_back(i * n_tags + j);
        }
    }
    Tensor gold_score = sum(gather_flat(emissions, emission_idx));
    if (!transition_idx.empty()) {
        gold_score = add(gold_score, sum(gather_flat(transitions, transition_idx)));
    }
    return sub(crf_log_partition(emissions, transitions, mask), gold_score);
}

std::vector<int> viterbi(const std::vector<double>& emissions, int n_tokens, int n_tags,
                         const std::vector<double>& transitions, const CrfMask& mask) {
    if (n_tokens <= 0) throw std::invalid_argument("viterbi: empty sequence");
    constexpr double kNegInf = -std::numeric_limits<double>::infinity();

    std::vector<double> score(static_cast<size_t>(n_tags), kNegInf);
    for (int j = 0; j < n_tags; ++j) {
        if (mask.start_ok(j)) score[static_cast<size_t>(j)] = emissions[static_cast<size_t>(j)];
    }
    std::vector<int> history(static_cast<size_t>(std::max(0, n_tokens - 1)) * n_tags, 0);
    std::vector<double> next(static_cast<size_t>(n_tags));
    for (int t = 1; t < n_tokens; ++t) {
        for (int j = 0; j < n_tags; ++j) {
            double best = kNegInf;
            int best_i = 0;
            for (int i = 0; i < n_tags; ++i) {
                if (!mask.ok(i, j)) continue;
                double s = score[static_cast<size_t>(i)] +
                           transitions[static_cast<size_t>(i) * n_tags + j];
                if (s > best) {  // strict: ties keep the lowest i
                    best = s;
                    best_i = i;
                }
            }
            next[static_cast<size_t>(j)] =
                best + emissions[static_cast<size_t>(t) * n_tags + j];
            history[static_cast<size_t>(t - 1) * n_tags + j] = best_i;
        }
        score.swap(next);
    }

    int best_last = 0;
    double best_score = score[0];
    for (int j = 1; j < n_tags; ++j) {
        if (score[static_cast<size_t>(j)] > best_score) {
            best_score = score[static_cast<size_t>(j)];
            best_last = j;
        }
    }
    std::vector<int> path(static_cast<size_t>(n_tokens));
    path[static_cast<size_t>(n_tokens - 1)] = best_last;
    for (int t = n_tokens - 2; t >= 0; --t) {
        path[static_cast<size_t>(t)] =
            history[static_cast<size_t>(t) * n_tags + path[static_cast<size_t>(t + 1)]];
    }
    return path;
}

std::vector<int> viterbi(const Tensor& emissions, const Tensor& transitions, const CrfMask& mask) {
    check_crf_shapes(emissions, transitions, mask);
    return viterbi(emissions.values(), emissions.dim(0), emissions.dim(1), transitions.values(),
                   mask);
}

}  // namespace eenr
