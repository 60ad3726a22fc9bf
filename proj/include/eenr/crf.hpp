#pragma once

#include <string>
#include <vector>

#include "eenr/corpus.hpp"
#include "eenr/tensor.hpp"

namespace eenr {

/// Effective score of a forbidden transition. Finite so tape arithmetic stays
/// NaN-free, large enough that exp() underflows to zero.
constexpr double kForbiddenScore = -1e30;

/// Structural transition constraints for a linear-chain CRF.
struct CrfMask {
    int n_tags = 0;
    std::vector<char> start;  // allowed initial tags
    std::vector<char> trans;  // allowed i -> j, row-major

    static CrfMask open(int n_tags);  // everything allowed

    bool start_ok(int j) const { return start[static_cast<size_t>(j)] != 0; }
    bool ok(int i, int j) const { return trans[static_cast<size_t>(i) * n_tags + j] != 0; }

    /// 0 / kForbiddenScore constants, ready to add onto the transition matrix.
    Tensor transition_penalty() const;
    Tensor start_penalty() const;
};

/// BIO tag space over (event type, role) pairs. O is tag 0; each schema pair
/// contributes a B tag and an I tag.
struct TagSpace {
    struct TagInfo {
        char kind = 'O';  // 'O', 'B' or 'I'
        int type_index = -1;
        int role_index = -1;
    };

    std::vector<TagInfo> tags;
    std::vector<std::string> names;
    std::vector<std::string> event_types;                   // schema order
    std::vector<std::vector<std::string>> roles_by_type;    // aligned with event_types

    static TagSpace from_schema(const EventSchema& schema);

    int n_tags() const { return static_cast<int>(tags.size()); }
    int b_tag(int type_index, int role_index) const;
    int i_tag(int type_index, int role_index) const;

    /// Forbids O->I, start->I, and any B/I continuation that switches the
    /// (type, role) pair.
    CrfMask mask() const;
};

/// log sum over all mask-legal paths of exp(sum emissions + sum transitions).
/// Differentiable w.r.t. both inputs; emissions is (n_tokens x n_tags).
Tensor crf_log_partition(const Tensor& emissions, const Tensor& transitions, const CrfMask& mask);

/// log_partition minus the gold path score; >= 0 up to rounding. The gold
/// path must be mask-legal.
Tensor crf_nll(const Tensor& emissions, const Tensor& transitions, const CrfMask& mask,
               const std::vector<int>& gold_tags);

/// Highest-scoring mask-legal path; ties resolved toward the lowest tag index.
/// Pure function of the values (never recorded on the tape).
std::vector<int> viterbi(const std::vector<double>& emissions, int n_tokens, int n_tags,
                         const std::vector<double>& transitions, const CrfMask& mask);
std::vector<int> viterbi(const Tensor& emissions, const Tensor& transitions, const CrfMask& mask);

}  // namespace eenr
