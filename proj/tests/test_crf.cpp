#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "eenr/crf.hpp"
#include "eenr/rng.hpp"
#include "test_helpers.hpp"

using namespace eenr;
using eenr::testing::enumerate_crf;
using eenr::testing::gradcheck;

namespace {

EventSchema tiny_schema() {
    EventSchema schema;
    schema.event_types = {"Corporate/Layoff"};
    schema.roles_by_type["Corporate/Layoff"] = {"employer", "headcount"};
    return schema;
}

std::vector<double> random_values(Rng& rng, size_t n, double lo = -2.0, double hi = 2.0) {
    std::vector<double> out(n);
    for (auto& v : out) v = rng.uniform(lo, hi);
    return out;
}

// random mask where tag 0 stays open from everywhere, so legal paths exist
CrfMask random_mask(Rng& rng, int n_tags) {
    CrfMask mask = CrfMask::open(n_tags);
    for (int j = 1; j < n_tags; ++j) {
        if (rng.uniform() < 0.3) mask.start[static_cast<size_t>(j)] = 0;
        for (int i = 0; i < n_tags; ++i) {
            if (rng.uniform() < 0.25) mask.trans[static_cast<size_t>(i) * n_tags + j] = 0;
        }
    }
    return mask;
}

}  // namespace

TEST_CASE("one-token partition is a logsumexp over tags") {
    Tensor emissions = Tensor::from({0.7, -0.4}, {1, 2});
    Tensor transitions = Tensor::zeros({2, 2});
    double z = crf_log_partition(emissions, transitions, CrfMask::open(2)).item();
    CHECK(z == doctest::Approx(std::log(std::exp(0.7) + std::exp(-0.4))).epsilon(1e-12));
}

TEST_CASE("two tokens, two tags: partition equals the four-path enumeration") {
    Rng rng(11);
    auto em = random_values(rng, 4);
    auto tr = random_values(rng, 4);
    CrfMask mask = CrfMask::open(2);
    double z = crf_log_partition(Tensor::from(em, {2, 2}), Tensor::from(tr, {2, 2}), mask).item();
    auto oracle = enumerate_crf(em, 2, 2, tr, mask);
    CHECK(oracle.n_legal_paths == 4);
    CHECK(std::fabs(z - oracle.log_partition) < 1e-10);
}

TEST_CASE("three tokens, three tags: partition equals the 27-path enumeration") {
    Rng rng(12);
    auto em = random_values(rng, 9);
    auto tr = random_values(rng, 9);
    CrfMask mask = CrfMask::open(3);
    double z = crf_log_partition(Tensor::from(em, {3, 3}), Tensor::from(tr, {3, 3}), mask).item();
    auto oracle = enumerate_crf(em, 3, 3, tr, mask);
    CHECK(oracle.n_legal_paths == 27);
    CHECK(std::fabs(z - oracle.log_partition) < 1e-10);
}

TEST_CASE("viterbi: one token reduces to the argmax of the emission row") {
    Tensor emissions = Tensor::from({0.1, 0.9, -2.0}, {1, 3});
    Tensor transitions = Tensor::zeros({3, 3});
    auto path = viterbi(emissions, transitions, CrfMask::open(3));
    CHECK(path == std::vector<int>{1});
}

TEST_CASE("viterbi equals brute-force enumeration on random instances") {
    Rng rng(13);
    for (int trial = 0; trial < 100; ++trial) {
        int n = 1 + static_cast<int>(rng.below(4));
        int t = 2 + static_cast<int>(rng.below(3));
        auto em = random_values(rng, static_cast<size_t>(n) * t);
        auto tr = random_values(rng, static_cast<size_t>(t) * t);
        CrfMask mask = trial % 2 == 0 ? CrfMask::open(t) : random_mask(rng, t);
        auto path = viterbi(em, n, t, tr, mask);
        auto oracle = enumerate_crf(em, n, t, tr, mask);

        double path_score = em[static_cast<size_t>(path[0])];
        CHECK(mask.start_ok(path[0]));
        for (int i = 1; i < n; ++i) {
            CHECK(mask.ok(path[static_cast<size_t>(i - 1)], path[static_cast<size_t>(i)]));
            path_score += em[static_cast<size_t>(i) * t + path[static_cast<size_t>(i)]] +
                          tr[static_cast<size_t>(path[static_cast<size_t>(i - 1)]) * t +
                             path[static_cast<size_t>(i)]];
        }
        CHECK(path_score == doctest::Approx(oracle.best_score).epsilon(1e-12));
        CHECK(path == oracle.best_path);  // random reals: ties have measure zero

        double z =
            crf_log_partition(Tensor::from(em, {n, t}), Tensor::from(tr, {t, t}), mask).item();
        CHECK(std::fabs(z - oracle.log_partition) < 1e-9);
    }
}

TEST_CASE("a mask admitting a single path forces that path") {
    // only 0 -> 1 -> 2 is legal
    CrfMask mask = CrfMask::open(3);
    mask.start = {1, 0, 0};
    mask.trans = {0, 1, 0, 0, 0, 1, 1, 0, 0};
    Rng rng(14);
    auto em = random_values(rng, 9, -5.0, 5.0);
    auto tr = random_values(rng, 9);
    auto path = viterbi(em, 3, 3, tr, mask);
    CHECK(path == std::vector<int>{0, 1, 2});
}

TEST_CASE("nll saturates to zero when the gold path dominates") {
    int n = 3, t = 2;
    std::vector<double> em(static_cast<size_t>(n) * t, 0.0);
    std::vector<int> gold = {1, 0, 1};
    for (int i = 0; i < n; ++i) em[static_cast<size_t>(i) * t + gold[static_cast<size_t>(i)]] = 100.0;
    Tensor nll = crf_nll(Tensor::from(em, {n, t}), Tensor::zeros({t, t}), CrfMask::open(t), gold);
    CHECK(nll.item() == doctest::Approx(0.0).epsilon(1e-8));
}

TEST_CASE("uniform scores give nll = ln(number of legal paths)") {
    EventSchema schema = tiny_schema();
    TagSpace tags = TagSpace::from_schema(schema);
    CrfMask mask = tags.mask();
    int t = tags.n_tags();
    int n = 2;
    Tensor em = Tensor::zeros({n, t});
    Tensor tr = Tensor::zeros({t, t});
    auto oracle = enumerate_crf(em.values(), n, t, tr.values(), mask);
    std::vector<int> gold(static_cast<size_t>(n), 0);  // all-O is always legal
    Tensor nll = crf_nll(em, tr, mask, gold);
    CHECK(nll.item() ==
          doctest::Approx(std::log(static_cast<double>(oracle.n_legal_paths))).epsilon(1e-10));
}

TEST_CASE("nll is nonnegative on random instances") {
    Rng rng(15);
    for (int trial = 0; trial < 50; ++trial) {
        int n = 1 + static_cast<int>(rng.below(4));
        int t = 2 + static_cast<int>(rng.below(3));
        auto em = random_values(rng, static_cast<size_t>(n) * t);
        auto tr = random_values(rng, static_cast<size_t>(t) * t);
        std::vector<int> gold;
        for (int i = 0; i < n; ++i) gold.push_back(static_cast<int>(rng.below(t)));
        Tensor nll = crf_nll(Tensor::from(em, {n, t}), Tensor::from(tr, {t, t}),
                             CrfMask::open(t), gold);
        CHECK(nll.item() >= -1e-10);
    }
}

TEST_CASE("illegal gold paths are rejected by name") {
    EventSchema schema = tiny_schema();
    TagSpace tags = TagSpace::from_schema(schema);
    CrfMask mask = tags.mask();
    int t = tags.n_tags();
    Tensor em = Tensor::zeros({2, t});
    Tensor tr = Tensor::zeros({t, t});

    // start -> I is forbidden
    int i_tag = tags.i_tag(0, 0);
    CHECK_THROWS_WITH_AS(crf_nll(em, tr, mask, {i_tag, 0}), doctest::Contains("cannot start"),
                         std::invalid_argument);
    // O -> I is forbidden
    CHECK_THROWS_WITH_AS(crf_nll(em, tr, mask, {0, i_tag}),
                         doctest::Contains("illegal gold transition"), std::invalid_argument);
}

TEST_CASE("BIO mask structure") {
    EventSchema schema;
    schema.event_types = {"A/X", "B/Y"};
    schema.roles_by_type["A/X"] = {"r1", "r2"};
    schema.roles_by_type["B/Y"] = {"r3"};
    TagSpace tags = TagSpace::from_schema(schema);
    CHECK(tags.n_tags() == 1 + 2 * 3);
    CHECK(tags.names[0] == "O");
    CrfMask mask = tags.mask();

    int b_a_r1 = tags.b_tag(0, 0), i_a_r1 = tags.i_tag(0, 0);
    int b_a_r2 = tags.b_tag(0, 1), i_a_r2 = tags.i_tag(0, 1);
    int i_b_r3 = tags.i_tag(1, 0);

    CHECK_FALSE(mask.start_ok(i_a_r1));
    CHECK(mask.start_ok(b_a_r1));
    CHECK(mask.start_ok(0));
    CHECK_FALSE(mask.ok(0, i_a_r1));           // O -> I
    CHECK(mask.ok(b_a_r1, i_a_r1));            // B -> matching I
    CHECK_FALSE(mask.ok(b_a_r1, i_a_r2));      // B -> I of another role
    CHECK_FALSE(mask.ok(i_a_r1, i_b_r3));      // I -> I of another type
    CHECK(mask.ok(i_a_r1, i_a_r1));            // I continuation
    CHECK(mask.ok(i_a_r1, b_a_r2));            // B always reachable
    CHECK(mask.ok(b_a_r1, 0));                 // O always reachable
}

TEST_CASE("gradients of partition and nll match finite differences") {
    Rng rng(16);
    int n = 4, t = 3;
    Tensor em = Tensor::from(random_values(rng, static_cast<size_t>(n) * t), {n, t}, true);
    Tensor tr = Tensor::from(random_values(rng, static_cast<size_t>(t) * t), {t, t}, true);
    CrfMask mask = random_mask(rng, t);
    std::vector<int> gold;
    gold.push_back(0);
    for (int i = 1; i < n; ++i) {
        int prev = gold.back();
        int next = 0;
        for (int j = 0; j < t; ++j) {
            if (mask.ok(prev, j)) {
                next = j;
                break;
            }
        }
        gold.push_back(next);
    }

    auto partition = [&]() { return crf_log_partition(em, tr, mask); };
    CHECK(gradcheck(partition, {em, tr}) < 1e-4);

    auto nll = [&]() { return crf_nll(em, tr, mask, gold); };
    CHECK(gradcheck(nll, {em, tr}) < 1e-4);
}
