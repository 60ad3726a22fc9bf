#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace eenr {

/// Undirected event-type co-occurrence graph. Edge weights count adjacent
/// (distinct) pairs in user history sequences; self-loops are excluded.
struct ETypeGraph {
    std::vector<std::string> nodes;
    std::map<std::string, int> index;
    std::vector<std::vector<std::pair<int, double>>> adj;  // sorted by neighbor index

    int n_nodes() const { return static_cast<int>(nodes.size()); }
    double edge_weight(int a, int b) const;
    bool has_edge(int a, int b) const { return edge_weight(a, b) > 0.0; }
    int add_node(const std::string& name);
    void add_edge_weight(int a, int b, double w);
};

/// Each history is one user's time-ordered event-type sequence. Pairs within
/// `window` of each other (default: adjacent only) add to the edge weight.
ETypeGraph build_graph(const std::vector<std::vector<std::string>>& histories, int window = 1);

void save_graph(const std::string& path, const ETypeGraph& graph);
ETypeGraph load_graph(const std::string& path);

/// Second-order biased random walks. From node v, having arrived from t, the
/// unnormalized probability of x is weight(v,x) * alpha where alpha is 1/p if
/// x == t, 1 if x neighbors t, 1/q otherwise; the first step follows edge
/// weights alone. Isolated nodes repeat themselves.
std::vector<std::vector<int>> node2vec_walks(const ETypeGraph& graph, double p, double q,
                                             int walk_len, int walks_per_node, uint64_t seed);

struct SkipgramResult {
    std::map<std::string, std::vector<double>> embeddings;
    std::vector<double> loss_per_epoch;
};

/// Skip-gram with negative sampling over the walks (negatives drawn
/// proportionally to frequency^0.75). Deterministic under the seed.
SkipgramResult skipgram_train(const ETypeGraph& graph, const std::vector<std::vector<int>>& walks,
                              int dim, int window, int epochs, int n_negatives, uint64_t seed);

void save_embeddings(const std::string& path,
                     const std::map<std::string, std::vector<double>>& embeddings);
std::map<std::string, std::vector<double>> load_embeddings(const std::string& path);

}  // namespace eenr
