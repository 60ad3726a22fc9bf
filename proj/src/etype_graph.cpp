#include "eenr/etype_graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "eenr/rng.hpp"

namespace eenr {

using nlohmann::json;

double ETypeGraph::edge_weight(int a, int b) const {
    for (const auto& [n, w] : adj[static_cast<size_t>(a)]) {
        if (n == b) return w;
    }
    return 0.0;
}

int ETypeGraph::add_node(const std::string& name) {
    auto it = index.find(name);
    if (it != index.end()) return it->second;
    int id = static_cast<int>(nodes.size());
    nodes.push_back(name);
    index[name] = id;
    adj.emplace_back();
    return id;
}

void ETypeGraph::add_edge_weight(int a, int b, double w) {
    auto bump = [&](int u, int v) {
        auto& list = adj[static_cast<size_t>(u)];
        auto it = std::lower_bound(list.begin(), list.end(), v,
                                   [](const auto& e, int key) { return e.first < key; });
        if (it != list.end() && it->first == v) {
            it->second += w;
        } else {
            list.insert(it, {v, w});
        }
    };
    bump(a, b);
    bump(b, a);
}

ETypeGraph build_graph(const std::vector<std::vector<std::string>>& histories, int window) {
    if (window < 1) throw std::invalid_argument("build_graph: window must be >= 1");
    ETypeGraph graph;
    for (const auto& history : histories) {
        for (const auto& type : history) graph.add_node(type);
        for (size_t i = 0; i < history.size(); ++i) {
            for (size_t j = i + 1; j < history.size() && j <= i + static_cast<size_t>(window);
                 ++j) {
                if (history[i] == history[j]) continue;  // no self-loops
                graph.add_edge_weight(graph.index[history[i]], graph.index[history[j]], 1.0);
            }
        }
    }
    return graph;
}

void save_graph(const std::string& path, const ETypeGraph& graph) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    for (int a = 0; a < graph.n_nodes(); ++a) {
        if (graph.adj[static_cast<size_t>(a)].empty()) {
            // isolated node: single-column line so it survives a round trip
            out << graph.nodes[static_cast<size_t>(a)] << "\n";
            continue;
        }
        for (const auto& [b, w] : graph.adj[static_cast<size_t>(a)]) {
            if (b < a) continue;  // each undirected edge once
            out << graph.nodes[static_cast<size_t>(a)] << "\t" << graph.nodes[static_cast<size_t>(b)]
                << "\t" << w << "\n";
        }
    }
}

ETypeGraph load_graph(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    ETypeGraph graph;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string a, b, w;
        if (!std::getline(row, a, '\t')) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                     ": expected typeA<TAB>typeB<TAB>weight");
        }
        if (!std::getline(row, b, '\t')) {
            graph.add_node(a);  // isolated node line
            continue;
        }
        if (!std::getline(row, w)) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                     ": expected typeA<TAB>typeB<TAB>weight");
        }
        graph.add_edge_weight(graph.add_node(a), graph.add_node(b), std::stod(w));
    }
    return graph;
}

std::vector<std::vector<int>> node2vec_walks(const ETypeGraph& graph, double p, double q,
                                             int walk_len, int walks_per_node, uint64_t seed) {
    if (p <= 0.0 || q <= 0.0) throw std::invalid_argument("node2vec_walks: p and q must be > 0");
    if (walk_len < 1) throw std::invalid_argument("node2vec_walks: walk_len must be >= 1");

    Rng base(seed);
    std::vector<std::vector<int>> walks;
    walks.reserve(static_cast<size_t>(graph.n_nodes()) * walks_per_node);
    uint64_t walk_id = 0;
    std::vector<double> cumulative;
    for (int start = 0; start < graph.n_nodes(); ++start) {
        for (int k = 0; k < walks_per_node; ++k) {
            Rng rng = base.fork(walk_id++);
            std::vector<int> walk{start};
            int prev = -1;
            while (static_cast<int>(walk.size()) < walk_len) {
                int cur = walk.back();
                const auto& neighbors = graph.adj[static_cast<size_t>(cur)];
                if (neighbors.empty()) {
                    walk.push_back(cur);
                    continue;
                }
                cumulative.clear();
                double total = 0.0;
                for (const auto& [x, w] : neighbors) {
                    double bias = 1.0;
                    if (prev >= 0) {
                        if (x == prev)
                            bias = 1.0 / p;
                        else if (graph.has_edge(x, prev))
                            bias = 1.0;
                        else
                            bias = 1.0 / q;
                    }
                    total += w * bias;
                    cumulative.push_back(total);
                }
                double draw = rng.uniform() * total;
                size_t pick = static_cast<size_t>(
                    std::lower_bound(cumulative.begin(), cumulative.end(), draw) -
                    cumulative.begin());
                if (pick >= neighbors.size()) pick = neighbors.size() - 1;
                prev = cur;
                walk.push_back(neighbors[pick].first);
            }
            walks.push_back(std::move(walk));
        }
    }
    return walks;
}

SkipgramResult skipgram_train(const ETypeGraph& graph, const std::vector<std::vector<int>>& walks,
                              int dim, int window, int epochs, int n_negatives, uint64_t seed) {
    if (dim <= 0) throw std::invalid_argument("skipgram_train: dim must be positive");
    if (walks.empty()) throw std::invalid_argument("skipgram_train: no walks");
    int n = graph.n_nodes();

    // negative sampling distribution: frequency^0.75
    std::vector<double> freq(static_cast<size_t>(n), 0.0);
    for (const auto& walk : walks) {
        for (int node : walk) freq[static_cast<size_t>(node)] += 1.0;
    }
    std::vector<double> neg_cum(static_cast<size_t>(n), 0.0);
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        total += std::pow(freq[static_cast<size_t>(i)], 0.75);
        neg_cum[static_cast<size_t>(i)] = total;
    }

    Rng rng(seed);
    std::vector<double> in_vec(static_cast<size_t>(n) * dim);
    std::vector<double> out_vec(static_cast<size_t>(n) * dim, 0.0);
    double init = 0.5 / static_cast<double>(dim);
    for (auto& v : in_vec) v = rng.uniform(-init, init);

    auto sample_negative = [&]() {
        double draw = rng.uniform() * total;
        auto it = std::lower_bound(neg_cum.begin(), neg_cum.end(), draw);
        auto idx = static_cast<size_t>(it - neg_cum.begin());
        return static_cast<int>(std::min(idx, static_cast<size_t>(n - 1)));
    };

    int64_t total_pairs = 0;
    for (const auto& walk : walks) {
        for (size_t i = 0; i < walk.size(); ++i) {
            size_t lo = i >= static_cast<size_t>(window) ? i - static_cast<size_t>(window) : 0;
            size_t hi = std::min(walk.size() - 1, i + static_cast<size_t>(window));
            total_pairs += static_cast<int64_t>(hi - lo);
        }
    }
    total_pairs = std::max<int64_t>(1, total_pairs * epochs);

    constexpr double lr0 = 0.025, lr_min = 1e-4;
    int64_t seen = 0;
    SkipgramResult result;
    std::vector<double> grad_center(static_cast<size_t>(dim));

    auto sgns_update = [&](int center, int context, double lr, double& loss) {
        double* u = in_vec.data() + static_cast<size_t>(center) * dim;
        std::fill(grad_center.begin(), grad_center.end(), 0.0);
        auto pair_step = [&](int other, double label) {
            double* v = out_vec.data() + static_cast<size_t>(other) * dim;
            double s = 0.0;
            for (int d = 0; d < dim; ++d) s += u[d] * v[d];
            double sig = 1.0 / (1.0 + std::exp(-s));
            loss += label > 0.5 ? -std::log(std::max(sig, 1e-12))
                                : -std::log(std::max(1.0 - sig, 1e-12));
            double g = (sig - label) * lr;
            for (int d = 0; d < dim; ++d) {
                grad_center[static_cast<size_t>(d)] += g * v[d];
                v[d] -= g * u[d];
            }
        };
        pair_step(context, 1.0);
        for (int k = 0; k < n_negatives; ++k) {
            int neg = sample_negative();
            if (neg == context) continue;
            pair_step(neg, 0.0);
        }
        for (int d = 0; d < dim; ++d) u[d] -= grad_center[static_cast<size_t>(d)];
    };

    for (int epoch = 0; epoch < epochs; ++epoch) {
        double epoch_loss = 0.0;
        int64_t epoch_pairs = 0;
        for (const auto& walk : walks) {
            for (size_t i = 0; i < walk.size(); ++i) {
                size_t lo = i >= static_cast<size_t>(window) ? i - static_cast<size_t>(window) : 0;
                size_t hi = std::min(walk.size() - 1, i + static_cast<size_t>(window));
                for (size_t j = lo; j <= hi; ++j) {
                    if (j == i) continue;
                    double progress = static_cast<double>(seen) / static_cast<double>(total_pairs);
                    double lr = std::max(lr_min, lr0 * (1.0 - progress));
                    sgns_update(walk[i], walk[j], lr, epoch_loss);
                    ++seen;
                    ++epoch_pairs;
                }
            }
        }
        result.loss_per_epoch.push_back(epoch_pairs > 0
                                            ? epoch_loss / static_cast<double>(epoch_pairs)
                                            : 0.0);
    }

    for (int i = 0; i < n; ++i) {
        result.embeddings[graph.nodes[static_cast<size_t>(i)]] =
            std::vector<double>(in_vec.begin() + static_cast<size_t>(i) * dim,
                                in_vec.begin() + static_cast<size_t>(i + 1) * dim);
    }
    return result;
}

void save_embeddings(const std::string& path,
                     const std::map<std::string, std::vector<double>>& embeddings) {
    json j = json::object();
    for (const auto& [name, vec] : embeddings) j[name] = vec;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << j.dump() << "\n";
}

std::map<std::string, std::vector<double>> load_embeddings(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    json j;
    in >> j;
    std::map<std::string, std::vector<double>> out;
    for (auto& [name, vec] : j.items()) out[name] = vec.get<std::vector<double>>();
    return out;
}

}  // namespace eenr
