#include "g2g/graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>
#include <unordered_map>

namespace g2g {

namespace {

void check_node(NodeId v, int num_nodes, const char* what) {
    if (v < 0 || v >= num_nodes) {
        throw std::out_of_range(std::string(what) + " node id " + std::to_string(v) +
                                " out of range [0, " + std::to_string(num_nodes) + ")");
    }
}

Edge canonical(Edge e, bool directed) {
    if (!directed && e.first > e.second) std::swap(e.first, e.second);
    return e;
}

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open file: " + path);
    return in;
}

bool data_line(const std::string& line) {
    for (char c : line) {
        if (c == '#') return false;
        if (!std::isspace(static_cast<unsigned char>(c))) return true;
    }
    return false;
}

} // namespace

// ---------------------------------------------------------------------------
// AttributeMatrix
// ---------------------------------------------------------------------------

void AttributeMatrix::set(int r, int c, double value) {
    if (r < 0 || r >= rows_) throw std::out_of_range("attribute row out of range");
    if (c < 0 || c >= cols_) throw std::out_of_range("attribute column out of range");
    auto& row = data_[r];
    auto it = std::lower_bound(row.begin(), row.end(), c,
                               [](const auto& entry, int col) { return entry.first < col; });
    if (it != row.end() && it->first == c) {
        it->second = value;
    } else {
        row.insert(it, {c, value});
    }
}

std::vector<double> AttributeMatrix::dense_row(int i) const {
    std::vector<double> out(cols_, 0.0);
    for (const auto& [c, v] : row(i)) out[c] = v;
    return out;
}

AttributeMatrix AttributeMatrix::identity(int n) {
    AttributeMatrix m(n, n);
    for (int i = 0; i < n; ++i) m.set(i, i, 1.0);
    return m;
}

// ---------------------------------------------------------------------------
// AttributedGraph
// ---------------------------------------------------------------------------

bool AttributedGraph::has_edge(NodeId src, NodeId dst) const {
    const auto& targets = out_edges.at(src);
    return std::binary_search(targets.begin(), targets.end(), dst);
}

std::size_t AttributedGraph::num_arcs() const {
    std::size_t n = 0;
    for (const auto& targets : out_edges) n += targets.size();
    return n;
}

std::size_t AttributedGraph::num_edges() const {
    return directed ? num_arcs() : num_arcs() / 2;
}

std::vector<Edge> AttributedGraph::edge_list() const {
    std::vector<Edge> edges;
    edges.reserve(num_edges());
    for (NodeId u = 0; u < num_nodes; ++u) {
        for (NodeId v : out_edges[u]) {
            if (!directed && v < u) continue;
            edges.emplace_back(u, v);
        }
    }
    return edges;
}

AttributedGraph build_graph(int num_nodes, bool directed, const std::vector<Edge>& edges,
                            EdgeCleanupStats* stats) {
    if (num_nodes < 0) throw std::invalid_argument("negative node count");
    AttributedGraph g;
    g.num_nodes = num_nodes;
    g.directed = directed;
    g.out_edges.assign(num_nodes, {});

    EdgeCleanupStats local;
    std::vector<Edge> arcs;
    arcs.reserve(edges.size() * (directed ? 1 : 2));
    for (const auto& [u, v] : edges) {
        check_node(u, num_nodes, "edge");
        check_node(v, num_nodes, "edge");
        if (u == v) {
            ++local.self_loops;
            continue;
        }
        arcs.emplace_back(u, v);
        if (!directed) arcs.emplace_back(v, u);
    }
    std::sort(arcs.begin(), arcs.end());
    std::size_t unique_arcs = 0;
    Edge prev{-1, -1};
    for (const auto& arc : arcs) {
        if (arc == prev) {
            ++local.duplicates;
            continue;
        }
        prev = arc;
        g.out_edges[arc.first].push_back(arc.second);
        ++unique_arcs;
    }
    (void)unique_arcs;
    if (!directed) local.duplicates /= 2; // both arc copies of a duplicate were counted
    if (stats) *stats = local;
    return g;
}

AttributedGraph subgraph_with_edges(const AttributedGraph& graph, const std::vector<Edge>& edges) {
    AttributedGraph out = build_graph(graph.num_nodes, graph.directed, edges);
    out.attributes = graph.attributes;
    out.labels = graph.labels;
    out.num_classes = graph.num_classes;
    return out;
}

AttributedGraph symmetrized_view(const AttributedGraph& graph) {
    if (!graph.directed) return graph;
    AttributedGraph out = graph;
    out.directed = false;
    std::vector<Edge> edges = graph.edge_list();
    AttributedGraph structure = build_graph(graph.num_nodes, false, edges);
    out.out_edges = std::move(structure.out_edges);
    return out;
}

// ---------------------------------------------------------------------------
// File loaders
// ---------------------------------------------------------------------------

AttributedGraph load_edge_list(const std::string& path, bool directed,
                               std::optional<int> num_nodes_hint, EdgeCleanupStats* stats) {
    auto in = open_input(path);
    std::vector<Edge> edges;
    NodeId max_id = -1;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!data_line(line)) continue;
        std::istringstream fields(line);
        long long u = -1, v = -1;
        if (!(fields >> u >> v) || u < 0 || v < 0) {
            throw DataError(path + ":" + std::to_string(line_no) + ": malformed edge line '" + line + "'");
        }
        std::string rest;
        if (fields >> rest) {
            throw DataError(path + ":" + std::to_string(line_no) + ": trailing data on edge line");
        }
        if (num_nodes_hint && (u >= *num_nodes_hint || v >= *num_nodes_hint)) {
            throw DataError(path + ":" + std::to_string(line_no) + ": node id exceeds --num-nodes hint " +
                            std::to_string(*num_nodes_hint));
        }
        edges.emplace_back(static_cast<NodeId>(u), static_cast<NodeId>(v));
        max_id = std::max({max_id, static_cast<NodeId>(u), static_cast<NodeId>(v)});
    }
    int n = num_nodes_hint ? *num_nodes_hint : max_id + 1;
    EdgeCleanupStats local;
    AttributedGraph g = build_graph(n, directed, edges, &local);
    if (local.self_loops + local.duplicates > 0) {
        std::cerr << "warning: " << path << ": dropped " << local.self_loops << " self-loop(s) and "
                  << local.duplicates << " duplicate edge(s)\n";
    }
    if (stats) *stats = local;
    return g;
}

AttributeMatrix load_attribute_file(const std::string& path, int expected_rows) {
    auto in = open_input(path);
    std::string line;
    std::size_t line_no = 0;
    int n = -1, d = -1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.rfind("%%g2g-attrs", 0) == 0) {
            std::istringstream fields(line.substr(std::string("%%g2g-attrs").size()));
            if (!(fields >> n >> d) || n < 0 || d < 0) {
                throw DataError(path + ":" + std::to_string(line_no) + ": malformed %%g2g-attrs header");
            }
            break;
        }
        if (data_line(line)) {
            throw DataError(path + ": missing %%g2g-attrs header before data");
        }
    }
    if (n < 0) throw DataError(path + ": missing %%g2g-attrs header");
    if (expected_rows >= 0 && n != expected_rows) {
        throw DataError(path + ": attribute header declares N=" + std::to_string(n) +
                        " but the graph has N=" + std::to_string(expected_rows));
    }
    AttributeMatrix attrs(n, d);
    while (std::getline(in, line)) {
        ++line_no;
        if (!data_line(line)) continue;
        std::istringstream fields(line);
        long long node = -1, feature = -1;
        double value = 0.0;
        if (!(fields >> node >> feature >> value) || node < 0 || feature < 0) {
            throw DataError(path + ":" + std::to_string(line_no) + ": malformed attribute line '" + line + "'");
        }
        if (node >= n) {
            throw DataError(path + ":" + std::to_string(line_no) + ": node id " + std::to_string(node) +
                            " out of bounds (N=" + std::to_string(n) + ")");
        }
        if (feature >= d) {
            throw DataError(path + ":" + std::to_string(line_no) + ": feature id " + std::to_string(feature) +
                            " out of bounds (D=" + std::to_string(d) + ")");
        }
        attrs.set(static_cast<int>(node), static_cast<int>(feature), value);
    }
    return attrs;
}

void load_attributes(const std::string& path, AttributedGraph& graph) {
    graph.attributes = load_attribute_file(path, graph.num_nodes);
}

void use_one_hot_attributes(AttributedGraph& graph) {
    graph.attributes = AttributeMatrix::identity(graph.num_nodes);
}

void load_labels(const std::string& path, AttributedGraph& graph) {
    auto in = open_input(path);
    std::vector<int> labels(graph.num_nodes, -1);
    std::unordered_map<std::string, int> class_ids;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!data_line(line)) continue;
        std::istringstream fields(line);
        long long node = -1;
        std::string label;
        if (!(fields >> node >> label) || node < 0) {
            throw DataError(path + ":" + std::to_string(line_no) + ": malformed label line '" + line + "'");
        }
        if (node >= graph.num_nodes) {
            throw DataError(path + ":" + std::to_string(line_no) + ": node id " + std::to_string(node) +
                            " out of bounds (N=" + std::to_string(graph.num_nodes) + ")");
        }
        if (labels[node] != -1) {
            throw DataError(path + ":" + std::to_string(line_no) + ": node " + std::to_string(node) +
                            " labeled twice");
        }
        auto [it, inserted] = class_ids.try_emplace(label, static_cast<int>(class_ids.size()));
        labels[node] = it->second;
    }
    graph.labels = std::move(labels);
    graph.num_classes = static_cast<int>(class_ids.size());
}

void save_edge_list(const AttributedGraph& graph, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write file: " + path);
    for (const auto& [u, v] : graph.edge_list()) out << u << '\t' << v << '\n';
}

void save_attribute_file(const AttributedGraph& graph, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write file: " + path);
    out << "%%g2g-attrs " << graph.attributes.rows() << ' ' << graph.attributes.cols() << '\n';
    out.precision(17);
    for (int i = 0; i < graph.attributes.rows(); ++i) {
        for (const auto& [c, v] : graph.attributes.row(i)) {
            out << i << '\t' << c << '\t' << v << '\n';
        }
    }
}

void save_label_file(const AttributedGraph& graph, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write file: " + path);
    for (NodeId v = 0; v < graph.num_nodes; ++v) {
        if (graph.labels.empty() || graph.labels[v] < 0) continue;
        out << v << "\tc" << graph.labels[v] << '\n';
    }
}

// ---------------------------------------------------------------------------
// Hop neighborhoods
// ---------------------------------------------------------------------------

namespace {

// BFS distances truncated at `depth`; untouched nodes keep -1.
std::vector<int> bfs_distances(const AttributedGraph& graph, NodeId anchor, int depth) {
    std::vector<int> dist(graph.num_nodes, -1);
    dist[anchor] = 0;
    std::deque<NodeId> frontier{anchor};
    while (!frontier.empty()) {
        NodeId u = frontier.front();
        frontier.pop_front();
        if (dist[u] == depth) continue;
        for (NodeId v : graph.out_edges[u]) {
            if (dist[v] < 0) {
                dist[v] = dist[u] + 1;
                frontier.push_back(v);
            }
        }
    }
    return dist;
}

} // namespace

HopNeighborhoods compute_hop_sets(const AttributedGraph& graph, NodeId anchor, int max_hop) {
    check_node(anchor, graph.num_nodes, "anchor");
    if (max_hop < 1) throw std::invalid_argument("max_hop must be >= 1");

    HopNeighborhoods hops;
    hops.anchor = anchor;
    hops.max_hop = max_hop;
    hops.sets.assign(max_hop, {});

    // Distances 1..K-1 are exact; everything else (>= K or unreachable) lands
    // in the K-th set, realizing min(sp, K) = K.
    std::vector<int> dist = bfs_distances(graph, anchor, max_hop - 1);
    for (NodeId v = 0; v < graph.num_nodes; ++v) {
        if (v == anchor) continue;
        int bucket = (dist[v] > 0) ? dist[v] : max_hop;
        hops.sets[bucket - 1].push_back(v);
    }
    return hops;
}

std::vector<HopNeighborhoods> compute_all_hop_sets(const AttributedGraph& graph, int max_hop) {
    std::vector<HopNeighborhoods> all;
    all.reserve(graph.num_nodes);
    for (NodeId v = 0; v < graph.num_nodes; ++v) all.push_back(compute_hop_sets(graph, v, max_hop));
    return all;
}

std::vector<std::vector<NodeId>> bfs_layers(const AttributedGraph& graph, NodeId anchor, int depth) {
    check_node(anchor, graph.num_nodes, "anchor");
    if (depth < 1) throw std::invalid_argument("depth must be >= 1");
    std::vector<int> dist = bfs_distances(graph, anchor, depth);
    std::vector<std::vector<NodeId>> layers(depth);
    for (NodeId v = 0; v < graph.num_nodes; ++v) {
        if (v == anchor || dist[v] <= 0) continue;
        layers[dist[v] - 1].push_back(v);
    }
    return layers;
}

// ---------------------------------------------------------------------------
// Splits
// ---------------------------------------------------------------------------

std::vector<Edge> greedy_edge_cover(const AttributedGraph& graph) {
    std::vector<bool> covered(graph.num_nodes, false);
    std::vector<Edge> cover;

    // Maximal matching pass.
    for (const auto& e : graph.edge_list()) {
        if (!covered[e.first] && !covered[e.second]) {
            covered[e.first] = covered[e.second] = true;
            cover.push_back(e);
        }
    }
    // Any node the matching missed gets one incident edge.
    for (NodeId v = 0; v < graph.num_nodes; ++v) {
        if (covered[v]) continue;
        if (graph.out_edges[v].empty()) {
            throw DataError("edge cover infeasible: node " + std::to_string(v) + " is isolated");
        }
        NodeId u = graph.out_edges[v].front();
        cover.push_back(canonical({v, u}, graph.directed));
        covered[v] = true;
    }
    return cover;
}

DataSplit split_edges(const AttributedGraph& graph, double val_frac, double test_frac,
                      bool edge_cover, std::uint64_t seed) {
    if (val_frac < 0 || test_frac < 0 || val_frac + test_frac >= 1.0) {
        throw std::invalid_argument("val_frac + test_frac must lie in [0, 1)");
    }
    std::vector<Edge> edges = graph.edge_list();
    const std::size_t total = edges.size();
    const auto val_count = static_cast<std::size_t>(std::floor(val_frac * static_cast<double>(total)));
    const auto test_count = static_cast<std::size_t>(std::floor(test_frac * static_cast<double>(total)));

    DataSplit split;
    std::unordered_set<Edge, EdgeHash> pinned;
    if (edge_cover) {
        std::vector<Edge> cover = greedy_edge_cover(graph);
        if (total - cover.size() < val_count + test_count) {
            throw DataError("train fraction too small for edge cover (cover size " +
                            std::to_string(cover.size()) + " of " + std::to_string(total) + " edges)");
        }
        pinned.insert(cover.begin(), cover.end());
        split.train_edges = std::move(cover);
    }

    std::vector<Edge> movable;
    movable.reserve(total - pinned.size());
    for (const auto& e : edges) {
        if (!pinned.count(e)) movable.push_back(e);
    }
    if (movable.size() < val_count + test_count) {
        throw DataError("not enough edges for the requested val/test fractions");
    }
    Rng rng = make_rng(seed, "split-edges");
    std::shuffle(movable.begin(), movable.end(), rng);
    split.val_edges.assign(movable.begin(), movable.begin() + val_count);
    split.test_edges.assign(movable.begin() + val_count, movable.begin() + val_count + test_count);
    split.train_edges.insert(split.train_edges.end(), movable.begin() + val_count + test_count,
                             movable.end());

    std::unordered_set<Edge, EdgeHash> all_edges(edges.begin(), edges.end());
    Rng non_edge_rng = make_rng(seed, "split-non-edges");
    std::vector<Edge> negatives = sample_non_edges(graph, val_count + test_count, all_edges, non_edge_rng);
    split.val_non_edges.assign(negatives.begin(), negatives.begin() + val_count);
    split.test_non_edges.assign(negatives.begin() + val_count, negatives.end());
    return split;
}

namespace {

std::vector<Edge> sample_non_edges_impl(const AttributedGraph& graph, std::size_t count,
                                        const std::unordered_set<Edge, EdgeHash>& exclude, Rng& rng,
                                        const std::vector<NodeId>* required_endpoints) {
    const int n = graph.num_nodes;
    std::vector<bool> required;
    if (required_endpoints) {
        required.assign(n, false);
        for (NodeId v : *required_endpoints) {
            check_node(v, n, "required endpoint");
            required[v] = true;
        }
    }

    auto admissible = [&](Edge e) {
        if (e.first == e.second) return false;
        if (required_endpoints && !required[e.first] && !required[e.second]) return false;
        Edge c = canonical(e, graph.directed);
        return !graph.has_edge(c.first, c.second) && !exclude.count(c);
    };

    std::unordered_set<Edge, EdgeHash> seen;
    std::vector<Edge> out;
    out.reserve(count);
    std::uniform_int_distribution<NodeId> pick(0, n - 1);
    std::size_t attempts = 0;
    const std::size_t attempt_cap = 200 * count + 1000;
    while (out.size() < count && attempts < attempt_cap) {
        ++attempts;
        Edge e = canonical({pick(rng), pick(rng)}, graph.directed);
        if (!admissible(e) || seen.count(e)) continue;
        seen.insert(e);
        out.push_back(e);
    }
    if (out.size() == count) return out;

    // Dense or tiny graphs can starve rejection sampling; enumerate instead.
    std::vector<Edge> candidates;
    for (NodeId u = 0; u < n; ++u) {
        for (NodeId v = graph.directed ? 0 : u + 1; v < n; ++v) {
            Edge e{u, v};
            if (admissible(e) && !seen.count(e)) candidates.push_back(e);
        }
    }
    if (candidates.size() + out.size() < count) {
        throw DataError("requested " + std::to_string(count) + " non-edges but only " +
                        std::to_string(candidates.size() + out.size()) + " exist");
    }
    std::shuffle(candidates.begin(), candidates.end(), rng);
    out.insert(out.end(), candidates.begin(), candidates.begin() + (count - out.size()));
    return out;
}

} // namespace

std::vector<Edge> sample_non_edges(const AttributedGraph& graph, std::size_t count,
                                   const std::unordered_set<Edge, EdgeHash>& exclude, Rng& rng) {
    return sample_non_edges_impl(graph, count, exclude, rng, nullptr);
}

std::vector<Edge> sample_non_edges(const AttributedGraph& graph, std::size_t count,
                                   const std::unordered_set<Edge, EdgeHash>& exclude,
                                   std::uint64_t seed) {
    Rng rng = make_rng(seed, "non-edges");
    return sample_non_edges(graph, count, exclude, rng);
}

std::vector<Edge> sample_non_edges_touching(const AttributedGraph& graph, std::size_t count,
                                            const std::unordered_set<Edge, EdgeHash>& exclude,
                                            const std::vector<NodeId>& required_endpoints, Rng& rng) {
    return sample_non_edges_impl(graph, count, exclude, rng, &required_endpoints);
}

HiddenNodeSplit hide_nodes(const AttributedGraph& graph, double fraction, std::uint64_t seed) {
    if (fraction <= 0.0 || fraction >= 1.0) throw std::invalid_argument("hidden fraction must be in (0, 1)");
    const int n = graph.num_nodes;
    const int hidden_count =
        std::max(1, static_cast<int>(std::floor(fraction * static_cast<double>(n))));
    if (n - hidden_count < 2) throw DataError("hiding leaves fewer than 2 training nodes");

    std::vector<NodeId> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng = make_rng(seed, "hide-nodes");
    std::shuffle(order.begin(), order.end(), rng);

    HiddenNodeSplit split;
    split.hidden_nodes.assign(order.begin(), order.begin() + hidden_count);
    std::sort(split.hidden_nodes.begin(), split.hidden_nodes.end());
    std::vector<bool> hidden(n, false);
    for (NodeId v : split.hidden_nodes) hidden[v] = true;

    std::vector<NodeId> new_id(n, -1);
    for (NodeId v = 0; v < n; ++v) {
        if (hidden[v]) continue;
        new_id[v] = static_cast<NodeId>(split.visible_ids.size());
        split.visible_ids.push_back(v);
    }

    std::vector<Edge> visible_edges;
    for (const auto& e : graph.edge_list()) {
        if (hidden[e.first] || hidden[e.second]) {
            split.held_out_edges.push_back(e);
        } else {
            visible_edges.emplace_back(new_id[e.first], new_id[e.second]);
        }
    }

    split.train_graph = build_graph(static_cast<int>(split.visible_ids.size()), graph.directed,
                                    visible_edges);
    if (graph.has_attributes()) {
        AttributeMatrix attrs(split.train_graph.num_nodes, graph.attributes.cols());
        for (NodeId v = 0; v < split.train_graph.num_nodes; ++v) {
            for (const auto& [c, value] : graph.attributes.row(split.visible_ids[v])) {
                attrs.set(v, c, value);
            }
        }
        split.train_graph.attributes = std::move(attrs);
    }
    if (graph.has_labels()) {
        split.train_graph.labels.resize(split.train_graph.num_nodes);
        for (NodeId v = 0; v < split.train_graph.num_nodes; ++v) {
            split.train_graph.labels[v] = graph.labels[split.visible_ids[v]];
        }
        split.train_graph.num_classes = graph.num_classes;
    }
    return split;
}

// ---------------------------------------------------------------------------
// Synthetic SBM fixture
// ---------------------------------------------------------------------------

int sbm_block_of(const SbmParams& params, NodeId node) {
    const int base = params.num_nodes / params.num_blocks;
    const int remainder = params.num_nodes % params.num_blocks;
    // First `remainder` blocks hold base+1 nodes.
    const int boundary = remainder * (base + 1);
    if (node < boundary) return node / (base + 1);
    return remainder + (node - boundary) / base;
}

AttributedGraph generate_sbm(const SbmParams& params) {
    if (params.num_nodes < 1 || params.num_blocks < 1 || params.num_blocks > params.num_nodes) {
        throw std::invalid_argument("invalid SBM sizes");
    }
    if (params.p_out < 0 || params.p_in > 1 || params.p_out > params.p_in) {
        throw std::invalid_argument("require 0 <= p_out <= p_in <= 1");
    }
    if (params.attr_dim < 1) throw std::invalid_argument("attr_dim must be >= 1");

    const int n = params.num_nodes;
    std::vector<int> block(n);
    for (NodeId v = 0; v < n; ++v) block[v] = sbm_block_of(params, v);

    Rng edge_rng = make_rng(params.seed, "sbm-edges");
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<Edge> edges;
    for (NodeId u = 0; u < n; ++u) {
        for (NodeId v = u + 1; v < n; ++v) {
            const double p = (block[u] == block[v]) ? params.p_in : params.p_out;
            if (p > 0 && unit(edge_rng) < p) edges.emplace_back(u, v);
        }
    }
    AttributedGraph g = build_graph(n, false, edges);

    // Block centroids under a fixed random projection, then per-node noise.
    Rng proj_rng = make_rng(params.seed, "sbm-projection");
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<std::vector<double>> centroid(params.num_blocks,
                                              std::vector<double>(params.attr_dim));
    for (auto& row : centroid) {
        for (double& x : row) x = gauss(proj_rng);
    }
    Rng noise_rng = make_rng(params.seed, "sbm-noise");
    AttributeMatrix attrs(n, params.attr_dim);
    for (NodeId v = 0; v < n; ++v) {
        for (int c = 0; c < params.attr_dim; ++c) {
            double value = centroid[block[v]][c];
            if (params.attr_noise > 0) value += params.attr_noise * gauss(noise_rng);
            if (value != 0.0) attrs.set(v, c, value);
        }
    }
    g.attributes = std::move(attrs);
    g.labels = std::move(block);
    g.num_classes = params.num_blocks;
    return g;
}

} // namespace g2g
