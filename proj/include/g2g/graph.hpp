#pragma once

#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "g2g/common.hpp"

namespace g2g {

/// One attribute row stored as (column, value) pairs sorted by column.
/// One-hot inputs and bag-of-words style features stay sparse; dense rows
/// simply carry every column.
using SparseRow = std::vector<std::pair<int, double>>;

class AttributeMatrix {
public:
    AttributeMatrix() = default;
    AttributeMatrix(int rows, int cols) : rows_(rows), cols_(cols), data_(rows) {}

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    bool empty() const { return rows_ == 0 || cols_ == 0; }

    const SparseRow& row(int i) const { return data_.at(i); }

    /// Inserts or overwrites a single entry, keeping the row sorted by column.
    void set(int r, int c, double value);

    std::vector<double> dense_row(int i) const;

    /// X = I, the plain-graph one-hot encoding.
    static AttributeMatrix identity(int n);

private:
    int rows_ = 0, cols_ = 0;
    std::vector<SparseRow> data_;
};

struct AttributedGraph {
    int num_nodes = 0;
    bool directed = false;
    /// Per-node sorted target ids. Undirected graphs store both arc directions.
    std::vector<std::vector<NodeId>> out_edges;
    AttributeMatrix attributes;
    /// Per-node class id, -1 = unlabeled. Empty when no labels were loaded.
    std::vector<int> labels;
    int num_classes = 0;

    bool has_edge(NodeId src, NodeId dst) const;
    std::size_t num_arcs() const;
    /// Canonical edge count: arcs for directed graphs, unordered pairs otherwise.
    std::size_t num_edges() const;
    /// Canonical edge list: ordered arcs (directed) or src < dst pairs (undirected).
    std::vector<Edge> edge_list() const;
    bool has_attributes() const { return !attributes.empty(); }
    bool has_labels() const { return !labels.empty(); }
    int degree(NodeId v) const { return static_cast<int>(out_edges.at(v).size()); }
};

struct EdgeCleanupStats {
    std::size_t self_loops = 0;
    std::size_t duplicates = 0;
};

/// Builds a graph from raw (src, dst) pairs: drops self-loops and duplicates
/// (counted in `stats` when given) and symmetrizes undirected input.
AttributedGraph build_graph(int num_nodes, bool directed, const std::vector<Edge>& edges,
                            EdgeCleanupStats* stats = nullptr);

/// Same nodes, attributes and labels; structure replaced by `edges`
/// (canonical form; symmetrized again when the graph is undirected).
AttributedGraph subgraph_with_edges(const AttributedGraph& graph, const std::vector<Edge>& edges);

/// Adjacency with the symmetric closure applied; used for undirected hop sets
/// on directed input (`--hops-undirected`).
AttributedGraph symmetrized_view(const AttributedGraph& graph);

// ---------------------------------------------------------------------------
// File formats (UTF-8, whitespace-separated, '#' comment lines)
// ---------------------------------------------------------------------------

/// Edge list "src dst" per line. With a hint, N = hint and every id must be
/// below it; otherwise N = max id + 1.
AttributedGraph load_edge_list(const std::string& path, bool directed,
                               std::optional<int> num_nodes_hint = std::nullopt,
                               EdgeCleanupStats* stats = nullptr);

/// Attribute triplets with header "%%g2g-attrs N D" and lines "node feature value".
AttributeMatrix load_attribute_file(const std::string& path, int expected_rows = -1);
void load_attributes(const std::string& path, AttributedGraph& graph);

/// Sets X = I for plain graphs.
void use_one_hot_attributes(AttributedGraph& graph);

/// Label lines "node label_string"; strings are mapped to dense class ids in
/// first-appearance order, unlabeled nodes stay -1.
void load_labels(const std::string& path, AttributedGraph& graph);

void save_edge_list(const AttributedGraph& graph, const std::string& path);
void save_attribute_file(const AttributedGraph& graph, const std::string& path);
void save_label_file(const AttributedGraph& graph, const std::string& path);

// ---------------------------------------------------------------------------
// Hop neighborhoods
// ---------------------------------------------------------------------------

/// Partition of V \ {anchor} by truncated shortest-path distance: sets[k-1]
/// holds the nodes with min(sp(anchor, j), K) = k, so the last set also
/// collects everything at distance >= K and the unreachable nodes.
struct HopNeighborhoods {
    NodeId anchor = 0;
    int max_hop = 0;
    std::vector<std::vector<NodeId>> sets;

    std::size_t cardinality(int hop) const { return sets.at(hop - 1).size(); }
};

HopNeighborhoods compute_hop_sets(const AttributedGraph& graph, NodeId anchor, int max_hop);
std::vector<HopNeighborhoods> compute_all_hop_sets(const AttributedGraph& graph, int max_hop);

/// Exact-distance BFS layers 1..depth (no remainder bucket); layer k holds the
/// nodes at distance exactly k. Used by the neighborhood-diversity protocol.
std::vector<std::vector<NodeId>> bfs_layers(const AttributedGraph& graph, NodeId anchor, int depth);

// ---------------------------------------------------------------------------
// Splits and sampling
// ---------------------------------------------------------------------------

struct DataSplit {
    std::vector<Edge> train_edges, val_edges, test_edges;
    std::vector<Edge> val_non_edges, test_non_edges;
    std::vector<NodeId> hidden_nodes;
};

/// Greedy edge cover: maximal matching first, then one incident edge per node
/// the matching missed. Throws DataError when an isolated node makes a cover
/// impossible.
std::vector<Edge> greedy_edge_cover(const AttributedGraph& graph);

/// Splits the canonical edge set into train/val/test and samples matching
/// counts of non-edges. With edge_cover on, a greedy cover is pinned to train
/// first so every node keeps at least one training edge. Undirected edges
/// travel together with their reverse (one canonical entry).
DataSplit split_edges(const AttributedGraph& graph, double val_frac, double test_frac,
                      bool edge_cover, std::uint64_t seed);

/// Uniform sample of `count` distinct non-edges avoiding self-loops, existing
/// edges and `exclude`. Pairs are ordered for directed graphs, canonical
/// src < dst otherwise.
std::vector<Edge> sample_non_edges(const AttributedGraph& graph, std::size_t count,
                                   const std::unordered_set<Edge, EdgeHash>& exclude, Rng& rng);
std::vector<Edge> sample_non_edges(const AttributedGraph& graph, std::size_t count,
                                   const std::unordered_set<Edge, EdgeHash>& exclude,
                                   std::uint64_t seed);

/// As above but every sampled pair must touch `required_endpoints` (inductive
/// protocol negatives).
std::vector<Edge> sample_non_edges_touching(const AttributedGraph& graph, std::size_t count,
                                            const std::unordered_set<Edge, EdgeHash>& exclude,
                                            const std::vector<NodeId>& required_endpoints, Rng& rng);

struct HiddenNodeSplit {
    /// Induced subgraph on the visible nodes with compacted ids.
    AttributedGraph train_graph;
    /// train_graph id -> original id.
    std::vector<NodeId> visible_ids;
    /// Original ids of the hidden nodes.
    std::vector<NodeId> hidden_nodes;
    /// All original canonical edges with at least one hidden endpoint.
    std::vector<Edge> held_out_edges;
};

/// Hides max(1, floor(fraction * N)) nodes chosen uniformly; their attributes
/// stay available through the original graph for inductive inference.
HiddenNodeSplit hide_nodes(const AttributedGraph& graph, double fraction, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Synthetic fixture
// ---------------------------------------------------------------------------

struct SbmParams {
    int num_nodes = 0;
    int num_blocks = 1;
    double p_in = 0.0;
    double p_out = 0.0;
    int attr_dim = 0;
    double attr_noise = 0.0;
    std::uint64_t seed = 1;
};

/// Undirected stochastic block model with contiguous blocks (remainder spread
/// over the first blocks). Attributes are the block centroid under a fixed
/// random projection plus i.i.d. Gaussian noise; block ids become labels.
AttributedGraph generate_sbm(const SbmParams& params);

int sbm_block_of(const SbmParams& params, NodeId node);

} // namespace g2g
