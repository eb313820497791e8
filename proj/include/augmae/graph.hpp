#ifndef AUGMAE_GRAPH_HPP
#define AUGMAE_GRAPH_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "augmae/autodiff.hpp"

namespace augmae {

/// Undirected graph with self-loops and row-l2-normalized node features.
/// Immutable after construction.
struct Graph {
    int n = 0;
    int d = 0;
    std::vector<double> adj;       // n*n, entries in {0,1}, diag all ones
    std::vector<double> features;  // n*d, unit rows
    std::vector<int> labels;       // empty when absent

    bool has_labels() const { return !labels.empty(); }
    double a(int i, int j) const { return adj[static_cast<size_t>(i) * n + j]; }
    double x(int i, int k) const { return features[static_cast<size_t>(i) * d + k]; }

    /// Builds a graph from an edge list (self-loops added, duplicates
    /// ignored) and a raw feature matrix; features are normalized here.
    static Graph build(int n, const std::vector<std::pair<int, int>>& edges,
                       std::vector<double> features, int d, std::vector<int> labels = {});

    ad::Tensor feature_tensor() const;
};

struct SbmSpec {
    std::vector<int> block_sizes;
    double p_intra = 0.2;
    double p_inter = 0.02;
    int feature_dim = 8;
    double feature_noise = 0.1;
    uint64_t seed = 0;

    void validate() const;  // throws std::invalid_argument
    int total_nodes() const;
};

/// D^{-1/2} (A) D^{-1/2} of the self-looped adjacency, as a constant tensor.
ad::Tensor sym_normalize(const Graph& g);

/// Planted-partition generator. Features are unit-normalized block
/// centroids plus Gaussian noise; labels are block ids in block order.
Graph generate_sbm(const SbmSpec& spec);

Graph load_graph(const std::string& edge_path, const std::string& feature_path,
                 const std::optional<std::string>& label_path = std::nullopt);

void save_graph(const Graph& g, const std::string& edge_path, const std::string& feature_path,
                const std::string& label_path);

void save_embeddings(const std::vector<double>& z, int n, int d, const std::string& path);

}  // namespace augmae

#endif
