#include "augmae/graph.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "augmae/rng.hpp"

namespace augmae {

namespace {

void normalize_rows(std::vector<double>& m, int n, int d) {
    for (int i = 0; i < n; ++i) {
        double s = 0.0;
        for (int k = 0; k < d; ++k) {
            double v = m[static_cast<size_t>(i) * d + k];
            s += v * v;
        }
        double nrm = std::sqrt(s);
        if (nrm < 1e-12)
            throw std::domain_error("graph: feature row " + std::to_string(i) +
                                    " has norm below floor 1e-12");
        for (int k = 0; k < d; ++k) m[static_cast<size_t>(i) * d + k] /= nrm;
    }
}

std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

Graph Graph::build(int n, const std::vector<std::pair<int, int>>& edges,
                   std::vector<double> features, int d, std::vector<int> labels) {
    if (n <= 0) throw std::invalid_argument("Graph::build: node count must be positive");
    if (static_cast<size_t>(n) * d != features.size())
        throw std::invalid_argument("Graph::build: feature matrix shape mismatch");
    if (!labels.empty() && static_cast<int>(labels.size()) != n)
        throw std::invalid_argument("Graph::build: label count mismatch");
    Graph g;
    g.n = n;
    g.d = d;
    g.adj.assign(static_cast<size_t>(n) * n, 0.0);
    for (auto [u, v] : edges) {
        if (u < 0 || u >= n || v < 0 || v >= n)
            throw std::out_of_range("Graph::build: node id out of range: " + std::to_string(u) +
                                    " " + std::to_string(v));
        g.adj[static_cast<size_t>(u) * n + v] = 1.0;
        g.adj[static_cast<size_t>(v) * n + u] = 1.0;
    }
    for (int i = 0; i < n; ++i) g.adj[static_cast<size_t>(i) * n + i] = 1.0;
    normalize_rows(features, n, d);
    g.features = std::move(features);
    g.labels = std::move(labels);
    return g;
}

ad::Tensor Graph::feature_tensor() const { return ad::Tensor::constant(n, d, features); }

void SbmSpec::validate() const {
    if (block_sizes.empty()) throw std::invalid_argument("SbmSpec: no blocks");
    for (int s : block_sizes)
        if (s <= 0) throw std::invalid_argument("SbmSpec: block sizes must be positive");
    if (!(p_inter >= 0.0 && p_inter < p_intra && p_intra <= 1.0))
        throw std::invalid_argument("SbmSpec: require 0 <= p_inter < p_intra <= 1");
    if (feature_dim <= 0) throw std::invalid_argument("SbmSpec: feature_dim must be positive");
    if (feature_noise < 0.0) throw std::invalid_argument("SbmSpec: feature_noise must be >= 0");
}

int SbmSpec::total_nodes() const {
    int n = 0;
    for (int s : block_sizes) n += s;
    return n;
}

ad::Tensor sym_normalize(const Graph& g) {
    const int n = g.n;
    std::vector<double> deg(n, 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) deg[i] += g.a(i, j);
    std::vector<double> out(static_cast<size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) {
        if (deg[i] <= 0.0)
            throw std::domain_error("sym_normalize: node " + std::to_string(i) + " has degree 0");
        for (int j = 0; j < n; ++j)
            if (g.a(i, j) != 0.0)
                out[static_cast<size_t>(i) * n + j] = 1.0 / std::sqrt(deg[i] * deg[j]);
    }
    return ad::Tensor::constant(n, n, std::move(out));
}

Graph generate_sbm(const SbmSpec& spec) {
    spec.validate();
    const int n = spec.total_nodes();
    const int k = static_cast<int>(spec.block_sizes.size());
    const int d = spec.feature_dim;
    Rng rng(derive_seed(spec.seed, 0xb10c5));

    std::vector<int> labels(n);
    {
        int idx = 0;
        for (int b = 0; b < k; ++b)
            for (int s = 0; s < spec.block_sizes[b]; ++s) labels[idx++] = b;
    }

    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            double p = labels[i] == labels[j] ? spec.p_intra : spec.p_inter;
            if (rng.bernoulli(p)) edges.emplace_back(i, j);
        }

    // Unit centroid per block, then centroid + noise per node.
    Rng frng(derive_seed(spec.seed, 0xfea7));
    std::vector<double> centroids(static_cast<size_t>(k) * d);
    for (int b = 0; b < k; ++b) {
        double s = 0.0;
        for (int c = 0; c < d; ++c) {
            double v = frng.normal();
            centroids[static_cast<size_t>(b) * d + c] = v;
            s += v * v;
        }
        double nrm = std::sqrt(s);
        for (int c = 0; c < d; ++c) centroids[static_cast<size_t>(b) * d + c] /= nrm;
    }
    std::vector<double> feats(static_cast<size_t>(n) * d);
    for (int i = 0; i < n; ++i)
        for (int c = 0; c < d; ++c)
            feats[static_cast<size_t>(i) * d + c] =
                centroids[static_cast<size_t>(labels[i]) * d + c] +
                spec.feature_noise * frng.normal();

    return Graph::build(n, edges, std::move(feats), d, std::move(labels));
}

Graph load_graph(const std::string& edge_path, const std::string& feature_path,
                 const std::optional<std::string>& label_path) {
    std::ifstream ff(feature_path);
    if (!ff) throw std::runtime_error("load_graph: cannot open " + feature_path);
    std::vector<double> feats;
    int d = -1, n = 0;
    std::string line;
    int lineno = 0;
    while (std::getline(ff, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                row.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw std::runtime_error("load_graph: " + feature_path + ":" +
                                         std::to_string(lineno) + ": malformed value '" + cell +
                                         "'");
            }
        }
        if (d < 0) d = static_cast<int>(row.size());
        if (static_cast<int>(row.size()) != d)
            throw std::runtime_error("load_graph: " + feature_path + ":" +
                                     std::to_string(lineno) + ": ragged row");
        feats.insert(feats.end(), row.begin(), row.end());
        ++n;
    }
    if (n == 0) throw std::runtime_error("load_graph: " + feature_path + ": no feature rows");

    std::ifstream ef(edge_path);
    if (!ef) throw std::runtime_error("load_graph: cannot open " + edge_path);
    std::vector<std::pair<int, int>> edges;
    lineno = 0;
    while (std::getline(ef, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::stringstream ss(line);
        long u, v;
        if (!(ss >> u >> v))
            throw std::runtime_error("load_graph: " + edge_path + ":" + std::to_string(lineno) +
                                     ": malformed edge line");
        if (u < 0 || u >= n || v < 0 || v >= n)
            throw std::out_of_range("load_graph: " + edge_path + ":" + std::to_string(lineno) +
                                    ": node id out of range");
        edges.emplace_back(static_cast<int>(u), static_cast<int>(v));
    }

    std::vector<int> labels;
    if (label_path) {
        std::ifstream lf(*label_path);
        if (!lf) throw std::runtime_error("load_graph: cannot open " + *label_path);
        lineno = 0;
        while (std::getline(lf, line)) {
            ++lineno;
            if (line.empty()) continue;
            try {
                labels.push_back(std::stoi(line));
            } catch (const std::exception&) {
                throw std::runtime_error("load_graph: " + *label_path + ":" +
                                         std::to_string(lineno) + ": malformed label");
            }
        }
        if (static_cast<int>(labels.size()) != n)
            throw std::runtime_error("load_graph: label count " + std::to_string(labels.size()) +
                                     " does not match node count " + std::to_string(n));
    }
    return Graph::build(n, edges, std::move(feats), d, std::move(labels));
}

void save_graph(const Graph& g, const std::string& edge_path, const std::string& feature_path,
                const std::string& label_path) {
    {
        std::ofstream ef(edge_path);
        if (!ef) throw std::runtime_error("save_graph: cannot open " + edge_path);
        for (int i = 0; i < g.n; ++i)
            for (int j = i + 1; j < g.n; ++j)
                if (g.a(i, j) != 0.0) ef << i << " " << j << "\n";
    }
    save_embeddings(g.features, g.n, g.d, feature_path);
    if (g.has_labels()) {
        std::ofstream lf(label_path);
        if (!lf) throw std::runtime_error("save_graph: cannot open " + label_path);
        for (int l : g.labels) lf << l << "\n";
    }
}

void save_embeddings(const std::vector<double>& z, int n, int d, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("save_embeddings: cannot open " + path);
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < d; ++k) {
            if (k) f << ",";
            f << fmt_double(z[static_cast<size_t>(i) * d + k]);
        }
        f << "\n";
    }
}

}  // namespace augmae
