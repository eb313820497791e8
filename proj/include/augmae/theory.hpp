#ifndef AUGMAE_THEORY_HPP
#define AUGMAE_THEORY_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "augmae/graph.hpp"

namespace augmae::theory {

/// Context-feature bipartite instance: joint weights W (C x F, total mass
/// 1), per-side degrees, normalized adjacency, the induced context graph,
/// and the unit-norm outputs of h on contexts and h_g on features.
struct BoundInstance {
    int n_contexts = 0;
    int n_features = 0;
    int dim = 0;
    std::vector<double> w;          // C*F joint probabilities
    std::vector<double> deg_c;      // row sums of w
    std::vector<double> deg_f;      // column sums of w
    std::vector<double> a_cf_norm;  // D_C^{-1/2} W D_F^{-1/2}
    std::vector<double> a_context;  // C*C, (A_C)_{c,c+} = sum_f w_cf w_c+f / d_f

    std::vector<std::vector<double>> h;        // per context, unit norm
    std::vector<std::vector<double>> hg;       // per feature, unit norm
    std::vector<std::vector<double>> feature;  // per feature, the actual x, unit norm

    /// Fills degrees, a_cf_norm, a_context from w. Requires every context
    /// and feature to carry positive mass.
    void finalize();

    double total_mass() const;
    double hg_frobenius_sq() const;  // sum_f d_f ||hg(f)||^2

    double sce(double gamma) const;          // E (1 - x . h(c))^gamma
    double pretext_direct() const;           // -E hg(x) . h(c)
    double pretext_trace() const;            // -tr(Hg^T Acf_norm^T H)
    double context_alignment() const;        // -sum A_C h(c) . h(c+)
    double measured_epsilon() const;         // E ||hg(x) - x||^2
};

struct ProofStep {
    std::string name;
    double slack = 0.0;  // >= -tol means the step holds
};

struct BoundReport {
    std::string theorem;
    double lhs = 0.0;
    double rhs = 0.0;
    double slack = 0.0;
    double tolerance = 1e-9;
    bool pass = false;
    std::vector<ProofStep> steps;
};

/// Explicit distribution over masks: (per-node 0/1 vector, probability).
struct MaskDistribution {
    std::vector<std::pair<std::vector<int>, double>> support;

    /// All 2^n masks of independent Bernoulli(p) draws; n <= 12.
    static MaskDistribution exhaustive_bernoulli(int n, double p);
    static MaskDistribution exhaustive_bernoulli(int n, const std::vector<double>& p);
};

/// Enumerates masked-node occurrences over the mask distribution, keys
/// contexts by a deterministic refinement encoding of the masked hop-radius
/// ego-graph, dedups features within feature_tol, and populates W and the
/// derived matrices. h/hg outputs are left empty for the caller to attach.
struct ContextOccurrence {
    int mask_index;  // into dist.support
    int node;
};
struct ContextFeatureGraph {
    BoundInstance instance;
    std::vector<std::vector<ContextOccurrence>> context_occurrences;  // per context
    std::vector<std::vector<int>> feature_nodes;                      // per feature id
};
ContextFeatureGraph build_context_feature_graph(const Graph& g, const MaskDistribution& dist,
                                                int hops, double feature_tol = 1e-9);

/// Returns (direct expectation form, trace form) of the pretext loss.
std::pair<double, double> pretext_trace_identity(const BoundInstance& inst);

BoundReport verify_theorem_4_2(const BoundInstance& inst, double gamma, double epsilon);
BoundReport verify_theorem_4_4(const BoundInstance& inst);
BoundReport verify_theorem_4_5(const BoundInstance& inst, double gamma, double epsilon);

/// Random dense positive instance with unit outputs; epsilon is the
/// measured h_g residual (assumption holds with equality).
BoundInstance random_instance(uint64_t seed, int max_contexts = 8, int max_features = 8,
                              int max_dim = 5);

/// Finite-difference gradient ascent on the Theorem 4.4 violation over
/// (h, hg) for fixed W. Returns the largest violation found (negative
/// slack means a genuine counterexample).
double adversarial_search_4_4(uint64_t seed, int restarts, int iters = 150);

/// Small per-node autoencoder trained to invert features; returns the
/// trained outputs and the achieved epsilon.
struct PseudoAutoencoder {
    std::vector<std::vector<double>> outputs;  // one unit row per feature
    double epsilon = 0.0;
};
PseudoAutoencoder train_pseudo_autoencoder(const std::vector<std::vector<double>>& features,
                                           const std::vector<double>& weights, int hidden,
                                           int steps, double lr, uint64_t seed);

}  // namespace augmae::theory

#endif
