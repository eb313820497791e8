#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <stdexcept>
#include <vector>

#include "augmae/rng.hpp"
#include "augmae/theory.hpp"

using namespace augmae;
using namespace augmae::theory;

namespace {

std::vector<double> unit(std::vector<double> v) {
    double n = 0.0;
    for (double x : v) n += x * x;
    n = std::sqrt(n);
    for (double& x : v) x /= n;
    return v;
}

BoundInstance trivial_instance() {
    BoundInstance inst;
    inst.n_contexts = 1;
    inst.n_features = 1;
    inst.dim = 2;
    inst.w = {1.0};
    inst.h = {unit({0.3, 0.7})};
    inst.hg = {unit({0.5, 0.4})};
    inst.feature = {unit({0.5, 0.4})};
    inst.finalize();
    return inst;
}

}  // namespace

TEST_CASE("trivial single context/feature instance") {
    BoundInstance inst = trivial_instance();
    CHECK(inst.total_mass() == doctest::Approx(1.0));
    CHECK(inst.deg_c[0] == 1.0);
    CHECK(inst.deg_f[0] == 1.0);
    CHECK(inst.a_context[0] == doctest::Approx(1.0));
    double dot = inst.h[0][0] * inst.hg[0][0] + inst.h[0][1] * inst.hg[0][1];
    auto [direct, trace] = pretext_trace_identity(inst);
    CHECK(direct == doctest::Approx(-dot).epsilon(1e-14));
    CHECK(trace == doctest::Approx(-dot).epsilon(1e-14));
}

TEST_CASE("orthogonal outputs give zero pretext loss") {
    BoundInstance inst = trivial_instance();
    inst.h = {{1.0, 0.0}};
    inst.hg = {{0.0, 1.0}};
    auto [direct, trace] = pretext_trace_identity(inst);
    CHECK(direct == doctest::Approx(0.0));
    CHECK(trace == doctest::Approx(0.0));
}

TEST_CASE("trace identity on random instances to 1e-12") {
    for (uint64_t seed = 1; seed <= 500; ++seed) {
        BoundInstance inst = random_instance(seed);
        auto [direct, trace] = pretext_trace_identity(inst);
        CHECK(std::abs(direct - trace) < 1e-12);
    }
}

TEST_CASE("mass conservation and degree consistency on random instances") {
    for (uint64_t seed = 1; seed <= 200; ++seed) {
        BoundInstance inst = random_instance(seed);
        CHECK(std::abs(inst.total_mass() - 1.0) < 1e-12);
        double ac_mass = 0.0;
        for (double v : inst.a_context) ac_mass += v;
        CHECK(std::abs(ac_mass - 1.0) < 1e-12);
        for (int c = 0; c < inst.n_contexts; ++c) {
            double row = 0.0;
            for (int f = 0; f < inst.n_features; ++f)
                row += inst.w[static_cast<size_t>(c) * inst.n_features + f];
            CHECK(std::abs(row - inst.deg_c[c]) < 1e-12);
        }
        for (int f = 0; f < inst.n_features; ++f) {
            double col = 0.0;
            for (int c = 0; c < inst.n_contexts; ++c)
                col += inst.w[static_cast<size_t>(c) * inst.n_features + f];
            CHECK(std::abs(col - inst.deg_f[f]) < 1e-12);
        }
        // A_C symmetry
        for (int a = 0; a < inst.n_contexts; ++a)
            for (int b = 0; b < a; ++b)
                CHECK(inst.a_context[static_cast<size_t>(a) * inst.n_contexts + b] ==
                      doctest::Approx(inst.a_context[static_cast<size_t>(b) * inst.n_contexts + a])
                          .epsilon(1e-14));
        CHECK(std::abs(inst.hg_frobenius_sq() - 1.0) < 1e-9);
    }
}

TEST_CASE("exhaustive bernoulli mask distribution") {
    MaskDistribution d = MaskDistribution::exhaustive_bernoulli(3, 0.25);
    CHECK(d.support.size() == 8);
    double total = 0.0;
    for (const auto& [mask, p] : d.support) total += p;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-14));
    // P(all masked) = 0.25^3
    for (const auto& [mask, p] : d.support)
        if (mask == std::vector<int>{1, 1, 1}) CHECK(p == doctest::Approx(0.015625));
    CHECK_THROWS(MaskDistribution::exhaustive_bernoulli(13, 0.5));
}

TEST_CASE("context-feature graph: single always-masked node") {
    Graph g = Graph::build(1, {}, {1.0, 0.0}, 2);
    MaskDistribution dist;
    dist.support = {{{1}, 1.0}};
    ContextFeatureGraph cf = build_context_feature_graph(g, dist, 1);
    CHECK(cf.instance.n_contexts == 1);
    CHECK(cf.instance.n_features == 1);
    CHECK(cf.instance.w == std::vector<double>{1.0});
    CHECK(cf.instance.a_context == std::vector<double>{1.0});
}

TEST_CASE("context-feature graph: identical isolated nodes collapse") {
    // two isolated nodes, same feature, independent Bernoulli(1/2) masks
    Graph g = Graph::build(2, {}, {1.0, 0.0, 1.0, 0.0}, 2);
    MaskDistribution dist = MaskDistribution::exhaustive_bernoulli(2, 0.5);
    ContextFeatureGraph cf = build_context_feature_graph(g, dist, 1);
    CHECK(cf.instance.n_features == 1);   // features dedup
    CHECK(cf.instance.n_contexts == 1);   // symmetric masked ego-graphs collapse
    double col = 0.0;
    for (int c = 0; c < cf.instance.n_contexts; ++c) col += cf.instance.w[c];
    CHECK(col == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("4-node path: W matches brute-force occurrence counting") {
    // path 0-1-2-3 with distinct features; hops = 1
    std::vector<double> feats = {1, 0, 0, 0, 1, 0, 0, 0, 1, 1, 1, 1};
    Graph g = Graph::build(4, {{0, 1}, {1, 2}, {2, 3}}, feats, 3);
    MaskDistribution dist = MaskDistribution::exhaustive_bernoulli(4, 0.5);
    ContextFeatureGraph cf = build_context_feature_graph(g, dist, 1);
    const BoundInstance& inst = cf.instance;
    CHECK(inst.n_features == 4);

    // independent brute-force oracle: every (mask, masked node) occurrence
    // carries mass p/|V~|; group by (masked 1-hop ego signature, feature id)
    std::map<std::pair<std::string, int>, double> oracle;
    double oracle_mass = 0.0;
    for (const auto& [mask, p] : dist.support) {
        int count = 0;
        for (int v : mask) count += v;
        if (count == 0) continue;
        for (int i = 0; i < 4; ++i) {
            if (!mask[i]) continue;
            // signature: node's masked flag pattern and features over the
            // closed neighborhood, in a canonical orientation
            std::string sig;
            auto describe = [&](int v) {
                std::string s = mask[v] ? "M" : "x" + std::to_string(v);
                return s;
            };
            std::vector<std::string> neigh;
            for (int j = 0; j < 4; ++j)
                if (j != i && g.a(i, j) > 0) neigh.push_back(describe(j));
            std::sort(neigh.begin(), neigh.end());
            // the root is always masked, so its label carries no node id;
            // mirror-symmetric fully-masked neighborhoods must collapse
            sig = "M|";
            for (const auto& s : neigh) sig += s + ",";
            oracle[{sig, i}] += p / count;
            oracle_mass += p / count;
        }
    }
    // raw occurrence mass is 1 - P(empty mask); the instance renormalizes to 1
    CHECK(oracle_mass == doctest::Approx(1.0 - std::pow(0.5, 4)).epsilon(1e-12));
    CHECK(std::abs(inst.total_mass() - 1.0) < 1e-12);
    // per-feature oracle mass (features distinct, so feature f == node f)
    std::vector<double> feat_mass(4, 0.0);
    double total = 0.0;
    for (const auto& [key, m] : oracle) {
        feat_mass[key.second] += m;
        total += m;
    }
    // after renormalization W sums to 1; compare per-feature marginals
    std::vector<double> got_marginal(inst.n_features, 0.0);
    for (int c = 0; c < inst.n_contexts; ++c)
        for (int f = 0; f < inst.n_features; ++f)
            got_marginal[f] += inst.w[static_cast<size_t>(c) * inst.n_features + f];
    std::sort(got_marginal.begin(), got_marginal.end());
    std::vector<double> want_marginal;
    for (int f = 0; f < 4; ++f) want_marginal.push_back(feat_mass[f] / total);
    std::sort(want_marginal.begin(), want_marginal.end());
    REQUIRE(got_marginal.size() == want_marginal.size());
    for (size_t i = 0; i < got_marginal.size(); ++i)
        CHECK(got_marginal[i] == doctest::Approx(want_marginal[i]).epsilon(1e-12));
    // and the context count matches the oracle's signature count
    std::map<std::string, int> sigs;
    for (const auto& [key, m] : oracle) sigs[key.first] = 1;
    CHECK(inst.n_contexts == static_cast<int>(sigs.size()));
}

TEST_CASE("theorem 4.2 on the perfect world") {
    BoundInstance inst = trivial_instance();
    inst.h = {inst.feature[0]};   // h reconstructs exactly
    inst.hg = {inst.feature[0]};  // identity pseudo-encoder
    BoundReport r = verify_theorem_4_2(inst, 1.0, 0.0);
    CHECK(r.pass);
    CHECK(inst.sce(1.0) == doctest::Approx(0.0));
    // gamma = 1 makes the bernoulli step an equality
    for (const ProofStep& s : r.steps)
        if (s.name.find("bernoulli") != std::string::npos) CHECK(std::abs(s.slack) < 1e-12);
}

TEST_CASE("theorem verification on random instances") {
    for (uint64_t seed = 1; seed <= 300; ++seed) {
        BoundInstance inst = random_instance(seed);
        double eps = inst.measured_epsilon();
        for (double gamma : {1.0, 2.0, 3.0}) {
            BoundReport r42 = verify_theorem_4_2(inst, gamma, eps);
            CHECK(r42.pass);
            CHECK(r42.slack >= -1e-9);
            BoundReport r45 = verify_theorem_4_5(inst, gamma, eps);
            CHECK(r45.pass);
        }
        BoundReport r44 = verify_theorem_4_4(inst);
        CHECK(r44.pass);
        for (const ProofStep& s : r44.steps) CHECK(s.slack >= -1e-9);
    }
}

TEST_CASE("theorem 4.4 rejects instances violating the norm precondition") {
    BoundInstance inst = trivial_instance();
    inst.hg = {{2.0, 0.0}};  // breaks ||H_g||_F^2 = 1
    CHECK_THROWS_AS(verify_theorem_4_4(inst), std::logic_error);
}

TEST_CASE("epsilon contract: too-small epsilon is rejected") {
    BoundInstance inst = random_instance(42);
    double eps = inst.measured_epsilon();
    CHECK(eps > 1e-4);
    CHECK_THROWS(verify_theorem_4_2(inst, 2.0, eps * 0.5));
}

TEST_CASE("adversarial search finds no violation") {
    double min_slack = adversarial_search_4_4(2024, 20);
    CHECK(min_slack >= -1e-9);
}

TEST_CASE("measured epsilon closed forms") {
    // identity pseudo-encoder: epsilon = 0
    BoundInstance inst = trivial_instance();
    inst.hg = {inst.feature[0]};
    CHECK(inst.measured_epsilon() == doctest::Approx(0.0));

    // constant output vs features uniform on S^1: E||z - x||^2 = 2 because
    // the symmetric feature grid has zero mean
    const int F = 16;
    BoundInstance circ;
    circ.n_contexts = 1;
    circ.n_features = F;
    circ.dim = 2;
    circ.w.assign(F, 1.0 / F);
    circ.h = {{1.0, 0.0}};
    for (int f = 0; f < F; ++f) {
        double a = 2.0 * M_PI * f / F;
        circ.feature.push_back({std::cos(a), std::sin(a)});
        circ.hg.push_back({1.0, 0.0});
    }
    circ.finalize();
    CHECK(circ.measured_epsilon() == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("trained pseudo-autoencoder reaches epsilon < 0.05") {
    Rng rng(99);
    std::vector<std::vector<double>> features;
    for (int f = 0; f < 16; ++f) {
        std::vector<double> v(8);
        for (double& x : v) x = rng.normal();
        features.push_back(unit(v));
    }
    std::vector<double> weights(16, 1.0 / 16.0);
    PseudoAutoencoder pae = train_pseudo_autoencoder(features, weights, 32, 2000, 0.01, 7);
    CHECK(pae.epsilon < 0.05);
    for (const auto& row : pae.outputs) {
        double n = 0.0;
        for (double x : row) n += x * x;
        CHECK(std::abs(std::sqrt(n) - 1.0) < 1e-9);
    }
}
