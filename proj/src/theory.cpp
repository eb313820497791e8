#include "augmae/theory.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <queue>
#include <stdexcept>

#include "augmae/autodiff.hpp"
#include "augmae/losses.hpp"
#include "augmae/rng.hpp"
#include "augmae/training.hpp"

namespace augmae::theory {

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double sqdist(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return s;
}

void normalize(std::vector<double>& v) {
    double n = std::sqrt(dot(v, v));
    if (n < 1e-12) throw std::domain_error("theory: zero vector cannot be normalized");
    for (auto& x : v) x /= n;
}

std::vector<double> random_unit(int d, Rng& rng) {
    std::vector<double> v(d);
    for (auto& x : v) x = rng.normal();
    normalize(v);
    return v;
}

}  // namespace

void BoundInstance::finalize() {
    const int C = n_contexts, F = n_features;
    if (C <= 0 || F <= 0 || static_cast<int>(w.size()) != C * F)
        throw std::invalid_argument("BoundInstance: bad shape");
    deg_c.assign(C, 0.0);
    deg_f.assign(F, 0.0);
    for (int c = 0; c < C; ++c)
        for (int f = 0; f < F; ++f) {
            double v = w[static_cast<size_t>(c) * F + f];
            if (v < 0.0) throw std::invalid_argument("BoundInstance: negative weight");
            deg_c[c] += v;
            deg_f[f] += v;
        }
    for (int c = 0; c < C; ++c)
        if (deg_c[c] <= 0.0) throw std::invalid_argument("BoundInstance: context with zero mass");
    for (int f = 0; f < F; ++f)
        if (deg_f[f] <= 0.0) throw std::invalid_argument("BoundInstance: feature with zero mass");

    a_cf_norm.assign(w.size(), 0.0);
    for (int c = 0; c < C; ++c)
        for (int f = 0; f < F; ++f)
            a_cf_norm[static_cast<size_t>(c) * F + f] =
                w[static_cast<size_t>(c) * F + f] / std::sqrt(deg_c[c] * deg_f[f]);

    a_context.assign(static_cast<size_t>(C) * C, 0.0);
    for (int a = 0; a < C; ++a)
        for (int b = 0; b < C; ++b) {
            double s = 0.0;
            for (int f = 0; f < F; ++f)
                s += w[static_cast<size_t>(a) * F + f] * w[static_cast<size_t>(b) * F + f] /
                     deg_f[f];
            a_context[static_cast<size_t>(a) * C + b] = s;
        }
}

double BoundInstance::total_mass() const {
    double s = 0.0;
    for (double v : w) s += v;
    return s;
}

double BoundInstance::hg_frobenius_sq() const {
    double s = 0.0;
    for (int f = 0; f < n_features; ++f) s += deg_f[f] * dot(hg[f], hg[f]);
    return s;
}

double BoundInstance::sce(double gamma) const {
    double s = 0.0;
    for (int c = 0; c < n_contexts; ++c)
        for (int f = 0; f < n_features; ++f)
            s += w[static_cast<size_t>(c) * n_features + f] *
                 std::pow(1.0 - dot(feature[f], h[c]), gamma);
    return s;
}

double BoundInstance::pretext_direct() const {
    double s = 0.0;
    for (int c = 0; c < n_contexts; ++c)
        for (int f = 0; f < n_features; ++f)
            s += w[static_cast<size_t>(c) * n_features + f] * dot(hg[f], h[c]);
    return -s;
}

double BoundInstance::pretext_trace() const {
    // H row c = sqrt(d_c) h(c); Hg row f = sqrt(d_f) hg(f).
    double s = 0.0;
    for (int c = 0; c < n_contexts; ++c)
        for (int f = 0; f < n_features; ++f)
            s += a_cf_norm[static_cast<size_t>(c) * n_features + f] * std::sqrt(deg_f[f]) *
                 std::sqrt(deg_c[c]) * dot(hg[f], h[c]);
    return -s;
}

double BoundInstance::context_alignment() const {
    double s = 0.0;
    for (int a = 0; a < n_contexts; ++a)
        for (int b = 0; b < n_contexts; ++b)
            s += a_context[static_cast<size_t>(a) * n_contexts + b] * dot(h[a], h[b]);
    return -s;
}

double BoundInstance::measured_epsilon() const {
    double s = 0.0;
    for (int f = 0; f < n_features; ++f) s += deg_f[f] * sqdist(hg[f], feature[f]);
    return s;
}

MaskDistribution MaskDistribution::exhaustive_bernoulli(int n, double p) {
    return exhaustive_bernoulli(n, std::vector<double>(n, p));
}

MaskDistribution MaskDistribution::exhaustive_bernoulli(int n, const std::vector<double>& p) {
    if (n < 1 || n > 12)
        throw std::invalid_argument("MaskDistribution: exhaustive enumeration needs 1 <= n <= 12");
    MaskDistribution d;
    for (uint32_t bits = 0; bits < (1u << n); ++bits) {
        std::vector<int> m(n);
        double prob = 1.0;
        for (int i = 0; i < n; ++i) {
            m[i] = (bits >> i) & 1;
            prob *= m[i] ? p[i] : 1.0 - p[i];
        }
        if (prob > 0.0) d.support.emplace_back(std::move(m), prob);
    }
    return d;
}

namespace {

std::string quantize_key(const std::vector<double>& v, double tol) {
    std::string s;
    char buf[32];
    for (double x : v) {
        std::snprintf(buf, sizeof(buf), "%lld,", static_cast<long long>(std::llround(x / tol)));
        s += buf;
    }
    return s;
}

/// Deterministic encoding of the masked ego-graph of `root` within `hops`.
/// Initial label = (distance from root, masked? : quantized feature);
/// `hops` rounds of refinement append the sorted multiset of neighbor
/// labels. Key = root label + sorted labels of all reachable nodes.
std::string context_key(const Graph& g, const std::vector<int>& mask, int root, int hops,
                        double tol) {
    std::vector<int> dist(g.n, -1);
    std::vector<int> nodes;
    std::queue<int> q;
    dist[root] = 0;
    q.push(root);
    while (!q.empty()) {
        int u = q.front();
        q.pop();
        nodes.push_back(u);
        if (dist[u] == hops) continue;
        for (int v = 0; v < g.n; ++v)
            if (v != u && g.a(u, v) != 0.0 && dist[v] < 0) {
                dist[v] = dist[u] + 1;
                q.push(v);
            }
    }
    std::map<int, std::string> label;
    for (int u : nodes) {
        std::string feat = mask[u] ? std::string("M")
                                   : quantize_key(std::vector<double>(
                                         g.features.begin() + static_cast<size_t>(u) * g.d,
                                         g.features.begin() + static_cast<size_t>(u + 1) * g.d),
                                                  tol);
        label[u] = std::to_string(dist[u]) + ":" + feat;
    }
    for (int round = 0; round < hops; ++round) {
        std::map<int, std::string> next;
        for (int u : nodes) {
            std::vector<std::string> neigh;
            for (int v : nodes)
                if (v != u && g.a(u, v) != 0.0) neigh.push_back(label[v]);
            std::sort(neigh.begin(), neigh.end());
            std::string s = label[u] + "(";
            for (const auto& x : neigh) s += x + ";";
            s += ")";
            next[u] = std::move(s);
        }
        label = std::move(next);
    }
    std::vector<std::string> all;
    for (int u : nodes)
        if (u != root) all.push_back(label[u]);
    std::sort(all.begin(), all.end());
    std::string key = "R" + label[root] + "|";
    for (const auto& s : all) key += s + "|";
    return key;
}

}  // namespace

ContextFeatureGraph build_context_feature_graph(const Graph& g, const MaskDistribution& dist,
                                                int hops, double feature_tol) {
    if (dist.support.empty())
        throw std::logic_error("build_context_feature_graph: empty mask support");

    std::map<std::string, int> feat_ids;
    std::map<std::string, int> ctx_ids;
    std::vector<std::vector<double>> feat_vecs;
    std::vector<std::vector<int>> feat_nodes;
    std::vector<std::vector<ContextOccurrence>> ctx_occ;
    std::map<std::pair<int, int>, double> weights;  // (ctx, feat) -> mass

    double total = 0.0;
    for (size_t mi = 0; mi < dist.support.size(); ++mi) {
        const auto& [mask, prob] = dist.support[mi];
        if (static_cast<int>(mask.size()) != g.n)
            throw std::invalid_argument("build_context_feature_graph: mask length mismatch");
        int masked_count = 0;
        for (int v : mask) masked_count += v ? 1 : 0;
        if (masked_count == 0) continue;  // no masked node to reconstruct
        double per_node = prob / masked_count;
        for (int i = 0; i < g.n; ++i) {
            if (!mask[i]) continue;
            std::vector<double> x(g.features.begin() + static_cast<size_t>(i) * g.d,
                                  g.features.begin() + static_cast<size_t>(i + 1) * g.d);
            std::string fkey = quantize_key(x, feature_tol);
            auto [fit, fnew] = feat_ids.try_emplace(fkey, static_cast<int>(feat_vecs.size()));
            if (fnew) {
                feat_vecs.push_back(std::move(x));
                feat_nodes.emplace_back();
            }
            if (std::find(feat_nodes[fit->second].begin(), feat_nodes[fit->second].end(), i) ==
                feat_nodes[fit->second].end())
                feat_nodes[fit->second].push_back(i);

            std::string ckey = context_key(g, mask, i, hops, feature_tol);
            auto [cit, cnew] = ctx_ids.try_emplace(ckey, static_cast<int>(ctx_occ.size()));
            if (cnew) ctx_occ.emplace_back();
            ctx_occ[cit->second].push_back({static_cast<int>(mi), i});

            weights[{cit->second, fit->second}] += per_node;
            total += per_node;
        }
    }
    if (total <= 0.0)
        throw std::logic_error("build_context_feature_graph: mask support never masks a node");

    ContextFeatureGraph out;
    BoundInstance& inst = out.instance;
    inst.n_contexts = static_cast<int>(ctx_occ.size());
    inst.n_features = static_cast<int>(feat_vecs.size());
    inst.dim = g.d;
    inst.w.assign(static_cast<size_t>(inst.n_contexts) * inst.n_features, 0.0);
    for (const auto& [key, mass] : weights)
        inst.w[static_cast<size_t>(key.first) * inst.n_features + key.second] = mass / total;
    inst.feature = feat_vecs;
    inst.finalize();
    out.context_occurrences = std::move(ctx_occ);
    out.feature_nodes = std::move(feat_nodes);
    return out;
}

std::pair<double, double> pretext_trace_identity(const BoundInstance& inst) {
    return {inst.pretext_direct(), inst.pretext_trace()};
}

namespace {

/// Shared slack bookkeeping for the Theorem 4.2 proof chain.
void theorem_4_2_steps(const BoundInstance& inst, double gamma, double epsilon,
                       BoundReport& rep) {
    double e_bernoulli_lhs = 0.0, e_bernoulli_rhs = 0.0;
    double e_recon_sq = 0.0, e_residual_sq = 0.0, e_cross_sq = 0.0;
    for (int c = 0; c < inst.n_contexts; ++c)
        for (int f = 0; f < inst.n_features; ++f) {
            double m = inst.w[static_cast<size_t>(c) * inst.n_features + f];
            double u = dot(inst.feature[f], inst.h[c]);  // cosine, in [-1, 1]
            e_bernoulli_lhs += m * std::pow(1.0 - u, gamma);
            e_bernoulli_rhs += m * (1.0 - gamma * u);
            e_recon_sq += m * sqdist(inst.feature[f], inst.h[c]);
            e_residual_sq += m * sqdist(inst.hg[f], inst.feature[f]);
            e_cross_sq += m * sqdist(inst.hg[f], inst.h[c]);
        }
    rep.steps.push_back(
        {"bernoulli (1-u)^gamma >= 1-gamma*u", e_bernoulli_lhs - e_bernoulli_rhs});
    rep.steps.push_back({"assumption residual <= epsilon", epsilon - e_residual_sq});
    rep.steps.push_back(
        {"parallelogram ||a+b||^2 <= 2(||a||^2+||b||^2)",
         e_recon_sq + e_residual_sq - 0.5 * e_cross_sq});
}

}  // namespace

BoundReport verify_theorem_4_2(const BoundInstance& inst, double gamma, double epsilon) {
    if (gamma < 1.0) throw std::invalid_argument("verify_theorem_4_2: gamma must be >= 1");
    if (epsilon < 0.0) throw std::invalid_argument("verify_theorem_4_2: epsilon must be >= 0");
    if (epsilon + 1e-9 < inst.measured_epsilon())
        throw std::logic_error(
            "verify_theorem_4_2: epsilon below the measured residual (precondition)");
    BoundReport rep;
    rep.theorem = "4.2";
    rep.lhs = inst.sce(gamma);
    rep.rhs = gamma / 2.0 * inst.pretext_direct() - gamma / 2.0 * epsilon + (1.0 - gamma / 2.0);
    theorem_4_2_steps(inst, gamma, epsilon, rep);
    rep.slack = rep.lhs - rep.rhs;
    rep.pass = rep.slack >= -rep.tolerance;
    return rep;
}

BoundReport verify_theorem_4_4(const BoundInstance& inst) {
    double frob = inst.hg_frobenius_sq();
    if (std::abs(frob - 1.0) > 1e-9)
        throw std::logic_error("verify_theorem_4_4: ||Hg||_F^2 != 1 (precondition violated)");
    BoundReport rep;
    rep.theorem = "4.4";
    rep.lhs = inst.pretext_direct();
    double align = inst.context_alignment();
    rep.rhs = 0.5 * align - 0.5;

    // trace reformulation and the two identities used in the proof
    double trace = inst.pretext_trace();
    rep.steps.push_back({"trace identity |direct - trace|",
                         -std::abs(rep.lhs - trace)});  // slack 0 means exact
    // ||Acf_norm^T H||_F^2 equals sum A_C h.h+
    double prop_sq = 0.0;
    for (int f = 0; f < inst.n_features; ++f) {
        std::vector<double> acc(inst.dim, 0.0);
        for (int c = 0; c < inst.n_contexts; ++c) {
            double coef = inst.a_cf_norm[static_cast<size_t>(c) * inst.n_features + f] *
                          std::sqrt(inst.deg_c[c]);
            for (int k = 0; k < inst.dim; ++k) acc[k] += coef * inst.h[c][k];
        }
        prop_sq += dot(acc, acc);
    }
    rep.steps.push_back({"propagated norm identity", -std::abs(prop_sq - (-align))});
    rep.steps.push_back({"tr(A^T B) <= (||A||^2 + ||B||^2)/2",
                         0.5 * (frob + prop_sq) - (-trace)});
    rep.slack = rep.lhs - rep.rhs;
    rep.pass = rep.slack >= -rep.tolerance;
    return rep;
}

BoundReport verify_theorem_4_5(const BoundInstance& inst, double gamma, double epsilon) {
    BoundReport r42 = verify_theorem_4_2(inst, gamma, epsilon);
    BoundReport r44 = verify_theorem_4_4(inst);
    BoundReport rep;
    rep.theorem = "4.5";
    rep.lhs = inst.sce(gamma);
    rep.rhs = gamma / 4.0 * inst.context_alignment() - gamma / 2.0 * epsilon +
              (1.0 - gamma / 2.0 - gamma / 4.0);
    rep.steps = r42.steps;
    for (const auto& s : r44.steps) rep.steps.push_back(s);
    rep.slack = rep.lhs - rep.rhs;
    rep.pass = rep.slack >= -rep.tolerance;
    return rep;
}

BoundInstance random_instance(uint64_t seed, int max_contexts, int max_features, int max_dim) {
    Rng rng(derive_seed(seed, 0x7e081));
    BoundInstance inst;
    inst.n_contexts = 1 + rng.uniform_int(max_contexts);
    inst.n_features = 1 + rng.uniform_int(max_features);
    inst.dim = 1 + rng.uniform_int(max_dim);
    inst.w.resize(static_cast<size_t>(inst.n_contexts) * inst.n_features);
    double total = 0.0;
    for (auto& v : inst.w) {
        // sparse-ish positive weights; the floor keeps every degree positive
        v = (rng.uniform() < 0.3 ? 0.0 : rng.uniform()) + 1e-4;
        total += v;
    }
    for (auto& v : inst.w) v /= total;
    for (int c = 0; c < inst.n_contexts; ++c) inst.h.push_back(random_unit(inst.dim, rng));
    for (int f = 0; f < inst.n_features; ++f) {
        inst.feature.push_back(random_unit(inst.dim, rng));
        // hg is a noisy copy of the feature so the measured epsilon varies
        // across instances without being degenerate
        std::vector<double> v = inst.feature.back();
        double noise = rng.uniform(0.0, 1.5);
        for (auto& x : v) x += noise * rng.normal();
        normalize(v);
        inst.hg.push_back(std::move(v));
    }
    inst.finalize();
    return inst;
}

double adversarial_search_4_4(uint64_t seed, int restarts, int iters) {
    double worst = std::numeric_limits<double>::infinity();
    for (int r = 0; r < restarts; ++r) {
        BoundInstance inst = random_instance(derive_seed(seed, r, 0xad5));
        const int C = inst.n_contexts, F = inst.n_features, D = inst.dim;
        // flatten (h, hg) into one parameter vector of raw (pre-normalization)
        // coordinates
        std::vector<double> theta;
        for (const auto& v : inst.h) theta.insert(theta.end(), v.begin(), v.end());
        for (const auto& v : inst.hg) theta.insert(theta.end(), v.begin(), v.end());

        auto violation = [&](const std::vector<double>& p) {
            BoundInstance tmp = inst;
            size_t off = 0;
            for (int c = 0; c < C; ++c) {
                std::vector<double> v(p.begin() + off, p.begin() + off + D);
                normalize(v);
                tmp.h[c] = std::move(v);
                off += D;
            }
            for (int f = 0; f < F; ++f) {
                std::vector<double> v(p.begin() + off, p.begin() + off + D);
                normalize(v);
                tmp.hg[f] = std::move(v);
                off += D;
            }
            double lhs = tmp.pretext_direct();
            double rhs = 0.5 * tmp.context_alignment() - 0.5;
            return rhs - lhs;  // > 0 would break the bound
        };

        double step = 0.05;
        double cur = violation(theta);
        std::vector<double> grad(theta.size());
        for (int it = 0; it < iters; ++it) {
            const double h = 1e-6;
            for (size_t i = 0; i < theta.size(); ++i) {
                double keep = theta[i];
                theta[i] = keep + h;
                double fp = violation(theta);
                theta[i] = keep - h;
                double fm = violation(theta);
                theta[i] = keep;
                grad[i] = (fp - fm) / (2.0 * h);
            }
            for (size_t i = 0; i < theta.size(); ++i) theta[i] += step * grad[i];
            double nxt = violation(theta);
            if (nxt < cur) step *= 0.5;
            cur = nxt;
            if (step < 1e-6) break;
        }
        worst = std::min(worst, -cur);  // convert violation to slack
    }
    return worst;  // minimum slack across restarts
}

PseudoAutoencoder train_pseudo_autoencoder(const std::vector<std::vector<double>>& features,
                                           const std::vector<double>& weights, int hidden,
                                           int steps, double lr, uint64_t seed) {
    if (features.empty() || features.size() != weights.size())
        throw std::invalid_argument("train_pseudo_autoencoder: bad inputs");
    const int F = static_cast<int>(features.size());
    const int D = static_cast<int>(features[0].size());
    std::vector<double> xflat;
    for (const auto& row : features) xflat.insert(xflat.end(), row.begin(), row.end());
    ad::Tensor x = ad::Tensor::constant(F, D, xflat);
    ad::Tensor wvec = ad::Tensor::constant(F, 1, weights);

    Rng rng(derive_seed(seed, 0xae));
    auto glorot = [&rng](int in, int out) {
        double b = std::sqrt(6.0 / (in + out));
        std::vector<double> v(static_cast<size_t>(in) * out);
        for (auto& e : v) e = rng.uniform(-b, b);
        return ad::Tensor::parameter(in, out, std::move(v));
    };
    ad::Tensor w1 = glorot(D, hidden);
    ad::Tensor w2 = glorot(hidden, D);
    Adam opt({w1, w2}, lr);

    double last = 0.0;
    for (int s = 0; s < steps; ++s) {
        ad::Tape tape;
        ad::Tensor out = ad::row_l2_normalize(
            tape, ad::matmul(tape, ad::prelu(tape, ad::matmul(tape, x, w1), 0.25), w2));
        ad::Tensor diff = ad::sub(tape, out, x);
        ad::Tensor res = ad::rowwise_sum(tape, ad::mul(tape, diff, diff));
        ad::Tensor loss = ad::total_sum(tape, ad::mul(tape, wvec, res));
        last = loss.item();
        tape.backward(loss);
        opt.step(-1.0, 0.0);
    }

    PseudoAutoencoder result;
    ad::Tape tape;
    ad::Tensor out = ad::row_l2_normalize(
        tape, ad::matmul(tape, ad::prelu(tape, ad::matmul(tape, x, w1), 0.25), w2));
    for (int f = 0; f < F; ++f) {
        std::vector<double> row(D);
        for (int k = 0; k < D; ++k) row[k] = out.at(f, k);
        result.outputs.push_back(std::move(row));
    }
    result.epsilon = last;
    return result;
}

}  // namespace augmae::theory
