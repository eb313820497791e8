#include "augmae/losses.hpp"

#include <cmath>
#include <stdexcept>

#include "augmae/rng.hpp"

namespace augmae {

namespace {

std::vector<std::pair<int, int>> make_pairs(int n, int pair_cap, uint64_t seed) {
    if (n < 2) throw std::logic_error("uniformity_loss: need at least 2 rows");
    const long total = static_cast<long>(n) * (n - 1);
    std::vector<std::pair<int, int>> pairs;
    if (total <= pair_cap) {
        pairs.reserve(total);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (i != j) pairs.emplace_back(i, j);
    } else {
        Rng rng(derive_seed(seed, 0x9a1f5));
        pairs.reserve(pair_cap);
        while (static_cast<int>(pairs.size()) < pair_cap) {
            int i = rng.uniform_int(n);
            int j = rng.uniform_int(n);
            if (i != j) pairs.emplace_back(i, j);
        }
    }
    return pairs;
}

}  // namespace

void LossConfig::validate() const {
    if (gamma < 1.0) throw std::invalid_argument("LossConfig: gamma must be >= 1");
    if (t_uniformity <= 0.0) throw std::invalid_argument("LossConfig: t must be positive");
    if (lambda1 < 0.0 || lambda2 < 0.0)
        throw std::invalid_argument("LossConfig: lambda weights must be >= 0");
    if (uniformity_pair_cap < 2)
        throw std::invalid_argument("LossConfig: pair cap too small");
}

ad::Tensor sce_loss(ad::Tape& tape, const ad::Tensor& x, const ad::Tensor& xhat,
                    const ad::Tensor& weights, double gamma) {
    if (x.rows() != xhat.rows() || x.cols() != xhat.cols())
        throw std::invalid_argument("sce_loss: shape mismatch");
    if (weights.rows() != x.rows() || weights.cols() != 1)
        throw std::invalid_argument("sce_loss: weights must be n x 1");
    double wsum = 0.0;
    for (double w : weights.values()) {
        if (w < 0.0) throw std::invalid_argument("sce_loss: negative weight");
        wsum += w;
    }
    if (wsum <= 0.0) throw std::logic_error("sce_loss: empty mask (all weights zero)");

    ad::Tensor cos = ad::rowwise_dot(tape, x, xhat);
    ad::Tensor err = ad::pow(tape, ad::sub(tape, ad::Tensor::scalar(1.0), cos), gamma);
    ad::Tensor num = ad::total_sum(tape, ad::mul(tape, weights, err));
    ad::Tensor den = ad::total_sum(tape, weights);
    return ad::mul(tape, num, ad::pow(tape, den, -1.0));
}

double alignment_loss(
    const std::vector<std::pair<std::vector<double>, std::vector<double>>>& pairs) {
    if (pairs.empty()) throw std::logic_error("alignment_loss: empty pair list");
    double s = 0.0;
    for (const auto& [a, b] : pairs) {
        if (a.size() != b.size()) throw std::invalid_argument("alignment_loss: dim mismatch");
        double d2 = 0.0;
        for (size_t k = 0; k < a.size(); ++k) d2 += (a[k] - b[k]) * (a[k] - b[k]);
        s += d2;
    }
    return s / pairs.size();
}

ad::Tensor uniformity_loss(ad::Tape& tape, const ad::Tensor& z, double t, int pair_cap,
                           uint64_t seed) {
    return ad::log_mean_gaussian_potential(tape, z, t, make_pairs(z.rows(), pair_cap, seed));
}

double uniformity_value(const std::vector<double>& z, int n, int d, double t, int pair_cap,
                        uint64_t seed) {
    ad::Tape tape;
    return uniformity_loss(tape, ad::Tensor::constant(n, d, z), t, pair_cap, seed).item();
}

ad::Tensor ratio_regularizer(ad::Tape& tape, const ad::Tensor& m_soft) {
    for (double v : m_soft.values())
        if (v < 0.0 || v > 1.0)
            throw std::invalid_argument("ratio_regularizer: mask entries must lie in [0,1]");
    ad::Tensor ratio = ad::clamp(tape, ad::mean(tape, m_soft), 1e-4, 1.0 - 1e-4);
    return ad::pow(tape, ad::sin(tape, ad::scale(tape, ratio, M_PI)), -1.0);
}

double pretext_loss(const std::vector<std::vector<double>>& h_outputs,
                    const std::vector<std::vector<double>>& hg_outputs,
                    const std::vector<double>& weights) {
    if (h_outputs.empty() || h_outputs.size() != hg_outputs.size() ||
        h_outputs.size() != weights.size())
        throw std::logic_error("pretext_loss: mismatched or empty inputs");
    double num = 0.0, den = 0.0;
    for (size_t i = 0; i < h_outputs.size(); ++i) {
        double dot = 0.0;
        for (size_t k = 0; k < h_outputs[i].size(); ++k) dot += h_outputs[i][k] * hg_outputs[i][k];
        num += weights[i] * dot;
        den += weights[i];
    }
    if (den <= 0.0) throw std::logic_error("pretext_loss: zero total weight");
    return -num / den;
}

double context_alignment_loss(const std::vector<std::vector<double>>& h_outputs,
                              const std::vector<double>& pair_weights_row_major) {
    const size_t C = h_outputs.size();
    if (C == 0 || pair_weights_row_major.size() != C * C)
        throw std::logic_error("context_alignment_loss: bad weight matrix");
    double num = 0.0, den = 0.0;
    for (size_t a = 0; a < C; ++a)
        for (size_t b = 0; b < C; ++b) {
            double w = pair_weights_row_major[a * C + b];
            if (w < 0.0) throw std::invalid_argument("context_alignment_loss: negative weight");
            double dot = 0.0;
            for (size_t k = 0; k < h_outputs[a].size(); ++k) dot += h_outputs[a][k] * h_outputs[b][k];
            num += w * dot;
            den += w;
        }
    if (den <= 0.0) throw std::logic_error("context_alignment_loss: all-zero weights");
    return -num / den;
}

ad::Tensor generator_objective(ad::Tape& tape, const ad::Tensor& l_sce,
                               const ad::Tensor& m_soft, double lambda1) {
    return ad::sub(tape, l_sce, ad::scale(tape, ratio_regularizer(tape, m_soft), lambda1));
}

ad::Tensor model_objective(ad::Tape& tape, const ad::Tensor& l_sce, const ad::Tensor& l_uni,
                           double alpha_adv, double lambda2) {
    if (!(alpha_adv >= 0.0 && alpha_adv <= 1.0))
        throw std::invalid_argument("model_objective: alpha_adv must lie in [0,1]");
    return ad::add(tape, l_sce, ad::scale(tape, l_uni, (1.0 - alpha_adv) * lambda2));
}

}  // namespace augmae
