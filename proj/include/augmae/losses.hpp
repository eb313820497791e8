#ifndef AUGMAE_LOSSES_HPP
#define AUGMAE_LOSSES_HPP

#include <cstdint>
#include <utility>
#include <vector>

#include "augmae/autodiff.hpp"

namespace augmae {

struct LossConfig {
    double gamma = 2.0;          // SCE scaling factor, >= 1
    double t_uniformity = 2.0;   // Gaussian potential kernel
    double lambda1 = 1.0;        // ratio regularizer weight
    double lambda2 = 5e-4;       // uniformity regularizer weight
    int uniformity_pair_cap = 4096;

    void validate() const;
};

/// Scaled cosine error: sum_i w_i (1 - x_i . xhat_i)^gamma / sum_i w_i.
/// Weights are hard mask indicators or soft mask values; all-zero weights
/// is an error (empty mask).
ad::Tensor sce_loss(ad::Tape& tape, const ad::Tensor& x, const ad::Tensor& xhat,
                    const ad::Tensor& weights, double gamma);

/// Mean squared distance over positive pairs (plain metric, no tape).
double alignment_loss(const std::vector<std::pair<std::vector<double>, std::vector<double>>>& pairs);

/// log mean_{i != j} exp(-t ||z_i - z_j||^2), over all pairs or a
/// seed-fixed uniform sample of pair_cap pairs when n^2 is too large.
ad::Tensor uniformity_loss(ad::Tape& tape, const ad::Tensor& z, double t, int pair_cap,
                           uint64_t seed);
double uniformity_value(const std::vector<double>& z, int n, int d, double t, int pair_cap,
                        uint64_t seed);

/// 1 / sin(pi * mean(m)), with the ratio clamped to [1e-4, 1 - 1e-4].
ad::Tensor ratio_regularizer(ad::Tape& tape, const ad::Tensor& m_soft);

/// -sum_i w_i hg_i . h_i / sum_i w_i (negative weighted mean dot product).
double pretext_loss(const std::vector<std::vector<double>>& h_outputs,
                    const std::vector<std::vector<double>>& hg_outputs,
                    const std::vector<double>& weights);

/// -sum_{c,c+} w_{c,c+} h(c) . h(c+) / sum w over a C x C row-major pair
/// weight matrix (context-level alignment).
double context_alignment_loss(const std::vector<std::vector<double>>& h_outputs,
                              const std::vector<double>& pair_weights_row_major);

/// Generator objective (to MAXIMIZE): L_sce - lambda1 * ratio_regularizer.
ad::Tensor generator_objective(ad::Tape& tape, const ad::Tensor& l_sce,
                               const ad::Tensor& m_soft, double lambda1);

/// Model objective (to MINIMIZE): L_sce + (1 - alpha_adv) * lambda2 * L_uni.
ad::Tensor model_objective(ad::Tape& tape, const ad::Tensor& l_sce, const ad::Tensor& l_uni,
                           double alpha_adv, double lambda2);

}  // namespace augmae

#endif
