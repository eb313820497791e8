#ifndef AUGMAE_MASKING_HPP
#define AUGMAE_MASKING_HPP

#include <cstdint>
#include <vector>

#include "augmae/autodiff.hpp"
#include "augmae/graph.hpp"

namespace augmae {

/// Probability clamp applied to the generator head output.
inline constexpr double kProbClamp = 1e-6;

/// GNN mask generator: one symmetric-normalized propagation layer with a
/// PReLU nonlinearity, then a linear head squashed through a sigmoid.
struct MaskGenerator {
    ad::Tensor w;     // d_in x d_hidden
    ad::Tensor head;  // d_hidden x 1
    double prelu_slope = 0.25;

    static MaskGenerator init(int d_in, int d_hidden, uint64_t seed);
    std::vector<ad::Tensor> parameters() const { return {w, head}; }
};

struct MaskSample {
    ad::Tensor prob;          // n x 1, mixed probabilities actually sampled from
    ad::Tensor soft;          // n x 1, values strictly in (0,1)
    ad::Tensor hard;          // n x 1, {0,1}, straight-through to soft
    std::vector<int> masked;  // indices with hard == 1
    double tau = 1.0;
    double realized_ratio() const;
};

/// Easy-to-hard mixing weight schedule alpha(t) = a0 + (t/T)^eta (aT - a0).
struct Schedule {
    double alpha0 = 0.0;
    double alphaT = 1.0;
    double eta = 1.0;
    int epochs = 1;

    void validate() const;
    double alpha_at(int t) const;  // throws std::out_of_range for t outside [0, T]
};

/// Sigmoid of the generator head over the graph, clamped to
/// [kProbClamp, 1 - kProbClamp]; differentiable in the generator weights.
ad::Tensor adv_probabilities(ad::Tape& tape, const MaskGenerator& gen, const Graph& g,
                             const ad::Tensor& a_norm);

/// Binary-concrete relaxation: soft_i = sigmoid((logit(prob_i) + g0 - g1)/tau)
/// with g0, g1 ~ Gumbel(0,1); hard mask by 0.5 threshold with a
/// straight-through gradient. Pass explicit noise to pin it in tests.
MaskSample gumbel_binarize(ad::Tape& tape, const ad::Tensor& prob, double tau, uint64_t seed);
MaskSample gumbel_binarize_with_noise(ad::Tape& tape, const ad::Tensor& prob, double tau,
                                      const std::vector<double>& noise_diff);

/// (1 - alpha) * prob_rand + alpha * prob_adv.
ad::Tensor mix_probabilities(ad::Tape& tape, const ad::Tensor& prob_rand,
                             const ad::Tensor& prob_adv, double alpha_adv);

/// Constant vector r * 1^n for uniform random masking.
ad::Tensor random_probabilities(int n, double r);

}  // namespace augmae

#endif
