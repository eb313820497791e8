#ifndef AUGMAE_MODEL_HPP
#define AUGMAE_MODEL_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "augmae/autodiff.hpp"
#include "augmae/graph.hpp"
#include "augmae/masking.hpp"

namespace augmae {

struct ModelConfig {
    int d_in = 0;
    int d_hidden = 32;
    int d_out = 16;
    int enc_layers = 1;
    int dec_layers = 1;
    double prelu_slope = 0.25;

    void validate() const;
};

enum class MaskMode { Hard, Soft };

/// GCN-style masked autoencoder h = g . f with a learnable mask token.
/// Encoder output and decoder output are both row-l2-normalized.
struct Model {
    ModelConfig cfg;
    std::vector<ad::Tensor> enc_w;
    std::vector<ad::Tensor> dec_w;
    ad::Tensor mask_token;  // 1 x d_in, initialized to zeros

    static Model init(const ModelConfig& cfg, uint64_t seed);
    std::vector<ad::Tensor> parameters() const;

    /// x~_i = m_i * token + (1 - m_i) * x_i. Hard mode requires a {0,1}
    /// mask vector; soft mode keeps the path to the mask generator
    /// differentiable.
    ad::Tensor apply_mask(ad::Tape& tape, const Graph& g, const MaskSample& mask,
                          MaskMode mode) const;

    /// Z = f(x~, A): enc_layers rounds of A_norm . H . W with PReLU between
    /// layers, then row normalization onto the hypersphere.
    ad::Tensor encode(ad::Tape& tape, const ad::Tensor& a_norm, const ad::Tensor& x_masked) const;

    /// Decoder half: dec_layers propagation rounds from Z back to feature
    /// space, row-normalized output.
    ad::Tensor decode(ad::Tape& tape, const ad::Tensor& a_norm, const ad::Tensor& z) const;

    /// Full h = g . f; row i is the reconstruction from the
    /// (enc_layers + dec_layers)-hop masked context of node i.
    ad::Tensor reconstruct(ad::Tape& tape, const ad::Tensor& a_norm,
                           const ad::Tensor& x_masked) const;
};

/// Text checkpoint (hexfloat payload; exact round-trip).
void save_model(const Model& m, const std::string& path);
Model load_model(const std::string& path);

}  // namespace augmae

#endif
