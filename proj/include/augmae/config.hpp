#ifndef AUGMAE_CONFIG_HPP
#define AUGMAE_CONFIG_HPP

#include <cstdint>
#include <string>

#include "augmae/graph.hpp"
#include "augmae/model.hpp"
#include "augmae/training.hpp"

namespace augmae {

/// Flat key=value run configuration; every field has a default. Unknown
/// keys are rejected.
struct RunConfig {
    // data
    int sbm_blocks = 2;
    int sbm_block_size = 50;
    double p_intra = 0.2;
    double p_inter = 0.02;
    int feature_dim = 8;
    double feature_noise = 0.1;

    // model
    int d_hidden = 32;
    int d_out = 16;
    int enc_layers = 1;
    int dec_layers = 1;

    // training
    int epochs = 200;
    double lr_model = 1e-3;
    double lr_generator = 1e-4;
    double gamma = 2.0;
    double lambda1 = 1.0;
    double lambda2 = 5e-4;
    double tau = 1.0;
    double mask_ratio = 0.5;
    double alpha0 = 0.0;
    double alphaT = 0.5;
    double eta = 1.0;
    double t_uniformity = 2.0;
    int uniformity_pair_cap = 4096;
    int gen_hidden = 16;
    double clip_norm = 5.0;
    double weight_decay = 0.0;
    uint64_t seed = 1;

    // evaluation
    double probe_train_fraction = 0.1;
    int probe_iterations = 1000;
    double probe_lr = 0.1;
    int align_pair_cap = 4096;
    double kde_bandwidth = 0.2;
    int density_bins = 36;

    // bound verification
    int vb_instances = 10000;
    int vb_restarts = 100;

    static RunConfig from_file(const std::string& path);  // throws on unknown keys
    void apply(const std::string& key, const std::string& value);
    void write(const std::string& path) const;
    std::string to_string() const;

    SbmSpec sbm_spec() const;
    ModelConfig model_config() const;
    TrainConfig train_config() const;
};

}  // namespace augmae

#endif
