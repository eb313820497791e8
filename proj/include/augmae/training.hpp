#ifndef AUGMAE_TRAINING_HPP
#define AUGMAE_TRAINING_HPP

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "augmae/graph.hpp"
#include "augmae/losses.hpp"
#include "augmae/masking.hpp"
#include "augmae/model.hpp"

namespace augmae {

struct AdamConfig {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.0;
};

/// Bias-corrected Adam over a fixed parameter group, with global-norm
/// gradient clipping.
class Adam {
public:
    Adam(std::vector<ad::Tensor> params, double lr, AdamConfig cfg = {});

    /// Consumes the gradients currently held by the parameters (then zeros
    /// them). sign = -1 descends, +1 ascends. Returns the pre-clip global
    /// gradient norm.
    double step(double sign = -1.0, double clip_norm = 0.0);

    long iterations() const { return t_; }

    void save(std::ofstream& f) const;
    void load(std::ifstream& f);

private:
    std::vector<ad::Tensor> params_;
    std::vector<std::vector<double>> m_, v_;
    double lr_;
    AdamConfig cfg_;
    long t_ = 0;
};

struct TrainConfig {
    int epochs = 200;
    double lr_model = 1e-3;
    double lr_generator = 1e-4;
    LossConfig loss;
    double tau = 1.0;
    double mask_ratio = 0.5;  // random-masking ratio r
    Schedule schedule;
    int gen_hidden = 16;
    uint64_t seed = 1;
    AdamConfig adam;
    double clip_norm = 5.0;

    void validate() const;
};

struct EpochReport {
    int epoch = 0;
    double l_sce = 0.0;
    double l_uni = 0.0;
    double gen_objective = 0.0;
    double mask_ratio = 0.0;
    double alpha_adv = 0.0;
    double gen_grad_norm = 0.0;
    double model_grad_norm = 0.0;
};

/// Raised when a loss goes non-finite; carries a diagnostic snapshot.
struct TrainAbort : std::runtime_error {
    explicit TrainAbort(const std::string& what) : std::runtime_error(what) {}
};

class Trainer {
public:
    Trainer(const Graph& graph, const ModelConfig& model_cfg, const TrainConfig& cfg);

    /// One alternating round: ascend the generator on
    /// L_sce - lambda1/sin(pi ratio) through the soft mask, then descend the
    /// model on L_sce + (1-alpha) lambda2 L_uni with a hard mask.
    EpochReport train_epoch();

    /// Runs the remaining epochs up to cfg.epochs.
    void fit();

    const Model& model() const { return model_; }
    const MaskGenerator& generator() const { return generator_; }
    const std::vector<EpochReport>& history() const { return history_; }
    int epoch() const { return epoch_; }
    const TrainConfig& config() const { return cfg_; }

    /// Encoder output on the unmasked graph (evaluation embeddings).
    std::vector<double> embeddings() const;

    /// SCE of the current model under an externally supplied hard mask
    /// (diagnostic; no parameter update).
    double sce_under_mask(const std::vector<int>& masked_nodes) const;

    void save_checkpoint(const std::string& path) const;
    void load_checkpoint(const std::string& path);

private:
    const Graph& graph_;
    TrainConfig cfg_;
    Model model_;
    MaskGenerator generator_;
    Adam model_opt_;
    Adam gen_opt_;
    ad::Tensor a_norm_;
    int epoch_ = 0;
    std::vector<EpochReport> history_;
};

void export_history_csv(const std::vector<EpochReport>& history, const std::string& path);

}  // namespace augmae

#endif
