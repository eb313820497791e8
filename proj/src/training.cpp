#include "augmae/training.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "augmae/rng.hpp"

namespace augmae {

namespace {

void write_buffer(std::ofstream& f, const std::vector<double>& v) {
    char buf[40];
    f << v.size() << "\n";
    for (size_t i = 0; i < v.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%a", v[i]);
        f << buf << (i + 1 == v.size() ? "" : " ");
    }
    f << "\n";
}

std::vector<double> read_buffer(std::ifstream& f) {
    size_t n;
    if (!(f >> n)) throw std::runtime_error("checkpoint: truncated buffer header");
    std::vector<double> v(n);
    for (auto& x : v) {
        std::string tok;
        if (!(f >> tok)) throw std::runtime_error("checkpoint: truncated buffer");
        x = std::strtod(tok.c_str(), nullptr);
    }
    return v;
}

void zero_grads(const std::vector<ad::Tensor>& params) {
    for (auto p : params) p.zero_grad();
}

}  // namespace

Adam::Adam(std::vector<ad::Tensor> params, double lr, AdamConfig cfg)
    : params_(std::move(params)), lr_(lr), cfg_(cfg) {
    for (const auto& p : params_) {
        m_.emplace_back(p.size(), 0.0);
        v_.emplace_back(p.size(), 0.0);
    }
}

double Adam::step(double sign, double clip_norm) {
    double norm2 = 0.0;
    for (const auto& p : params_)
        for (double g : p.grad()) norm2 += g * g;
    double norm = std::sqrt(norm2);
    double clip_scale = (clip_norm > 0.0 && norm > clip_norm) ? clip_norm / norm : 1.0;

    ++t_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (size_t i = 0; i < params_.size(); ++i) {
        auto& p = params_[i];
        auto& val = p.values();
        auto& grad = p.grad();
        for (size_t k = 0; k < val.size(); ++k) {
            double g = grad[k] * clip_scale + cfg_.weight_decay * val[k];
            m_[i][k] = cfg_.beta1 * m_[i][k] + (1.0 - cfg_.beta1) * g;
            v_[i][k] = cfg_.beta2 * v_[i][k] + (1.0 - cfg_.beta2) * g * g;
            double mhat = m_[i][k] / bc1;
            double vhat = v_[i][k] / bc2;
            val[k] += sign * lr_ * mhat / (std::sqrt(vhat) + cfg_.eps);
        }
        p.zero_grad();
    }
    return norm;
}

void Adam::save(std::ofstream& f) const {
    f << "adam " << t_ << " " << m_.size() << "\n";
    for (size_t i = 0; i < m_.size(); ++i) {
        write_buffer(f, m_[i]);
        write_buffer(f, v_[i]);
    }
}

void Adam::load(std::ifstream& f) {
    std::string tag;
    size_t n;
    if (!(f >> tag >> t_ >> n) || tag != "adam" || n != m_.size())
        throw std::runtime_error("checkpoint: bad adam section");
    for (size_t i = 0; i < m_.size(); ++i) {
        m_[i] = read_buffer(f);
        v_[i] = read_buffer(f);
        if (m_[i].size() != params_[i].values().size() || v_[i].size() != m_[i].size())
            throw std::runtime_error("checkpoint: adam buffer shape mismatch");
    }
}

void TrainConfig::validate() const {
    if (epochs < 0) throw std::invalid_argument("TrainConfig: epochs must be >= 0");
    if (lr_model < 0.0 || lr_generator < 0.0)
        throw std::invalid_argument("TrainConfig: learning rates must be non-negative");
    if (tau <= 0.0) throw std::invalid_argument("TrainConfig: tau must be positive");
    if (!(mask_ratio > 0.0 && mask_ratio < 1.0))
        throw std::invalid_argument("TrainConfig: mask_ratio must lie in (0,1)");
    loss.validate();
    Schedule s = schedule;
    s.epochs = epochs > 0 ? epochs : 1;
    s.validate();
}

Trainer::Trainer(const Graph& graph, const ModelConfig& model_cfg, const TrainConfig& cfg)
    : graph_(graph),
      cfg_(cfg),
      model_(Model::init(model_cfg, cfg.seed)),
      generator_(MaskGenerator::init(graph.d, cfg.gen_hidden, cfg.seed)),
      model_opt_(model_.parameters(), cfg.lr_model, cfg.adam),
      gen_opt_(generator_.parameters(), cfg.lr_generator, cfg.adam),
      a_norm_(sym_normalize(graph)) {
    cfg_.validate();
    if (model_cfg.d_in != graph.d)
        throw std::invalid_argument("Trainer: model d_in must equal graph feature dim");
    cfg_.schedule.epochs = cfg_.epochs > 0 ? cfg_.epochs : 1;
}

EpochReport Trainer::train_epoch() {
    const int t = epoch_;
    const double alpha = cfg_.schedule.alpha_at(t);
    const ad::Tensor x = graph_.feature_tensor();
    EpochReport rep;
    rep.epoch = t;
    rep.alpha_adv = alpha;

    // -- generator (Phi) step: gradient ascent through the soft mask.
    {
        ad::Tape tape;
        ad::Tensor prob_adv = adv_probabilities(tape, generator_, graph_, a_norm_);
        ad::Tensor prob = mix_probabilities(tape, random_probabilities(graph_.n, cfg_.mask_ratio),
                                            prob_adv, alpha);
        MaskSample sample =
            gumbel_binarize(tape, prob, cfg_.tau, derive_seed(cfg_.seed, t, 101));
        ad::Tensor xt = model_.apply_mask(tape, graph_, sample, MaskMode::Soft);
        ad::Tensor xhat = model_.reconstruct(tape, a_norm_, xt);
        ad::Tensor l_sce = sce_loss(tape, x, xhat, sample.soft, cfg_.loss.gamma);
        ad::Tensor obj = generator_objective(tape, l_sce, sample.soft, cfg_.loss.lambda1);
        if (!std::isfinite(obj.item()))
            throw TrainAbort("non-finite generator objective at epoch " + std::to_string(t));
        tape.backward(obj);
        rep.gen_objective = obj.item();
        rep.gen_grad_norm = gen_opt_.step(+1.0, cfg_.clip_norm);
        zero_grads(model_.parameters());
    }

    // -- model (Theta) step: gradient descent with a hard mask. Degenerate
    // draws (empty mask, or a fully-masked neighborhood collapsing a row of
    // the zero-initialized mask token to zero norm) are deterministically
    // resampled.
    {
        ad::Tape tape;
        MaskSample sample;
        ad::Tensor z, xhat;
        for (int attempt = 0;; ++attempt) {
            if (attempt > 100)
                throw TrainAbort("could not draw a usable mask at epoch " + std::to_string(t));
            ad::Tape trial;
            ad::Tensor prob_adv = adv_probabilities(trial, generator_, graph_, a_norm_);
            ad::Tensor prob = mix_probabilities(
                trial, random_probabilities(graph_.n, cfg_.mask_ratio), prob_adv, alpha);
            sample = gumbel_binarize(trial, prob, cfg_.tau,
                                     derive_seed(cfg_.seed, t, 202 + attempt));
            if (sample.masked.empty()) continue;
            try {
                ad::Tensor xt = model_.apply_mask(trial, graph_, sample, MaskMode::Hard);
                z = model_.encode(trial, a_norm_, xt);
                xhat = model_.decode(trial, a_norm_, z);
            } catch (const std::domain_error&) {
                continue;
            }
            tape = std::move(trial);
            break;
        }
        ad::Tensor l_sce = sce_loss(tape, x, xhat, sample.hard, cfg_.loss.gamma);
        ad::Tensor l_uni = uniformity_loss(tape, z, cfg_.loss.t_uniformity,
                                           cfg_.loss.uniformity_pair_cap,
                                           derive_seed(cfg_.seed, 0, 303));
        ad::Tensor obj = model_objective(tape, l_sce, l_uni, alpha, cfg_.loss.lambda2);
        if (!std::isfinite(obj.item()))
            throw TrainAbort("non-finite model objective at epoch " + std::to_string(t) +
                             " (l_sce=" + std::to_string(l_sce.item()) +
                             ", l_uni=" + std::to_string(l_uni.item()) + ")");
        tape.backward(obj);
        rep.l_sce = l_sce.item();
        rep.l_uni = l_uni.item();
        rep.mask_ratio = sample.realized_ratio();
        rep.model_grad_norm = model_opt_.step(-1.0, cfg_.clip_norm);
        zero_grads(generator_.parameters());
    }

    ++epoch_;
    history_.push_back(rep);
    return rep;
}

void Trainer::fit() {
    while (epoch_ < cfg_.epochs) train_epoch();
}

std::vector<double> Trainer::embeddings() const {
    ad::Tape tape;
    ad::Tensor z = model_.encode(tape, a_norm_, graph_.feature_tensor());
    return z.values();
}

double Trainer::sce_under_mask(const std::vector<int>& masked_nodes) const {
    if (masked_nodes.empty()) throw std::logic_error("sce_under_mask: empty mask");
    std::vector<double> m(graph_.n, 0.0);
    for (int i : masked_nodes) m.at(i) = 1.0;
    ad::Tape tape;
    MaskSample sample;
    sample.hard = ad::Tensor::constant(graph_.n, 1, m);
    sample.masked = masked_nodes;
    ad::Tensor xt = model_.apply_mask(tape, graph_, sample, MaskMode::Hard);
    ad::Tensor xhat = model_.reconstruct(tape, a_norm_, xt);
    return sce_loss(tape, graph_.feature_tensor(), xhat, sample.hard, cfg_.loss.gamma).item();
}

void Trainer::save_checkpoint(const std::string& path) const {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("save_checkpoint: cannot open " + path);
    f << "augmae-train v1\n";
    f << "epoch " << epoch_ << "\n";
    auto dump_params = [&f](const std::vector<ad::Tensor>& ps) {
        f << ps.size() << "\n";
        for (const auto& p : ps) write_buffer(f, p.values());
    };
    dump_params(model_.parameters());
    dump_params(generator_.parameters());
    model_opt_.save(f);
    gen_opt_.save(f);
    f << "history " << history_.size() << "\n";
    char buf[40];
    for (const auto& r : history_) {
        f << r.epoch;
        for (double v : {r.l_sce, r.l_uni, r.gen_objective, r.mask_ratio, r.alpha_adv,
                         r.gen_grad_norm, r.model_grad_norm}) {
            std::snprintf(buf, sizeof(buf), "%a", v);
            f << " " << buf;
        }
        f << "\n";
    }
}

void Trainer::load_checkpoint(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("load_checkpoint: cannot open " + path);
    std::string magic, ver, tag;
    f >> magic >> ver;
    if (magic != "augmae-train" || ver != "v1")
        throw std::runtime_error("load_checkpoint: " + path + ": unrecognized header");
    f >> tag >> epoch_;
    if (tag != "epoch") throw std::runtime_error("load_checkpoint: missing epoch");
    auto read_params = [&f, &path](std::vector<ad::Tensor> ps) {
        size_t n;
        f >> n;
        if (n != ps.size())
            throw std::runtime_error("load_checkpoint: " + path + ": parameter count mismatch");
        for (auto& p : ps) {
            auto v = read_buffer(f);
            if (v.size() != p.values().size())
                throw std::runtime_error("load_checkpoint: " + path + ": tensor shape mismatch");
            p.values() = std::move(v);
        }
    };
    read_params(model_.parameters());
    read_params(generator_.parameters());
    model_opt_.load(f);
    gen_opt_.load(f);
    size_t hn;
    f >> tag >> hn;
    if (tag != "history") throw std::runtime_error("load_checkpoint: missing history");
    history_.clear();
    for (size_t i = 0; i < hn; ++i) {
        EpochReport r;
        std::string s[7];
        f >> r.epoch >> s[0] >> s[1] >> s[2] >> s[3] >> s[4] >> s[5] >> s[6];
        r.l_sce = std::strtod(s[0].c_str(), nullptr);
        r.l_uni = std::strtod(s[1].c_str(), nullptr);
        r.gen_objective = std::strtod(s[2].c_str(), nullptr);
        r.mask_ratio = std::strtod(s[3].c_str(), nullptr);
        r.alpha_adv = std::strtod(s[4].c_str(), nullptr);
        r.gen_grad_norm = std::strtod(s[5].c_str(), nullptr);
        r.model_grad_norm = std::strtod(s[6].c_str(), nullptr);
        history_.push_back(r);
    }
}

void export_history_csv(const std::vector<EpochReport>& history, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("export_history_csv: cannot open " + path);
    f << "epoch,l_sce,l_uni,gen_objective,mask_ratio,alpha_adv\n";
    char buf[40];
    for (const auto& r : history) {
        f << r.epoch;
        for (double v : {r.l_sce, r.l_uni, r.gen_objective, r.mask_ratio, r.alpha_adv}) {
            std::snprintf(buf, sizeof(buf), "%.17g", v);
            f << "," << buf;
        }
        f << "\n";
    }
}

}  // namespace augmae
