#include "augmae/model.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "augmae/rng.hpp"

namespace augmae {

namespace {

ad::Tensor glorot_param(int fan_in, int fan_out, Rng& rng) {
    double bound = std::sqrt(6.0 / (fan_in + fan_out));
    std::vector<double> v(static_cast<size_t>(fan_in) * fan_out);
    for (auto& x : v) x = rng.uniform(-bound, bound);
    return ad::Tensor::parameter(fan_in, fan_out, std::move(v));
}

void write_tensor(std::ofstream& f, const std::string& name, const ad::Tensor& t) {
    f << "tensor " << name << " " << t.rows() << " " << t.cols() << "\n";
    char buf[40];
    for (size_t i = 0; i < t.values().size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%a", t.values()[i]);
        f << buf << (i + 1 == t.values().size() ? "" : " ");
    }
    f << "\n";
}

ad::Tensor read_tensor(std::ifstream& f, const std::string& expect_name) {
    std::string tag, name;
    int rows, cols;
    if (!(f >> tag >> name >> rows >> cols) || tag != "tensor" || name != expect_name)
        throw std::runtime_error("checkpoint: expected tensor '" + expect_name + "'");
    std::vector<double> v(static_cast<size_t>(rows) * cols);
    for (auto& x : v) {
        std::string tok;
        if (!(f >> tok)) throw std::runtime_error("checkpoint: truncated tensor " + expect_name);
        x = std::strtod(tok.c_str(), nullptr);
    }
    return ad::Tensor::parameter(rows, cols, std::move(v));
}

}  // namespace

void ModelConfig::validate() const {
    if (d_in <= 0 || d_hidden <= 0 || d_out <= 0)
        throw std::invalid_argument("ModelConfig: dimensions must be positive");
    if (enc_layers < 1 || dec_layers < 1)
        throw std::invalid_argument("ModelConfig: need at least one encoder and decoder layer");
}

Model Model::init(const ModelConfig& cfg, uint64_t seed) {
    cfg.validate();
    Rng rng(derive_seed(seed, 0x90de1));
    Model m;
    m.cfg = cfg;
    for (int l = 0; l < cfg.enc_layers; ++l) {
        int in = l == 0 ? cfg.d_in : cfg.d_hidden;
        int out = l == cfg.enc_layers - 1 ? cfg.d_out : cfg.d_hidden;
        m.enc_w.push_back(glorot_param(in, out, rng));
    }
    for (int l = 0; l < cfg.dec_layers; ++l) {
        int in = l == 0 ? cfg.d_out : cfg.d_hidden;
        int out = l == cfg.dec_layers - 1 ? cfg.d_in : cfg.d_hidden;
        m.dec_w.push_back(glorot_param(in, out, rng));
    }
    m.mask_token =
        ad::Tensor::parameter(1, cfg.d_in, std::vector<double>(cfg.d_in, 0.0));
    return m;
}

std::vector<ad::Tensor> Model::parameters() const {
    std::vector<ad::Tensor> p = enc_w;
    p.insert(p.end(), dec_w.begin(), dec_w.end());
    p.push_back(mask_token);
    return p;
}

ad::Tensor Model::apply_mask(ad::Tape& tape, const Graph& g, const MaskSample& mask,
                             MaskMode mode) const {
    ad::Tensor m = mode == MaskMode::Hard ? mask.hard : mask.soft;
    if (!m.defined())
        throw std::logic_error("apply_mask: mask sample lacks the requested mode");
    if (m.rows() != g.n || m.cols() != 1)
        throw std::invalid_argument("apply_mask: mask length does not match graph");
    if (mode == MaskMode::Soft)
        for (double v : m.values())
            if (!(v > 0.0 && v < 1.0))
                throw std::logic_error("apply_mask: soft mode requires values in (0,1)");
    ad::Tensor x = g.feature_tensor();
    ad::Tensor keep = ad::sub(tape, ad::Tensor::scalar(1.0), m);
    return ad::add(tape, ad::mul(tape, m, mask_token), ad::mul(tape, keep, x));
}

ad::Tensor Model::encode(ad::Tape& tape, const ad::Tensor& a_norm,
                         const ad::Tensor& x_masked) const {
    if (x_masked.cols() != cfg.d_in)
        throw std::invalid_argument("encode: input feature dimension mismatch");
    ad::Tensor h = x_masked;
    for (size_t l = 0; l < enc_w.size(); ++l) {
        h = ad::matmul(tape, ad::matmul(tape, a_norm, h), enc_w[l]);
        if (l + 1 < enc_w.size()) h = ad::prelu(tape, h, cfg.prelu_slope);
    }
    return ad::row_l2_normalize(tape, h);
}

ad::Tensor Model::decode(ad::Tape& tape, const ad::Tensor& a_norm, const ad::Tensor& z) const {
    if (z.cols() != cfg.d_out)
        throw std::invalid_argument("decode: latent dimension mismatch");
    ad::Tensor h = z;
    for (size_t l = 0; l < dec_w.size(); ++l) {
        h = ad::matmul(tape, ad::matmul(tape, a_norm, h), dec_w[l]);
        if (l + 1 < dec_w.size()) h = ad::prelu(tape, h, cfg.prelu_slope);
    }
    return ad::row_l2_normalize(tape, h);
}

ad::Tensor Model::reconstruct(ad::Tape& tape, const ad::Tensor& a_norm,
                              const ad::Tensor& x_masked) const {
    return decode(tape, a_norm, encode(tape, a_norm, x_masked));
}

void save_model(const Model& m, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("save_model: cannot open " + path);
    f << "augmae-model v1\n";
    f << "config " << m.cfg.d_in << " " << m.cfg.d_hidden << " " << m.cfg.d_out << " "
      << m.cfg.enc_layers << " " << m.cfg.dec_layers << " " << m.cfg.prelu_slope << "\n";
    for (size_t l = 0; l < m.enc_w.size(); ++l) write_tensor(f, "enc" + std::to_string(l), m.enc_w[l]);
    for (size_t l = 0; l < m.dec_w.size(); ++l) write_tensor(f, "dec" + std::to_string(l), m.dec_w[l]);
    write_tensor(f, "mask_token", m.mask_token);
}

Model load_model(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("load_model: cannot open " + path);
    std::string magic, ver;
    f >> magic >> ver;
    if (magic != "augmae-model" || ver != "v1")
        throw std::runtime_error("load_model: " + path + ": unrecognized checkpoint header");
    std::string tag;
    Model m;
    f >> tag;
    if (tag != "config") throw std::runtime_error("load_model: missing config line");
    f >> m.cfg.d_in >> m.cfg.d_hidden >> m.cfg.d_out >> m.cfg.enc_layers >> m.cfg.dec_layers >>
        m.cfg.prelu_slope;
    m.cfg.validate();
    for (int l = 0; l < m.cfg.enc_layers; ++l)
        m.enc_w.push_back(read_tensor(f, "enc" + std::to_string(l)));
    for (int l = 0; l < m.cfg.dec_layers; ++l)
        m.dec_w.push_back(read_tensor(f, "dec" + std::to_string(l)));
    m.mask_token = read_tensor(f, "mask_token");
    return m;
}

}  // namespace augmae
