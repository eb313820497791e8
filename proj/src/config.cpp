#include "augmae/config.hpp"

#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

namespace augmae {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

struct Field {
    std::function<void(RunConfig&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
};

template <typename T>
T parse_num(const std::string& key, const std::string& v);

template <>
int parse_num<int>(const std::string& key, const std::string& v) {
    size_t pos;
    int x = std::stoi(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("config: bad integer for " + key);
    return x;
}

template <>
double parse_num<double>(const std::string& key, const std::string& v) {
    size_t pos;
    double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("config: bad number for " + key);
    return x;
}

template <>
uint64_t parse_num<uint64_t>(const std::string& key, const std::string& v) {
    size_t pos;
    unsigned long long x = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("config: bad integer for " + key);
    return x;
}

const std::map<std::string, Field>& fields() {
    static const std::map<std::string, Field> f = [] {
        std::map<std::string, Field> m;
        auto reg = [&m](const std::string& name, auto member) {
            using T = std::decay_t<decltype(RunConfig{}.*member)>;
            m[name] = Field{
                [member, name](RunConfig& c, const std::string& v) {
                    c.*member = parse_num<T>(name, v);
                },
                [member](const RunConfig& c) {
                    if constexpr (std::is_same_v<T, double>)
                        return fmt(c.*member);
                    else
                        return std::to_string(c.*member);
                }};
        };
        reg("sbm_blocks", &RunConfig::sbm_blocks);
        reg("sbm_block_size", &RunConfig::sbm_block_size);
        reg("p_intra", &RunConfig::p_intra);
        reg("p_inter", &RunConfig::p_inter);
        reg("feature_dim", &RunConfig::feature_dim);
        reg("feature_noise", &RunConfig::feature_noise);
        reg("d_hidden", &RunConfig::d_hidden);
        reg("d_out", &RunConfig::d_out);
        reg("enc_layers", &RunConfig::enc_layers);
        reg("dec_layers", &RunConfig::dec_layers);
        reg("epochs", &RunConfig::epochs);
        reg("lr_model", &RunConfig::lr_model);
        reg("lr_generator", &RunConfig::lr_generator);
        reg("gamma", &RunConfig::gamma);
        reg("lambda1", &RunConfig::lambda1);
        reg("lambda2", &RunConfig::lambda2);
        reg("tau", &RunConfig::tau);
        reg("mask_ratio", &RunConfig::mask_ratio);
        reg("alpha0", &RunConfig::alpha0);
        reg("alphaT", &RunConfig::alphaT);
        reg("eta", &RunConfig::eta);
        reg("t_uniformity", &RunConfig::t_uniformity);
        reg("uniformity_pair_cap", &RunConfig::uniformity_pair_cap);
        reg("gen_hidden", &RunConfig::gen_hidden);
        reg("clip_norm", &RunConfig::clip_norm);
        reg("weight_decay", &RunConfig::weight_decay);
        reg("seed", &RunConfig::seed);
        reg("probe_train_fraction", &RunConfig::probe_train_fraction);
        reg("probe_iterations", &RunConfig::probe_iterations);
        reg("probe_lr", &RunConfig::probe_lr);
        reg("align_pair_cap", &RunConfig::align_pair_cap);
        reg("kde_bandwidth", &RunConfig::kde_bandwidth);
        reg("density_bins", &RunConfig::density_bins);
        reg("vb_instances", &RunConfig::vb_instances);
        reg("vb_restarts", &RunConfig::vb_restarts);
        return m;
    }();
    return f;
}

}  // namespace

RunConfig RunConfig::from_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("config: cannot open " + path);
    RunConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("config: " + path + ":" + std::to_string(lineno) +
                                     ": expected key=value");
        auto trim = [](std::string s) {
            auto a = s.find_first_not_of(" \t\r");
            auto b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        cfg.apply(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return cfg;
}

void RunConfig::apply(const std::string& key, const std::string& value) {
    auto it = fields().find(key);
    if (it == fields().end()) throw std::runtime_error("config: unknown key '" + key + "'");
    it->second.set(*this, value);
}

std::string RunConfig::to_string() const {
    std::ostringstream os;
    for (const auto& [name, field] : fields()) os << name << "=" << field.get(*this) << "\n";
    return os.str();
}

void RunConfig::write(const std::string& path) const {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("config: cannot write " + path);
    f << to_string();
}

SbmSpec RunConfig::sbm_spec() const {
    SbmSpec s;
    s.block_sizes.assign(sbm_blocks, sbm_block_size);
    s.p_intra = p_intra;
    s.p_inter = p_inter;
    s.feature_dim = feature_dim;
    s.feature_noise = feature_noise;
    s.seed = seed;
    return s;
}

ModelConfig RunConfig::model_config() const {
    ModelConfig m;
    m.d_in = feature_dim;
    m.d_hidden = d_hidden;
    m.d_out = d_out;
    m.enc_layers = enc_layers;
    m.dec_layers = dec_layers;
    return m;
}

TrainConfig RunConfig::train_config() const {
    TrainConfig t;
    t.epochs = epochs;
    t.lr_model = lr_model;
    t.lr_generator = lr_generator;
    t.loss.gamma = gamma;
    t.loss.lambda1 = lambda1;
    t.loss.lambda2 = lambda2;
    t.loss.t_uniformity = t_uniformity;
    t.loss.uniformity_pair_cap = uniformity_pair_cap;
    t.tau = tau;
    t.mask_ratio = mask_ratio;
    t.schedule.alpha0 = alpha0;
    t.schedule.alphaT = alphaT;
    t.schedule.eta = eta;
    t.schedule.epochs = epochs > 0 ? epochs : 1;
    t.gen_hidden = gen_hidden;
    t.seed = seed;
    t.adam.weight_decay = weight_decay;
    t.clip_norm = clip_norm;
    return t;
}

}  // namespace augmae
