#include "augmae/masking.hpp"

#include <cmath>
#include <stdexcept>

#include "augmae/rng.hpp"

namespace augmae {

namespace {

std::vector<double> glorot(int fan_in, int fan_out, Rng& rng) {
    double bound = std::sqrt(6.0 / (fan_in + fan_out));
    std::vector<double> v(static_cast<size_t>(fan_in) * fan_out);
    for (auto& x : v) x = rng.uniform(-bound, bound);
    return v;
}

}  // namespace

MaskGenerator MaskGenerator::init(int d_in, int d_hidden, uint64_t seed) {
    Rng rng(derive_seed(seed, 0x3a5c));
    MaskGenerator g;
    g.w = ad::Tensor::parameter(d_in, d_hidden, glorot(d_in, d_hidden, rng));
    g.head = ad::Tensor::parameter(d_hidden, 1, glorot(d_hidden, 1, rng));
    return g;
}

double MaskSample::realized_ratio() const {
    if (hard.rows() == 0) return 0.0;
    return static_cast<double>(masked.size()) / hard.rows();
}

void Schedule::validate() const {
    if (!(alpha0 >= 0.0 && alpha0 <= 1.0 && alphaT >= 0.0 && alphaT <= 1.0))
        throw std::invalid_argument("Schedule: alpha0, alphaT must lie in [0,1]");
    if (alpha0 > alphaT)
        throw std::invalid_argument("Schedule: require alpha0 <= alphaT");
    if (eta <= 0.0) throw std::invalid_argument("Schedule: eta must be positive");
    if (epochs < 1) throw std::invalid_argument("Schedule: epochs must be >= 1");
}

double Schedule::alpha_at(int t) const {
    if (t < 0 || t > epochs)
        throw std::out_of_range("Schedule::alpha_at: epoch " + std::to_string(t) +
                                " outside [0, " + std::to_string(epochs) + "]");
    double frac = static_cast<double>(t) / epochs;
    return alpha0 + std::pow(frac, eta) * (alphaT - alpha0);
}

ad::Tensor adv_probabilities(ad::Tape& tape, const MaskGenerator& gen, const Graph& g,
                             const ad::Tensor& a_norm) {
    if (gen.w.rows() != g.d)
        throw std::invalid_argument("adv_probabilities: generator input dim mismatch");
    ad::Tensor x = g.feature_tensor();
    ad::Tensor h = ad::prelu(tape, ad::matmul(tape, ad::matmul(tape, a_norm, x), gen.w),
                             gen.prelu_slope);
    ad::Tensor logits = ad::matmul(tape, h, gen.head);
    return ad::clamp(tape, ad::sigmoid(tape, logits), kProbClamp, 1.0 - kProbClamp);
}

MaskSample gumbel_binarize_with_noise(ad::Tape& tape, const ad::Tensor& prob, double tau,
                                      const std::vector<double>& noise_diff) {
    if (tau <= 0.0) throw std::invalid_argument("gumbel_binarize: tau must be positive");
    if (prob.cols() != 1) throw std::invalid_argument("gumbel_binarize: prob must be n x 1");
    if (noise_diff.size() != static_cast<size_t>(prob.rows()))
        throw std::invalid_argument("gumbel_binarize: noise length mismatch");
    for (double p : prob.values())
        if (!(p > 0.0 && p < 1.0))
            throw std::domain_error("gumbel_binarize: probabilities must lie in (0,1)");

    const int n = prob.rows();
    ad::Tensor noise = ad::Tensor::constant(n, 1, noise_diff);
    ad::Tensor logit =
        ad::sub(tape, ad::log(tape, prob),
                ad::log(tape, ad::sub(tape, ad::Tensor::scalar(1.0), prob)));
    ad::Tensor soft = ad::sigmoid(tape, ad::scale(tape, ad::add(tape, logit, noise), 1.0 / tau));

    MaskSample s;
    s.prob = prob;
    s.soft = soft;
    s.hard = ad::hard_threshold_st(tape, soft);
    s.tau = tau;
    for (int i = 0; i < n; ++i)
        if (s.hard.values()[i] == 1.0) s.masked.push_back(i);
    return s;
}

MaskSample gumbel_binarize(ad::Tape& tape, const ad::Tensor& prob, double tau, uint64_t seed) {
    Rng rng(derive_seed(seed, 0x6b3e1));
    std::vector<double> diff(prob.rows());
    for (auto& d : diff) {
        double g0 = rng.gumbel();
        double g1 = rng.gumbel();
        d = g0 - g1;
    }
    return gumbel_binarize_with_noise(tape, prob, tau, diff);
}

ad::Tensor mix_probabilities(ad::Tape& tape, const ad::Tensor& prob_rand,
                             const ad::Tensor& prob_adv, double alpha_adv) {
    if (!(alpha_adv >= 0.0 && alpha_adv <= 1.0))
        throw std::invalid_argument("mix_probabilities: alpha_adv must lie in [0,1]");
    return ad::add(tape, ad::scale(tape, prob_rand, 1.0 - alpha_adv),
                   ad::scale(tape, prob_adv, alpha_adv));
}

ad::Tensor random_probabilities(int n, double r) {
    if (!(r > 0.0 && r < 1.0))
        throw std::invalid_argument("random_probabilities: ratio must lie in (0,1)");
    return ad::Tensor::constant(n, 1, std::vector<double>(n, r));
}

}  // namespace augmae
