#ifndef AUGMAE_EVAL_HPP
#define AUGMAE_EVAL_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace augmae::eval {

struct ProbeResult {
    double accuracy = 0.0;
    std::vector<double> per_class_accuracy;
    uint64_t split_seed = 0;
    int iterations = 0;
};

/// Multinomial logistic regression on frozen embeddings, full-batch
/// gradient descent. Split is a random train fraction of the nodes;
/// every class must appear in the training split.
ProbeResult linear_probe(const std::vector<double>& z, int n, int d,
                         const std::vector<int>& labels, double train_fraction, uint64_t seed,
                         int iterations = 1000, double lr = 0.1);

struct AlignmentResult {
    double mean_distance = 0.0;          // mean ||z_i - z_j|| over same-label pairs
    std::vector<int> histogram;          // 20 bins over [0, 2]
    int pairs_used = 0;
};

/// Supervised alignment distance over sampled same-label pairs.
AlignmentResult supervised_alignment(const std::vector<double>& z, int n, int d,
                                     const std::vector<int>& labels, int pair_cap,
                                     uint64_t seed);

struct SphereDensity {
    std::vector<double> angles;      // bin centers over [-pi, pi)
    std::vector<int> histogram;
    std::vector<double> kde;         // 360 samples, wrapped Gaussian kernel
    double kde_max_min_ratio = 0.0;
};

/// Angular density of d'=2 embeddings on the unit circle.
SphereDensity export_sphere_density(const std::vector<double>& z2, int n, int bins,
                                    double bandwidth = 0.2);

void write_density_csv(const SphereDensity& d, const std::string& path);

}  // namespace augmae::eval

#endif
