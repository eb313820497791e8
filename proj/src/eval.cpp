#include "augmae/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "augmae/rng.hpp"

namespace augmae::eval {

ProbeResult linear_probe(const std::vector<double>& z, int n, int d,
                         const std::vector<int>& labels, double train_fraction, uint64_t seed,
                         int iterations, double lr) {
    if (static_cast<int>(labels.size()) != n)
        throw std::invalid_argument("linear_probe: label count mismatch");
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw std::invalid_argument("linear_probe: train fraction must lie in (0,1)");
    const int k = 1 + *std::max_element(labels.begin(), labels.end());
    if (k < 2) throw std::invalid_argument("linear_probe: need at least 2 classes");

    // deterministic shuffle, first chunk trains
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    Rng rng(derive_seed(seed, 0x511f));
    for (int i = n - 1; i > 0; --i) std::swap(order[i], order[rng.uniform_int(i + 1)]);
    int n_train = std::max(1, static_cast<int>(std::lround(train_fraction * n)));
    std::vector<int> train(order.begin(), order.begin() + n_train);
    std::vector<int> test(order.begin() + n_train, order.end());
    if (test.empty()) throw std::invalid_argument("linear_probe: empty test split");

    std::vector<int> class_seen(k, 0);
    for (int i : train) class_seen[labels[i]] = 1;
    for (int c = 0; c < k; ++c)
        if (!class_seen[c])
            throw std::runtime_error("linear_probe: class " + std::to_string(c) +
                                     " absent from training split");

    // softmax regression, weights (d+1) x k with bias row
    std::vector<double> wmat(static_cast<size_t>(d + 1) * k, 0.0);
    std::vector<double> logits(k), probs(k), grad(wmat.size());
    for (int it = 0; it < iterations; ++it) {
        std::fill(grad.begin(), grad.end(), 0.0);
        for (int i : train) {
            const double* zi = &z[static_cast<size_t>(i) * d];
            for (int c = 0; c < k; ++c) {
                double s = wmat[static_cast<size_t>(d) * k + c];
                for (int j = 0; j < d; ++j) s += zi[j] * wmat[static_cast<size_t>(j) * k + c];
                logits[c] = s;
            }
            double mx = *std::max_element(logits.begin(), logits.end());
            double sum = 0.0;
            for (int c = 0; c < k; ++c) {
                probs[c] = std::exp(logits[c] - mx);
                sum += probs[c];
            }
            for (int c = 0; c < k; ++c) {
                double delta = probs[c] / sum - (labels[i] == c ? 1.0 : 0.0);
                for (int j = 0; j < d; ++j)
                    grad[static_cast<size_t>(j) * k + c] += delta * zi[j];
                grad[static_cast<size_t>(d) * k + c] += delta;
            }
        }
        double inv = 1.0 / train.size();
        for (size_t g = 0; g < grad.size(); ++g) wmat[g] -= lr * inv * grad[g];
    }

    ProbeResult res;
    res.split_seed = seed;
    res.iterations = iterations;
    std::vector<int> correct(k, 0), count(k, 0);
    int hits = 0;
    for (int i : test) {
        const double* zi = &z[static_cast<size_t>(i) * d];
        int best = 0;
        double bestv = -1e300;
        for (int c = 0; c < k; ++c) {
            double s = wmat[static_cast<size_t>(d) * k + c];
            for (int j = 0; j < d; ++j) s += zi[j] * wmat[static_cast<size_t>(j) * k + c];
            if (s > bestv) {
                bestv = s;
                best = c;
            }
        }
        ++count[labels[i]];
        if (best == labels[i]) {
            ++hits;
            ++correct[labels[i]];
        }
    }
    res.accuracy = static_cast<double>(hits) / test.size();
    for (int c = 0; c < k; ++c)
        res.per_class_accuracy.push_back(count[c] ? static_cast<double>(correct[c]) / count[c]
                                                  : 0.0);
    return res;
}

AlignmentResult supervised_alignment(const std::vector<double>& z, int n, int d,
                                     const std::vector<int>& labels, int pair_cap,
                                     uint64_t seed) {
    if (static_cast<int>(labels.size()) != n)
        throw std::invalid_argument("supervised_alignment: label count mismatch");
    std::vector<std::pair<int, int>> all;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (labels[i] == labels[j]) all.emplace_back(i, j);
    if (all.empty()) throw std::logic_error("supervised_alignment: no same-label pairs");

    std::vector<std::pair<int, int>> pairs;
    if (static_cast<int>(all.size()) <= pair_cap) {
        pairs = all;
    } else {
        Rng rng(derive_seed(seed, 0xa119));
        for (int s = 0; s < pair_cap; ++s)
            pairs.push_back(all[rng.uniform_int(static_cast<int>(all.size()))]);
    }

    AlignmentResult res;
    res.histogram.assign(20, 0);
    double sum = 0.0;
    for (auto [i, j] : pairs) {
        double d2 = 0.0;
        for (int c = 0; c < d; ++c) {
            double diff = z[static_cast<size_t>(i) * d + c] - z[static_cast<size_t>(j) * d + c];
            d2 += diff * diff;
        }
        double dist = std::sqrt(d2);
        sum += dist;
        int bin = std::min(19, static_cast<int>(dist / 2.0 * 20.0));
        ++res.histogram[bin];
    }
    res.mean_distance = sum / pairs.size();
    res.pairs_used = static_cast<int>(pairs.size());
    return res;
}

SphereDensity export_sphere_density(const std::vector<double>& z2, int n, int bins,
                                    double bandwidth) {
    if (static_cast<int>(z2.size()) != 2 * n)
        throw std::logic_error("export_sphere_density: embeddings must have d' = 2");
    if (bins < 2 || bandwidth <= 0.0)
        throw std::invalid_argument("export_sphere_density: bad bins/bandwidth");
    std::vector<double> theta(n);
    for (int i = 0; i < n; ++i)
        theta[i] = std::atan2(z2[static_cast<size_t>(i) * 2 + 1], z2[static_cast<size_t>(i) * 2]);

    SphereDensity d;
    d.histogram.assign(bins, 0);
    const double width = 2.0 * M_PI / bins;
    for (int b = 0; b < bins; ++b) d.angles.push_back(-M_PI + (b + 0.5) * width);
    for (double t : theta) {
        int b = std::min(bins - 1, static_cast<int>((t + M_PI) / width));
        ++d.histogram[std::max(0, b)];
    }

    const int samples = 360;
    d.kde.resize(samples);
    double mx = -1e300, mn = 1e300;
    for (int s = 0; s < samples; ++s) {
        double a = -M_PI + (s + 0.5) * 2.0 * M_PI / samples;
        double acc = 0.0;
        for (double t : theta) {
            double diff = std::remainder(a - t, 2.0 * M_PI);  // wrapped angle
            acc += std::exp(-0.5 * diff * diff / (bandwidth * bandwidth));
        }
        d.kde[s] = acc / (n * bandwidth * std::sqrt(2.0 * M_PI));
        mx = std::max(mx, d.kde[s]);
        mn = std::min(mn, d.kde[s]);
    }
    d.kde_max_min_ratio = mn > 0.0 ? mx / mn : std::numeric_limits<double>::infinity();
    return d;
}

void write_density_csv(const SphereDensity& d, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("write_density_csv: cannot open " + path);
    f << "angle,histogram_count,kde_value\n";
    char buf[40];
    const int samples = static_cast<int>(d.kde.size());
    for (int s = 0; s < samples; ++s) {
        double a = -M_PI + (s + 0.5) * 2.0 * M_PI / samples;
        int bin = std::min(static_cast<int>(d.histogram.size()) - 1,
                           static_cast<int>((a + M_PI) / (2.0 * M_PI) * d.histogram.size()));
        std::snprintf(buf, sizeof(buf), "%.17g", a);
        f << buf << "," << d.histogram[bin] << ",";
        std::snprintf(buf, sizeof(buf), "%.17g", d.kde[s]);
        f << buf << "\n";
    }
}

}  // namespace augmae::eval
