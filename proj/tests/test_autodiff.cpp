#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "augmae/autodiff.hpp"
#include "augmae/graph.hpp"
#include "augmae/losses.hpp"
#include "augmae/model.hpp"
#include "augmae/rng.hpp"
#include "gradcheck.hpp"

using namespace augmae;
using ad::Tape;
using ad::Tensor;

namespace {

Tensor random_param(int rows, int cols, Rng& rng, double lo = -1.0, double hi = 1.0) {
    std::vector<double> v(static_cast<size_t>(rows) * cols);
    for (double& x : v) x = rng.uniform(lo, hi);
    return Tensor::parameter(rows, cols, std::move(v));
}

}  // namespace

TEST_CASE("matmul forward") {
    Tape t;
    Tensor id = Tensor::from_rows({{1, 0}, {0, 1}});
    Tensor m = Tensor::from_rows({{2, -3}, {5, 7}});
    Tensor out = ad::matmul(t, id, m);
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) CHECK(out.at(r, c) == m.at(r, c));

    Tensor a = Tensor::from_rows({{1, 2}, {3, 4}});
    Tensor ones = Tensor::from_rows({{1}, {1}});
    Tensor prod = ad::matmul(t, a, ones);
    CHECK(prod.at(0, 0) == 3);
    CHECK(prod.at(1, 0) == 7);

    CHECK_THROWS(ad::matmul(t, a, Tensor::from_rows({{1, 2, 3}})));
}

TEST_CASE("matmul gradient of sum(A*B) wrt A is ones * B^T") {
    Rng rng(11);
    Tensor a = random_param(3, 4, rng);
    Tensor b = random_param(4, 2, rng);
    Tape tape;
    Tensor loss = ad::total_sum(tape, ad::matmul(tape, a, b));
    tape.backward(loss);
    // d/dA sum(AB) = 1 * B^T
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 4; ++c) {
            double expect = b.at(c, 0) + b.at(c, 1);
            CHECK(a.grad()[static_cast<size_t>(r) * 4 + c] == doctest::Approx(expect).epsilon(1e-12));
        }
    double err = gradcheck::check(
        [&](Tape& t) { return ad::total_sum(t, ad::matmul(t, a, b)); }, {a, b});
    CHECK(err < 1e-5);
}

TEST_CASE("elementwise basics") {
    Tape t;
    CHECK(ad::sigmoid(t, Tensor::scalar(0.0)).item() == 0.5);
    CHECK(ad::exp(t, ad::log(t, Tensor::scalar(3.7))).item() == doctest::Approx(3.7).epsilon(1e-15));
    CHECK_THROWS_AS(ad::log(t, Tensor::scalar(0.0)), std::domain_error);
    CHECK_THROWS_AS(ad::log(t, Tensor::scalar(-1.0)), std::domain_error);

    Tensor x = Tensor::parameter(1, 1, {0.0});
    Tape t2;
    Tensor s = ad::sigmoid(t2, x);
    t2.backward(s);
    CHECK(x.grad()[0] == doctest::Approx(0.25).epsilon(1e-10));
}

TEST_CASE("broadcasting add/mul") {
    Tape t;
    Tensor a = Tensor::from_rows({{1, 2}, {3, 4}});
    Tensor col = Tensor::from_rows({{10}, {20}});
    Tensor out = ad::add(t, a, col);
    CHECK(out.at(0, 1) == 12);
    CHECK(out.at(1, 0) == 23);
    Tensor row = Tensor::from_rows({{2, 3}});
    Tensor m = ad::mul(t, a, row);
    CHECK(m.at(1, 0) == 6);
    CHECK(m.at(1, 1) == 12);
}

TEST_CASE("row_l2_normalize forward") {
    Tape t;
    Tensor x = Tensor::from_rows({{3, 4}});
    Tensor out = ad::row_l2_normalize(t, x);
    CHECK(out.at(0, 0) == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(out.at(0, 1) == doctest::Approx(0.8).epsilon(1e-15));

    Tensor unit = Tensor::from_rows({{0.6, 0.8}});
    Tensor same = ad::row_l2_normalize(t, unit);
    CHECK(same.at(0, 0) == doctest::Approx(0.6).epsilon(1e-15));

    CHECK_THROWS_AS(ad::row_l2_normalize(t, Tensor::from_rows({{0, 0}})), std::domain_error);
}

TEST_CASE("backward basics") {
    Tensor x = Tensor::parameter(1, 3, {1, -2, 5});
    Tape t;
    Tensor loss = ad::total_sum(t, x);
    t.backward(loss);
    for (double g : x.grad()) CHECK(g == 1.0);

    Tensor y = Tensor::parameter(1, 2, {1, 2});
    Tape t2;
    Tensor norm2 = ad::total_sum(t2, ad::mul(t2, y, y));
    t2.backward(norm2);
    CHECK(y.grad()[0] == 2.0);
    CHECK(y.grad()[1] == 4.0);

    CHECK_THROWS(t2.backward(y));  // non-scalar root
}

TEST_CASE("gradient accumulation and fan-out") {
    Tensor x = Tensor::parameter(1, 1, {3.0});
    Tape t;
    Tensor y = ad::add(t, x, x);  // fan-out: dy/dx = 2
    t.backward(y);
    CHECK(x.grad()[0] == 2.0);
    t.backward(y);  // repeated backward accumulates
    CHECK(x.grad()[0] == 4.0);
}

TEST_CASE("zero gradient for unreachable parameters") {
    Tensor used = Tensor::parameter(1, 1, {2.0});
    Tensor unused = Tensor::parameter(1, 1, {5.0});
    Tape t;
    Tensor loss = ad::mul(t, used, used);
    t.backward(loss);
    CHECK(unused.grad()[0] == 0.0);
}

TEST_CASE("finite-difference sweep over every differentiable op") {
    Rng rng(101);
    int trials = 0;
    double worst = 0.0;
    for (int trial = 0; trial < 120; ++trial) {
        int n = 2 + rng.uniform_int(3);
        int d = 2 + rng.uniform_int(3);
        Tensor a = random_param(n, d, rng, -2.0, 2.0);
        Tensor b = random_param(n, d, rng, -2.0, 2.0);
        Tensor pos = random_param(n, d, rng, 0.2, 3.0);
        Tensor w = random_param(d, n, rng, -1.0, 1.0);
        std::vector<std::function<Tensor(Tape&)>> cases = {
            [&](Tape& t) { return ad::total_sum(t, ad::add(t, a, b)); },
            [&](Tape& t) { return ad::total_sum(t, ad::sub(t, a, b)); },
            [&](Tape& t) { return ad::mean(t, ad::mul(t, a, b)); },
            [&](Tape& t) { return ad::total_sum(t, ad::exp(t, ad::scale(t, a, 0.3))); },
            [&](Tape& t) { return ad::total_sum(t, ad::log(t, pos)); },
            [&](Tape& t) { return ad::total_sum(t, ad::pow(t, pos, 2.5)); },
            [&](Tape& t) { return ad::mean(t, ad::sigmoid(t, a)); },
            [&](Tape& t) { return ad::total_sum(t, ad::sin(t, a)); },
            [&](Tape& t) { return ad::total_sum(t, ad::prelu(t, a, 0.25)); },
            [&](Tape& t) { return ad::total_sum(t, ad::matmul(t, a, w)); },
            [&](Tape& t) { return ad::total_sum(t, ad::row_l2_normalize(t, pos)); },
            [&](Tape& t) { return ad::total_sum(t, ad::rowwise_dot(t, a, b)); },
            [&](Tape& t) { return ad::mean(t, ad::rowwise_sum(t, a)); },
        };
        for (auto& fn : cases) {
            worst = std::max(worst, gradcheck::check(fn, {a, b, pos, w}));
            ++trials;
        }
    }
    CHECK(trials >= 100);
    CHECK(worst < 1e-4);
}

TEST_CASE("straight-through threshold") {
    Tensor x = Tensor::parameter(1, 4, {0.2, 0.5, 0.7, 0.49});
    Tape t;
    Tensor h = ad::hard_threshold_st(t, x);
    CHECK(h.values() == std::vector<double>{0, 1, 1, 0});
    Tensor loss = ad::total_sum(t, h);
    t.backward(loss);
    for (double g : x.grad()) CHECK(g == 1.0);  // identity backward
}

TEST_CASE("log_mean_gaussian_potential matches manual computation and gradcheck") {
    Rng rng(77);
    Tensor z = random_param(4, 3, rng);
    std::vector<std::pair<int, int>> pairs;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            if (i != j) pairs.emplace_back(i, j);
    Tape t;
    double got = ad::log_mean_gaussian_potential(t, z, 2.0, pairs).item();
    double acc = 0.0;
    for (auto [i, j] : pairs) {
        double d2 = 0.0;
        for (int c = 0; c < 3; ++c) {
            double diff = z.at(i, c) - z.at(j, c);
            d2 += diff * diff;
        }
        acc += std::exp(-2.0 * d2);
    }
    CHECK(got == doctest::Approx(std::log(acc / pairs.size())).epsilon(1e-12));
    double err = gradcheck::check(
        [&](Tape& tp) { return ad::log_mean_gaussian_potential(tp, z, 2.0, pairs); }, {z});
    CHECK(err < 1e-4);
}

TEST_CASE("SCE gradient wrt encoder weights on a 6-node graph") {
    SbmSpec spec;
    spec.block_sizes = {3, 3};
    spec.p_intra = 0.9;
    spec.p_inter = 0.3;
    spec.feature_dim = 4;
    spec.feature_noise = 0.2;
    spec.seed = 5;
    Graph g = generate_sbm(spec);
    ModelConfig mc;
    mc.d_in = 4;
    mc.d_hidden = 5;
    mc.d_out = 3;
    Model model = Model::init(mc, 9);
    Tensor a_norm = sym_normalize(g);
    Tensor weights = Tensor::constant(g.n, 1, {1, 0, 1, 1, 0, 1});
    auto fn = [&](Tape& t) {
        Tensor xhat = model.reconstruct(t, a_norm, g.feature_tensor());
        return sce_loss(t, g.feature_tensor(), xhat, weights, 2.0);
    };
    double err = gradcheck::check(fn, model.parameters());
    CHECK(err < 1e-4);
}

TEST_CASE("forward and backward are deterministic") {
    auto run = [] {
        Rng rng(42);
        Tensor a = random_param(3, 3, rng);
        Tape t;
        Tensor loss = ad::mean(t, ad::sigmoid(t, ad::matmul(t, a, a)));
        t.backward(loss);
        std::vector<double> out = a.grad();
        out.push_back(loss.item());
        return out;
    };
    CHECK(run() == run());
}

TEST_CASE("clamp zeroes gradient outside the window") {
    Tensor x = Tensor::parameter(1, 3, {-2.0, 0.3, 2.0});
    Tape t;
    Tensor c = ad::clamp(t, x, 0.0, 1.0);
    CHECK(c.values() == std::vector<double>{0.0, 0.3, 1.0});
    t.backward(ad::total_sum(t, c));
    CHECK(x.grad() == std::vector<double>{0.0, 1.0, 0.0});
}
