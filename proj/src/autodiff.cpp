#include "augmae/autodiff.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace augmae::ad {

namespace {

using detail::Node;

std::shared_ptr<Node> make_node(int rows, int cols, bool requires_grad) {
    auto n = std::make_shared<Node>();
    n->rows = rows;
    n->cols = cols;
    n->val.assign(static_cast<size_t>(rows) * cols, 0.0);
    n->grad.assign(static_cast<size_t>(rows) * cols, 0.0);
    n->requires_grad = requires_grad;
    return n;
}

}  // namespace

Tensor Tensor::zeros(int rows, int cols, bool requires_grad) {
    Tensor t;
    t.n_ = make_node(rows, cols, requires_grad);
    return t;
}

Tensor Tensor::constant(int rows, int cols, std::vector<double> values) {
    if (static_cast<size_t>(rows) * cols != values.size())
        throw std::invalid_argument("Tensor::constant: value count does not match shape");
    Tensor t = zeros(rows, cols, false);
    t.n_->val = std::move(values);
    return t;
}

Tensor Tensor::parameter(int rows, int cols, std::vector<double> values) {
    if (static_cast<size_t>(rows) * cols != values.size())
        throw std::invalid_argument("Tensor::parameter: value count does not match shape");
    Tensor t = zeros(rows, cols, true);
    t.n_->val = std::move(values);
    return t;
}

Tensor Tensor::scalar(double v) { return constant(1, 1, {v}); }

Tensor Tensor::from_rows(std::initializer_list<std::initializer_list<double>> rows,
                         bool requires_grad) {
    int r = static_cast<int>(rows.size());
    int c = r > 0 ? static_cast<int>(rows.begin()->size()) : 0;
    std::vector<double> v;
    v.reserve(static_cast<size_t>(r) * c);
    for (const auto& row : rows) {
        if (static_cast<int>(row.size()) != c)
            throw std::invalid_argument("Tensor::from_rows: ragged rows");
        v.insert(v.end(), row.begin(), row.end());
    }
    Tensor t = zeros(r, c, requires_grad);
    t.n_->val = std::move(v);
    return t;
}

double Tensor::item() const {
    if (!is_scalar()) throw std::logic_error("Tensor::item: tensor is not 1x1");
    return n_->val[0];
}

void Tensor::zero_grad() { n_->grad.assign(n_->grad.size(), 0.0); }

void Tape::backward(const Tensor& loss) {
    if (!loss.defined() || !loss.is_scalar())
        throw std::logic_error("Tape::backward: root must be a 1x1 scalar");
    for (const auto& out : outputs_) std::fill(out->grad.begin(), out->grad.end(), 0.0);
    loss.node()->grad[0] += 1.0;
    for (auto it = ops_.rbegin(); it != ops_.rend(); ++it) (*it)();
}

namespace {

void check_defined(const Tensor& t, const char* op) {
    if (!t.defined()) throw std::invalid_argument(std::string(op) + ": undefined tensor");
}

int broadcast_dim(int a, int b, const char* op) {
    if (a == b) return a;
    if (a == 1) return b;
    if (b == 1) return a;
    throw std::invalid_argument(std::string(op) + ": incompatible shapes");
}

// Elementwise binary op with row/column/scalar broadcasting.
template <typename Fwd, typename Bwd>
Tensor binary_op(Tape& tape, const Tensor& a, const Tensor& b, const char* name, Fwd fwd,
                 Bwd bwd) {
    check_defined(a, name);
    check_defined(b, name);
    const int R = broadcast_dim(a.rows(), b.rows(), name);
    const int C = broadcast_dim(a.cols(), b.cols(), name);
    const bool rg = a.requires_grad() || b.requires_grad();
    Tensor out = Tensor::zeros(R, C, rg);
    auto an = a.node(), bn = b.node(), on = out.node();
    for (int r = 0; r < R; ++r)
        for (int c = 0; c < C; ++c) {
            double av = an->val[(an->rows == 1 ? 0 : static_cast<size_t>(r)) * an->cols +
                                (an->cols == 1 ? 0 : c)];
            double bv = bn->val[(bn->rows == 1 ? 0 : static_cast<size_t>(r)) * bn->cols +
                                (bn->cols == 1 ? 0 : c)];
            on->val[static_cast<size_t>(r) * C + c] = fwd(av, bv);
        }
    if (rg) {
        tape.record(on, [an, bn, on, R, C, bwd]() {
            for (int r = 0; r < R; ++r)
                for (int c = 0; c < C; ++c) {
                    size_t ai = (an->rows == 1 ? 0 : static_cast<size_t>(r)) * an->cols +
                                (an->cols == 1 ? 0 : c);
                    size_t bi = (bn->rows == 1 ? 0 : static_cast<size_t>(r)) * bn->cols +
                                (bn->cols == 1 ? 0 : c);
                    double g = on->grad[static_cast<size_t>(r) * C + c];
                    double da = 0.0, db = 0.0;
                    bwd(an->val[ai], bn->val[bi], g, da, db);
                    if (an->requires_grad) an->grad[ai] += da;
                    if (bn->requires_grad) bn->grad[bi] += db;
                }
        });
    }
    return out;
}

template <typename Fwd, typename Bwd>
Tensor unary_op(Tape& tape, const Tensor& x, const char* name, Fwd fwd, Bwd bwd) {
    check_defined(x, name);
    Tensor out = Tensor::zeros(x.rows(), x.cols(), x.requires_grad());
    auto xn = x.node(), on = out.node();
    const size_t n = xn->val.size();
    for (size_t i = 0; i < n; ++i) on->val[i] = fwd(xn->val[i]);
    if (xn->requires_grad) {
        tape.record(on, [xn, on, n, bwd]() {
            for (size_t i = 0; i < n; ++i) xn->grad[i] += bwd(xn->val[i], on->val[i]) * on->grad[i];
        });
    }
    return out;
}

}  // namespace

Tensor add(Tape& t, const Tensor& a, const Tensor& b) {
    return binary_op(
        t, a, b, "add", [](double x, double y) { return x + y; },
        [](double, double, double g, double& da, double& db) {
            da = g;
            db = g;
        });
}

Tensor sub(Tape& t, const Tensor& a, const Tensor& b) {
    return binary_op(
        t, a, b, "sub", [](double x, double y) { return x - y; },
        [](double, double, double g, double& da, double& db) {
            da = g;
            db = -g;
        });
}

Tensor mul(Tape& t, const Tensor& a, const Tensor& b) {
    return binary_op(
        t, a, b, "mul", [](double x, double y) { return x * y; },
        [](double x, double y, double g, double& da, double& db) {
            da = g * y;
            db = g * x;
        });
}

Tensor exp(Tape& t, const Tensor& x) {
    return unary_op(
        t, x, "exp", [](double v) { return std::exp(v); },
        [](double, double o) { return o; });
}

Tensor log(Tape& t, const Tensor& x) {
    for (double v : x.values())
        if (!(v > 0.0)) throw std::domain_error("log: input must be strictly positive");
    return unary_op(
        t, x, "log", [](double v) { return std::log(v); },
        [](double v, double) { return 1.0 / v; });
}

Tensor pow(Tape& t, const Tensor& x, double exponent) {
    const bool integral = exponent == std::floor(exponent);
    for (double v : x.values()) {
        if (v < 0.0 && !integral)
            throw std::domain_error("pow: negative base with non-integer exponent");
        if (v == 0.0 && exponent < 0.0) throw std::domain_error("pow: zero base, negative exponent");
    }
    return unary_op(
        t, x, "pow", [exponent](double v) { return std::pow(v, exponent); },
        [exponent](double v, double) { return exponent * std::pow(v, exponent - 1.0); });
}

Tensor sigmoid(Tape& t, const Tensor& x) {
    return unary_op(
        t, x, "sigmoid",
        [](double v) { return v >= 0.0 ? 1.0 / (1.0 + std::exp(-v))
                                       : std::exp(v) / (1.0 + std::exp(v)); },
        [](double, double o) { return o * (1.0 - o); });
}

Tensor sin(Tape& t, const Tensor& x) {
    return unary_op(
        t, x, "sin", [](double v) { return std::sin(v); },
        [](double v, double) { return std::cos(v); });
}

Tensor prelu(Tape& t, const Tensor& x, double slope) {
    return unary_op(
        t, x, "prelu", [slope](double v) { return v >= 0.0 ? v : slope * v; },
        [slope](double v, double) { return v >= 0.0 ? 1.0 : slope; });
}

Tensor scale(Tape& t, const Tensor& x, double k) {
    return unary_op(
        t, x, "scale", [k](double v) { return k * v; }, [k](double, double) { return k; });
}

Tensor add_const(Tape& t, const Tensor& x, double k) {
    return unary_op(
        t, x, "add_const", [k](double v) { return v + k; }, [](double, double) { return 1.0; });
}

Tensor clamp(Tape& t, const Tensor& x, double lo, double hi) {
    return unary_op(
        t, x, "clamp",
        [lo, hi](double v) { return v < lo ? lo : (v > hi ? hi : v); },
        [lo, hi](double v, double) { return (v < lo || v > hi) ? 0.0 : 1.0; });
}

Tensor matmul(Tape& t, const Tensor& a, const Tensor& b) {
    check_defined(a, "matmul");
    check_defined(b, "matmul");
    if (a.cols() != b.rows()) throw std::invalid_argument("matmul: inner dimensions differ");
    const int M = a.rows(), K = a.cols(), N = b.cols();
    const bool rg = a.requires_grad() || b.requires_grad();
    Tensor out = Tensor::zeros(M, N, rg);
    auto an = a.node(), bn = b.node(), on = out.node();
    for (int m = 0; m < M; ++m)
        for (int k = 0; k < K; ++k) {
            double av = an->val[static_cast<size_t>(m) * K + k];
            if (av == 0.0) continue;
            for (int n = 0; n < N; ++n)
                on->val[static_cast<size_t>(m) * N + n] += av * bn->val[static_cast<size_t>(k) * N + n];
        }
    if (rg) {
        t.record(on, [an, bn, on, M, K, N]() {
            if (an->requires_grad) {
                // da = g . b^T
                for (int m = 0; m < M; ++m)
                    for (int k = 0; k < K; ++k) {
                        double s = 0.0;
                        for (int n = 0; n < N; ++n)
                            s += on->grad[static_cast<size_t>(m) * N + n] *
                                 bn->val[static_cast<size_t>(k) * N + n];
                        an->grad[static_cast<size_t>(m) * K + k] += s;
                    }
            }
            if (bn->requires_grad) {
                // db = a^T . g
                for (int k = 0; k < K; ++k)
                    for (int n = 0; n < N; ++n) {
                        double s = 0.0;
                        for (int m = 0; m < M; ++m)
                            s += an->val[static_cast<size_t>(m) * K + k] *
                                 on->grad[static_cast<size_t>(m) * N + n];
                        bn->grad[static_cast<size_t>(k) * N + n] += s;
                    }
            }
        });
    }
    return out;
}

Tensor row_l2_normalize(Tape& t, const Tensor& x) {
    check_defined(x, "row_l2_normalize");
    const int R = x.rows(), C = x.cols();
    Tensor out = Tensor::zeros(R, C, x.requires_grad());
    auto xn = x.node(), on = out.node();
    std::vector<double> norms(R);
    for (int r = 0; r < R; ++r) {
        double s = 0.0;
        for (int c = 0; c < C; ++c) {
            double v = xn->val[static_cast<size_t>(r) * C + c];
            s += v * v;
        }
        double nrm = std::sqrt(s);
        if (nrm < 1e-12)
            throw std::domain_error("row_l2_normalize: row " + std::to_string(r) +
                                    " has norm below floor 1e-12");
        norms[r] = nrm;
        for (int c = 0; c < C; ++c)
            on->val[static_cast<size_t>(r) * C + c] = xn->val[static_cast<size_t>(r) * C + c] / nrm;
    }
    if (xn->requires_grad) {
        t.record(on, [xn, on, R, C, norms]() {
            for (int r = 0; r < R; ++r) {
                double dot = 0.0;
                for (int c = 0; c < C; ++c)
                    dot += on->grad[static_cast<size_t>(r) * C + c] *
                           on->val[static_cast<size_t>(r) * C + c];
                for (int c = 0; c < C; ++c) {
                    size_t i = static_cast<size_t>(r) * C + c;
                    xn->grad[i] += (on->grad[i] - dot * on->val[i]) / norms[r];
                }
            }
        });
    }
    return out;
}

Tensor rowwise_sum(Tape& t, const Tensor& x) {
    check_defined(x, "rowwise_sum");
    const int R = x.rows(), C = x.cols();
    Tensor out = Tensor::zeros(R, 1, x.requires_grad());
    auto xn = x.node(), on = out.node();
    for (int r = 0; r < R; ++r) {
        double s = 0.0;
        for (int c = 0; c < C; ++c) s += xn->val[static_cast<size_t>(r) * C + c];
        on->val[r] = s;
    }
    if (xn->requires_grad) {
        t.record(on, [xn, on, R, C]() {
            for (int r = 0; r < R; ++r)
                for (int c = 0; c < C; ++c) xn->grad[static_cast<size_t>(r) * C + c] += on->grad[r];
        });
    }
    return out;
}

Tensor rowwise_dot(Tape& t, const Tensor& a, const Tensor& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw std::invalid_argument("rowwise_dot: shape mismatch");
    return rowwise_sum(t, mul(t, a, b));
}

Tensor total_sum(Tape& t, const Tensor& x) {
    check_defined(x, "total_sum");
    Tensor out = Tensor::zeros(1, 1, x.requires_grad());
    auto xn = x.node(), on = out.node();
    double s = 0.0;
    for (double v : xn->val) s += v;
    on->val[0] = s;
    if (xn->requires_grad) {
        t.record(on, [xn, on]() {
            for (auto& g : xn->grad) g += on->grad[0];
        });
    }
    return out;
}

Tensor mean(Tape& t, const Tensor& x) {
    return scale(t, total_sum(t, x), 1.0 / static_cast<double>(x.size()));
}

Tensor hard_threshold_st(Tape& t, const Tensor& x) {
    check_defined(x, "hard_threshold_st");
    Tensor out = Tensor::zeros(x.rows(), x.cols(), x.requires_grad());
    auto xn = x.node(), on = out.node();
    for (size_t i = 0; i < xn->val.size(); ++i) on->val[i] = xn->val[i] >= 0.5 ? 1.0 : 0.0;
    if (xn->requires_grad) {
        t.record(on, [xn, on]() {
            for (size_t i = 0; i < xn->grad.size(); ++i) xn->grad[i] += on->grad[i];
        });
    }
    return out;
}

Tensor log_mean_gaussian_potential(Tape& t, const Tensor& z, double kernel_t,
                                   const std::vector<std::pair<int, int>>& pairs) {
    check_defined(z, "log_mean_gaussian_potential");
    if (pairs.empty())
        throw std::invalid_argument("log_mean_gaussian_potential: empty pair list");
    const int C = z.cols();
    auto zn = z.node();
    Tensor out = Tensor::zeros(1, 1, z.requires_grad());
    auto on = out.node();
    std::vector<double> pot(pairs.size());
    double sum = 0.0;
    for (size_t k = 0; k < pairs.size(); ++k) {
        auto [i, j] = pairs[k];
        double d2 = 0.0;
        for (int c = 0; c < C; ++c) {
            double d = zn->val[static_cast<size_t>(i) * C + c] -
                       zn->val[static_cast<size_t>(j) * C + c];
            d2 += d * d;
        }
        pot[k] = std::exp(-kernel_t * d2);
        sum += pot[k];
    }
    on->val[0] = std::log(sum / static_cast<double>(pairs.size()));
    if (zn->requires_grad) {
        t.record(on, [zn, on, pairs, pot, sum, kernel_t, C]() {
            double g = on->grad[0];
            for (size_t k = 0; k < pairs.size(); ++k) {
                auto [i, j] = pairs[k];
                double w = g * pot[k] / sum * (-2.0 * kernel_t);
                for (int c = 0; c < C; ++c) {
                    double d = zn->val[static_cast<size_t>(i) * C + c] -
                               zn->val[static_cast<size_t>(j) * C + c];
                    zn->grad[static_cast<size_t>(i) * C + c] += w * d;
                    zn->grad[static_cast<size_t>(j) * C + c] -= w * d;
                }
            }
        });
    }
    return out;
}

}  // namespace augmae::ad
