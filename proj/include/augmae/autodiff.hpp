#ifndef AUGMAE_AUTODIFF_HPP
#define AUGMAE_AUTODIFF_HPP

#include <cstdint>
#include <functional>
#include <initializer_list>
#include <memory>
#include <utility>
#include <vector>

namespace augmae::ad {

namespace detail {
struct Node {
    int rows = 0;
    int cols = 0;
    std::vector<double> val;
    std::vector<double> grad;
    bool requires_grad = false;
};
}  // namespace detail

/// Dense float64 matrix participating in reverse-mode differentiation.
/// Copying a Tensor copies the handle; the underlying buffer is shared.
class Tensor {
public:
    Tensor() = default;

    static Tensor zeros(int rows, int cols, bool requires_grad = false);
    static Tensor constant(int rows, int cols, std::vector<double> values);
    static Tensor parameter(int rows, int cols, std::vector<double> values);
    static Tensor scalar(double v);
    static Tensor from_rows(std::initializer_list<std::initializer_list<double>> rows,
                            bool requires_grad = false);

    bool defined() const { return static_cast<bool>(n_); }
    int rows() const { return n_->rows; }
    int cols() const { return n_->cols; }
    int size() const { return n_->rows * n_->cols; }
    bool is_scalar() const { return n_->rows == 1 && n_->cols == 1; }
    bool requires_grad() const { return n_->requires_grad; }

    double at(int r, int c) const { return n_->val[static_cast<size_t>(r) * n_->cols + c]; }
    double& at(int r, int c) { return n_->val[static_cast<size_t>(r) * n_->cols + c]; }
    double item() const;

    const std::vector<double>& values() const { return n_->val; }
    std::vector<double>& values() { return n_->val; }
    const std::vector<double>& grad() const { return n_->grad; }
    std::vector<double>& grad() { return n_->grad; }

    void zero_grad();

    std::shared_ptr<detail::Node> node() const { return n_; }

    bool same_buffer(const Tensor& other) const { return n_ == other.n_; }

private:
    explicit Tensor(std::shared_ptr<detail::Node> n) : n_(std::move(n)) {}
    std::shared_ptr<detail::Node> n_;
};

/// Records the backward closure of every differentiable op, in order.
/// backward() replays them in exact reverse, accumulating gradients
/// additively so fan-out sums contributions.
class Tape {
public:
    void record(std::shared_ptr<detail::Node> out, std::function<void()> back) {
        outputs_.push_back(std::move(out));
        ops_.push_back(std::move(back));
    }
    size_t size() const { return ops_.size(); }

    /// Seeds d(loss)/d(loss) = 1 and propagates. Intermediate adjoints are
    /// reset per call, so leaf gradients accumulate across repeated calls.
    void backward(const Tensor& loss);

private:
    std::vector<std::shared_ptr<detail::Node>> outputs_;
    std::vector<std::function<void()>> ops_;
};

// ---- elementwise / structural ops -------------------------------------

Tensor add(Tape& t, const Tensor& a, const Tensor& b);
Tensor sub(Tape& t, const Tensor& a, const Tensor& b);
Tensor mul(Tape& t, const Tensor& a, const Tensor& b);
Tensor exp(Tape& t, const Tensor& x);
Tensor log(Tape& t, const Tensor& x);
Tensor pow(Tape& t, const Tensor& x, double exponent);
Tensor sigmoid(Tape& t, const Tensor& x);
Tensor sin(Tape& t, const Tensor& x);
Tensor prelu(Tape& t, const Tensor& x, double slope);
Tensor scale(Tape& t, const Tensor& x, double k);
Tensor add_const(Tape& t, const Tensor& x, double k);
Tensor clamp(Tape& t, const Tensor& x, double lo, double hi);

Tensor matmul(Tape& t, const Tensor& a, const Tensor& b);
Tensor row_l2_normalize(Tape& t, const Tensor& x);
Tensor rowwise_sum(Tape& t, const Tensor& x);
Tensor rowwise_dot(Tape& t, const Tensor& a, const Tensor& b);
Tensor total_sum(Tape& t, const Tensor& x);
Tensor mean(Tape& t, const Tensor& x);

/// Forward emits 1[x >= 0.5]; backward passes the gradient through
/// unchanged (straight-through estimator).
Tensor hard_threshold_st(Tape& t, const Tensor& x);

/// log of the mean over the given index pairs of exp(-t * ||z_i - z_j||^2).
Tensor log_mean_gaussian_potential(Tape& t, const Tensor& z, double kernel_t,
                                   const std::vector<std::pair<int, int>>& pairs);

}  // namespace augmae::ad

#endif
