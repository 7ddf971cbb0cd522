#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hdrf/random.hpp"
#include "hdrf/tensor.hpp"

namespace hdrf::nn {

enum class Mode { TRAIN, EVAL };

template <typename T>
struct ParamRef {
    std::string name;
    Tensor<T>* value;
    Tensor<T>* grad;
};

/// A differentiable stage. forward() caches what backward() needs; backward() returns the
/// input gradient and accumulates into parameter gradients (callers zero them per step).
template <typename T>
class Layer {
public:
    virtual ~Layer() = default;

    virtual std::string kind() const = 0;
    virtual Shape output_shape(const Shape& in) const = 0;
    virtual Tensor<T> forward(const Tensor<T>& x, Mode mode) = 0;
    virtual Tensor<T> backward(const Tensor<T>& grad_out) = 0;

    virtual std::vector<ParamRef<T>> params() { return {}; }
    /// Non-trainable persistent state (batch-norm running statistics).
    virtual std::vector<Tensor<T>*> buffers() { return {}; }
    /// Integer hyper-parameters recorded in checkpoints.
    virtual std::vector<int> config() const { return {}; }
    /// Seeds any stochastic behaviour (dropout masks).
    virtual void reseed(std::uint64_t /*seed*/) {}
};

template <typename T>
using LayerPtr = std::unique_ptr<Layer<T>>;

/// k x k convolution with bias, zero padding.
template <typename T>
class Conv2d final : public Layer<T> {
public:
    Conv2d(int in_channels, int out_channels, int kernel, int stride, int pad);

    std::string kind() const override { return "conv2d"; }
    Shape output_shape(const Shape& in) const override;
    Tensor<T> forward(const Tensor<T>& x, Mode mode) override;
    Tensor<T> backward(const Tensor<T>& grad_out) override;
    std::vector<ParamRef<T>> params() override;
    std::vector<int> config() const override { return {cin_, cout_, k_, stride_, pad_}; }

    Tensor<T>& weight() { return w_; }
    Tensor<T>& bias() { return b_; }

private:
    int cin_, cout_, k_, stride_, pad_;
    Tensor<T> w_, b_, gw_, gb_;
    Tensor<T> x_;
};

/// Per-channel batch normalisation over (N, H, W). Running variance is the unbiased batch variance.
template <typename T>
class BatchNorm2d final : public Layer<T> {
public:
    explicit BatchNorm2d(int channels, double eps = 1e-5, double momentum = 0.9);

    std::string kind() const override { return "batchnorm2d"; }
    Shape output_shape(const Shape& in) const override { return in; }
    Tensor<T> forward(const Tensor<T>& x, Mode mode) override;
    Tensor<T> backward(const Tensor<T>& grad_out) override;
    std::vector<ParamRef<T>> params() override;
    std::vector<Tensor<T>*> buffers() override { return {&running_mean_, &running_var_}; }
    std::vector<int> config() const override { return {channels_}; }

    Tensor<T>& gamma() { return gamma_; }
    Tensor<T>& beta() { return beta_; }
    Tensor<T>& running_mean() { return running_mean_; }
    Tensor<T>& running_var() { return running_var_; }

private:
    int channels_;
    double eps_, momentum_;
    Tensor<T> gamma_, beta_, ggamma_, gbeta_;
    Tensor<T> running_mean_, running_var_;
    Tensor<T> xhat_;
    std::vector<double> inv_std_;
    Mode last_mode_ = Mode::EVAL;
};

template <typename T>
class ReLU final : public Layer<T> {
public:
    std::string kind() const override { return "relu"; }
    Shape output_shape(const Shape& in) const override { return in; }
    Tensor<T> forward(const Tensor<T>& x, Mode mode) override;
    Tensor<T> backward(const Tensor<T>& grad_out) override;

private:
    Tensor<T> x_;
};

/// Max pooling; ties route the gradient to the first maximum in row-major window order.
template <typename T>
class MaxPool2d final : public Layer<T> {
public:
    MaxPool2d(int window = 2, int stride = 2) : window_(window), stride_(stride) {}

    std::string kind() const override { return "maxpool2d"; }
    Shape output_shape(const Shape& in) const override;
    Tensor<T> forward(const Tensor<T>& x, Mode mode) override;
    Tensor<T> backward(const Tensor<T>& grad_out) override;
    std::vector<int> config() const override { return {window_, stride_}; }

private:
    int window_, stride_;
    Shape in_shape_;
    std::vector<std::size_t> argmax_;
};

/// Average pooling with optional zero padding; padded cells are excluded from the divisor.
template <typename T>
class AvgPool2d final : public Layer<T> {
public:
    AvgPool2d(int window = 3, int stride = 2, int pad = 0);

    std::string kind() const override { return "avgpool2d"; }
    Shape output_shape(const Shape& in) const override;
    Tensor<T> forward(const Tensor<T>& x, Mode mode) override;
    Tensor<T> backward(const Tensor<T>& grad_out) override;
    std::vector<int> config() const override { return {window_, stride_, pad_}; }

private:
    int window_, stride_, pad_;
    Shape in_shape_;
};

template <typename T>
class GlobalAvgPool final : public Layer<T> {
public:
    std::string kind() const override { return "global_avgpool"; }
    Shape output_shape(const Shape& in) const override;
    Tensor<T> forward(const Tensor<T>& x, Mode mode) override;
    Tensor<T> backward(const Tensor<T>& grad_out) override;

private:
    Shape in_shape_;
};

template <typename T>
class Flatten final : public Layer<T> {
public:
    std::string kind() const override { return "flatten"; }
    Shape output_shape(const Shape& in) const override;
    Tensor<T> forward(const Tensor<T>& x, Mode mode) override;
    Tensor<T> backward(const Tensor<T>& grad_out) override;

private:
    Shape in_shape_;
};

/// Fully connected: y = x W^T + b with W of shape (out, in).
template <typename T>
class Dense final : public Layer<T> {
public:
    Dense(int in_features, int out_features);

    std::string kind() const override { return "dense"; }
    Shape output_shape(const Shape& in) const override;
    Tensor<T> forward(const Tensor<T>& x, Mode mode) override;
    Tensor<T> backward(const Tensor<T>& grad_out) override;
    std::vector<ParamRef<T>> params() override;
    std::vector<int> config() const override { return {in_, out_}; }

    Tensor<T>& weight() { return w_; }
    Tensor<T>& bias() { return b_; }

private:
    int in_, out_;
    Tensor<T> w_, b_, gw_, gb_;
    Tensor<T> x_;
};

/// Inverted dropout: survivors are scaled by 1 / (1 - p) in TRAIN mode; identity in EVAL.
template <typename T>
class Dropout final : public Layer<T> {
public:
    explicit Dropout(double p = 0.5, std::uint64_t seed = 0);

    std::string kind() const override { return "dropout"; }
    Shape output_shape(const Shape& in) const override { return in; }
    Tensor<T> forward(const Tensor<T>& x, Mode mode) override;
    Tensor<T> backward(const Tensor<T>& grad_out) override;
    void reseed(std::uint64_t seed) override { rng_ = Rng(seed); }

private:
    double p_;
    Rng rng_;
    std::vector<T> mask_;
    bool active_ = false;
};

/// Layers applied in order; itself a Layer so blocks nest.
template <typename T>
class Sequential : public Layer<T> {
public:
    Sequential() = default;

    Sequential& add(LayerPtr<T> layer) {
        layers_.push_back(std::move(layer));
        return *this;
    }
    template <typename L, typename... Args>
    L& emplace(Args&&... args) {
        auto p = std::make_unique<L>(std::forward<Args>(args)...);
        L& ref = *p;
        layers_.push_back(std::move(p));
        return ref;
    }

    std::string kind() const override { return "sequential"; }
    Shape output_shape(const Shape& in) const override;
    Tensor<T> forward(const Tensor<T>& x, Mode mode) override;
    Tensor<T> backward(const Tensor<T>& grad_out) override;
    std::vector<ParamRef<T>> params() override;
    std::vector<Tensor<T>*> buffers() override;
    void reseed(std::uint64_t seed) override;

    std::size_t size() const { return layers_.size(); }
    Layer<T>& layer(std::size_t i) { return *layers_[i]; }
    const Layer<T>& layer(std::size_t i) const { return *layers_[i]; }

    /// Output shape after each top-level layer, starting with the input.
    std::vector<Shape> shape_walk(const Shape& in) const;

private:
    std::vector<LayerPtr<T>> layers_;
};

/// relu(main(x) + shortcut(x)); main = conv3x3/stride, BN, ReLU, conv3x3, BN.
/// The shortcut is the identity when shapes agree, else a 1x1 convolution of the same stride.
template <typename T>
class ResidualBlock final : public Layer<T> {
public:
    ResidualBlock(int in_channels, int out_channels, int stride);

    std::string kind() const override { return "residual"; }
    Shape output_shape(const Shape& in) const override;
    Tensor<T> forward(const Tensor<T>& x, Mode mode) override;
    Tensor<T> backward(const Tensor<T>& grad_out) override;
    std::vector<ParamRef<T>> params() override;
    std::vector<Tensor<T>*> buffers() override;
    std::vector<int> config() const override { return {cin_, cout_, stride_}; }

    Sequential<T>& main_path() { return main_; }
    bool has_projection() const { return projection_ != nullptr; }
    Conv2d<T>* projection() { return projection_.get(); }

private:
    int cin_, cout_, stride_;
    Sequential<T> main_;
    std::unique_ptr<Conv2d<T>> projection_;
    Tensor<T> sum_;  // pre-activation, for the final ReLU mask
};

template <typename T>
struct LossResult {
    double loss = 0.0;
    Tensor<T> grad;   // d loss / d logits
    Tensor<T> probs;  // softmax rows
};

/// Row-wise softmax of an (N, K) tensor.
template <typename T>
Tensor<T> softmax(const Tensor<T>& logits);

/// Mean negative log-likelihood of softmax(logits) at the given labels, with its gradient.
template <typename T>
LossResult<T> softmax_cross_entropy(const Tensor<T>& logits, std::span<const int> labels);

/// He-normal (fan-in) initialisation for conv and dense weights; biases zero; BN gamma 1, beta 0.
template <typename T>
void he_initialize(Layer<T>& root, Rng& rng);

}  // namespace hdrf::nn
